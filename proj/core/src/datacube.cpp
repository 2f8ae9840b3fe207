#include "thermowave/datacube.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>

#include <fmt/format.h>

#include "thermowave/errors.hpp"

namespace thermowave {
namespace {

constexpr std::string_view kMagic = "TIC1";

std::string format_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

// Splits off one '\n'-terminated line starting at `pos`.
std::string_view next_line(std::string_view text, std::size_t& pos, const char* what) {
  const auto nl = text.find('\n', pos);
  if (nl == std::string_view::npos) {
    throw FormatError(fmt::format("TIC1 header: missing {} line", what));
  }
  auto line = text.substr(pos, nl - pos);
  pos = nl + 1;
  return line;
}

template <typename T>
T parse_number(std::string_view s, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError(fmt::format("TIC1 header: cannot parse {} from '{}'", what, s));
  }
  return value;
}

}  // namespace

DataCube::DataCube(int nx, int ny, int nt, double te_s, std::vector<float> values,
                   bool flipped_y)
    : nx_(nx), ny_(ny), nt_(nt), te_s_(te_s), flipped_y_(flipped_y), values_(std::move(values)) {
  if (nx <= 0 || ny <= 0 || nt <= 0) {
    throw ShapeError(fmt::format("cube extents must be positive, got {}x{}x{}", nx, ny, nt));
  }
  if (values_.size() != static_cast<std::size_t>(nx) * ny * nt) {
    throw ShapeError(fmt::format("cube {}x{}x{} needs {} values, got {}", nx, ny, nt,
                                 static_cast<std::size_t>(nx) * ny * nt, values_.size()));
  }
  if (!std::isfinite(te_s) || te_s < 0.0) {
    throw DataError(fmt::format("te_s must be finite and non-negative, got {}", te_s));
  }
  const auto bad = std::find_if(values_.begin(), values_.end(),
                                [](float v) { return !std::isfinite(v); });
  if (bad != values_.end()) {
    throw DataError(fmt::format("non-finite intensity at flat index {}",
                                std::distance(values_.begin(), bad)));
  }
}

DataCube DataCube::from_frames(std::span<const Grid> frames, double te_s, bool flipped_y) {
  if (frames.empty()) throw ShapeError("cannot build a cube from zero frames");
  const auto nx = static_cast<int>(frames.front().rows());
  const auto ny = static_cast<int>(frames.front().cols());
  std::vector<float> values;
  values.reserve(static_cast<std::size_t>(nx) * ny * frames.size());
  for (const auto& f : frames) {
    if (f.rows() != nx || f.cols() != ny) throw ShapeError("frames differ in shape");
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      values.push_back(static_cast<float>(f.data()[i]));
    }
  }
  return DataCube(nx, ny, static_cast<int>(frames.size()), te_s, std::move(values), flipped_y);
}

std::span<const float> DataCube::frame_values(int t) const {
  if (t < 0 || t >= nt_) throw BoundsError(fmt::format("frame {} outside [0, {})", t, nt_));
  return std::span<const float>(values_).subspan(static_cast<std::size_t>(t) * frame_size(),
                                                 frame_size());
}

Grid DataCube::frame(int t) const {
  const auto src = frame_values(t);
  Grid g(nx_, ny_);
  std::copy(src.begin(), src.end(), g.data());
  return g;
}

Grid DataCube::temporal_mean() const {
  Grid acc = Grid::Zero(nx_, ny_);
  for (int t = 0; t < nt_; ++t) {
    const auto src = frame_values(t);
    for (std::size_t i = 0; i < src.size(); ++i) acc.data()[i] += src[i];
  }
  return acc / static_cast<double>(nt_);
}

DataCube DataCube::scaled(double factor) const {
  std::vector<float> v(values_.size());
  std::transform(values_.begin(), values_.end(), v.begin(),
                 [factor](float x) { return static_cast<float>(x * factor); });
  return DataCube(nx_, ny_, nt_, te_s_, std::move(v), flipped_y_);
}

ExcitationSequence::ExcitationSequence(std::vector<std::uint8_t> bits, double te_s)
    : bits_(std::move(bits)), te_s_(te_s) {
  bool has0 = false;
  bool has1 = false;
  for (auto b : bits_) {
    if (b > 1) throw DataError("excitation bits must be 0 or 1");
    (b ? has1 : has0) = true;
  }
  if (!has0 || !has1) throw DataError("excitation must contain at least one 0 and one 1");
}

std::vector<char> encode_cube(const DataCube& cube) {
  const std::string header = fmt::format("{}\n{} {} {}\n{}\n{}\n", kMagic, cube.nx(), cube.ny(),
                                         cube.nt(), format_real(cube.te_s()),
                                         cube.flipped_y() ? 1 : 0);
  std::vector<char> out(header.begin(), header.end());
  out.reserve(header.size() + cube.values().size() * 4);
  for (float v : cube.values()) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    for (int shift = 0; shift < 32; shift += 8) {
      out.push_back(static_cast<char>((bits >> shift) & 0xFFu));
    }
  }
  return out;
}

DataCube decode_cube(std::span<const char> bytes) {
  const std::string_view text(bytes.data(), bytes.size());
  std::size_t pos = 0;
  if (next_line(text, pos, "magic") != kMagic) throw FormatError("not a TIC1 file (bad magic)");

  const auto dims = next_line(text, pos, "dimension");
  const auto s1 = dims.find(' ');
  const auto s2 = s1 == std::string_view::npos ? s1 : dims.find(' ', s1 + 1);
  if (s1 == std::string_view::npos || s2 == std::string_view::npos) {
    throw FormatError(fmt::format("TIC1 header: expected 'nx ny nt', got '{}'", dims));
  }
  const int nx = parse_number<int>(dims.substr(0, s1), "nx");
  const int ny = parse_number<int>(dims.substr(s1 + 1, s2 - s1 - 1), "ny");
  const int nt = parse_number<int>(dims.substr(s2 + 1), "nt");
  if (nx <= 0 || ny <= 0 || nt <= 0) throw FormatError("TIC1 header: extents must be positive");

  const double te_s = parse_number<double>(next_line(text, pos, "te_s"), "te_s");
  const auto flag = next_line(text, pos, "flipped_y");
  if (flag != "0" && flag != "1") throw FormatError("TIC1 header: flipped_y must be 0 or 1");

  const std::size_t count = static_cast<std::size_t>(nx) * ny * nt;
  const std::size_t payload = bytes.size() - pos;
  if (payload < count * 4) {
    throw TruncationError(
        fmt::format("TIC1 payload has {} bytes, expected {}", payload, count * 4));
  }
  if (payload > count * 4) {
    throw FormatError(fmt::format("TIC1 payload has {} trailing bytes", payload - count * 4));
  }
  std::vector<float> values(count);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (std::size_t i = 0; i < count; ++i, p += 4) {
    const std::uint32_t bits = std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
                               (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
    values[i] = std::bit_cast<float>(bits);
  }
  return DataCube(nx, ny, nt, te_s, std::move(values), flag == "1");
}

DataCube read_cube(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_cube(bytes);
}

void write_cube(const DataCube& cube, const std::filesystem::path& path) {
  const auto bytes = encode_cube(cube);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

ExcitationSequence read_excitation(const std::filesystem::path& path, double te_s) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::vector<std::uint8_t> bits;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line != "0" && line != "1") {
      throw FormatError(fmt::format("{}:{}: expected 0 or 1, got '{}'", path.string(), lineno, line));
    }
    bits.push_back(line == "1" ? 1 : 0);
  }
  return ExcitationSequence(std::move(bits), te_s);
}

void write_excitation(const ExcitationSequence& seq, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  for (auto b : seq.bits()) out << (b ? '1' : '0') << '\n';
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

DataCube flip_y(const DataCube& cube) {
  const auto src = cube.values();
  std::vector<float> out(src.size());
  const std::size_t ny = cube.ny();
  for (std::size_t row = 0; row < src.size() / ny; ++row) {
    std::reverse_copy(src.begin() + row * ny, src.begin() + (row + 1) * ny,
                      out.begin() + row * ny);
  }
  return DataCube(cube.nx(), cube.ny(), cube.nt(), cube.te_s(), std::move(out), !cube.flipped_y());
}

Grid extract_window(const Grid& frame, const FrameWindow& win) {
  if (!win.inside(static_cast<int>(frame.rows()), static_cast<int>(frame.cols()))) {
    throw BoundsError(fmt::format("window at ({}, {}) with half extent {} leaves the {}x{} frame",
                                  win.center.row, win.center.col, win.half_extent, frame.rows(),
                                  frame.cols()));
  }
  return frame.block(win.center.row - win.half_extent, win.center.col - win.half_extent,
                     win.side(), win.side());
}

}  // namespace thermowave
