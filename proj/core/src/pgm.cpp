#include "thermowave/pgm.hpp"

#include <algorithm>
#include <cctype>
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

constexpr int kMaxGrey = 65535;

std::string format_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string_view header_token(std::string_view text, std::size_t& pos) {
  while (pos < text.size()) {
    if (text[pos] == '#') {
      while (pos < text.size() && text[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  const auto start = pos;
  while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (start == pos) throw FormatError("PGM header ends early");
  return text.substr(start, pos - start);
}

int header_int(std::string_view text, std::size_t& pos, const char* what) {
  const auto tok = header_token(text, pos);
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || v <= 0) {
    throw FormatError(fmt::format("PGM header: bad {} '{}'", what, tok));
  }
  return v;
}

}  // namespace

GreyImage to_grey(const Grid& values, GreyScaling* scaling) {
  GreyImage img{static_cast<int>(values.rows()), static_cast<int>(values.cols()), {}};
  img.pixels.resize(static_cast<std::size_t>(values.size()));
  const double lo = values.size() ? values.minCoeff() : 0.0;
  const double hi = values.size() ? values.maxCoeff() : 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double v = values.data()[i];
    img.pixels[i] = hi > lo ? static_cast<std::uint16_t>(std::lround((v - lo) / (hi - lo) * kMaxGrey))
                            : std::uint16_t{32768};
  }
  if (scaling != nullptr) *scaling = GreyScaling{lo, hi};
  return img;
}

Grid from_grey(const GreyImage& image, const GreyScaling& scaling) {
  Grid g(image.rows, image.cols);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    g.data()[i] = scaling.max > scaling.min
                      ? scaling.min + (scaling.max - scaling.min) * image.pixels[i] / kMaxGrey
                      : scaling.min;
  }
  return g;
}

std::vector<char> encode_pgm(const GreyImage& image) {
  const std::string header = fmt::format("P5\n{} {}\n{}\n", image.cols, image.rows, kMaxGrey);
  std::vector<char> out(header.begin(), header.end());
  out.reserve(header.size() + image.pixels.size() * 2);
  for (auto p : image.pixels) {
    out.push_back(static_cast<char>(p >> 8));
    out.push_back(static_cast<char>(p & 0xFF));
  }
  return out;
}

GreyImage decode_pgm(std::span<const char> bytes) {
  const std::string_view text(bytes.data(), bytes.size());
  std::size_t pos = 0;
  if (header_token(text, pos) != "P5") throw FormatError("not a binary PGM (P5)");
  GreyImage img;
  img.cols = header_int(text, pos, "width");
  img.rows = header_int(text, pos, "height");
  const int maxval = header_int(text, pos, "maxval");
  if (maxval != kMaxGrey) throw FormatError(fmt::format("expected 16-bit PGM, maxval is {}", maxval));
  if (pos >= text.size() || !std::isspace(static_cast<unsigned char>(text[pos]))) {
    throw FormatError("PGM header not terminated");
  }
  ++pos;
  const std::size_t count = static_cast<std::size_t>(img.rows) * img.cols;
  if (bytes.size() - pos != count * 2) {
    throw TruncationError(fmt::format("PGM payload has {} bytes, expected {}", bytes.size() - pos,
                                      count * 2));
  }
  img.pixels.resize(count);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (std::size_t i = 0; i < count; ++i) {
    img.pixels[i] = static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]);
  }
  return img;
}

void write_pgm(const GreyImage& image, const std::filesystem::path& path) {
  const auto bytes = encode_pgm(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

GreyImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_pgm(bytes);
}

std::filesystem::path scaling_sidecar_path(const std::filesystem::path& image_path) {
  auto p = image_path;
  p += ".scale";
  return p;
}

void write_scaling(const GreyScaling& scaling, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << "min " << format_real(scaling.min) << "\nmax " << format_real(scaling.max) << "\n";
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

GreyScaling read_scaling(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  GreyScaling s;
  bool have_min = false;
  bool have_max = false;
  std::string key;
  std::string value;
  while (in >> key >> value) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
      throw FormatError(fmt::format("scaling sidecar: bad value '{}'", value));
    }
    if (key == "min") {
      s.min = v;
      have_min = true;
    } else if (key == "max") {
      s.max = v;
      have_max = true;
    }
  }
  if (!have_min || !have_max) throw FormatError("scaling sidecar needs min and max");
  return s;
}

void render_map(const Grid& values, const std::filesystem::path& image_path) {
  GreyScaling scaling;
  const auto img = to_grey(values, &scaling);
  write_pgm(img, image_path);
  write_scaling(scaling, scaling_sidecar_path(image_path));
}

}  // namespace thermowave
