#include "thermowave/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "random.hpp"
#include "thermowave/errors.hpp"
#include "thermowave/parallel.hpp"

namespace thermowave {
namespace {

using nlohmann::json;

// Separable Gaussian blur with mirrored borders.
Grid gaussian_blur(const Grid& in, double sigma) {
  if (sigma <= 0.0) return in;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double norm = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
    norm += kernel[k + radius];
  }
  for (double& k : kernel) k /= norm;
  const auto mirror = [](int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
  };
  const auto rows = static_cast<int>(in.rows());
  const auto cols = static_cast<int>(in.cols());
  Grid tmp(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * in(r, mirror(c + k, cols));
      tmp(r, c) = acc;
    }
  }
  Grid out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * tmp(mirror(r + k, rows), c);
      out(r, c) = acc;
    }
  }
  return out;
}

// Zero-mean, unit-variance band-limited random field.
Grid texture_field(int nx, int ny, double scale, std::uint64_t seed) {
  detail::NormalSource normal(detail::splitmix64(seed ^ 0x7E47u));
  Grid white(nx, ny);
  for (Eigen::Index i = 0; i < white.size(); ++i) white.data()[i] = normal();
  Grid smooth = gaussian_blur(white, scale);
  smooth.array() -= smooth.mean();
  const double sd = std::sqrt(smooth.squaredNorm() / static_cast<double>(smooth.size()));
  return sd > 0.0 ? Grid(smooth / sd) : smooth;
}

// 0 on the rim, 1 inside the painted area, raised-cosine in between.
Grid painted_area(int nx, int ny, int border) {
  auto ramp = [border](int i, int n) {
    const int d = std::min(i, n - 1 - i) - border;
    if (d < 0) return 0.0;
    if (d >= border) return 1.0;
    return 0.5 - 0.5 * std::cos(std::numbers::pi * (d + 0.5) / border);
  };
  Grid w(nx, ny);
  for (int r = 0; r < nx; ++r) {
    for (int c = 0; c < ny; ++c) w(r, c) = ramp(r, nx) * ramp(c, ny);
  }
  return w;
}

}  // namespace

const FaultRecord& GroundTruth::fault(int id) const {
  for (const auto& f : faults) {
    if (f.id == id) return f;
  }
  throw ConfigError(fmt::format("ground truth has no fault {}", id));
}

Mask GroundTruth::disc_mask(const FaultRecord& f, int nx, int ny) const {
  const double radius = 0.5 * f.diameter_mm * px_per_mm;
  Mask m = Mask::Zero(nx, ny);
  for (int r = 0; r < nx; ++r) {
    for (int c = 0; c < ny; ++c) {
      const double dr = r - f.center.row;
      const double dc = c - f.center.col;
      if (dr * dr + dc * dc <= radius * radius) m(r, c) = 1;
    }
  }
  return m;
}

GroundTruth GroundTruth::flipped_y(int ny) const {
  GroundTruth out = *this;
  for (auto& f : out.faults) f.center.col = ny - 1 - f.center.col;
  for (auto& w : out.background_windows) w.center.col = ny - 1 - w.center.col;
  return out;
}

const std::vector<FaultRecord>& standard_faults() {
  static const std::vector<FaultRecord> faults = {
      {1, {39, 167}, 10, 4}, {2, {39, 127}, 8, 4},   {3, {42, 83}, 6, 4},
      {4, {41, 30}, 3, 4},   {5, {77, 167}, 10, 6},  {6, {76, 127}, 8, 6},
      {7, {83, 83}, 6, 6},   {8, {86, 31}, 3, 6},    {9, {117, 169}, 10, 8},
      {10, {118, 127}, 8, 8}, {11, {122, 83}, 6, 8}, {12, {130, 31}, 3, 8},
  };
  return faults;
}

std::vector<FrameWindow> default_background_windows(const std::vector<FaultRecord>& faults,
                                                    int nx, int ny, double px_per_mm,
                                                    int half_extent) {
  constexpr int kCount = 8;
  const int col = half_extent + 2;
  if (col + half_extent >= 15 || col + half_extent >= ny) {
    throw ConfigError("background windows do not fit in the left margin");
  }
  const int top = half_extent;
  const int bottom = nx - 1 - half_extent;
  if (bottom < top) throw ConfigError("frame too short for background windows");
  std::vector<FrameWindow> windows;
  for (int k = 0; k < kCount; ++k) {
    const int row = top + static_cast<int>(std::lround((bottom - top) * (k + 0.5) / kCount));
    FrameWindow w{{row, col}, half_extent};
    for (const auto& f : faults) {
      // Nearest window point to the fault centre, against the grown disc.
      const double dr = std::max(0, std::abs(row - f.center.row) - half_extent);
      const double dc = std::max(0, std::abs(col - f.center.col) - half_extent);
      const double reach = 0.5 * f.diameter_mm * px_per_mm + half_extent;
      if (dr * dr + dc * dc <= reach * reach) {
        throw ConfigError(fmt::format("background window at ({}, {}) overlaps fault {}", row, col,
                                      f.id));
      }
    }
    windows.push_back(w);
  }
  return windows;
}

GroundTruth standard_ground_truth(int nx, int ny) {
  GroundTruth truth;
  truth.faults = standard_faults();
  truth.px_per_mm = 1.0;
  truth.background_windows = default_background_windows(truth.faults, nx, ny, truth.px_per_mm);
  return truth;
}

std::string ground_truth_to_json(const GroundTruth& truth) {
  json j;
  j["px_per_mm"] = truth.px_per_mm;
  j["window_half_extent"] = truth.window_half_extent;
  j["faults"] = json::array();
  for (const auto& f : truth.faults) {
    j["faults"].push_back({{"id", f.id},
                           {"row", f.center.row},
                           {"col", f.center.col},
                           {"diameter_mm", f.diameter_mm},
                           {"depth_mm", f.depth_mm}});
  }
  j["background_windows"] = json::array();
  for (const auto& w : truth.background_windows) {
    j["background_windows"].push_back(
        {{"row", w.center.row}, {"col", w.center.col}, {"half_extent", w.half_extent}});
  }
  return j.dump(2) + "\n";
}

GroundTruth ground_truth_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    GroundTruth truth;
    truth.px_per_mm = j.value("px_per_mm", 1.0);
    truth.window_half_extent = j.value("window_half_extent", kDefaultWindowHalfExtent);
    for (const auto& f : j.at("faults")) {
      truth.faults.push_back({f.at("id").get<int>(),
                              {f.at("row").get<int>(), f.at("col").get<int>()},
                              f.at("diameter_mm").get<double>(),
                              f.at("depth_mm").get<double>()});
    }
    for (const auto& w : j.at("background_windows")) {
      truth.background_windows.push_back(
          {{w.at("row").get<int>(), w.at("col").get<int>()}, w.at("half_extent").get<int>()});
    }
    std::sort(truth.faults.begin(), truth.faults.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    return truth;
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("ground truth JSON: {}", e.what()));
  }
}

void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << ground_truth_to_json(truth);
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return ground_truth_from_json(buf.str());
}

int frames_for_excitation_time(double te_s) {
  static constexpr std::pair<double, int> kTable[] = {
      {0.5, 2048}, {1.0, 1024}, {2.0, 512}, {5.0, 256}, {10.0, 128}};
  for (const auto& [te, nt] : kTable) {
    if (te_s == te) return nt;
  }
  throw ConfigError(fmt::format("excitation time {} s is not one of 0.5, 1, 2, 5, 10", te_s));
}

PhantomConfig PhantomConfig::standard(double te_s, std::uint64_t seed) {
  PhantomConfig cfg;
  cfg.te_s = te_s;
  cfg.seed = seed;
  cfg.lamp_centers = {Pixel{cfg.nx / 2, cfg.ny / 4}, Pixel{cfg.nx / 2, 3 * cfg.ny / 4}};
  return cfg;
}

void PhantomConfig::validate() const {
  if (nx < 1 || ny < 1) throw ConfigError("phantom frame size must be positive");
  frames_for_excitation_time(te_s);
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
  if (lamp_count < 1 || lamp_count > 2) throw ConfigError("lamp_count must be 1 or 2");
  if (!(lamp_sigma > 0.0)) throw ConfigError("lamp_sigma must be > 0");
  if (!(surface_tau_s > 0.0)) throw ConfigError("surface_tau_s must be > 0");
  if (!(texture_amplitude >= 0.0) || !(texture_scale_px >= 0.0)) {
    throw ConfigError("texture parameters must be >= 0");
  }
  if (texture_border_px < 0) throw ConfigError("texture_border_px must be >= 0");
  if (!(diffusivity_tau_mm2_s > 0.0)) throw ConfigError("diffusivity_tau_mm2_s must be > 0");
  if (!(px_per_mm > 0.0)) throw ConfigError("px_per_mm must be > 0");
}

std::vector<int> lfsr_taps(int order) {
  switch (order) {
    case 2: return {2, 1};
    case 3: return {3, 2};
    case 4: return {4, 3};
    case 5: return {5, 3};
    case 6: return {6, 5};
    case 7: return {7, 6};
    case 8: return {8, 6, 5, 4};
    case 9: return {9, 5};
    case 10: return {10, 7};
    case 11: return {11, 9};
    case 12: return {12, 6, 4, 1};
    case 13: return {13, 4, 3, 1};
    case 14: return {14, 5, 3, 1};
    case 15: return {15, 14};
    case 16: return {16, 15, 13, 4};
    case 17: return {17, 14};
    case 18: return {18, 11};
    case 19: return {19, 6, 2, 1};
    case 20: return {20, 17};
    case 21: return {21, 19};
    case 22: return {22, 21};
    case 23: return {23, 18};
    case 24: return {24, 23, 22, 17};
    default: throw ConfigError(fmt::format("no LFSR taps for order {}", order));
  }
}

ExcitationSequence generate_prbs(int nt, std::uint64_t seed, double te_s) {
  if (nt < 2) throw ConfigError(fmt::format("PRBS length must be >= 2, got {}", nt));
  int order = 2;
  while ((std::uint64_t{1} << order) - 1 < static_cast<std::uint64_t>(nt)) ++order;
  const auto taps = lfsr_taps(order);
  const std::uint64_t period = (std::uint64_t{1} << order) - 1;
  const std::uint64_t mask = period;
  std::uint64_t state = 1 + detail::splitmix64(seed) % period;

  const auto step = [&] {
    const int out = static_cast<int>((state >> (order - 1)) & 1u);
    std::uint64_t fb = 0;
    for (int p : taps) fb ^= (state >> (p - 1)) & 1u;
    state = ((state << 1) | fb) & mask;
    return out;
  };
  // Very short sequences can come out constant; advance the start state
  // until both symbols appear.
  for (std::uint64_t attempt = 0; attempt <= period; ++attempt) {
    const std::uint64_t start = state;
    std::vector<std::uint8_t> bits(nt);
    for (auto& b : bits) b = static_cast<std::uint8_t>(step());
    const auto ones = std::count(bits.begin(), bits.end(), 1);
    if (ones > 0 && ones < nt) return ExcitationSequence(std::move(bits), te_s);
    state = start;
    step();
  }
  throw ConfigError("could not build a non-constant PRBS");
}

double defect_response(double depth_mm, double diameter_mm, double t_s, const PhantomConfig& cfg) {
  if (!(depth_mm > 0.0) || !(diameter_mm > 0.0)) {
    throw ConfigError("fault depth and diameter must be positive");
  }
  if (!(t_s >= 0.0)) throw ConfigError("time must be non-negative");
  const double amplitude = cfg.defect_gain * (diameter_mm / 10.0) / depth_mm;
  const double tau = cfg.diffusivity_tau_mm2_s * depth_mm * depth_mm;
  return amplitude * -std::expm1(-t_s / tau);
}

Grid fault_weight(const FaultRecord& fault, int nx, int ny, double px_per_mm) {
  const double radius = 0.5 * fault.diameter_mm * px_per_mm;
  Grid w = Grid::Zero(nx, ny);
  const int reach = static_cast<int>(std::ceil(radius + 1.0));
  for (int r = std::max(0, fault.center.row - reach); r <= std::min(nx - 1, fault.center.row + reach); ++r) {
    for (int c = std::max(0, fault.center.col - reach); c <= std::min(ny - 1, fault.center.col + reach); ++c) {
      const double d = std::hypot(r - fault.center.row, c - fault.center.col);
      if (d <= radius - 0.5) {
        w(r, c) = 1.0;
      } else if (d < radius + 0.5) {
        w(r, c) = 0.5 * (1.0 + std::cos(std::numbers::pi * (d - (radius - 0.5))));
      }
    }
  }
  return w;
}

Grid illumination_field(const PhantomConfig& cfg) {
  Grid field = Grid::Zero(cfg.nx, cfg.ny);
  const double inv = 1.0 / (2.0 * cfg.lamp_sigma * cfg.lamp_sigma);
  for (int lamp = 0; lamp < cfg.lamp_count; ++lamp) {
    const auto c0 = cfg.lamp_centers[lamp];
    for (int r = 0; r < cfg.nx; ++r) {
      for (int c = 0; c < cfg.ny; ++c) {
        const double dr = r - c0.row;
        const double dc = c - c0.col;
        field(r, c) += std::exp(-(dr * dr + dc * dc) * inv);
      }
    }
  }
  return field;
}

Phantom generate_phantom(const PhantomConfig& cfg) {
  cfg.validate();
  const int nt = frames_for_excitation_time(cfg.te_s);
  auto excitation = generate_prbs(nt, cfg.seed, cfg.te_s);

  GroundTruth truth;
  truth.px_per_mm = cfg.px_per_mm;
  if (cfg.include_faults) truth.faults = standard_faults();
  truth.background_windows =
      default_background_windows(standard_faults(), cfg.nx, cfg.ny, cfg.px_per_mm);

  // Surface heating: first-order response to the piecewise-constant lamp
  // power, sampled at the end of each pulse.
  std::vector<double> heating(nt);
  const double decay = std::exp(-cfg.te_s / cfg.surface_tau_s);
  double h = 0.0;
  for (int t = 0; t < nt; ++t) {
    h = h * decay + excitation.bits()[t] * (1.0 - decay);
    heating[t] = h;
  }

  const Grid illumination = cfg.illumination_gain * illumination_field(cfg);
  Grid texture = Grid::Zero(cfg.nx, cfg.ny);
  if (cfg.texture_amplitude > 0.0) {
    texture = cfg.texture_amplitude *
              texture_field(cfg.nx, cfg.ny, cfg.texture_scale_px, cfg.seed).cwiseProduct(
                  painted_area(cfg.nx, cfg.ny, cfg.texture_border_px));
  }
  std::vector<Grid> weights;
  for (const auto& f : truth.faults) weights.push_back(fault_weight(f, cfg.nx, cfg.ny, cfg.px_per_mm));

  const std::size_t frame_size = static_cast<std::size_t>(cfg.nx) * cfg.ny;
  std::vector<float> values(frame_size * nt);
  parallel_for(static_cast<std::size_t>(nt), [&](std::size_t t) {
    const double t_s = (static_cast<double>(t) + 1.0) * cfg.te_s;
    Grid frame = heating[t] * illumination + texture;
    for (std::size_t k = 0; k < truth.faults.size(); ++k) {
      const auto& f = truth.faults[k];
      frame += defect_response(f.depth_mm, f.diameter_mm, t_s, cfg) * weights[k];
    }
    if (cfg.noise_sigma > 0.0) {
      detail::NormalSource normal(detail::splitmix64(cfg.seed) ^ detail::splitmix64(t + 1));
      for (Eigen::Index i = 0; i < frame.size(); ++i) frame.data()[i] += cfg.noise_sigma * normal();
    }
    float* dst = values.data() + t * frame_size;
    for (Eigen::Index i = 0; i < frame.size(); ++i) dst[i] = static_cast<float>(frame.data()[i]);
  });

  return Phantom{DataCube(cfg.nx, cfg.ny, nt, cfg.te_s, std::move(values)), std::move(excitation),
                 std::move(truth)};
}

DataCube add_reflective_patch(const DataCube& cube, const ExcitationSequence& excitation,
                              const ReflectivePatch& patch) {
  if (excitation.size() != cube.nt()) {
    throw ShapeError(fmt::format("excitation has {} bits for {} frames", excitation.size(), cube.nt()));
  }
  if (!patch.region.inside(cube.nx(), cube.ny())) throw BoundsError("reflective patch leaves the frame");
  std::vector<float> values(cube.values().begin(), cube.values().end());
  detail::NormalSource normal(patch.seed);
  const auto& w = patch.region;
  for (int t = 0; t < cube.nt(); ++t) {
    for (int r = w.center.row - w.half_extent; r <= w.center.row + w.half_extent; ++r) {
      for (int c = w.center.col - w.half_extent; c <= w.center.col + w.half_extent; ++c) {
        auto& v = values[static_cast<std::size_t>(t) * cube.frame_size() +
                         static_cast<std::size_t>(r) * cube.ny() + c];
        v = static_cast<float>(v + patch.amplitude * excitation.bits()[t] +
                               patch.noise_sigma * normal());
      }
    }
  }
  return DataCube(cube.nx(), cube.ny(), cube.nt(), cube.te_s(), std::move(values), cube.flipped_y());
}

}  // namespace thermowave
