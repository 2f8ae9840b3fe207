#include "thermowave/detector.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "thermowave/errors.hpp"
#include "thermowave/parallel.hpp"

namespace thermowave {
namespace {

// Which parts of each frame's decomposition feed the map.
struct Selection {
  bool approximation = false;
  std::vector<bool> details;
};

constexpr int kFramesPerBlock = 16;

Grid combine_median(std::vector<Grid>& frames) {
  const auto rows = frames.front().rows();
  const auto cols = frames.front().cols();
  Grid out(rows, cols);
  std::vector<double> column(frames.size());
  for (Eigen::Index i = 0; i < rows * cols; ++i) {
    for (std::size_t t = 0; t < frames.size(); ++t) column[t] = frames[t].data()[i];
    const auto mid = column.begin() + static_cast<std::ptrdiff_t>(column.size() / 2);
    std::nth_element(column.begin(), mid, column.end());
    double m = *mid;
    if (column.size() % 2 == 0) m = 0.5 * (m + *std::max_element(column.begin(), mid));
    out.data()[i] = m;
  }
  return out;
}

DetectionMap run(const DataCube& cube, const DetectorConfig& cfg, const Selection& sel,
                 DataCube* per_frame) {
  if (cube.nt() < 1 || cube.values().empty()) throw ConfigError("cannot process an empty cube");
  cfg.validate_for(cube.nx(), cube.ny());
  const WaveletSpec& basis = catalog_lookup(cfg.basis);

  const auto reconstruct_frame = [&](int t) {
    const auto tree = decompose(cube.frame(t), basis, cfg.levels, cfg.boundary);
    return reconstruct(tree, sel.approximation, sel.details);
  };

  const bool keep_frames = per_frame != nullptr || cfg.combine == TemporalCombine::kMedian;
  std::vector<Grid> frames(keep_frames ? cube.nt() : 0);
  const int blocks = (cube.nt() + kFramesPerBlock - 1) / kFramesPerBlock;
  std::vector<Grid> block_sums(blocks);
  // Each block is summed in index order; blocks are merged pairwise, so the
  // result does not depend on the worker count.
  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
    const int first = static_cast<int>(b) * kFramesPerBlock;
    const int last = std::min(cube.nt(), first + kFramesPerBlock);
    Grid acc = Grid::Zero(cube.nx(), cube.ny());
    for (int t = first; t < last; ++t) {
      Grid y = reconstruct_frame(t);
      acc += y;
      if (keep_frames) frames[t] = std::move(y);
    }
    block_sums[b] = std::move(acc);
  });

  DetectionMap out;
  out.config = cfg;
  out.source_nt = cube.nt();
  if (cfg.combine == TemporalCombine::kMedian) {
    out.values = combine_median(frames);
  } else {
    out.values = pairwise_sum(std::move(block_sums)) / static_cast<double>(cube.nt());
  }
  if (per_frame != nullptr) {
    *per_frame = DataCube::from_frames(frames, cube.te_s(), cube.flipped_y());
  }
  return out;
}

}  // namespace

DetectorConfig DetectorConfig::with_levels(std::string basis, int levels) {
  DetectorConfig cfg;
  cfg.basis = std::move(basis);
  cfg.levels = levels;
  cfg.band_lo = std::min(3, levels);
  cfg.band_hi = levels;
  return cfg;
}

int default_edge_margin(const WaveletSpec& basis) { return basis.synthesis_length(); }

int DetectorConfig::resolved_edge_margin() const {
  return edge_margin ? *edge_margin : default_edge_margin(catalog_lookup(basis));
}

void DetectorConfig::validate() const {
  const WaveletSpec& spec = catalog_lookup(basis);
  if (levels < 1) throw LevelError(fmt::format("decomposition level {} is below 1", levels));
  if (band_lo < 1) throw LevelError(fmt::format("band start level {} is below 1", band_lo));
  if (band_lo > band_hi) {
    throw LevelError(fmt::format("band start level {} exceeds band end level {}", band_lo, band_hi));
  }
  if (band_hi > levels) {
    throw LevelError(fmt::format("band end level {} exceeds decomposition level {}", band_hi, levels));
  }
  if (edge_margin && *edge_margin < spec.synthesis_length()) {
    throw ConfigError(fmt::format("edge margin {} is shorter than the {}-tap synthesis filter",
                                  *edge_margin, spec.synthesis_length()));
  }
  if (!(threshold_quantile > 0.0 && threshold_quantile < 1.0)) {
    throw ConfigError(fmt::format("threshold quantile {} is outside (0, 1)", threshold_quantile));
  }
}

void DetectorConfig::validate_for(int nx, int ny) const {
  validate();
  const WaveletSpec& spec = catalog_lookup(basis);
  if (max_levels(nx, ny, spec) == 0 || levels > max_decomposable_levels(nx, ny)) {
    throw LevelError(fmt::format("a {}x{} frame cannot be decomposed to level {} with {}", nx, ny,
                                 levels, basis));
  }
}

DetectionMap detect(const DataCube& cube, const DetectorConfig& cfg) {
  return detect(cube, cfg, nullptr);
}

DetectionMap detect(const DataCube& cube, const DetectorConfig& cfg, DataCube* useful_frames) {
  cfg.validate();
  Selection sel;
  sel.details.assign(cfg.levels, false);
  for (int l = cfg.band_lo; l <= cfg.band_hi; ++l) sel.details[l - 1] = true;
  return run(cube, cfg, sel, useful_frames);
}

DetectionMap background_map(const DataCube& cube, const DetectorConfig& cfg) {
  cfg.validate();
  Selection sel;
  sel.approximation = true;
  return run(cube, cfg, sel, nullptr);
}

DetectionMap discarded_map(const DataCube& cube, const DetectorConfig& cfg) {
  cfg.validate();
  Selection sel;
  sel.details.assign(cfg.levels, true);
  for (int l = cfg.band_lo; l <= cfg.band_hi; ++l) sel.details[l - 1] = false;
  return run(cube, cfg, sel, nullptr);
}

double interior_quantile(const Grid& values, int margin, double q) {
  if (!(q > 0.0 && q < 1.0)) throw ConfigError(fmt::format("quantile {} is outside (0, 1)", q));
  const auto rows = static_cast<int>(values.rows());
  const auto cols = static_cast<int>(values.cols());
  std::vector<double> interior;
  for (int r = margin; r < rows - margin; ++r) {
    for (int c = margin; c < cols - margin; ++c) interior.push_back(std::abs(values(r, c)));
  }
  if (interior.empty()) throw DegenerateError("edge margin leaves no interior pixels");
  std::sort(interior.begin(), interior.end());
  const double pos = q * static_cast<double>(interior.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, interior.size() - 1);
  return interior[lo] + (pos - static_cast<double>(lo)) * (interior[hi] - interior[lo]);
}

Mask fault_map(const DetectionMap& det) {
  const double q = det.config.threshold_quantile;
  if (!(q > 0.0 && q < 1.0)) throw ConfigError(fmt::format("threshold quantile {} is outside (0, 1)", q));
  const int margin = det.config.resolved_edge_margin();
  const auto rows = static_cast<int>(det.values.rows());
  const auto cols = static_cast<int>(det.values.cols());
  Mask out = Mask::Zero(rows, cols);
  if (2 * margin >= rows || 2 * margin >= cols) return out;
  const double threshold = interior_quantile(det.values, margin, q);
  for (int r = margin; r < rows - margin; ++r) {
    for (int c = margin; c < cols - margin; ++c) {
      if (std::abs(det.values(r, c)) > threshold) out(r, c) = 1;
    }
  }
  return out;
}

}  // namespace thermowave
