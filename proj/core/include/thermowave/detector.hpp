#pragma once

#include <optional>
#include <string>

#include "thermowave/datacube.hpp"
#include "thermowave/grid.hpp"
#include "thermowave/wavelet.hpp"

namespace thermowave {

enum class TemporalCombine { kMean, kMedian };

struct DetectorConfig {
  std::string basis = "rbio6.8";
  int levels = 6;
  int band_lo = 3;
  int band_hi = 6;
  // Unset means the basis default, see default_edge_margin().
  std::optional<int> edge_margin;
  double threshold_quantile = 0.95;
  BoundaryMode boundary = BoundaryMode::kSymmetric;
  TemporalCombine combine = TemporalCombine::kMean;

  // Band [3, L] for a given depth, mirroring the default split.
  static DetectorConfig with_levels(std::string basis, int levels);

  int resolved_edge_margin() const;
  // Throws LevelError/ConfigError/CatalogError on inconsistent fields.
  void validate() const;
  // Additionally checks that the frame supports the decomposition depth.
  void validate_for(int nx, int ny) const;
};

// Longest synthesis filter of the basis.
int default_edge_margin(const WaveletSpec& basis);

struct DetectionMap {
  Grid values;
  DetectorConfig config;
  int source_nt = 0;
};

// Temporal combination of the per-frame useful subspace (details of levels
// band_lo..band_hi).
DetectionMap detect(const DataCube& cube, const DetectorConfig& cfg);

// Same as detect() and also returns every per-frame useful subspace as a cube.
DetectionMap detect(const DataCube& cube, const DetectorConfig& cfg, DataCube* useful_frames);

// Temporal combination of the level-L approximation (background/illumination).
DetectionMap background_map(const DataCube& cube, const DetectorConfig& cfg);

// Temporal combination of the discarded details: every level outside
// [band_lo, band_hi].
DetectionMap discarded_map(const DataCube& cube, const DetectorConfig& cfg);

// |values| with an edge_margin border cleared, binarised strictly above the
// threshold_quantile quantile of the interior magnitudes.
Mask fault_map(const DetectionMap& det);

// Quantile (linear interpolation between order statistics) of the interior
// magnitudes used by fault_map(). Throws ConfigError for q outside (0, 1) and
// DegenerateError if the margin leaves no interior.
double interior_quantile(const Grid& values, int margin, double q);

}  // namespace thermowave
