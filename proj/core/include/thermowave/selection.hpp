#pragma once

#include <string>
#include <vector>

#include "thermowave/datacube.hpp"
#include "thermowave/detector.hpp"
#include "thermowave/grid.hpp"
#include "thermowave/phantom.hpp"
#include "thermowave/wavelet.hpp"

namespace thermowave {

// Basis-selection cost: spread of the fault windows around the reference
// fault (the first by id) divided by the reference window's distance to the
// background level.
struct BasisScore {
  std::string basis;
  double cost = 0.0;
  // One entry per non-reference fault, ordered by id.
  std::vector<double> per_fault_numerators;
  double denominator = 0.0;
};

// Cost of an existing detection map. Throws BoundsError for windows outside
// the map, ConfigError with fewer than two faults or no background windows,
// DegenerateError when the denominator vanishes.
BasisScore basis_cost_from_map(const Grid& ydet, const GroundTruth& truth);

// Runs detect() with `basis` substituted into `cfg` and scores the result.
BasisScore basis_cost(const DataCube& cube, const GroundTruth& truth, const std::string& basis,
                      const DetectorConfig& cfg);

struct BasisSelection {
  std::string best;
  // Input catalog order; degenerate bases are absent and listed in `skipped`.
  std::vector<BasisScore> scores;
  std::vector<std::string> skipped;
};

// Lowest cost; ties resolve to the lexicographically smallest name. Throws
// SelectionError for an empty list.
const BasisScore& best_score(const std::vector<BasisScore>& scores);

// Exhaustive sweep; ties resolve to the lexicographically smallest name.
// Throws ConfigError for an empty catalog and SelectionError when every
// basis is degenerate.
BasisSelection select_basis(const DataCube& cube, const GroundTruth& truth,
                            const std::vector<std::string>& catalog, const DetectorConfig& cfg);

// Regional mutual information under a Gaussian model: each interior pixel
// contributes the stacked (2r+1)^2 neighbourhoods of a and b. Throws
// ShapeError on mismatched shapes or frames too small for the radius.
double regional_mutual_information(const Grid& a, const Grid& b, int radius = 1);

struct RmiProfile {
  // m_avg[L-1] is the temporally averaged normalised RMI at level L.
  std::vector<double> m_avg;
  int selected_level = 0;
};

// Smallest L >= 2 with m(L) - m(L+1) < tau * (m(1) - m(2)); the deepest
// level when no such L exists. Needs at least two levels.
int stagnation_level(const std::vector<double>& m_avg, double tau);

struct LevelSelectionConfig {
  std::string basis = "rbio6.8";
  int max_level = 8;
  int radius = 1;
  double tau = 0.2;
  BoundaryMode boundary = BoundaryMode::kSymmetric;
  // Use every frame_stride-th frame; 1 averages over all frames.
  int frame_stride = 1;
};

RmiProfile select_level(const DataCube& cube, const LevelSelectionConfig& cfg);

}  // namespace thermowave
