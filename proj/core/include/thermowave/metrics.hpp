#pragma once

#include <vector>

#include "thermowave/datacube.hpp"
#include "thermowave/detector.hpp"
#include "thermowave/grid.hpp"
#include "thermowave/phantom.hpp"

namespace thermowave {

// 10*log10 of the window's mean square over the average of the background
// windows' mean squares. Throws DegenerateError on zero background power.
double window_snr_db(const Grid& map, const FrameWindow& window,
                     const std::vector<FrameWindow>& background);

struct SnrRecord {
  int fault_id = 0;
  double snr_raw_db = 0.0;
  double snr_wd_db = 0.0;
  double improvement_db = 0.0;
};

enum class RawReference {
  kTemporalMean,  // mean of all raw frames
  kBestFrame,     // per fault, the raw frame with the highest SNR
};

// Per-fault SNR of the detection map minus that of the raw data, ordered by
// fault id.
std::vector<SnrRecord> snr_improvement(const DataCube& raw, const Grid& ydet,
                                       const GroundTruth& truth,
                                       RawReference reference = RawReference::kTemporalMean);

inline std::vector<SnrRecord> snr_improvement(const DataCube& raw, const DetectionMap& det,
                                              const GroundTruth& truth,
                                              RawReference reference = RawReference::kTemporalMean) {
  return snr_improvement(raw, det.values, truth, reference);
}

}  // namespace thermowave
