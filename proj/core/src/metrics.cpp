#include "thermowave/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "thermowave/errors.hpp"

namespace thermowave {
namespace {

double mean_square(const Grid& g) { return g.squaredNorm() / static_cast<double>(g.size()); }

double background_power(const Grid& map, const std::vector<FrameWindow>& background) {
  if (background.empty()) throw ConfigError("SNR needs at least one background window");
  double acc = 0.0;
  for (const auto& w : background) acc += mean_square(extract_window(map, w));
  return acc / static_cast<double>(background.size());
}

}  // namespace

double window_snr_db(const Grid& map, const FrameWindow& window,
                     const std::vector<FrameWindow>& background) {
  const double noise = background_power(map, background);
  if (!(noise > 0.0)) throw DegenerateError("background power is zero");
  return 10.0 * std::log10(mean_square(extract_window(map, window)) / noise);
}

std::vector<SnrRecord> snr_improvement(const DataCube& raw, const Grid& ydet,
                                       const GroundTruth& truth, RawReference reference) {
  if (ydet.rows() != raw.nx() || ydet.cols() != raw.ny()) {
    throw ShapeError("detection map and raw cube differ in frame shape");
  }
  auto faults = truth.faults;
  std::sort(faults.begin(), faults.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  std::vector<Grid> raw_frames;
  if (reference == RawReference::kTemporalMean) {
    raw_frames.push_back(raw.temporal_mean());
  } else {
    for (int t = 0; t < raw.nt(); ++t) raw_frames.push_back(raw.frame(t));
  }

  std::vector<SnrRecord> out;
  for (const auto& f : faults) {
    const auto win = truth.fault_window(f);
    SnrRecord rec;
    rec.fault_id = f.id;
    rec.snr_wd_db = window_snr_db(ydet, win, truth.background_windows);
    rec.snr_raw_db = -std::numeric_limits<double>::infinity();
    for (const auto& frame : raw_frames) {
      rec.snr_raw_db = std::max(rec.snr_raw_db, window_snr_db(frame, win, truth.background_windows));
    }
    rec.improvement_db = rec.snr_wd_db - rec.snr_raw_db;
    out.push_back(rec);
  }
  return out;
}

}  // namespace thermowave
