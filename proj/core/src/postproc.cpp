#include "thermowave/postproc.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "thermowave/errors.hpp"
#include "thermowave/parallel.hpp"

namespace thermowave {

Grid excitation_correlation(const DataCube& useful_frames, const ExcitationSequence& excitation) {
  if (excitation.size() != useful_frames.nt()) {
    throw ShapeError(fmt::format("excitation has {} bits for {} frames", excitation.size(),
                                 useful_frames.nt()));
  }
  const int nt = useful_frames.nt();
  Eigen::VectorXd bits(nt);
  for (int t = 0; t < nt; ++t) bits(t) = excitation.bits()[t];
  bits.array() -= bits.mean();
  const double bits_norm = bits.norm();

  Grid corr = Grid::Zero(useful_frames.nx(), useful_frames.ny());
  const auto all = useful_frames.values();
  const std::size_t frame_size = useful_frames.frame_size();
  parallel_for(frame_size, [&](std::size_t s) {
    double mean = 0.0;
    for (int t = 0; t < nt; ++t) mean += all[t * frame_size + s];
    mean /= nt;
    double cross = 0.0;
    double power = 0.0;
    for (int t = 0; t < nt; ++t) {
      const double d = all[t * frame_size + s] - mean;
      cross += d * bits(t);
      power += d * d;
    }
    const double denom = std::sqrt(power) * bits_norm;
    corr.data()[s] = denom > 0.0 ? std::clamp(cross / denom, -1.0, 1.0) : 0.0;
  });
  return corr;
}

Grid suppress_correlated(const Grid& map, const Grid& corr, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ConfigError(fmt::format("correlation threshold {} is outside (0, 1)", threshold));
  }
  if (map.rows() != corr.rows() || map.cols() != corr.cols()) {
    throw ShapeError("detection map and correlation grid differ in shape");
  }
  return (corr.array().abs() >= threshold).select(0.0, map);
}

DetectionMap suppress_correlated(const DetectionMap& det, const Grid& corr, double threshold) {
  DetectionMap out = det;
  out.values = suppress_correlated(det.values, corr, threshold);
  return out;
}

}  // namespace thermowave
