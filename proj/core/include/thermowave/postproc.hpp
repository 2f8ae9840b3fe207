#pragma once

#include "thermowave/datacube.hpp"
#include "thermowave/detector.hpp"
#include "thermowave/grid.hpp"

namespace thermowave {

// Pearson correlation of every pixel's time series with the mean-centred
// excitation bits. Zero-variance pixels get 0. Throws ShapeError when the
// lengths differ.
Grid excitation_correlation(const DataCube& useful_frames, const ExcitationSequence& excitation);

// Clears pixels with |corr| >= threshold. Throws ConfigError unless
// 0 < threshold < 1 and ShapeError on mismatched shapes.
Grid suppress_correlated(const Grid& map, const Grid& corr, double threshold);
DetectionMap suppress_correlated(const DetectionMap& det, const Grid& corr, double threshold);

}  // namespace thermowave
