#pragma once

#include <vector>

#include <Eigen/Core>

#include "thermowave/datacube.hpp"
#include "thermowave/grid.hpp"

namespace thermowave {

// Ns x Nt matrix; row s is the time series of pixel (s / ny, s % ny).
Eigen::MatrixXd unfold(const DataCube& cube);

// Inverse of unfold(); values are rounded to float.
DataCube fold(const Eigen::MatrixXd& matrix, int nx, int ny, double te_s = 0.0,
              bool flipped_y = false);

// Singular values (descending) and right singular vectors of an unfolded
// cube. Computed from the eigendecomposition of the Nt x Nt Gram matrix.
struct SingularSpectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd right_vectors;
};

SingularSpectrum singular_spectrum(const Eigen::MatrixXd& matrix);

// Background / useful / noise partition of the ranks (1-based, inclusive).
struct SvdSplit {
  int background_rank = 1;
  int useful_first = 2;
  int useful_last = 10;
  int rank_count = 0;  // min(Ns, Nt)

  // Clamps useful_last to rank_count. Throws ConfigError when the useful
  // range is empty or overlaps the background.
  static SvdSplit make(int useful_first, int useful_last, int rank_count, int background_rank = 1);
};

// Projection onto the right singular vectors of the useful ranks.
Eigen::MatrixXd svd_filter(const Eigen::MatrixXd& matrix, const SvdSplit& split);
Eigen::MatrixXd svd_filter(const Eigen::MatrixXd& matrix, const SingularSpectrum& spectrum,
                           const SvdSplit& split);

struct HosMaps {
  Grid skewness;
  Grid kurtosis;  // excess kurtosis
  // Rows (pixels) with zero temporal variance; both maps hold 0 there.
  std::vector<int> flagged_rows;
};

// Biased-moment skewness and excess kurtosis of every row, folded to nx x ny.
// Throws ConfigError when Nt < 4 and ShapeError on a size mismatch.
HosMaps hos_maps(const Eigen::MatrixXd& filtered, int nx, int ny);

}  // namespace thermowave
