#include "thermowave/baseline.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "thermowave/errors.hpp"
#include "thermowave/parallel.hpp"

namespace thermowave {

Eigen::MatrixXd unfold(const DataCube& cube) {
  const auto ns = static_cast<Eigen::Index>(cube.frame_size());
  Eigen::MatrixXd m(ns, cube.nt());
  for (int t = 0; t < cube.nt(); ++t) {
    const auto frame = cube.frame_values(t);
    for (Eigen::Index s = 0; s < ns; ++s) m(s, t) = frame[s];
  }
  return m;
}

DataCube fold(const Eigen::MatrixXd& matrix, int nx, int ny, double te_s, bool flipped_y) {
  if (matrix.rows() != static_cast<Eigen::Index>(nx) * ny) {
    throw ShapeError(fmt::format("{} rows cannot fold into {}x{}", matrix.rows(), nx, ny));
  }
  std::vector<float> values(static_cast<std::size_t>(matrix.size()));
  const auto ns = matrix.rows();
  for (Eigen::Index t = 0; t < matrix.cols(); ++t) {
    for (Eigen::Index s = 0; s < ns; ++s) values[t * ns + s] = static_cast<float>(matrix(s, t));
  }
  return DataCube(nx, ny, static_cast<int>(matrix.cols()), te_s, std::move(values), flipped_y);
}

SingularSpectrum singular_spectrum(const Eigen::MatrixXd& matrix) {
  const Eigen::MatrixXd gram = matrix.transpose() * matrix;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw DegenerateError("Gram eigendecomposition failed");
  const auto n = gram.rows();
  SingularSpectrum out;
  out.values.resize(n);
  out.right_vectors.resize(n, n);
  // Eigen sorts ascending.
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = std::sqrt(std::max(0.0, eig.eigenvalues()(n - 1 - i)));
    out.right_vectors.col(i) = eig.eigenvectors().col(n - 1 - i);
  }
  return out;
}

SvdSplit SvdSplit::make(int useful_first, int useful_last, int rank_count, int background_rank) {
  SvdSplit s;
  s.background_rank = background_rank;
  s.rank_count = rank_count;
  s.useful_first = useful_first;
  s.useful_last = std::min(useful_last, rank_count);
  if (background_rank < 0 || s.useful_first <= background_rank || s.useful_first > s.useful_last) {
    throw ConfigError(fmt::format("useful rank range {}:{} is empty or overlaps the background "
                                  "(rank {}, {} ranks available)",
                                  useful_first, useful_last, background_rank, rank_count));
  }
  return s;
}

Eigen::MatrixXd svd_filter(const Eigen::MatrixXd& matrix, const SingularSpectrum& spectrum,
                           const SvdSplit& split) {
  if (split.useful_first < 1 || split.useful_first > split.useful_last ||
      split.useful_last > spectrum.right_vectors.cols()) {
    throw ConfigError(fmt::format("useful rank range {}:{} is empty or outside 1:{}",
                                  split.useful_first, split.useful_last,
                                  spectrum.right_vectors.cols()));
  }
  const auto basis = spectrum.right_vectors.middleCols(split.useful_first - 1,
                                                       split.useful_last - split.useful_first + 1);
  return (matrix * basis) * basis.transpose();
}

Eigen::MatrixXd svd_filter(const Eigen::MatrixXd& matrix, const SvdSplit& split) {
  return svd_filter(matrix, singular_spectrum(matrix), split);
}

HosMaps hos_maps(const Eigen::MatrixXd& filtered, int nx, int ny) {
  if (filtered.rows() != static_cast<Eigen::Index>(nx) * ny) {
    throw ShapeError(fmt::format("{} rows cannot fold into {}x{}", filtered.rows(), nx, ny));
  }
  if (filtered.cols() < 4) throw ConfigError("higher-order statistics need at least 4 frames");
  HosMaps out{Grid::Zero(nx, ny), Grid::Zero(nx, ny), {}};
  const auto nt = static_cast<double>(filtered.cols());
  std::vector<char> degenerate(filtered.rows(), 0);
  parallel_for(static_cast<std::size_t>(filtered.rows()), [&](std::size_t s) {
    const Eigen::RowVectorXd row = filtered.row(static_cast<Eigen::Index>(s));
    const double mean = row.mean();
    const Eigen::ArrayXd dev = (row.array() - mean).transpose();
    const double m2 = dev.square().sum() / nt;
    const double mean_square = row.squaredNorm() / nt;
    if (!(m2 > 1e-24 * mean_square)) {
      degenerate[s] = 1;
      return;
    }
    const double m3 = dev.cube().sum() / nt;
    const double m4 = dev.square().square().sum() / nt;
    out.skewness.data()[s] = m3 / std::pow(m2, 1.5);
    out.kurtosis.data()[s] = m4 / (m2 * m2) - 3.0;
  });
  for (std::size_t s = 0; s < degenerate.size(); ++s) {
    if (degenerate[s]) out.flagged_rows.push_back(static_cast<int>(s));
  }
  return out;
}

}  // namespace thermowave
