#include "thermowave/selection.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include "thermowave/errors.hpp"
#include "thermowave/parallel.hpp"

namespace thermowave {
namespace {

// Interior pixels by rows, one column per neighbourhood offset, centred.
Eigen::MatrixXd region_stack(const Grid& g, int radius) {
  const int rows = static_cast<int>(g.rows());
  const int cols = static_cast<int>(g.cols());
  const int side = 2 * radius + 1;
  const int ir = rows - 2 * radius;
  const int ic = cols - 2 * radius;
  Eigen::MatrixXd stack(static_cast<Eigen::Index>(ir) * ic, side * side);
  for (int dr = 0; dr < side; ++dr) {
    for (int dc = 0; dc < side; ++dc) {
      const int k = dr * side + dc;
      for (int r = 0; r < ir; ++r) {
        for (int c = 0; c < ic; ++c) stack(static_cast<Eigen::Index>(r) * ic + c, k) = g(r + dr, c + dc);
      }
    }
  }
  stack.rowwise() -= stack.colwise().mean();
  return stack;
}

double log_det(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw DegenerateError("covariance is not positive definite after regularisation");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

// Gaussian mutual information of two centred stacks.
double stacked_mi(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const auto n = static_cast<double>(a.rows());
  const auto k = a.cols();
  Eigen::MatrixXd joint(2 * k, 2 * k);
  joint.topLeftCorner(k, k).noalias() = a.transpose() * a / n;
  joint.bottomRightCorner(k, k).noalias() = b.transpose() * b / n;
  joint.topRightCorner(k, k).noalias() = a.transpose() * b / n;
  joint.bottomLeftCorner(k, k) = joint.topRightCorner(k, k).transpose();
  const double trace = joint.trace();
  if (!(trace > 0.0)) return 0.0;
  joint.diagonal().array() += 1e-9 * trace / static_cast<double>(2 * k);
  const double mi = 0.5 * (log_det(joint.topLeftCorner(k, k)) +
                           log_det(joint.bottomRightCorner(k, k)) - log_det(joint));
  return std::max(0.0, mi);
}

void check_rmi_shapes(const Grid& a, const Grid& b, int radius) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(fmt::format("RMI needs equal shapes, got {}x{} and {}x{}", a.rows(), a.cols(),
                                 b.rows(), b.cols()));
  }
  if (radius < 0 || std::min(a.rows(), a.cols()) <= 2 * radius) {
    throw ShapeError(fmt::format("a {}x{} frame is too small for RMI radius {}", a.rows(), a.cols(),
                                 radius));
  }
}

}  // namespace

BasisScore basis_cost_from_map(const Grid& ydet, const GroundTruth& truth) {
  if (truth.faults.size() < 2) throw ConfigError("basis cost needs at least two faults");
  if (truth.background_windows.empty()) throw ConfigError("basis cost needs background windows");
  auto faults = truth.faults;
  std::sort(faults.begin(), faults.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  double background_sum = 0.0;
  double background_count = 0.0;
  for (const auto& w : truth.background_windows) {
    const Grid patch = extract_window(ydet, w);
    background_sum += patch.sum();
    background_count += static_cast<double>(patch.size());
  }
  const double background = background_sum / background_count;

  BasisScore score;
  const Grid reference = extract_window(ydet, truth.fault_window(faults.front()));
  double numerator = 0.0;
  for (std::size_t i = 1; i < faults.size(); ++i) {
    const double d = (reference - extract_window(ydet, truth.fault_window(faults[i]))).norm();
    score.per_fault_numerators.push_back(d);
    numerator += d;
  }
  score.denominator = (reference.array() - background).matrix().norm();
  const double scale = std::max(reference.norm(), std::abs(background) * reference.rows());
  if (!(score.denominator > 1e-12 * scale) || scale == 0.0) {
    throw DegenerateError("reference fault window is indistinguishable from the background");
  }
  score.cost = numerator / score.denominator;
  return score;
}

BasisScore basis_cost(const DataCube& cube, const GroundTruth& truth, const std::string& basis,
                      const DetectorConfig& cfg) {
  DetectorConfig c = cfg;
  c.basis = basis;
  c.edge_margin.reset();
  auto score = basis_cost_from_map(detect(cube, c).values, truth);
  score.basis = basis;
  return score;
}

const BasisScore& best_score(const std::vector<BasisScore>& scores) {
  if (scores.empty()) throw SelectionError("no basis scores to choose from");
  const BasisScore* best = &scores.front();
  for (const auto& s : scores) {
    if (s.cost < best->cost || (s.cost == best->cost && s.basis < best->basis)) best = &s;
  }
  return *best;
}

BasisSelection select_basis(const DataCube& cube, const GroundTruth& truth,
                            const std::vector<std::string>& catalog, const DetectorConfig& cfg) {
  if (catalog.empty()) throw ConfigError("basis catalog is empty");
  for (const auto& name : catalog) catalog_lookup(name);

  std::vector<std::optional<BasisScore>> results(catalog.size());
  parallel_for(catalog.size(), [&](std::size_t i) {
    try {
      results[i] = basis_cost(cube, truth, catalog[i], cfg);
    } catch (const DegenerateError&) {
      results[i].reset();
    }
  });

  BasisSelection out;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (results[i]) {
      out.scores.push_back(*results[i]);
    } else {
      out.skipped.push_back(catalog[i]);
    }
  }
  if (out.scores.empty()) throw SelectionError("every basis in the catalog is degenerate");
  out.best = best_score(out.scores).basis;
  return out;
}

double regional_mutual_information(const Grid& a, const Grid& b, int radius) {
  check_rmi_shapes(a, b, radius);
  return stacked_mi(region_stack(a, radius), region_stack(b, radius));
}

int stagnation_level(const std::vector<double>& m_avg, double tau) {
  const int levels = static_cast<int>(m_avg.size());
  if (levels < 2) throw ConfigError("level selection needs at least two levels");
  const double initial_drop = m_avg[0] - m_avg[1];
  for (int level = 2; level < levels; ++level) {
    if (m_avg[level - 1] - m_avg[level] < tau * initial_drop) return level;
  }
  return levels;
}

RmiProfile select_level(const DataCube& cube, const LevelSelectionConfig& cfg) {
  if (cfg.max_level < 2) throw ConfigError(fmt::format("max level {} is below 2", cfg.max_level));
  if (cfg.frame_stride < 1) throw ConfigError("frame stride must be >= 1");
  if (!(cfg.tau > 0.0 && cfg.tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
  const WaveletSpec& basis = catalog_lookup(cfg.basis);
  if (cfg.max_level > max_decomposable_levels(cube.nx(), cube.ny()) ||
      max_levels(cube.nx(), cube.ny(), basis) == 0) {
    throw LevelError(fmt::format("a {}x{} frame cannot be decomposed to level {} with {}",
                                 cube.nx(), cube.ny(), cfg.max_level, cfg.basis));
  }
  check_rmi_shapes(cube.frame(0), cube.frame(0), cfg.radius);

  std::vector<int> frames;
  for (int t = 0; t < cube.nt(); t += cfg.frame_stride) frames.push_back(t);
  std::vector<std::vector<double>> per_frame(frames.size());
  parallel_for(frames.size(), [&](std::size_t i) {
    const Grid frame = cube.frame(frames[i]);
    const auto tree = decompose(frame, basis, cfg.max_level, cfg.boundary);
    const Eigen::MatrixXd raw = region_stack(frame, cfg.radius);
    const double self = stacked_mi(raw, raw);
    auto& m = per_frame[i];
    m.assign(cfg.max_level, 0.0);
    if (self <= 0.0) return;
    for (int level = 1; level <= cfg.max_level; ++level) {
      const Grid approx = reconstruct_approximation(tree, level);
      m[level - 1] = stacked_mi(raw, region_stack(approx, cfg.radius)) / self;
    }
  });

  RmiProfile profile;
  profile.m_avg.assign(cfg.max_level, 0.0);
  for (const auto& m : per_frame) {
    for (int l = 0; l < cfg.max_level; ++l) profile.m_avg[l] += m[l];
  }
  for (double& v : profile.m_avg) v /= static_cast<double>(frames.size());
  profile.selected_level = stagnation_level(profile.m_avg, cfg.tau);
  return profile;
}

}  // namespace thermowave
