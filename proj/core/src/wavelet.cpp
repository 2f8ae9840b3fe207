#include "thermowave/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <fmt/format.h>

#include "thermowave/errors.hpp"

namespace thermowave {
namespace {

struct CatalogEntry {
  const char* name;
  WaveletFamily family;
  int vanishing_moments;
  std::vector<double> dec_lo, dec_hi, rec_lo, rec_hi;
};

const std::vector<CatalogEntry>& raw_catalog() {
  static const std::vector<CatalogEntry> entries = {
#include "wavelet_taps.inc"
  };
  return entries;
}

// Index into a boundary-extended signal of (even) length m.
int extend_index(int j, int m, BoundaryMode mode) {
  if (mode == BoundaryMode::kPeriodic || m == 1) {
    const int r = j % m;
    return r < 0 ? r + m : r;
  }
  // Whole-point symmetric: ... x2 x1 | x0 x1 ... x_{m-1} | x_{m-2} ...
  const int period = 2 * (m - 1);
  int r = j % period;
  if (r < 0) r += period;
  return r < m ? r : period - r;
}

// Analysis operator on the padded length m = 2*half.
Eigen::MatrixXd padded_analysis(const WaveletSpec& w, BoundaryMode mode, int half) {
  const int m = 2 * half;
  const int taps = w.tap_count();
  const int offset = taps / 2;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < half; ++i) {
    for (int k = 0; k < taps; ++k) {
      const int j = extend_index(2 * i + offset - k, m, mode);
      a(i, j) += w.dec_lo[k];
      a(half + i, j) += w.dec_hi[k];
    }
  }
  return a;
}

// Nearest matrix with orthonormal rows spanning the same space.
Eigen::MatrixXd polar_rows(const Eigen::MatrixXd& rows) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

// Symmetric extension breaks orthogonality of the boundary rows; for db10 or
// coif5 the condition number reaches ~1e4 per level and compounds across
// levels. Re-orthonormalise: high-pass rows keep their span (so vanishing
// moments survive), low-pass rows are projected off them. Rows whose support
// never touches the boundary are already orthonormal and come out unchanged.
Eigen::MatrixXd orthonormalise_boundary(const Eigen::MatrixXd& a, int half) {
  const Eigen::MatrixXd hi = polar_rows(a.bottomRows(half));
  const Eigen::MatrixXd lo_raw = a.topRows(half);
  Eigen::MatrixXd lo = polar_rows(lo_raw - (lo_raw * hi.transpose()) * hi);
  // The constant signal lies in the low-pass span; a Householder reflection
  // confined to the boundary rows makes it map to a constant again, so
  // deeper levels still see flat input.
  const Eigen::VectorXd gain = lo.rowwise().sum();
  const Eigen::VectorXd v =
      gain - Eigen::VectorXd::Constant(half, gain.norm() / std::sqrt(static_cast<double>(half)));
  if (v.squaredNorm() > 1e-28) lo -= (2.0 / v.squaredNorm()) * v * (v.transpose() * lo);
  Eigen::MatrixXd out(a.rows(), a.cols());
  out.topRows(half) = lo;
  out.bottomRows(half) = hi;
  return out;
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

// Load-time sanity check of the embedded taps: the periodic operator built
// from the synthesis filters must invert the analysis operator.
void verify(const WaveletSpec& w) {
  if (w.dec_lo.size() != w.dec_hi.size() || w.rec_lo.size() != w.rec_hi.size() ||
      w.dec_lo.size() != w.rec_lo.size()) {
    throw CatalogError(fmt::format("basis {}: inconsistent filter lengths", w.name));
  }
  if (std::abs(sum(w.dec_lo) - std::sqrt(2.0)) > 1e-10 || std::abs(sum(w.dec_hi)) > 1e-10) {
    throw CatalogError(fmt::format("basis {}: low-pass gain or high-pass DC is off", w.name));
  }
  const int half = 32;
  const Eigen::MatrixXd analysis = padded_analysis(w, BoundaryMode::kPeriodic, half);
  WaveletSpec dual = w;
  dual.dec_lo.assign(w.rec_lo.rbegin(), w.rec_lo.rend());
  dual.dec_hi.assign(w.rec_hi.rbegin(), w.rec_hi.rend());
  const Eigen::MatrixXd synthesis = padded_analysis(dual, BoundaryMode::kPeriodic, half).transpose();
  const double err = (synthesis * analysis - Eigen::MatrixXd::Identity(2 * half, 2 * half))
                         .cwiseAbs()
                         .maxCoeff();
  if (err > 1e-10) {
    throw CatalogError(fmt::format("basis {}: perfect reconstruction check failed ({})", w.name, err));
  }
}

const std::map<std::string, WaveletSpec, std::less<>>& catalog() {
  static const auto table = [] {
    std::map<std::string, WaveletSpec, std::less<>> out;
    for (const auto& e : raw_catalog()) {
      WaveletSpec w{e.name, e.family, e.vanishing_moments, e.dec_lo, e.dec_hi, e.rec_lo, e.rec_hi};
      verify(w);
      out.emplace(w.name, std::move(w));
    }
    return out;
  }();
  return table;
}

std::vector<std::pair<int, int>> level_shapes(int rows, int cols, int levels) {
  std::vector<std::pair<int, int>> shapes{{rows, cols}};
  for (int l = 0; l < levels; ++l) {
    const auto [r, c] = shapes.back();
    shapes.emplace_back((r + 1) / 2, (c + 1) / 2);
  }
  return shapes;
}

}  // namespace

const WaveletSpec& catalog_lookup(std::string_view name) {
  const auto& table = catalog();
  const auto it = table.find(name);
  if (it == table.end()) throw CatalogError(fmt::format("unknown wavelet basis '{}'", name));
  return it->second;
}

const std::vector<std::string>& sweep_catalog() {
  static const std::vector<std::string> names = {
      "db4",     "db10",    "coif1",   "coif4",   "coif5",   "sym4",    "sym10",  "bior2.2",
      "bior2.4", "bior3.3", "bior3.7", "bior3.9", "bior6.8", "rbio3.7", "rbio6.8"};
  return names;
}

std::vector<std::string> catalog_names() {
  std::vector<std::string> names;
  for (const auto& [name, spec] : catalog()) names.push_back(name);
  return names;
}

std::string_view to_string(BoundaryMode mode) {
  return mode == BoundaryMode::kSymmetric ? "symmetric" : "periodic";
}

BoundaryMode parse_boundary_mode(std::string_view text) {
  if (text == "symmetric") return BoundaryMode::kSymmetric;
  if (text == "periodic") return BoundaryMode::kPeriodic;
  throw ConfigError(fmt::format("unknown boundary mode '{}'", text));
}

FilterBank1D::FilterBank1D(const WaveletSpec& basis, BoundaryMode mode, int n)
    : n_(n), half_((n + 1) / 2) {
  if (n < 1) throw ConfigError("filter bank length must be positive");
  const int m = 2 * half_;
  Eigen::MatrixXd padded = padded_analysis(basis, mode, half_);
  if (mode == BoundaryMode::kSymmetric && basis.family == WaveletFamily::kOrthogonal) {
    padded = orthonormalise_boundary(padded, half_);
  }
  // Padding operator folds the duplicated last sample back onto x[n-1].
  Eigen::MatrixXd analysis = padded.leftCols(n);
  if (m > n) analysis.col(n - 1) += padded.col(m - 1);

  const Eigen::MatrixXd inverse = padded.fullPivLu().inverse();
  const double residual =
      (inverse * padded - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
  if (!std::isfinite(residual) || residual > 1e-9) {
    throw LevelError(fmt::format("basis {} has no stable inverse at length {} in {} mode",
                                 basis.name, n, to_string(mode)));
  }
  // The inverse is banded apart from boundary blocks; entries below the
  // cutoff are rounding residue of exact zeros.
  constexpr double kCutoff = 1e-15;
  analysis_ = analysis.sparseView(1.0, kCutoff);
  synthesis_ = Eigen::MatrixXd(inverse.topRows(n)).sparseView(1.0, kCutoff);
}

std::shared_ptr<const FilterBank1D> FilterBank1D::get(const WaveletSpec& basis,
                                                      BoundaryMode mode, int n) {
  using Key = std::tuple<std::string, BoundaryMode, int>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const FilterBank1D>> cache;
  Key key{basis.name, mode, n};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto bank = std::make_shared<const FilterBank1D>(basis, mode, n);
  std::lock_guard lock(mutex);
  return cache.emplace(std::move(key), std::move(bank)).first->second;
}

int max_levels(int rows, int cols, const WaveletSpec& basis) {
  const int taps = basis.tap_count();
  int levels = 0;
  while (std::ldexp(static_cast<double>(std::min(rows, cols)), -(levels + 1)) >= taps) ++levels;
  return levels;
}

int max_decomposable_levels(int rows, int cols) {
  int size = std::min(rows, cols);
  int levels = 0;
  while (size >= 2) {
    size = (size + 1) / 2;
    ++levels;
  }
  return levels;
}

DecompositionTree decompose(const Grid& frame, const WaveletSpec& basis, int levels,
                            BoundaryMode mode) {
  const int rows = static_cast<int>(frame.rows());
  const int cols = static_cast<int>(frame.cols());
  if (levels < 1) throw LevelError(fmt::format("decomposition level {} is below 1", levels));
  if (max_levels(rows, cols, basis) == 0) {
    throw LevelError(fmt::format("a {}x{} frame is too small for one level of {} ({} taps)", rows,
                                 cols, basis.name, basis.tap_count()));
  }
  if (levels > max_decomposable_levels(rows, cols)) {
    throw LevelError(fmt::format("level {} exceeds the {} levels a {}x{} frame supports", levels,
                                 max_decomposable_levels(rows, cols), rows, cols));
  }

  DecompositionTree tree;
  tree.basis = basis.name;
  tree.boundary = mode;
  tree.rows = rows;
  tree.cols = cols;
  Grid current = frame;
  for (int l = 0; l < levels; ++l) {
    const auto row_bank = FilterBank1D::get(basis, mode, static_cast<int>(current.rows()));
    const auto col_bank = FilterBank1D::get(basis, mode, static_cast<int>(current.cols()));
    const int hr = row_bank->half();
    const int hc = col_bank->half();
    // Filter along each row first, then down each column.
    const Grid across = current * col_bank->analysis().transpose();
    const Grid both = row_bank->analysis() * across;
    DetailBands bands{both.bottomLeftCorner(hr, hc), both.topRightCorner(hr, hc),
                      both.bottomRightCorner(hr, hc)};
    current = both.topLeftCorner(hr, hc);
    tree.approximations.push_back(current);
    tree.details.push_back(bands.summed());
    tree.sub_bands.push_back(std::move(bands));
  }
  return tree;
}

namespace {

// Synthesis starting from the stored approximation of level `top`.
Grid synthesize(const DecompositionTree& tree, int top, bool keep_approximation,
                const std::vector<bool>& keep_detail) {
  const WaveletSpec& basis = catalog_lookup(tree.basis);
  const auto shapes = level_shapes(tree.rows, tree.cols, top);
  const auto kept = [&](int level) {
    return static_cast<std::size_t>(level - 1) < keep_detail.size() && keep_detail[level - 1];
  };

  Grid current = keep_approximation ? tree.approximations[top - 1]
                                    : Grid::Zero(shapes[top].first, shapes[top].second);
  bool nonzero = keep_approximation;
  for (int level = top; level >= 1; --level) {
    const auto [rows, cols] = shapes[level - 1];
    if (!nonzero && !kept(level)) {
      current = Grid::Zero(rows, cols);
      continue;
    }
    const auto row_bank = FilterBank1D::get(basis, tree.boundary, rows);
    const auto col_bank = FilterBank1D::get(basis, tree.boundary, cols);
    const int hr = row_bank->half();
    const int hc = col_bank->half();
    Grid packed = Grid::Zero(2 * hr, 2 * hc);
    packed.topLeftCorner(hr, hc) = current;
    if (kept(level)) {
      const auto& b = tree.sub_bands[level - 1];
      packed.bottomLeftCorner(hr, hc) = b.horizontal;
      packed.topRightCorner(hr, hc) = b.vertical;
      packed.bottomRightCorner(hr, hc) = b.diagonal;
      nonzero = true;
    }
    const Grid across = row_bank->synthesis() * packed;
    current = across * col_bank->synthesis().transpose();
  }
  return current;
}

}  // namespace

Grid reconstruct(const DecompositionTree& tree, bool keep_approximation,
                 const std::vector<bool>& keep_detail) {
  if (tree.levels() == 0) throw LevelError("cannot reconstruct an empty decomposition");
  return synthesize(tree, tree.levels(), keep_approximation, keep_detail);
}

Grid reconstruct_band(const DecompositionTree& tree, int level_lo, int level_hi) {
  if (level_lo < 1 || level_lo > level_hi || level_hi > tree.levels()) {
    throw LevelError(fmt::format("band {}:{} is outside 1:{}", level_lo, level_hi, tree.levels()));
  }
  std::vector<bool> keep(tree.levels(), false);
  for (int l = level_lo; l <= level_hi; ++l) keep[l - 1] = true;
  return reconstruct(tree, false, keep);
}

Grid reconstruct_full(const DecompositionTree& tree) {
  return reconstruct(tree, true, std::vector<bool>(tree.levels(), true));
}

Grid reconstruct_approximation(const DecompositionTree& tree, int level) {
  if (level < 1 || level > tree.levels()) {
    throw LevelError(fmt::format("approximation level {} is outside 1:{}", level, tree.levels()));
  }
  return synthesize(tree, level, true, {});
}

}  // namespace thermowave
