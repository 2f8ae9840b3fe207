#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "thermowave/grid.hpp"

namespace thermowave {

enum class WaveletFamily { kOrthogonal, kBiorthogonal };

// A named two-channel filter bank. Taps follow the usual convention where
// rec filters are the time-reversed dec filters for orthogonal families.
struct WaveletSpec {
  std::string name;
  WaveletFamily family = WaveletFamily::kOrthogonal;
  int vanishing_moments = 0;
  std::vector<double> dec_lo;
  std::vector<double> dec_hi;
  std::vector<double> rec_lo;
  std::vector<double> rec_hi;

  int tap_count() const { return static_cast<int>(dec_lo.size()); }
  int synthesis_length() const {
    return static_cast<int>(std::max(rec_lo.size(), rec_hi.size()));
  }
};

// Throws CatalogError for unknown names. The returned reference is stable
// for the program lifetime.
const WaveletSpec& catalog_lookup(std::string_view name);

// The fifteen bases of the basis sweep, in sweep order. `haar` is in the
// catalog but not in this list.
const std::vector<std::string>& sweep_catalog();

// Every catalog key including `haar`.
std::vector<std::string> catalog_names();

enum class BoundaryMode { kSymmetric, kPeriodic };

std::string_view to_string(BoundaryMode mode);
BoundaryMode parse_boundary_mode(std::string_view text);

// One level of the 1D filter bank for a fixed signal length n, realised as a
// pair of dense operators. The analysis output holds ceil(n/2) low-pass
// coefficients followed by ceil(n/2) high-pass coefficients; odd signals are
// padded by repeating the last sample before boundary extension. Synthesis is
// the exact left inverse of analysis.
class FilterBank1D {
 public:
  // Cached per (basis, mode, n); safe to call concurrently.
  static std::shared_ptr<const FilterBank1D> get(const WaveletSpec& basis, BoundaryMode mode,
                                                 int n);

  FilterBank1D(const WaveletSpec& basis, BoundaryMode mode, int n);

  int length() const { return n_; }
  int half() const { return half_; }
  using Operator = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  // (2*half) x n
  const Operator& analysis() const { return analysis_; }
  // n x (2*half)
  const Operator& synthesis() const { return synthesis_; }

 private:
  int n_;
  int half_;
  Operator analysis_;
  Operator synthesis_;
};

// Oriented detail sub-bands of one level. `horizontal` is high-pass along
// rows (vertical filtering) and low-pass along columns; `vertical` is the
// transpose arrangement; `diagonal` is high-pass in both directions.
struct DetailBands {
  Grid horizontal;
  Grid vertical;
  Grid diagonal;

  Grid summed() const { return horizontal + vertical + diagonal; }
};

struct DecompositionTree {
  std::string basis;
  BoundaryMode boundary = BoundaryMode::kSymmetric;
  int rows = 0;
  int cols = 0;
  // Index l-1 holds level l.
  std::vector<Grid> approximations;
  std::vector<DetailBands> sub_bands;
  // horizontal + vertical + diagonal per level, for inspection only.
  std::vector<Grid> details;

  int levels() const { return static_cast<int>(sub_bands.size()); }
};

// Largest L with min(rows, cols) / 2^L >= tap count, i.e. the number of
// levels whose coarsest band still spans the whole filter.
int max_levels(int rows, int cols, const WaveletSpec& basis);

// Largest L such that every level still splits a band of at least two
// samples. Decompositions past max_levels() are allowed up to this bound.
int max_decomposable_levels(int rows, int cols);

// Throws LevelError when levels < 1, when the frame cannot hold even one
// clean level (max_levels() == 0), or when levels exceeds
// max_decomposable_levels().
DecompositionTree decompose(const Grid& frame, const WaveletSpec& basis, int levels,
                            BoundaryMode mode = BoundaryMode::kSymmetric);

// Synthesis keeping only the chosen parts: the level-L approximation when
// keep_approximation is set and the detail triplets of levels flagged in
// keep_detail (index l-1 for level l). Missing flags count as false.
Grid reconstruct(const DecompositionTree& tree, bool keep_approximation,
                 const std::vector<bool>& keep_detail);

// Details of levels lo..hi only; the approximation is zeroed.
Grid reconstruct_band(const DecompositionTree& tree, int level_lo, int level_hi);

Grid reconstruct_full(const DecompositionTree& tree);

// The level-`level` approximation synthesised back to full resolution, all
// details at and below that level zeroed.
Grid reconstruct_approximation(const DecompositionTree& tree, int level);

}  // namespace thermowave
