#include <doctest.h>

#include <cmath>

#include <thermowave/detector.hpp>
#include <thermowave/errors.hpp>
#include <thermowave/phantom.hpp>
#include <thermowave/postproc.hpp>

#include "support.hpp"

using namespace thermowave;

TEST_CASE("correlation of the excitation with itself and its negation") {
  const ExcitationSequence e({1, 0, 0, 1, 1, 1, 0, 1, 0, 0}, 1.0);
  std::vector<float> v;
  for (auto b : e.bits()) {
    v.push_back(static_cast<float>(b));
    v.push_back(-static_cast<float>(b));
    v.push_back(7.0f);
    v.push_back(3.0f * b + 2.0f);
  }
  const DataCube c(2, 2, 10, 1.0, v);
  const Grid corr = excitation_correlation(c, e);
  CHECK(std::abs(corr(0, 0) - 1.0) < 1e-12);
  CHECK(std::abs(corr(0, 1) + 1.0) < 1e-12);
  CHECK(corr(1, 0) == 0.0);
  CHECK(std::abs(corr(1, 1) - 1.0) < 1e-12);
  CHECK_THROWS_AS(excitation_correlation(c, ExcitationSequence({1, 0}, 1.0)), ShapeError);
}

TEST_CASE("correlation stays within [-1, 1]") {
  std::vector<Grid> frames;
  for (int t = 0; t < 31; ++t) frames.push_back(testing::random_grid(20, 20, t));
  const auto cube = DataCube::from_frames(frames, 1.0);
  const Grid corr = excitation_correlation(cube, generate_prbs(31, 3));
  CHECK(corr.maxCoeff() <= 1.0);
  CHECK(corr.minCoeff() >= -1.0);
}

TEST_CASE("suppression rules") {
  const Grid map = testing::random_grid(10, 10, 1);
  Grid corr = 0.5 * testing::random_grid(10, 10, 2);
  CHECK(suppress_correlated(map, corr, 1.0 - 1e-9) == map);
  const Grid near_empty = suppress_correlated(map, corr, 1e-9);
  CHECK(near_empty.cwiseAbs().maxCoeff() == 0.0);

  corr(3, 4) = 0.9;
  corr(5, 5) = -0.95;
  const Grid out = suppress_correlated(map, corr, 0.7);
  CHECK(out(3, 4) == 0.0);
  CHECK(out(5, 5) == 0.0);
  CHECK(out(0, 0) == map(0, 0));
  CHECK(suppress_correlated(out, corr, 0.7) == out);
  CHECK(out.squaredNorm() <= map.squaredNorm());

  CHECK_THROWS_AS(suppress_correlated(map, corr, 0.0), ConfigError);
  CHECK_THROWS_AS(suppress_correlated(map, corr, 1.0), ConfigError);
  CHECK_THROWS_AS(suppress_correlated(map, Grid::Zero(9, 10), 0.5), ShapeError);

  DetectionMap det{map, DetectorConfig{}, 3};
  const auto d = suppress_correlated(det, corr, 0.7);
  CHECK(d.values == out);
  CHECK(d.source_nt == 3);
}

TEST_CASE("foil patch correlates with the excitation, holes do not") {
  auto cfg = PhantomConfig::standard();
  const auto ph = generate_phantom(cfg);
  const ReflectivePatch patch;
  const auto cube = add_reflective_patch(ph.cube, ph.excitation, patch);
  DataCube yr;
  detect(cube, DetectorConfig{}, &yr);
  const Grid corr = excitation_correlation(yr, ph.excitation);

  const auto& w = patch.region;
  const double foil = corr.block(w.center.row - w.half_extent, w.center.col - w.half_extent,
                                 w.side(), w.side()).mean();
  CHECK(foil > 0.8);

  for (const auto& f : ph.truth.faults) {
    const Mask disc = ph.truth.disc_mask(f, 160, 200);
    double s = 0.0;
    int n = 0;
    for (Eigen::Index i = 0; i < disc.size(); ++i) {
      if (disc.data()[i]) {
        s += corr.data()[i];
        ++n;
      }
    }
    CAPTURE(f.id);
    CHECK(s / n < 0.5);
  }
}
