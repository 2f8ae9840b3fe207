#include <doctest.h>

#include <cmath>

#include <thermowave/errors.hpp>
#include <thermowave/metrics.hpp>
#include <thermowave/phantom.hpp>

#include "support.hpp"

using namespace thermowave;

namespace {

GroundTruth small_truth() {
  GroundTruth t;
  t.faults = {{2, {20, 40}, 3, 8}, {1, {20, 20}, 6, 4}};
  t.background_windows = {FrameWindow{{45, 10}, 5}, FrameWindow{{45, 50}, 5}};
  return t;
}

}  // namespace

TEST_CASE("window SNR analytic values") {
  const auto truth = small_truth();
  Grid map = Grid::Constant(60, 60, 0.3);
  CHECK(std::abs(window_snr_db(map, FrameWindow{{20, 20}, 5}, truth.background_windows)) < 1e-12);

  map.block(15, 15, 11, 11).setConstant(3.0);
  CHECK(std::abs(window_snr_db(map, FrameWindow{{20, 20}, 5}, truth.background_windows) - 20.0) <
        1e-9);

  // Background windows with different powers are averaged as powers.
  map.block(40, 45, 11, 11).setConstant(0.9);
  const double noise = (0.09 + 0.81) / 2.0;
  CHECK(window_snr_db(map, FrameWindow{{20, 20}, 5}, truth.background_windows) ==
        doctest::Approx(10.0 * std::log10(9.0 / noise)).epsilon(1e-12));

  CHECK_THROWS_AS(window_snr_db(Grid::Zero(60, 60), FrameWindow{{20, 20}, 5},
                                truth.background_windows),
                  DegenerateError);
  CHECK_THROWS_AS(window_snr_db(map, FrameWindow{{20, 20}, 5}, {}), ConfigError);
  CHECK_THROWS_AS(window_snr_db(map, FrameWindow{{2, 20}, 5}, truth.background_windows),
                  BoundsError);
}

TEST_CASE("SNR is invariant to positive scaling") {
  const Grid m = testing::random_grid(60, 60, 4);
  const auto bg = small_truth().background_windows;
  const FrameWindow w{{20, 30}, 5};
  CHECK(window_snr_db(10.0 * m, w, bg) == doctest::Approx(window_snr_db(m, w, bg)).epsilon(1e-12));
}

TEST_CASE("identity pipeline scores zero improvement, ordered by id") {
  std::vector<Grid> frames;
  for (int t = 0; t < 5; ++t) frames.push_back(testing::random_grid(60, 60, 10 + t));
  const auto cube = DataCube::from_frames(frames, 1.0);
  const auto recs = snr_improvement(cube, cube.temporal_mean(), small_truth());
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].fault_id == 1);
  CHECK(recs[1].fault_id == 2);
  for (const auto& r : recs) CHECK(std::abs(r.improvement_db) < 1e-9);

  const auto scaled = snr_improvement(cube, 10.0 * cube.temporal_mean(), small_truth());
  for (const auto& r : scaled) CHECK(std::abs(r.improvement_db) < 1e-9);
}

TEST_CASE("best-frame reference uses the strongest raw frame") {
  std::vector<Grid> frames;
  for (int t = 0; t < 4; ++t) frames.push_back(testing::random_grid(60, 60, 20 + t));
  const auto cube = DataCube::from_frames(frames, 1.0);
  const auto truth = small_truth();
  const auto recs = snr_improvement(cube, cube.frame(0), truth, RawReference::kBestFrame);
  for (const auto& r : recs) {
    const auto win = truth.fault_window(truth.fault(r.fault_id));
    double best = -1e300;
    for (int t = 0; t < 4; ++t) best = std::max(best, window_snr_db(cube.frame(t), win, truth.background_windows));
    CHECK(r.snr_raw_db == doctest::Approx(best).epsilon(1e-12));
    CHECK(r.improvement_db <= 1e-12);
  }
}

TEST_CASE("shape mismatch is reported") {
  const DataCube cube(60, 60, 1, 1.0, std::vector<float>(3600, 1.0f));
  CHECK_THROWS_AS(snr_improvement(cube, Grid::Zero(60, 59), small_truth()), ShapeError);
}
