#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/LU>

#include <thermowave/errors.hpp>
#include <thermowave/phantom.hpp>
#include <thermowave/selection.hpp>

#include "support.hpp"

using namespace thermowave;
using testing::random_grid;

namespace {

// Gaussian MI of the stacked neighbourhoods, written out with explicit loops
// and an LU log-determinant.
double rmi_oracle(const Grid& a, const Grid& b, int r) {
  const int side = 2 * r + 1;
  const int k = side * side;
  const int d = 2 * k;
  std::vector<Eigen::VectorXd> points;
  for (int i = r; i < a.rows() - r; ++i) {
    for (int j = r; j < a.cols() - r; ++j) {
      Eigen::VectorXd p(d);
      int n = 0;
      for (int di = -r; di <= r; ++di)
        for (int dj = -r; dj <= r; ++dj) p(n++) = a(i + di, j + dj);
      for (int di = -r; di <= r; ++di)
        for (int dj = -r; dj <= r; ++dj) p(n++) = b(i + di, j + dj);
      points.push_back(p);
    }
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& p : points) cov += (p - mean) * (p - mean).transpose();
  cov /= static_cast<double>(points.size());
  cov.diagonal().array() += 1e-9 * cov.trace() / d;
  const auto logdet = [](const Eigen::MatrixXd& m) {
    return std::log(Eigen::PartialPivLU<Eigen::MatrixXd>(m).determinant());
  };
  // The (2 pi e)^d factors cancel between the three entropies.
  return 0.5 * (logdet(cov.topLeftCorner(k, k)) + logdet(cov.bottomRightCorner(k, k)) - logdet(cov));
}

Grid smooth_field(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  Grid g = Grid::Zero(rows, cols);
  for (int k = 0; k < 6; ++k) {
    const double fx = 0.05 + 0.05 * k, fy = 0.3 - 0.04 * k, ph = u(rng);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) g(i, j) += std::sin(fx * i + fy * j + ph);
  }
  return g;
}

GroundTruth two_fault_truth() {
  GroundTruth t;
  t.faults = {{1, {20, 20}, 6, 4}, {2, {20, 40}, 3, 8}};
  t.background_windows = {FrameWindow{{45, 10}, 5}, FrameWindow{{45, 50}, 5}};
  return t;
}

const Phantom& short_phantom() {
  static const Phantom ph = [] {
    auto cfg = PhantomConfig::standard(10.0, 42);
    cfg.noise_sigma = 0.0;
    return generate_phantom(cfg);
  }();
  return ph;
}

}  // namespace

TEST_CASE("RMI agrees with a direct Gaussian oracle") {
  const Grid a = random_grid(14, 17, 1);
  const Grid b = 0.6 * a + 0.4 * random_grid(14, 17, 2);
  CHECK(regional_mutual_information(a, b, 1) == doctest::Approx(rmi_oracle(a, b, 1)).epsilon(1e-8));
  const Grid s = smooth_field(20, 22, 5);
  CHECK(regional_mutual_information(s, s + random_grid(20, 22, 3), 1) ==
        doctest::Approx(rmi_oracle(s, s + random_grid(20, 22, 3), 1)).epsilon(1e-8));
}

TEST_CASE("RMI properties") {
  const Grid a = smooth_field(64, 64, 1) + 0.1 * random_grid(64, 64, 9);
  const double self = regional_mutual_information(a, a);
  CHECK(self > 0.0);
  CHECK(std::isfinite(self));
  CHECK(regional_mutual_information(a, (a.array() + 7.5).matrix()) ==
        doctest::Approx(self).epsilon(1e-6));

  const Grid b = smooth_field(64, 64, 2) + random_grid(64, 64, 10);
  CHECK(std::abs(regional_mutual_information(a, b) - regional_mutual_information(b, a)) < 1e-9);
  CHECK(regional_mutual_information(a, b) >= 0.0);

  CHECK_THROWS_AS(regional_mutual_information(a, Grid::Zero(64, 63)), ShapeError);
  CHECK_THROWS_AS(regional_mutual_information(Grid::Zero(2, 2), Grid::Zero(2, 2)), ShapeError);
}

TEST_CASE("independent white noise carries almost no regional information") {
  const Grid a = random_grid(200, 200, 31);
  const Grid b = random_grid(200, 200, 32);
  const double normalised = regional_mutual_information(a, b) / regional_mutual_information(a, a);
  CHECK(normalised < 0.05);
}

TEST_CASE("stagnation rule") {
  CHECK(stagnation_level({1.0, 0.6, 0.45, 0.33, 0.24, 0.15, 0.145, 0.14}, 0.2) == 6);
  CHECK(stagnation_level({1.0, 0.5, 0.49, 0.48}, 0.2) == 2);
  CHECK(stagnation_level({1.0, 0.8, 0.6, 0.4}, 0.2) == 4);
  CHECK_THROWS_AS(stagnation_level({1.0}, 0.2), ConfigError);
}

TEST_CASE("white-noise cube stagnates at level 2") {
  std::vector<Grid> frames;
  for (int t = 0; t < 4; ++t) frames.push_back(random_grid(64, 64, 300 + t));
  const auto cube = DataCube::from_frames(frames, 1.0);
  LevelSelectionConfig cfg;
  cfg.basis = "db4";
  cfg.max_level = 5;
  const auto p = select_level(cube, cfg);
  CHECK(p.selected_level == 2);
  CHECK(p.m_avg[0] < 0.7);
  CHECK(p.m_avg[0] - p.m_avg[1] > 5.0 * (p.m_avg[1] - p.m_avg[2]));
}

TEST_CASE("phantom RMI profile is non-increasing and selection is basis-stable") {
  const auto& ph = short_phantom();
  LevelSelectionConfig cfg;
  cfg.frame_stride = 16;
  const auto a = select_level(ph.cube, cfg);
  REQUIRE(a.m_avg.size() == 8);
  CHECK(a.m_avg[0] <= 1.0);
  for (int l = 1; l < 8; ++l) {
    CHECK(a.m_avg[l] <= a.m_avg[l - 1] + 1e-6);
    CHECK(a.m_avg[l] >= 0.0);
  }
  cfg.basis = "bior6.8";
  CHECK(select_level(ph.cube, cfg).selected_level == a.selected_level);
}

TEST_CASE("level selection validates its inputs") {
  const auto& cube = short_phantom().cube;
  LevelSelectionConfig cfg;
  cfg.max_level = 1;
  CHECK_THROWS_AS(select_level(cube, cfg), ConfigError);
  cfg.max_level = 9;
  CHECK_THROWS_AS(select_level(cube, cfg), LevelError);
  cfg = LevelSelectionConfig{};
  cfg.tau = 0.0;
  CHECK_THROWS_AS(select_level(cube, cfg), ConfigError);
}

TEST_CASE("basis cost of synthetic maps") {
  const auto truth = two_fault_truth();
  Grid map = Grid::Constant(60, 60, 0.5);
  const Grid pattern = random_grid(11, 11, 4);
  map.block(15, 15, 11, 11) = pattern;
  map.block(15, 35, 11, 11) = pattern;
  const auto same = basis_cost_from_map(map, truth);
  CHECK(same.cost == 0.0);
  CHECK(same.per_fault_numerators == std::vector<double>{0.0});

  // Numerator and denominator by hand.
  map.block(15, 35, 11, 11).setConstant(0.5);
  const auto s = basis_cost_from_map(map, truth);
  const double num = (pattern.array() - 0.5).matrix().norm();
  CHECK(s.per_fault_numerators[0] == doctest::Approx(num).epsilon(1e-12));
  CHECK(s.denominator == doctest::Approx(num).epsilon(1e-12));
  CHECK(s.cost == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(basis_cost_from_map(Grid::Constant(60, 60, 3.0), truth), DegenerateError);
  auto far = truth;
  far.faults[1].center = Pixel{58, 58};
  CHECK_THROWS_AS(basis_cost_from_map(map, far), BoundsError);
  auto lonely = truth;
  lonely.faults.pop_back();
  CHECK_THROWS_AS(basis_cost_from_map(map, lonely), ConfigError);
}

TEST_CASE("best score breaks ties by name") {
  const std::vector<BasisScore> scores = {{"sym4", 2.0, {}, 1.0}, {"db4", 2.0, {}, 1.0},
                                          {"coif1", 3.0, {}, 1.0}};
  CHECK(best_score(scores).basis == "db4");
  CHECK_THROWS_AS(best_score({}), SelectionError);
}

TEST_CASE("basis cost is invariant to positive scaling") {
  const auto& ph = short_phantom();
  const DetectorConfig cfg;
  const auto a = basis_cost(ph.cube, ph.truth, "rbio6.8", cfg);
  const auto b = basis_cost(ph.cube.scaled(3.0), ph.truth, "rbio6.8", cfg);
  CHECK(std::abs(a.cost - b.cost) / a.cost < 1e-8);
  CHECK(a.per_fault_numerators.size() == 11);
  CHECK(a.denominator > 0.0);
}

TEST_CASE("basis sweep is deterministic and order independent") {
  const auto& ph = short_phantom();
  const std::vector<std::string> names = {"rbio6.8", "db4", "sym10", "bior2.2"};
  auto reversed = names;
  std::reverse(reversed.begin(), reversed.end());
  const auto a = select_basis(ph.cube, ph.truth, names, DetectorConfig{});
  const auto b = select_basis(ph.cube, ph.truth, names, DetectorConfig{});
  const auto c = select_basis(ph.cube, ph.truth, reversed, DetectorConfig{});
  CHECK(a.best == b.best);
  CHECK(a.best == c.best);
  REQUIRE(a.scores.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(a.scores[i].basis == names[i]);
    CHECK(a.scores[i].cost == b.scores[i].cost);
    CHECK(a.scores[i].cost == c.scores[3 - i].cost);
  }
  CHECK(select_basis(ph.cube, ph.truth, {"coif1"}, DetectorConfig{}).best == "coif1");
}

TEST_CASE("degenerate sweeps") {
  const DataCube zero(160, 200, 2, 1.0, std::vector<float>(160 * 200 * 2, 0.0f));
  const auto truth = standard_ground_truth();
  CHECK_THROWS_AS(select_basis(zero, truth, {"db4", "haar"}, DetectorConfig{}), SelectionError);
  CHECK_THROWS_AS(select_basis(zero, truth, {}, DetectorConfig{}), ConfigError);
  CHECK_THROWS_AS(select_basis(zero, truth, {"db99"}, DetectorConfig{}), CatalogError);
}
