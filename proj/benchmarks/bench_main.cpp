#include <random>

#include <benchmark/benchmark.h>

#include <thermowave/baseline.hpp>
#include <thermowave/detector.hpp>
#include <thermowave/phantom.hpp>
#include <thermowave/selection.hpp>
#include <thermowave/wavelet.hpp>

using namespace thermowave;

namespace {

Grid noise_frame(int rows, int cols) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  Grid g(rows, cols);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = n(rng);
  return g;
}

const Phantom& phantom() {
  static const Phantom ph = generate_phantom(PhantomConfig::standard());
  return ph;
}

void BM_DecomposeReconstruct(benchmark::State& state, const char* basis) {
  const Grid frame = noise_frame(160, 200);
  const auto& spec = catalog_lookup(basis);
  const int levels = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const auto tree = decompose(frame, spec, levels);
    benchmark::DoNotOptimize(reconstruct_full(tree));
  }
}
BENCHMARK_CAPTURE(BM_DecomposeReconstruct, haar, "haar")->Arg(1)->Arg(6);
BENCHMARK_CAPTURE(BM_DecomposeReconstruct, rbio6_8, "rbio6.8")->Arg(1)->Arg(6);
BENCHMARK_CAPTURE(BM_DecomposeReconstruct, coif5, "coif5")->Arg(2);

void BM_Detect(benchmark::State& state) {
  const auto& cube = phantom().cube;
  for (auto _ : state) benchmark::DoNotOptimize(detect(cube, DetectorConfig{}));
}
BENCHMARK(BM_Detect)->Unit(benchmark::kMillisecond);

void BM_RegionalMutualInformation(benchmark::State& state) {
  const Grid a = noise_frame(160, 200);
  const Grid b = 0.5 * a + noise_frame(200, 160).transpose();
  for (auto _ : state) benchmark::DoNotOptimize(regional_mutual_information(a, b));
}
BENCHMARK(BM_RegionalMutualInformation)->Unit(benchmark::kMillisecond);

void BM_SvdBaseline(benchmark::State& state) {
  const Eigen::MatrixXd m = unfold(phantom().cube);
  for (auto _ : state) {
    const auto filtered = svd_filter(m, SvdSplit::make(2, 10, static_cast<int>(m.cols())));
    benchmark::DoNotOptimize(hos_maps(filtered, 160, 200));
  }
}
BENCHMARK(BM_SvdBaseline)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
