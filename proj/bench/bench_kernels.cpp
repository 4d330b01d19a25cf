#include <benchmark/benchmark.h>

#include "mfris/kernels.hpp"

namespace {

const mfris::NetworkScenario& scenario() {
  static const auto s = mfris::NetworkScenario::full_defaults();
  return s;
}

const std::vector<mfris::EvalInstance>& instances() {
  static const auto batch = [] {
    mfris::Rng rng(7);
    return mfris::random_instances(scenario(), 256, rng);
  }();
  return batch;
}

void BM_EvaluateSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(mfris::evaluate_batch_serial(scenario(), instances(), {}));
}
BENCHMARK(BM_EvaluateSerial)->Unit(benchmark::kMillisecond);

void BM_EvaluateOmp(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(mfris::evaluate_batch_omp(scenario(), instances(), {}));
}
BENCHMARK(BM_EvaluateOmp)->Unit(benchmark::kMillisecond);

struct NetFixture {
  mfris::nn::Mlp net;
  Eigen::MatrixXd inputs;
  NetFixture() {
    mfris::Rng rng(3);
    net = mfris::nn::Mlp({48, 256, 256, 65}, rng);
    inputs = Eigen::MatrixXd::Random(48, 512);
  }
};

const NetFixture& fixture() {
  static const NetFixture f;
  return f;
}

void BM_ForwardSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(mfris::forward_columns_serial(fixture().net, fixture().inputs));
}
BENCHMARK(BM_ForwardSerial)->Unit(benchmark::kMillisecond);

void BM_ForwardOmp(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(mfris::forward_columns_omp(fixture().net, fixture().inputs));
}
BENCHMARK(BM_ForwardOmp)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
