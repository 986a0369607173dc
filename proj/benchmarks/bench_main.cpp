#include "rbmamp/dataset.hpp"
#include "rbmamp/experiment.hpp"
#include "rbmamp/gb_amp.hpp"
#include "rbmamp/rbm.hpp"
#include "rbmamp/rbm_prior.hpp"

#include <benchmark/benchmark.h>

using namespace rbmamp;

namespace {

BinaryRbm make_rbm(int nv, int nh, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 0.05);
  BinaryRbm rbm = BinaryRbm::zeros(nv, nh);
  for (Eigen::Index k = 0; k < rbm.W.size(); ++k) rbm.W.data()[k] = g(rng);
  for (Eigen::Index i = 0; i < nv; ++i) rbm.vbias[i] = g(rng) - 1.0;
  return rbm;
}

Matrix random_binary(int rows, int cols, double p, std::uint64_t seed) {
  Rng rng(seed);
  std::bernoulli_distribution bit(p);
  Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = bit(rng) ? 1.0 : 0.0;
  return m;
}

}  // namespace

static void BM_Denoise(benchmark::State& state) {
  double R = -2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(denoise(R, 0.05, 0.2, 0.6, 0.1));
    R = R > 2.0 ? -2.0 : R + 1e-3;
  }
}
BENCHMARK(BM_Denoise);

static void BM_AmpSweep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  const Vector x = synth_gb_signal(n, 0.2, 0.5, 0.1, rng);
  const MeasurementModel model = make_measurement(x, 0.3, 1e-8, rng);
  const GbPrior prior{Vector::Constant(n, 0.2), 0.5, 0.1};
  AmpState s = init_state(model, prior);
  const AmpOptions opts;
  for (auto _ : state) {
    s = amp_iterate(s, model, prior, opts);
    benchmark::DoNotOptimize(s.a.data());
  }
}
BENCHMARK(BM_AmpSweep)->Arg(784)->Arg(2000);

static void BM_RunAmpIid(benchmark::State& state) {
  Rng rng(2);
  const Vector x = synth_gb_signal(784, 0.15, 0.7, 0.1, rng);
  const MeasurementModel model = make_measurement(x, 0.3, 1e-8, rng);
  for (auto _ : state) {
    BaselineSupportPrior prior(BaselinePrior::iid(0.15));
    benchmark::DoNotOptimize(run_amp(model, prior, 0.7, 0.1, AmpOptions{}).iters);
  }
}
BENCHMARK(BM_RunAmpIid)->Unit(benchmark::kMillisecond);

static void BM_FpiStep(benchmark::State& state) {
  const auto method = state.range(0) == 0 ? Factorization::Nmf : Factorization::Tap;
  const BinaryRbm rbm = make_rbm(784, static_cast<int>(state.range(1)), 3);
  const Vector field = Vector::Constant(784, 0.3);
  MagnetizationState s = MagnetizationState::zeros(784, rbm.n_hidden());
  for (auto _ : state) {
    s = fpi_step(rbm, field, s, method);
    benchmark::DoNotOptimize(s.m_v.data());
  }
}
BENCHMARK(BM_FpiStep)->ArgsProduct({{0, 1}, {128, 500}});

static void BM_SolveFpi(benchmark::State& state) {
  const BinaryRbm rbm = make_rbm(784, 128, 4);
  const Vector field = Vector::Constant(784, -0.5);
  FpiOptions o;
  o.method = Factorization::Tap;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_fpi(rbm, field, o, MagnetizationState::zeros(784, 128)).iters);
  }
}
BENCHMARK(BM_SolveFpi)->Unit(benchmark::kMicrosecond);

static void BM_Cd1Epoch(benchmark::State& state) {
  const BinaryRbm rbm = make_rbm(784, static_cast<int>(state.range(0)), 5);
  const Matrix data = random_binary(1000, 784, 0.2, 6);
  Rng rng(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cd1_epoch(rbm, data, 0.05, 0.001, 100, rng).W.data());
  }
  state.SetItemsProcessed(state.iterations() * data.rows());
}
BENCHMARK(BM_Cd1Epoch)->Arg(128)->Arg(500)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
