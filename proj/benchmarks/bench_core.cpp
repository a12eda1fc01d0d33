#include <memory>

#include <benchmark/benchmark.h>

#include "scoreinv/dsm.hpp"
#include "scoreinv/fft.hpp"
#include "scoreinv/forward_models.hpp"
#include "scoreinv/hmc.hpp"
#include "scoreinv/metrics.hpp"
#include "scoreinv/parallel.hpp"
#include "scoreinv/phantom.hpp"
#include "scoreinv/score_models.hpp"

using namespace scoreinv;

namespace {

Tensor random_image(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed, 0);
  return gaussian_sample(rng, {n, n, 2});
}

void BM_Fft2(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor x = random_image(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fft2_packed(x));
}
BENCHMARK(BM_Fft2)->RangeMultiplier(2)->Range(16, 128);

void BM_ConvScore(benchmark::State& state) {
  RngStream rng(2, 0);
  const ScoreNetwork net = make_conv_network(2, static_cast<std::size_t>(state.range(0)), 5, rng, {}, 3, {1, 2, 4, 8, 1});
  const Tensor x = random_image(32, 3);
  for (auto _ : state) benchmark::DoNotOptimize(net.score(x, 0.3));
}
BENCHMARK(BM_ConvScore)->Arg(16)->Arg(32);

void BM_MlpScore(benchmark::State& state) {
  RngStream rng(4, 0);
  const ScoreNetwork net = make_mlp_network(2, 128, 4, rng);
  const Tensor x = Tensor::vector({0.3, -0.2});
  for (auto _ : state) benchmark::DoNotOptimize(net.score(x, 0.3));
}
BENCHMARK(BM_MlpScore);

void BM_DsmStep(benchmark::State& state) {
  RngStream rng(5, 0);
  const ScoreNetwork net = make_conv_network(2, 16, 5, rng, {}, 3, {1, 2, 4, 8, 1});
  PhantomSpec spec;
  const Tensor images = make_phantoms(spec, 8);
  Tensor batch({8, 32, 32, 2});
  for (std::size_t i = 0; i < images.size(); ++i) batch[2 * i] = images[i];
  const NoiseDraw noise = draw_dsm_noise(rng, batch.shape(), 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(dsm_loss_and_gradient(net, batch, noise));
}
BENCHMARK(BM_DsmStep)->Unit(benchmark::kMillisecond);

void BM_PathIntegral(benchmark::State& state) {
  const GaussianMixtureScore moons = make_two_moons();
  const FieldAt field = [&](const Tensor& x) { return moons.score(x, 0.0); };
  const Tensor a = Tensor::vector({0.1, 0.2});
  const Tensor b = Tensor::vector({0.4, -0.1});
  const int nodes = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(path_integral_logdiff(field, a, b, nodes));
}
BENCHMARK(BM_PathIntegral)->Arg(5)->Arg(9);

void BM_MhStepMri(benchmark::State& state) {
  RngStream rng(6, 0);
  const ScoreNetwork net = make_conv_network(2, 16, 5, rng, {}, 3, {1, 2, 4, 8, 1});
  PhantomSpec spec;
  const Tensor truth = to_complex(make_phantoms(spec, 1).slice(0));
  RngStream mrng(7, 0);
  auto op = std::make_shared<MaskedFourierOperator>(MaskedFourierOperator::from_columns(make_mask({}, 32, mrng), 32));
  RngStream nrng(8, 0);
  const GaussianLikelihood lik(op, simulate_measurement(*op, truth, 0.1, nrng), 0.1);
  const TemperedPosterior post(net, &lik);
  const FieldAt field = [&](const Tensor& x) { return post.score(x, 0.1); };
  ChainState chain{zero_filled(lik).pack(), {}, 0.1, RngStream(9, 0), {}, {}, -1.0};
  MhOptions opts;
  for (auto _ : state) benchmark::DoNotOptimize(mh_step(chain, field, 0.01, opts));
}
BENCHMARK(BM_MhStepMri)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
