#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "scoreinv/forward_models.hpp"
#include "scoreinv/quadrature.hpp"
#include "scoreinv/rng.hpp"
#include "scoreinv/score_models.hpp"

namespace scoreinv {

/// Score of the tempered posterior: prior score at sigma plus the tempered
/// likelihood score (prior only when no likelihood is given).
class TemperedPosterior final : public ScoreModel {
 public:
  explicit TemperedPosterior(const ScoreModel& prior, const GaussianLikelihood* likelihood = nullptr);

  Tensor score(const Tensor& x, double sigma) const override;
  std::size_t dim() const override { return prior_->dim(); }

 private:
  const ScoreModel* prior_;
  const GaussianLikelihood* likelihood_;
};

/// Geometric temperature ladder sigma_i = sigma_init * gamma^i with step
/// sizes alpha_i = epsilon * (sigma_i / sigma_init)^exponent. The ladder
/// has T + 1 levels where T = ceil(log(sigma_final / sigma_init) / log(gamma)),
/// the last level clamped to sigma_final.
struct AnnealingSchedule {
  double sigma_init = 1.0;
  double gamma = 0.995;
  double epsilon = 0.1;
  double exponent = 1.5;
  double sigma_final = 0.01;
  std::size_t steps_per_temperature = 3;

  void validate() const;
  std::size_t levels() const;
  double sigma(std::size_t level) const;
  double step_size(std::size_t level) const;
};

struct ChainStats {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
  std::uint64_t divergent = 0;

  double acceptance_rate() const {
    return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
  }
};

/// Position, last momentum, temperature, private RNG stream and counters.
/// `grad` caches the posterior score at x for temperature `grad_sigma`.
struct ChainState {
  Tensor x;
  Tensor m;
  double sigma = 0.0;
  RngStream rng;
  ChainStats stats;
  Tensor grad;
  double grad_sigma = -1.0;
};

using FieldAt = std::function<Tensor(const Tensor&)>;

struct LeapfrogResult {
  Tensor x;
  Tensor m;
  Tensor grad;  // score at the final x
  bool divergent = false;
};

/// n_steps of the leapfrog integrator with identity mass matrix. `grad_x`
/// is the score at x. A non-finite score or position marks the trajectory
/// divergent and stops it.
LeapfrogResult leapfrog(const Tensor& x, const Tensor& m, const Tensor& grad_x, const FieldAt& score, double alpha,
                        int n_steps);
LeapfrogResult leapfrog(const Tensor& x, const Tensor& m, const FieldAt& score, double alpha, int n_steps);

/// Simpson estimate of log p(to) - log p(from) from the score alone, along
/// the straight segment. Optional endpoint scores avoid re-evaluation.
/// Throws NumericalError when a node score is non-finite.
double path_integral_logdiff(const FieldAt& score, const Tensor& from, const Tensor& to, int n_points,
                             const Tensor* grad_from = nullptr, const Tensor* grad_to = nullptr);

struct MhOptions {
  int leapfrog_steps = 5;
  int quad_nodes = kDefaultSimpsonNodes;
  int quad_nodes_long = 9;
  /// RMS per-coordinate displacement above which quad_nodes_long is used.
  double long_step = 1.0;
  /// false: accept every non-divergent proposal (plain annealed HMC).
  bool metropolis = true;
};

struct MhOutcome {
  bool accepted = false;
  bool divergent = false;
  double log_accept = 0.0;  // log Metropolis ratio, NaN when divergent
};

/// One HMC transition at step size alpha with fresh momentum m ~ N(0, I).
/// Accepts with probability min(1, exp(dlogp - dK)) where dlogp is the path
/// integral of the score and dK the kinetic energy change.
MhOutcome mh_step(ChainState& state, const FieldAt& score, double alpha, const MhOptions& options);

struct SamplerConfig {
  AnnealingSchedule schedule;
  MhOptions mh;
  std::size_t n_chains = 4;
  std::uint64_t seed = 0;
  /// Extra MH steps at sigma_final after the ladder; draws are collected
  /// every `thin` of them once the extension starts.
  std::size_t draws_per_chain = 1;
  std::size_t thin = 1;
  bool apply_eds = true;
  /// Temperatures below this are clamped (with a warning).
  double sigma_floor = 1e-3;
  std::size_t workers = 1;
};

struct SampleDiagnostics {
  std::size_t chain = 0;
  ChainStats stats;
  double final_sigma = 0.0;
};

struct PosteriorSampleSet {
  std::vector<Tensor> samples;
  std::vector<SampleDiagnostics> diagnostics;  // one per sample
  AnnealingSchedule schedule;
  std::uint64_t seed = 0;
  std::size_t n_chains = 0;
  std::vector<std::string> warnings;

  /// n_samples x signal shape.
  Tensor stacked() const;
};

/// Annealed HMC: each chain starts at init + sigma_init * N(0, I) with RNG
/// stream id = chain index, runs steps_per_temperature MH steps per ladder
/// level, then (draws_per_chain - 1) * thin further steps at sigma_final,
/// and optionally applies the expected denoised sample step to every draw.
PosteriorSampleSet annealed_sample(const ScoreModel& prior, const GaussianLikelihood* likelihood,
                                   const SamplerConfig& config, const Tensor& init);

/// x + sigma^2 * score(x, sigma).
Tensor expected_denoised_sample(const Tensor& x, double sigma, const ScoreModel& score);

/// Writes <stem>.tnsr (stacked samples) and <stem>_diagnostics.txt.
void write_sample_set(const std::filesystem::path& dir, const std::string& stem, const PosteriorSampleSet& set);
std::string format_diagnostics(const PosteriorSampleSet& set);

}  // namespace scoreinv
