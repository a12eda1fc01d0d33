#include "scoreinv/hmc.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "scoreinv/error.hpp"
#include "scoreinv/parallel.hpp"
#include "scoreinv/tensor_io.hpp"

namespace scoreinv {

TemperedPosterior::TemperedPosterior(const ScoreModel& prior, const GaussianLikelihood* likelihood)
    : prior_(&prior), likelihood_(likelihood) {}

Tensor TemperedPosterior::score(const Tensor& x, double sigma) const {
  Tensor s = prior_->score(x, sigma);
  if (likelihood_) s += likelihood_->score(x, sigma);
  return s;
}

void AnnealingSchedule::validate() const {
  if (!(sigma_init > 0.0)) throw ParameterError("hmc.sigma_init must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("hmc.gamma must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ParameterError("hmc.epsilon must be positive");
  if (!(sigma_final > 0.0)) throw ParameterError("hmc.sigma_final must be positive after clamping");
  if (!(sigma_final < sigma_init)) throw ParameterError("hmc.sigma_final must be below hmc.sigma_init");
  if (steps_per_temperature == 0) throw ParameterError("hmc.steps_per_temperature must be >= 1");
  if (!(exponent > 0.0)) throw ParameterError("hmc.exponent must be positive");
}

std::size_t AnnealingSchedule::levels() const {
  const double t = std::log(sigma_final / sigma_init) / std::log(gamma);
  return static_cast<std::size_t>(std::ceil(t - 1e-12)) + 1;
}

double AnnealingSchedule::sigma(std::size_t level) const {
  if (level + 1 >= levels()) return sigma_final;
  return sigma_init * std::pow(gamma, static_cast<double>(level));
}

double AnnealingSchedule::step_size(std::size_t level) const {
  return epsilon * std::pow(sigma(level) / sigma_init, exponent);
}

LeapfrogResult leapfrog(const Tensor& x, const Tensor& m, const Tensor& grad_x, const FieldAt& score, double alpha,
                        int n_steps) {
  if (!(alpha > 0.0)) throw ParameterError("leapfrog step size must be positive");
  if (n_steps < 1) throw ParameterError("leapfrog needs at least one step");
  require_same_shape(x, m, "leapfrog position/momentum");
  LeapfrogResult r{x, m, grad_x, false};
  if (!r.grad.all_finite()) {
    r.divergent = true;
    return r;
  }
  for (int step = 0; step < n_steps; ++step) {
    r.m.axpy(0.5 * alpha, r.grad);
    r.x.axpy(alpha, r.m);
    r.grad = score(r.x);
    if (!r.grad.all_finite() || !r.x.all_finite()) {
      r.divergent = true;
      return r;
    }
    r.m.axpy(0.5 * alpha, r.grad);
  }
  return r;
}

LeapfrogResult leapfrog(const Tensor& x, const Tensor& m, const FieldAt& score, double alpha, int n_steps) {
  return leapfrog(x, m, score(x), score, alpha, n_steps);
}

double path_integral_logdiff(const FieldAt& score, const Tensor& from, const Tensor& to, int n_points,
                             const Tensor* grad_from, const Tensor* grad_to) {
  require_same_shape(from, to, "path integral endpoints");
  simpson_weights(n_points);  // validates n_points
  const Tensor delta = to - from;
  std::vector<double> values(static_cast<std::size_t>(n_points));
  for (int k = 0; k < n_points; ++k) {
    Tensor g;
    if (k == 0 && grad_from) {
      g = *grad_from;
    } else if (k == n_points - 1 && grad_to) {
      g = *grad_to;
    } else {
      g = score(segment_node(from, to, k, n_points));
    }
    if (!g.all_finite()) throw NumericalError("non-finite score on path-integral node " + std::to_string(k));
    values[static_cast<std::size_t>(k)] = dot(g, delta);
  }
  return simpson_sum(values);
}

MhOutcome mh_step(ChainState& state, const FieldAt& score, double alpha, const MhOptions& options) {
  if (state.grad.empty() || state.grad_sigma != state.sigma) {
    state.grad = score(state.x);
    state.grad_sigma = state.sigma;
  }
  // Draw order: momentum, then the acceptance uniform.
  const Tensor m = gaussian_sample(state.rng, state.x.shape());
  const double u = state.rng.uniform_open_low();
  ++state.stats.proposed;

  MhOutcome outcome;
  LeapfrogResult prop = leapfrog(state.x, m, state.grad, score, alpha, options.leapfrog_steps);
  double log_accept = std::numeric_limits<double>::quiet_NaN();
  if (!prop.divergent && options.metropolis) {
    const double rms = norm(prop.x - state.x) / std::sqrt(static_cast<double>(state.x.size()));
    const int nodes = rms > options.long_step ? options.quad_nodes_long : options.quad_nodes;
    try {
      const double dlogp = path_integral_logdiff(score, state.x, prop.x, nodes, &state.grad, &prop.grad);
      const double dk = 0.5 * (squared_norm(prop.m) - squared_norm(m));
      log_accept = dlogp - dk;
      if (!std::isfinite(log_accept)) prop.divergent = true;
    } catch (const NumericalError&) {
      prop.divergent = true;
    }
  }
  outcome.log_accept = log_accept;
  if (prop.divergent) {
    ++state.stats.divergent;
    outcome.divergent = true;
    state.m = m;
    return outcome;
  }
  outcome.accepted = !options.metropolis || std::log(u) < log_accept;
  if (outcome.accepted) {
    ++state.stats.accepted;
    state.x = std::move(prop.x);
    state.m = std::move(prop.m);
    state.grad = std::move(prop.grad);
  } else {
    state.m = m;
  }
  return outcome;
}

Tensor expected_denoised_sample(const Tensor& x, double sigma, const ScoreModel& score) {
  if (!(sigma >= 0.0)) throw ParameterError("EDS needs sigma >= 0");
  if (sigma == 0.0) return x;
  Tensor out = x;
  return out.axpy(sigma * sigma, score.score(x, sigma));
}

Tensor PosteriorSampleSet::stacked() const { return stack(samples); }

namespace {

struct ChainResult {
  std::vector<Tensor> draws;
  ChainStats stats;
  double final_sigma = 0.0;
};

}  // namespace

PosteriorSampleSet annealed_sample(const ScoreModel& prior, const GaussianLikelihood* likelihood,
                                   const SamplerConfig& config, const Tensor& init) {
  if (config.n_chains == 0) throw ParameterError("sample.n_chains must be positive");
  if (config.draws_per_chain == 0 || config.thin == 0) {
    throw ParameterError("sample.draws_per_chain and sample.thin must be positive");
  }
  PosteriorSampleSet set;
  AnnealingSchedule schedule = config.schedule;
  if (schedule.sigma_final < config.sigma_floor) {
    set.warnings.push_back("sigma_final " + std::to_string(schedule.sigma_final) + " clamped to sigma floor " +
                           std::to_string(config.sigma_floor));
    schedule.sigma_final = config.sigma_floor;
  }
  schedule.validate();
  if (likelihood && likelihood->approximate()) {
    set.warnings.push_back("forward operator rows are not orthonormal; tempered likelihood is approximate");
  }

  const TemperedPosterior posterior(prior, likelihood);
  const std::size_t levels = schedule.levels();
  std::vector<ChainResult> results(config.n_chains);

  parallel_for(config.n_chains, config.workers, [&](std::size_t c) {
    ChainState state;
    state.rng = RngStream(config.seed, c);
    state.x = init;
    state.x.axpy(schedule.sigma_init, gaussian_sample(state.rng, init.shape()));
    state.m = Tensor(init.shape());

    auto run_level = [&](double sigma, double alpha, std::size_t steps) {
      state.sigma = sigma;
      const FieldAt field = [&](const Tensor& x) { return posterior.score(x, sigma); };
      for (std::size_t k = 0; k < steps; ++k) mh_step(state, field, alpha, config.mh);
    };

    for (std::size_t level = 0; level < levels; ++level) {
      run_level(schedule.sigma(level), schedule.step_size(level), schedule.steps_per_temperature);
    }
    const double sigma_f = schedule.sigma(levels - 1);
    const double alpha_f = schedule.step_size(levels - 1);
    ChainResult& out = results[c];
    for (std::size_t d = 0; d < config.draws_per_chain; ++d) {
      if (d > 0) run_level(sigma_f, alpha_f, config.thin);
      out.draws.push_back(config.apply_eds ? expected_denoised_sample(state.x, sigma_f, posterior) : state.x);
    }
    out.stats = state.stats;
    out.final_sigma = sigma_f;
  });

  set.schedule = schedule;
  set.seed = config.seed;
  set.n_chains = config.n_chains;
  for (std::size_t c = 0; c < results.size(); ++c) {
    const auto& r = results[c];
    if (r.stats.proposed && 2 * r.stats.divergent > r.stats.proposed) {
      set.warnings.push_back("chain " + std::to_string(c) + ": divergence rate above 50%");
    }
    for (const auto& d : r.draws) {
      set.samples.push_back(d);
      set.diagnostics.push_back({c, r.stats, r.final_sigma});
    }
  }
  return set;
}

std::string format_diagnostics(const PosteriorSampleSet& set) {
  std::ostringstream os;
  os.precision(17);
  os << "# schedule sigma_init=" << set.schedule.sigma_init << " gamma=" << set.schedule.gamma
     << " epsilon=" << set.schedule.epsilon << " exponent=" << set.schedule.exponent
     << " sigma_final=" << set.schedule.sigma_final << " steps_per_temperature=" << set.schedule.steps_per_temperature
     << " levels=" << set.schedule.levels() << "\n";
  os << "# seed=" << set.seed << " n_chains=" << set.n_chains << " n_samples=" << set.samples.size() << "\n";
  for (const auto& w : set.warnings) os << "# warning: " << w << "\n";
  os << "sample chain acceptance_rate proposed accepted divergent final_sigma\n";
  for (std::size_t i = 0; i < set.diagnostics.size(); ++i) {
    const auto& d = set.diagnostics[i];
    os << i << ' ' << d.chain << ' ' << d.stats.acceptance_rate() << ' ' << d.stats.proposed << ' '
       << d.stats.accepted << ' ' << d.stats.divergent << ' ' << d.final_sigma << "\n";
  }
  return os.str();
}

void write_sample_set(const std::filesystem::path& dir, const std::string& stem, const PosteriorSampleSet& set) {
  save_tensor(dir / (stem + ".tnsr"), set.stacked());
  const auto path = dir / (stem + "_diagnostics.txt");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << format_diagnostics(set);
}

}  // namespace scoreinv
