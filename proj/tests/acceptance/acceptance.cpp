// Acceptance suite: one PASS/FAIL line per criterion.
//
//   scoreinv_acceptance [--workdir DIR] [N ...]
//
// With no numbers every criterion runs. Exit status is 0 only if all the
// selected criteria pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "oracles.hpp"
#include "scoreinv/checkpoint.hpp"
#include "scoreinv/dsm.hpp"
#include "scoreinv/forward_models.hpp"
#include "scoreinv/hmc.hpp"
#include "scoreinv/metrics.hpp"
#include "scoreinv/parallel.hpp"
#include "scoreinv/score_models.hpp"
#include "scoreinv/score_network.hpp"
#include "scoreinv/tensor_io.hpp"
#include "scoreinv_cli/commands.hpp"

using namespace scoreinv;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

fs::path g_workdir;

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "scoreinv");
  args.emplace_back("--quiet");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// ---------------------------------------------------------------------------
// 1 and 7: conjugate Gaussian

constexpr std::size_t kConjDim = 8;
constexpr std::size_t kConjChains = 64;
constexpr std::size_t kConjDraws = 50;

struct ConjugateRun {
  Tensor y;
  PosteriorSampleSet with_eds;
  PosteriorSampleSet without_eds;
};

const ConjugateRun& conjugate_run() {
  static const ConjugateRun run = [] {
    ConjugateRun r;
    RngStream truth_rng(2024, 0);
    const Tensor x_true = gaussian_sample(truth_rng, {kConjDim});
    r.y = x_true + 0.1 * gaussian_sample(truth_rng, {kConjDim});
    const IsotropicGaussianScore prior(Tensor({kConjDim}), 1.0);
    auto op = std::make_shared<IdentityOperator>(Shape{kConjDim});
    const GaussianLikelihood lik(op, r.y, 0.1);
    SamplerConfig cfg;
    cfg.schedule.epsilon = 0.5;
    cfg.schedule.exponent = 0.5;
    cfg.n_chains = kConjChains;
    cfg.draws_per_chain = kConjDraws;
    cfg.thin = 5;
    cfg.seed = 77;
    r.with_eds = annealed_sample(prior, &lik, cfg, Tensor({kConjDim}));
    cfg.apply_eds = false;
    r.without_eds = annealed_sample(prior, &lik, cfg, Tensor({kConjDim}));
    return r;
  }();
  return run;
}

Outcome criterion_conjugate() {
  const auto t0 = std::chrono::steady_clock::now();
  const ConjugateRun& run = conjugate_run();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const oracle::ConjugateGaussian post{1.0, 0.01};
  const auto& samples = run.with_eds.samples;

  double worst_z = 0.0;
  std::vector<double> mean(kConjDim, 0.0);
  for (std::size_t i = 0; i < kConjDim; ++i) {
    std::vector<double> chain_means(kConjChains, 0.0);
    for (std::size_t k = 0; k < samples.size(); ++k) {
      chain_means[k / kConjDraws] += samples[k][i] / static_cast<double>(kConjDraws);
    }
    for (double v : chain_means) mean[i] += v / static_cast<double>(kConjChains);
    double var = 0.0;
    for (double v : chain_means) var += (v - mean[i]) * (v - mean[i]) / static_cast<double>(kConjChains - 1);
    const double se = std::sqrt(var / static_cast<double>(kConjChains));
    worst_z = std::max(worst_z, std::abs(mean[i] - post.posterior_mean(run.y[i])) / se);
  }

  double err2 = 0.0;
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < kConjDim; ++i) {
    for (std::size_t j = 0; j < kConjDim; ++j) {
      double c = 0.0;
      for (const auto& s : samples) c += (s[i] - mean[i]) * (s[j] - mean[j]);
      c /= n - 1.0;
      const double target = i == j ? post.posterior_var() : 0.0;
      err2 += (c - target) * (c - target);
    }
  }
  const double frob = std::sqrt(err2) / (post.posterior_var() * std::sqrt(static_cast<double>(kConjDim)));
  const bool pass = worst_z < 3.0 && frob < 0.15 && secs < 120.0;
  return {pass, fmt("max |mean error| = %.2f SE (< 3), covariance Frobenius rel. error %.3f (< 0.15), %zu draws, %.1f s",
                    worst_z, frob, samples.size(), secs)};
}

Outcome criterion_eds() {
  const ConjugateRun& run = conjugate_run();
  const oracle::ConjugateGaussian post{1.0, 0.01};
  auto mse = [&](const PosteriorSampleSet& set) {
    double total = 0.0;
    for (const auto& s : set.samples) {
      for (std::size_t i = 0; i < kConjDim; ++i) {
        const double d = s[i] - post.posterior_mean(run.y[i]);
        total += d * d;
      }
    }
    return total / static_cast<double>(set.samples.size() * kConjDim);
  };
  const double with = mse(run.with_eds);
  const double without = mse(run.without_eds);
  return {with < without, fmt("MSE to posterior mean %.6g with EDS vs %.6g without", with, without)};
}

// ---------------------------------------------------------------------------
// 2: path-integral log-density differences

Outcome criterion_path_integral() {
  const oracle::Moons moons;
  const FieldAt field = [&](const Tensor& x) {
    const auto [gx, gy] = moons.score(x[0], x[1], 0.0);
    return Tensor::vector({gx, gy});
  };
  RngStream rng(31, 0);
  double worst = 0.0;
  double sum = 0.0;
  std::size_t within = 0;
  const std::size_t pairs = 1000;
  for (std::size_t k = 0; k < pairs; ++k) {
    const auto& [mx, my] = moons.means[static_cast<std::size_t>(rng.uniform() * 32.0) % 32];
    const double ax = mx + 0.1 * rng.gaussian();
    const double ay = my + 0.1 * rng.gaussian();
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    const double len = 0.5 * rng.uniform();
    const double bx = ax + len * std::cos(angle);
    const double by = ay + len * std::sin(angle);
    const double est = path_integral_logdiff(field, Tensor::vector({ax, ay}), Tensor::vector({bx, by}), 9);
    const double err = std::abs(est - (moons.log_density(bx, by, 0.0) - moons.log_density(ax, ay, 0.0)));
    worst = std::max(worst, err);
    sum += err;
    if (err < 1e-3) ++within;
  }
  const FieldAt gauss = [](const Tensor& x) { return -1.0 * x; };
  const double g = path_integral_logdiff(gauss, Tensor::vector({0.0, 0.0}), Tensor::vector({2.0, 0.0}), 9);
  const double gerr = std::abs(g + 2.0);
  return {worst < 1e-3 && gerr < 1e-12,
          fmt("two moons, 9 nodes: max error %.3g, mean %.3g, %zu/%zu pairs within 1e-3; Gaussian case error %.1e",
              worst, sum / pairs, within, pairs, gerr)};
}

// ---------------------------------------------------------------------------
// 3: leapfrog contracts

Outcome criterion_leapfrog() {
  const oracle::Moons moons;
  const FieldAt moons_field = [&](const Tensor& x) {
    const auto [gx, gy] = moons.score(x[0], x[1], 0.05);
    return Tensor::vector({gx, gy});
  };
  RngStream rng(41, 0);
  double worst_rev = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Tensor x = Tensor::vector({rng.gaussian(), 0.5 * rng.gaussian()});
    const Tensor m = gaussian_sample(rng, {2});
    const auto fwd = leapfrog(x, m, moons_field, 0.01, 20);
    const auto back = leapfrog(fwd.x, -1.0 * fwd.m, moons_field, 0.01, 20);
    worst_rev = std::max({worst_rev, norm(back.x - x), norm(back.m + m)});
  }

  // Gaussian target with precisions 1 and 4; H = x'Px/2 + |m|^2/2.
  const FieldAt gauss = [](const Tensor& x) { return Tensor::vector({-x[0], -4.0 * x[1]}); };
  auto energy = [](const Tensor& x, const Tensor& m) {
    return 0.5 * (x[0] * x[0] + 4.0 * x[1] * x[1]) + 0.5 * squared_norm(m);
  };
  double e_coarse = 0.0;
  double e_fine = 0.0;
  for (int k = 0; k < 200; ++k) {
    const Tensor x = gaussian_sample(rng, {2});
    const Tensor m = gaussian_sample(rng, {2});
    const double h0 = energy(x, m);
    const auto c = leapfrog(x, m, gauss, 0.1, 10);
    const auto f = leapfrog(x, m, gauss, 0.05, 20);
    e_coarse += std::abs(energy(c.x, c.m) - h0);
    e_fine += std::abs(energy(f.x, f.m) - h0);
  }
  const double ratio = e_coarse / e_fine;
  return {worst_rev < 1e-10 && ratio >= 3.5 && ratio <= 4.5,
          fmt("reversibility error %.2e (< 1e-10); energy-error ratio %.3f for halved step (in [3.5, 4.5])", worst_rev,
              ratio)};
}

// ---------------------------------------------------------------------------
// 4: DSM score recovery

Outcome criterion_dsm() {
  const auto t0 = std::chrono::steady_clock::now();
  const oracle::Moons moons;
  RngStream data_rng(51, 0);
  Tensor data({10000, 2});
  for (std::size_t i = 0; i < 10000; ++i) {
    const auto& [mx, my] = moons.means[static_cast<std::size_t>(data_rng.uniform() * 32.0) % 32];
    data[2 * i] = mx + 0.1 * data_rng.gaussian();
    data[2 * i + 1] = my + 0.1 * data_rng.gaussian();
  }
  RngStream init(51, 1);
  TrainConfig cfg;
  cfg.steps = 30000;
  cfg.batch_size = 256;
  cfg.learning_rate = 2e-3;
  cfg.lr_final_fraction = 0.01;
  cfg.noise_scale = 0.5;
  cfg.spectral_target = 8.0;
  cfg.seed = 52;
  const ScoreNetwork net = train(make_mlp_network(2, 128, 4, init), data, cfg).net;

  std::string detail;
  bool pass = true;
  for (double sigma : {0.1, 0.5, 1.0}) {
    // Points from p_sigma, keeping the 90% with the highest density.
    RngStream eval_rng(53, static_cast<std::uint64_t>(sigma * 100));
    const double sd = std::sqrt(0.01 + sigma * sigma);
    std::vector<std::pair<double, std::pair<double, double>>> pts;
    for (int i = 0; i < 5000; ++i) {
      const auto& [mx, my] = moons.means[static_cast<std::size_t>(eval_rng.uniform() * 32.0) % 32];
      const double x = mx + sd * eval_rng.gaussian();
      const double y = my + sd * eval_rng.gaussian();
      pts.push_back({moons.log_density(x, y, sigma), {x, y}});
    }
    std::sort(pts.begin(), pts.end());
    double cos_sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = pts.size() / 10; k < pts.size(); ++k) {
      const auto [x, y] = pts[k].second;
      const auto [tx, ty] = moons.score(x, y, sigma);
      const Tensor a = net.score(Tensor::vector({x, y}), sigma);
      cos_sum += (a[0] * tx + a[1] * ty) / (std::hypot(a[0], a[1]) * std::hypot(tx, ty));
      ++n;
    }
    const double c = cos_sum / static_cast<double>(n);
    pass = pass && c > 0.95;
    detail += fmt("sigma %.1f: mean cosine %.4f; ", sigma, c);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {pass && secs < 600.0, detail + fmt("(> 0.95 on the 90%% mass region), %.0f s", secs)};
}

// ---------------------------------------------------------------------------
// 5: gradient correctness

Outcome criterion_backprop() {
  struct Arch {
    const char* name;
    ScoreNetwork net;
    Shape batch;
  };
  RngStream rng(61, 0);
  std::vector<Arch> archs;
  archs.push_back({"mlp 2-128x4", make_mlp_network(2, 128, 4, rng), {4, 2}});
  archs.push_back({"conv 2-16x3", make_conv_network(2, 16, 3, rng), {2, 8, 8, 2}});
  archs.push_back({"conv 2-16x5 dilated", make_conv_network(2, 16, 5, rng, {}, 3, {1, 2, 4, 8, 1}), {2, 8, 8, 2}});
  archs.push_back({"conv 2-8x3 kernel 5", make_conv_network(2, 8, 3, rng, {}, 5), {2, 8, 8, 2}});
  archs.push_back({"conv 2-8x3 kernel 7", make_conv_network(2, 8, 3, rng, {}, 7), {2, 8, 8, 2}});
  double worst = 0.0;
  std::string detail;
  for (auto& a : archs) {
    const Tensor batch = gaussian_sample(rng, a.batch);
    NoiseDraw noise{gaussian_sample(rng, a.batch), {}};
    for (std::size_t i = 0; i < a.batch[0]; ++i) noise.sigma.push_back(0.2 + 0.3 * static_cast<double>(i));
    const double err = backprop_check(a.net, batch, noise);
    worst = std::max(worst, err);
    detail += fmt("%s %.1e; ", a.name, err);
  }
  return {worst < 1e-5, detail + "max relative error < 1e-5"};
}

// ---------------------------------------------------------------------------
// 6: toy MRI ordering through the command-line pipeline

Outcome criterion_mri() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path root = g_workdir / "mri";
  fs::remove_all(root);
  const std::string config = SCOREINV_SOURCE_DIR "/configs/mri.cfg";
  const std::vector<std::string> paths = {
      "--config", config, "--set", "paths.data=" + (root / "data").string(), "--set",
      "paths.checkpoint=" + (root / "train/checkpoint.dsmc").string(), "--set",
      "paths.samples=" + (root / "samples").string(), "--set", "paths.eval=" + (root / "eval").string()};
  for (const char* cmd : {"make-data", "train", "sample", "eval"}) {
    auto args = paths;
    args.insert(args.begin(), cmd);
    if (const int code = run_cli(args); code != 0) return {false, fmt("scoreinv %s exited with %d", cmd, code)};
  }

  const Tensor test = load_tensor(root / "data" / "test.tnsr");
  const Tensor zf = load_tensor(root / "data" / "zero_filled.tnsr");
  const std::size_t items = test.dim(0);
  const std::size_t pixels = test.dim(1) * test.dim(2);
  auto mag = [&](const Tensor& packed, std::size_t offset) {
    std::vector<double> out(pixels);
    for (std::size_t p = 0; p < pixels; ++p) out[p] = std::hypot(packed[offset + 2 * p], packed[offset + 2 * p + 1]);
    return out;
  };
  double per_sample = 0.0;
  double mean_db = 0.0;
  double zf_db = 0.0;
  for (std::size_t i = 0; i < items; ++i) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "item_%03zu.tnsr", i);
    const Tensor s = load_tensor(root / "samples" / stem);
    const std::vector<double> truth(test.data().begin() + static_cast<std::ptrdiff_t>(i * pixels),
                                    test.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * pixels));
    const std::size_t n = s.dim(0);
    Tensor mean({2 * pixels});
    double item_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      item_sum += oracle::psnr_db(truth, mag(s, k * 2 * pixels));
      for (std::size_t p = 0; p < 2 * pixels; ++p) mean[p] += s[k * 2 * pixels + p] / static_cast<double>(n);
    }
    per_sample += item_sum / static_cast<double>(n);
    mean_db += oracle::psnr_db(truth, mag(mean, 0));
    zf_db += oracle::psnr_db(truth, mag(zf, i * 2 * pixels));
  }
  const double m = static_cast<double>(items);
  per_sample /= m;
  mean_db /= m;
  zf_db /= m;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = items >= 20 && mean_db - per_sample > 0.5 && per_sample - zf_db > 0.5 && secs < 1200.0;
  return {pass, fmt("%zu phantoms: mean of samples %.2f dB > per sample %.2f dB > zero-filled %.2f dB "
                    "(margins %.2f and %.2f, need > 0.5), %.0f s",
                    items, mean_db, per_sample, zf_db, mean_db - per_sample, per_sample - zf_db, secs)};
}

// ---------------------------------------------------------------------------
// 8: MH stationarity on the exact two-moons score

Outcome criterion_stationarity() {
  const oracle::Moons moons;
  const GaussianMixtureScore target = make_two_moons();
  const FieldAt field = [&](const Tensor& x) { return target.score(x, 0.0); };
  MhOptions opts;
  opts.quad_nodes = 9;
  const double alpha = 0.1;
  const std::size_t chains = 100000;
  const std::size_t steps = 5;

  constexpr int kBins = 20;
  const double x0 = -1.8;
  const double x1 = 1.8;
  const double y0 = -1.1;
  const double y1 = 1.1;
  std::vector<double> counts(kBins * kBins + 1, 0.0);  // last cell: outside the grid
  std::uint64_t accepted = 0;
  RngStream init(81, 0);
  for (std::size_t c = 0; c < chains; ++c) {
    const auto& [mx, my] = moons.means[static_cast<std::size_t>(init.uniform() * 32.0) % 32];
    ChainState st;
    st.x = Tensor::vector({mx + 0.1 * init.gaussian(), my + 0.1 * init.gaussian()});
    st.rng = RngStream(82, c);
    for (std::size_t k = 0; k < steps; ++k) mh_step(st, field, alpha, opts);
    accepted += st.stats.accepted;
    const int bx = static_cast<int>(std::floor((st.x[0] - x0) / (x1 - x0) * kBins));
    const int by = static_cast<int>(std::floor((st.x[1] - y0) / (y1 - y0) * kBins));
    const bool inside = bx >= 0 && bx < kBins && by >= 0 && by < kBins;
    counts[inside ? by * kBins + bx : kBins * kBins] += 1.0;
  }

  std::vector<double> expected(kBins * kBins + 1, 0.0);
  double inside_p = 0.0;
  for (int by = 0; by < kBins; ++by) {
    for (int bx = 0; bx < kBins; ++bx) {
      const double p = moons.box_probability(x0 + (x1 - x0) * bx / kBins, x0 + (x1 - x0) * (bx + 1) / kBins,
                                             y0 + (y1 - y0) * by / kBins, y0 + (y1 - y0) * (by + 1) / kBins);
      expected[by * kBins + bx] = p * static_cast<double>(chains);
      inside_p += p;
    }
  }
  expected[kBins * kBins] = (1.0 - inside_p) * static_cast<double>(chains);

  // Cells expecting fewer than 5 hits are pooled into one.
  double chi2 = 0.0;
  std::size_t cells = 0;
  double pool_obs = 0.0;
  double pool_exp = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (expected[i] < 5.0) {
      pool_obs += counts[i];
      pool_exp += expected[i];
      continue;
    }
    chi2 += (counts[i] - expected[i]) * (counts[i] - expected[i]) / expected[i];
    ++cells;
  }
  if (pool_exp > 0.0) {
    chi2 += (pool_obs - pool_exp) * (pool_obs - pool_exp) / pool_exp;
    ++cells;
  }
  const double df = static_cast<double>(cells - 1);
  const double critical = boost::math::quantile(boost::math::chi_squared(df), 0.99);
  const double rate = static_cast<double>(accepted) / static_cast<double>(chains * steps);
  return {chi2 < critical, fmt("chi2 = %.1f on %.0f dof, 1%% critical value %.1f; %zu chains x %zu steps from exact "
                               "draws, step %.2f, acceptance %.3f",
                               chi2, df, critical, chains, steps, alpha, rate)};
}

// ---------------------------------------------------------------------------
// 9: determinism of every command

Outcome criterion_determinism() {
  const fs::path root = g_workdir / "determinism";
  fs::remove_all(root);
  auto pipeline = [&](const fs::path& dir, const std::string& workers) {
    const std::vector<std::string> base = {
        "--workers", workers, "--set", "paths.data=" + (dir / "data").string(), "--set",
        "paths.checkpoint=" + (dir / "train/checkpoint.dsmc").string(), "--set",
        "paths.samples=" + (dir / "samples").string(), "--set", "paths.eval=" + (dir / "eval").string(), "--set",
        "data.train_count=64", "--set", "data.test_count=2", "--set", "train.steps=20", "--set",
        "train.batch_size=4", "--set", "net.width=8", "--set", "hmc.gamma=0.9", "--set", "hmc.sigma_final=0.1",
        "--set", "hmc.n_chains=3", "--seed", "5"};
    for (const char* cmd : {"make-data", "train", "sample", "eval"}) {
      auto args = base;
      args.insert(args.begin(), cmd);
      if (run_cli(args) != 0) return false;
    }
    return true;
  };
  const fs::path live = root / "run";
  if (!pipeline(live, "1")) return {false, "pipeline failed"};
  fs::rename(live, root / "first");
  if (!pipeline(live, "3")) return {false, "pipeline rerun failed"};

  std::size_t files = 0;
  std::vector<std::string> differing;
  for (const auto& entry : fs::recursive_directory_iterator(root / "first")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), root / "first");
    ++files;
    if (slurp(entry.path()) != slurp(live / rel)) differing.push_back(rel.string());
  }
  std::size_t second = 0;
  for (const auto& entry : fs::recursive_directory_iterator(live)) second += entry.is_regular_file() ? 1 : 0;
  std::string detail = fmt("%zu files from make-data/train/sample/eval compared byte for byte (1 vs 3 workers)", files);
  for (const auto& d : differing) detail += "; differs: " + d;
  return {differing.empty() && files == second && files > 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  std::vector<int> selected;
  g_workdir = fs::temp_directory_path() / "scoreinv_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--workdir" && i + 1 < argc) {
      g_workdir = argv[++i];
    } else {
      selected.push_back(std::atoi(arg.c_str()));
    }
  }
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  fs::create_directories(g_workdir);

  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria = {
      {1, {"conjugate-Gaussian posterior recovery", criterion_conjugate}},
      {2, {"path-integral log-density differences", criterion_path_integral}},
      {3, {"leapfrog reversibility and energy error", criterion_leapfrog}},
      {4, {"DSM score recovery on two moons", criterion_dsm}},
      {5, {"backprop gradient check", criterion_backprop}},
      {6, {"toy MRI PSNR ordering", criterion_mri}},
      {7, {"EDS reduces MSE", criterion_eds}},
      {8, {"MH stationarity chi-squared", criterion_stationarity}},
      {9, {"byte-identical reruns", criterion_determinism}},
  };
  bool all = true;
  for (int id : selected) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    Outcome out;
    try {
      out = it->second.second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    all = all && out.pass;
    std::printf("%s criterion %d (%s): %s\n", out.pass ? "PASS" : "FAIL", id, it->second.first, out.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
