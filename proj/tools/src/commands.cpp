#include "scoreinv_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include <spdlog/spdlog.h>

#include "scoreinv/checkpoint.hpp"
#include "scoreinv/error.hpp"
#include "scoreinv/metrics.hpp"
#include "scoreinv/pgm.hpp"
#include "scoreinv/tensor_io.hpp"

namespace scoreinv::cli {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory: " + dir.string());
}

void require_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw IoError("missing input file: " + path.string());
}

std::string item_stem(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "item_%03zu", i);
  return buf;
}

std::string indexed(const char* prefix, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu", prefix, i);
  return buf;
}

/// 2D point cloud (n x 2) binned into a 64 x 64 count image.
Tensor histogram_image(const Tensor& points) {
  constexpr std::size_t kBins = 64;
  const std::size_t n = points.dim(0);
  double lo = points[0];
  double hi = points[0];
  for (double v : points.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi > lo ? hi - lo : 1.0;
  Tensor img({kBins, kBins});
  for (std::size_t i = 0; i < n; ++i) {
    auto bin = [&](double v) {
      return std::min(kBins - 1, static_cast<std::size_t>((v - lo) / span * static_cast<double>(kBins)));
    };
    // y grows upward in the preview
    img[(kBins - 1 - bin(points[2 * i + 1])) * kBins + bin(points[2 * i])] += 1.0;
  }
  return img;
}

/// N x H x W real images to N x H x W x 2 complex ones; vectors pass through.
Tensor as_signals(const Tensor& data) {
  if (data.rank() != 3) return data;
  Shape shape = data.shape();
  shape.push_back(2);
  Tensor out(shape);
  for (std::size_t i = 0; i < data.size(); ++i) out[2 * i] = data[i];
  return out;
}

std::size_t auto_or(const RunConfig& cfg, const std::string& key, std::size_t fallback) {
  return cfg.get(key) == "auto" ? fallback : cfg.get_size(key);
}

ScoreNetwork build_network(const RunConfig& cfg, const Tensor& signals) {
  const bool image = signals.rank() == 4;
  std::string kind = cfg.get("net.kind");
  if (kind == "auto") kind = image ? "conv" : "mlp";
  NetworkOptions opts;
  opts.output_scaling = cfg.get_bool("train.output_scaling");
  opts.sigma_floor = cfg.get_double("train.sigma_floor");
  opts.data_scale = 1.0;  // train() installs the configured scale
  RngStream rng(cfg.get_u64("net.seed"), 0);
  if (kind == "conv") {
    if (!image) throw ParameterError("net.kind = conv needs image data (N x H x W)");
    return make_conv_network(signals.dim(3), auto_or(cfg, "net.width", 16), auto_or(cfg, "net.layers", 3), rng, opts,
                             static_cast<int>(cfg.get_size("net.kernel")), cfg.get_int_list("net.dilations"));
  }
  if (kind == "mlp") {
    if (signals.rank() != 2) throw ParameterError("net.kind = mlp needs vector data (N x d)");
    return make_mlp_network(signals.dim(1), auto_or(cfg, "net.width", 128), auto_or(cfg, "net.layers", 4), rng, opts);
  }
  throw ParameterError("net.kind must be auto, mlp or conv, got '" + kind + "'");
}

struct ItemRange {
  std::size_t first = 0;
  std::size_t count = 0;
};

ItemRange item_range(const RunConfig& cfg, std::size_t available) {
  const std::size_t first = cfg.get_size("sample.first");
  std::size_t count = cfg.get_size("sample.count");
  if (first >= available) {
    throw ParameterError("sample.first = " + std::to_string(first) + " but only " + std::to_string(available) +
                         " test items exist");
  }
  if (count == 0) count = available - first;
  if (first + count > available) throw ParameterError("sample.first + sample.count exceeds the test set");
  return {first, count};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

struct AcceptanceTotals {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
  std::uint64_t divergent = 0;
  std::vector<std::string> warnings;
};

AcceptanceTotals read_acceptance(const fs::path& path) {
  require_file(path);
  std::ifstream in(path);
  AcceptanceTotals totals;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.rfind("# warning: ", 0) == 0) totals.warnings.push_back(line.substr(11));
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::istringstream row(line);
    std::size_t sample = 0;
    std::size_t chain = 0;
    double rate = 0.0;
    std::uint64_t proposed = 0;
    std::uint64_t accepted = 0;
    std::uint64_t divergent = 0;
    if (!(row >> sample >> chain >> rate >> proposed >> accepted >> divergent)) {
      throw IoError("malformed diagnostics row in " + path.string() + ": " + line);
    }
    totals.proposed += proposed;
    totals.accepted += accepted;
    totals.divergent += divergent;
  }
  return totals;
}

}  // namespace

PhantomSpec phantom_spec(const RunConfig& cfg) {
  PhantomSpec spec;
  spec.size = cfg.get_size("phantom.size");
  spec.min_ellipses = cfg.get_size("phantom.min_ellipses");
  spec.max_ellipses = cfg.get_size("phantom.max_ellipses");
  spec.intensity_min = cfg.get_double("phantom.intensity_min");
  spec.intensity_max = cfg.get_double("phantom.intensity_max");
  spec.seed = cfg.get_u64("phantom.seed");
  spec.validate();
  return spec;
}

TwoMoonsSpec two_moons_spec(const RunConfig& cfg) {
  TwoMoonsSpec spec;
  spec.per_arc = cfg.get_size("toy.per_arc");
  spec.radius = cfg.get_double("toy.radius");
  spec.std = cfg.get_double("toy.std");
  return spec;
}

CartesianMaskSpec mask_spec(const RunConfig& cfg) {
  CartesianMaskSpec spec;
  spec.acceleration = cfg.get_size("mask.acceleration");
  spec.center_fraction = cfg.get_double("mask.center_fraction");
  return spec;
}

TrainConfig train_config(const RunConfig& cfg, std::size_t workers) {
  TrainConfig tc;
  tc.learning_rate = cfg.get_double("train.learning_rate");
  tc.lr_final_fraction = cfg.get_double("train.lr_final_fraction");
  tc.noise_scale = cfg.get_double("train.noise_scale");
  tc.batch_size = cfg.get_size("train.batch_size");
  tc.steps = cfg.get_size("train.steps");
  tc.beta1 = cfg.get_double("train.beta1");
  tc.beta2 = cfg.get_double("train.beta2");
  tc.adam_epsilon = cfg.get_double("train.adam_epsilon");
  tc.sigma_floor = cfg.get_double("train.sigma_floor");
  tc.seed = cfg.get_u64("train.seed");
  tc.spectral_target = cfg.get_double("train.spectral_target");
  tc.spectral_iters = cfg.get_size("train.spectral_iters");
  tc.output_scaling = cfg.get_bool("train.output_scaling");
  tc.data_scale = cfg.get("train.data_scale") == "auto" ? 1.0 : cfg.get_double("train.data_scale");
  tc.workers = workers;
  tc.validate();
  return tc;
}

SamplerConfig sampler_config(const RunConfig& cfg, std::size_t workers) {
  SamplerConfig sc;
  sc.schedule.sigma_init = cfg.get_double("hmc.sigma_init");
  sc.schedule.gamma = cfg.get_double("hmc.gamma");
  sc.schedule.epsilon = cfg.get_double("hmc.epsilon");
  sc.schedule.exponent = cfg.get_double("hmc.exponent");
  sc.schedule.sigma_final = cfg.get_double("hmc.sigma_final");
  sc.schedule.steps_per_temperature = cfg.get_size("hmc.steps_per_temperature");
  sc.mh.leapfrog_steps = static_cast<int>(cfg.get_size("hmc.leapfrog_steps"));
  sc.mh.quad_nodes = static_cast<int>(cfg.get_size("hmc.quad_nodes"));
  sc.mh.quad_nodes_long = static_cast<int>(cfg.get_size("hmc.quad_nodes_long"));
  sc.mh.long_step = cfg.get_double("hmc.long_step");
  sc.mh.metropolis = cfg.get_bool("hmc.metropolis");
  sc.n_chains = cfg.get_size("hmc.n_chains");
  sc.seed = cfg.get_u64("hmc.seed");
  sc.draws_per_chain = cfg.get_size("hmc.draws_per_chain");
  sc.thin = cfg.get_size("hmc.thin");
  sc.apply_eds = cfg.get_bool("hmc.apply_eds");
  sc.sigma_floor = cfg.get_double("hmc.sigma_floor");
  sc.workers = workers;
  sc.schedule.validate();
  return sc;
}

ItemScores score_item(std::size_t item, const Tensor& truth, const Tensor& samples, const Tensor& zero_filled) {
  if (truth.rank() != 2) throw ShapeError("ground truth must be H x W, got " + shape_string(truth.shape()));
  const Shape packed{truth.dim(0), truth.dim(1), 2};
  if (samples.rank() != 4 || Shape(samples.shape().begin() + 1, samples.shape().end()) != packed) {
    throw ShapeError("samples " + shape_string(samples.shape()) + " do not match ground truth " +
                     shape_string(truth.shape()) + " (expected n x H x W x 2)");
  }
  if (zero_filled.shape() != packed) {
    throw ShapeError("zero-filled image " + shape_string(zero_filled.shape()) + " does not match ground truth " +
                     shape_string(truth.shape()));
  }
  ItemScores scores;
  scores.item = item;
  const std::size_t n = samples.dim(0);
  Tensor mean(packed);
  for (std::size_t i = 0; i < n; ++i) {
    const Tensor s = samples.slice(i);
    scores.per_sample_db.push_back(psnr(truth, magnitude(s)));
    mean += s;
  }
  mean /= static_cast<double>(n);
  scores.mean_of_samples_db = psnr(truth, magnitude(mean));
  scores.zero_filled_db = psnr(truth, magnitude(zero_filled));
  return scores;
}

void cmd_make_data(const RunConfig& cfg, std::size_t /*workers*/) {
  const fs::path dir = cfg.get_path("paths.data");
  ensure_dir(dir);
  const std::string kind = cfg.get("data.kind");
  const std::size_t n_train = cfg.get_size("data.train_count");
  const std::size_t n_previews = cfg.get_size("data.previews");
  if (n_train == 0) throw ParameterError("data.train_count must be positive");

  if (kind == "phantoms") {
    const PhantomSpec spec = phantom_spec(cfg);
    const std::size_t n_test = cfg.get_size("data.test_count");
    const Tensor train = make_phantoms(spec, n_train);
    save_tensor(dir / "train.tnsr", train);
    for (std::size_t i = 0; i < std::min(n_previews, n_train); ++i) {
      write_pgm_preview(dir / (indexed("train", i) + ".pgm"), train.slice(i));
    }
    if (n_test > 0) {
      // held-out phantoms continue the index sequence after the training set
      const Tensor test = make_phantoms(spec, n_test, n_train);
      const CartesianMaskSpec mspec = mask_spec(cfg);
      const double sigma_n = cfg.get_double("measurement.sigma_n");
      const std::uint64_t mask_seed = cfg.get_u64("mask.seed");
      const std::uint64_t noise_seed = cfg.get_u64("measurement.seed");
      std::vector<Tensor> masks;
      std::vector<Tensor> measurements;
      std::vector<Tensor> zero_fills;
      for (std::size_t i = 0; i < n_test; ++i) {
        RngStream mrng(mask_seed, i);
        masks.push_back(make_mask(mspec, spec.size, mrng));
        auto op = std::make_shared<MaskedFourierOperator>(MaskedFourierOperator::from_columns(masks.back(), spec.size));
        RngStream nrng(noise_seed, i);
        measurements.push_back(simulate_measurement(*op, to_complex(test.slice(i)), sigma_n, nrng));
        zero_fills.push_back(zero_filled(GaussianLikelihood(op, measurements.back(), sigma_n)).pack());
      }
      save_tensor(dir / "test.tnsr", test);
      save_tensor(dir / "masks.tnsr", stack(masks));
      save_tensor(dir / "measurements.tnsr", stack(measurements));
      save_tensor(dir / "zero_filled.tnsr", stack(zero_fills));
      for (std::size_t i = 0; i < std::min(n_previews, n_test); ++i) {
        write_pgm_preview(dir / (indexed("test", i) + ".pgm"), test.slice(i));
        write_pgm_preview(dir / (indexed("zero_filled", i) + ".pgm"), magnitude(zero_fills[i]));
      }
    }
    spdlog::info("make-data: {} training and {} test phantoms of {}x{} in {}", n_train, n_test, spec.size, spec.size,
                 dir.string());
  } else if (kind == "two_moons" || kind == "gaussian") {
    RngStream rng(cfg.get_u64("toy.seed"), 0);
    Tensor train;
    if (kind == "two_moons") {
      train = make_two_moons(two_moons_spec(cfg)).sample(rng, n_train);
    } else {
      const double tau2 = cfg.get_double("toy.tau2");
      if (!(tau2 > 0.0)) throw ParameterError("toy.tau2 must be positive");
      const std::size_t dim = cfg.get_size("toy.dim");
      if (dim == 0) throw ParameterError("toy.dim must be positive");
      train = gaussian_sample(rng, {n_train, dim}) * std::sqrt(tau2);
    }
    save_tensor(dir / "train.tnsr", train);
    if (train.dim(1) == 2 && n_previews > 0) write_pgm_preview(dir / "train_histogram.pgm", histogram_image(train));
    spdlog::info("make-data: {} {} samples of dimension {} in {}", n_train, kind, train.dim(1), dir.string());
  } else {
    throw ParameterError("data.kind must be phantoms, two_moons or gaussian, got '" + kind + "'");
  }
  cfg.write_resolved(dir);
}

void cmd_train(const RunConfig& cfg, std::size_t workers) {
  const fs::path data_path = cfg.get_path("paths.data") / "train.tnsr";
  const fs::path ckpt_path = cfg.get_path("paths.checkpoint");
  const fs::path dir = ckpt_path.parent_path();
  TrainConfig tc = train_config(cfg, workers);
  require_file(data_path);
  const Tensor signals = as_signals(load_tensor(data_path));
  if (cfg.get("train.data_scale") == "auto") {
    double peak = 0.0;
    for (double v : signals.data()) peak = std::max(peak, std::abs(v));
    if (!(peak > 0.0) || !std::isfinite(peak)) throw NumericalError("cannot derive train.data_scale from the training set");
    tc.data_scale = peak;
  }

  ScoreNetwork net;
  std::optional<TrainState> resume;
  const std::string resume_path = cfg.get("train.resume");
  if (!resume_path.empty()) {
    require_file(resume_path);
    Checkpoint ckpt = load_checkpoint(resume_path);
    net = std::move(ckpt.net);
    resume = TrainState{ckpt.step, ckpt.rng};
    spdlog::info("train: resuming {} at step {}", resume_path, ckpt.step);
  } else {
    net = build_network(cfg, signals);
  }
  ensure_dir(dir);

  const fs::path csv_path = dir / "loss.csv";
  std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
  if (!csv) throw IoError("cannot open for writing: " + csv_path.string());
  csv << "step,loss\n";
  csv.precision(17);
  const std::size_t log_every = std::max<std::size_t>(1, tc.steps / 10);
  auto on_step = [&](std::uint64_t step, double loss) {
    csv << step << ',' << loss << '\n';
    if (step % log_every == 0) spdlog::info("train: step {} loss {:.6g}", step, loss);
  };

  TrainResult result;
  try {
    result = train(std::move(net), signals, tc, resume, on_step);
  } catch (const NumericalError&) {
    csv.flush();
    throw;
  }
  csv.close();
  if (!csv) throw IoError("write failed: " + csv_path.string());

  save_checkpoint(ckpt_path, Checkpoint{result.net, tc, result.state.step, result.state.rng});
  cfg.write_resolved(dir);
  spdlog::info("train: wrote {} at step {}", ckpt_path.string(), result.state.step);
}

void cmd_sample(const RunConfig& cfg, std::size_t workers) {
  const fs::path dir = cfg.get_path("paths.samples");
  const SamplerConfig sc = sampler_config(cfg, workers);
  const std::string prior_kind = cfg.get("sample.prior");
  const std::string mode = cfg.get("sample.mode");
  if (mode != "prior" && mode != "inverse") throw ParameterError("sample.mode must be prior or inverse, got '" + mode + "'");

  const fs::path data_dir = cfg.get_path("paths.data");
  Tensor test;
  Tensor masks;
  Tensor measurements;
  Tensor zero_fills;
  Shape signal_shape;
  if (mode == "inverse") {
    for (const char* name : {"test.tnsr", "masks.tnsr", "measurements.tnsr", "zero_filled.tnsr"}) {
      require_file(data_dir / name);
    }
    test = load_tensor(data_dir / "test.tnsr");
    masks = load_tensor(data_dir / "masks.tnsr");
    measurements = load_tensor(data_dir / "measurements.tnsr");
    zero_fills = load_tensor(data_dir / "zero_filled.tnsr");
    signal_shape = zero_fills.slice(0).shape();
  }

  std::unique_ptr<ScoreModel> analytic;
  ScoreNetwork net;
  const ScoreModel* prior = nullptr;
  if (prior_kind == "network") {
    require_file(cfg.get_path("paths.checkpoint"));
    net = load_checkpoint(cfg.get_path("paths.checkpoint")).net;
    prior = &net;
    if (signal_shape.empty()) {
      const std::size_t size = cfg.get_size("phantom.size");
      signal_shape = net.convolutional() ? Shape{size, size, 2} : Shape{net.dim()};
    }
  } else if (prior_kind == "gaussian") {
    if (signal_shape.empty()) signal_shape = {cfg.get_size("toy.dim")};
    analytic = std::make_unique<IsotropicGaussianScore>(Tensor(signal_shape), cfg.get_double("toy.tau2"));
    prior = analytic.get();
  } else if (prior_kind == "two_moons") {
    if (signal_shape.empty()) signal_shape = {2};
    analytic = std::make_unique<GaussianMixtureScore>(make_two_moons(two_moons_spec(cfg)));
    prior = analytic.get();
  } else {
    throw ParameterError("sample.prior must be network, gaussian or two_moons, got '" + prior_kind + "'");
  }
  // a convolutional prior reports its channel count and accepts any image size
  const bool conv = prior == &net && net.convolutional();
  const std::size_t expected_dim = conv ? signal_shape.back() : shape_size(signal_shape);
  if ((conv && signal_shape.size() != 3) || prior->dim() != expected_dim) {
    throw ShapeError("prior dimension " + std::to_string(prior->dim()) + " does not match signal shape " +
                     shape_string(signal_shape));
  }
  ensure_dir(dir);

  auto write_summaries = [&](const std::string& stem, const PosteriorSampleSet& set) {
    write_sample_set(dir, stem, set);
    for (const auto& w : set.warnings) spdlog::warn("sample {}: {}", stem, w);
    if (set.samples.size() >= 2) {
      const UncertaintyMap map = uncertainty_map(set.samples);
      save_tensor(dir / (stem + "_mean.tnsr"), map.mean);
      save_tensor(dir / (stem + "_std.tnsr"), map.std);
      if (signal_shape.size() == 3) {
        std::vector<Tensor> mags;
        for (const auto& s : set.samples) mags.push_back(magnitude(s));
        write_pgm_preview(dir / (stem + "_mean.pgm"), magnitude(map.mean));
        write_pgm_preview(dir / (stem + "_std.pgm"), uncertainty_map(mags).std);
      }
    }
    if (signal_shape.size() == 3) write_pgm_preview(dir / (stem + "_sample0.pgm"), magnitude(set.samples.front()));
    if (signal_shape == Shape{2}) write_pgm_preview(dir / (stem + "_histogram.pgm"), histogram_image(set.stacked()));
  };

  if (mode == "prior") {
    SamplerConfig prior_cfg = sc;
    const PosteriorSampleSet set = annealed_sample(*prior, nullptr, prior_cfg, Tensor(signal_shape));
    write_summaries("prior", set);
    spdlog::info("sample: {} prior draws in {}", set.samples.size(), dir.string());
  } else {
    const std::size_t available = test.dim(0);
    if (masks.dim(0) != available || measurements.dim(0) != available || zero_fills.dim(0) != available) {
      throw ShapeError("test, mask, measurement and zero-filled files disagree on the item count");
    }
    const ItemRange range = item_range(cfg, available);
    const double sigma_n = cfg.get_double("measurement.sigma_n");
    const std::string init_kind = cfg.get("sample.init");
    if (init_kind != "zero_filled" && init_kind != "zeros") {
      throw ParameterError("sample.init must be zero_filled or zeros, got '" + init_kind + "'");
    }
    for (std::size_t i = range.first; i < range.first + range.count; ++i) {
      auto op = std::make_shared<MaskedFourierOperator>(MaskedFourierOperator::from_columns(masks.slice(i), test.dim(1)));
      const GaussianLikelihood lik(op, measurements.slice(i), sigma_n);
      SamplerConfig item_cfg = sc;
      item_cfg.seed = sc.seed + i;
      const Tensor init = init_kind == "zero_filled" ? zero_fills.slice(i) : Tensor(signal_shape);
      const PosteriorSampleSet set = annealed_sample(*prior, &lik, item_cfg, init);
      write_summaries(item_stem(i), set);
      spdlog::info("sample: item {} done ({} draws)", i, set.samples.size());
    }
  }
  cfg.write_resolved(dir);
}

void cmd_eval(const RunConfig& cfg, std::size_t /*workers*/) {
  const fs::path data_dir = cfg.get_path("paths.data");
  const fs::path sample_dir = cfg.get_path("paths.samples");
  const fs::path dir = cfg.get_path("paths.eval");
  if (cfg.get("sample.mode") != "inverse") throw ParameterError("eval needs sample.mode = inverse");
  require_file(data_dir / "test.tnsr");
  require_file(data_dir / "zero_filled.tnsr");
  const Tensor test = load_tensor(data_dir / "test.tnsr");
  const Tensor zero_fills = load_tensor(data_dir / "zero_filled.tnsr");
  if (zero_fills.dim(0) != test.dim(0)) throw ShapeError("test and zero-filled files disagree on the item count");
  const ItemRange range = item_range(cfg, test.dim(0));

  std::ostringstream report;
  report.precision(6);
  report << std::fixed;
  report << "# PSNR in dB against the ground-truth magnitude (peak = max of the ground truth)\n";
  report << "item row psnr_db\n";
  double per_sample_sum = 0.0;
  double mean_sum = 0.0;
  double zf_sum = 0.0;
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
  std::uint64_t divergent = 0;
  std::ostringstream acceptance;
  acceptance.precision(6);
  acceptance << std::fixed;
  for (std::size_t i = range.first; i < range.first + range.count; ++i) {
    const std::string stem = item_stem(i);
    require_file(sample_dir / (stem + ".tnsr"));
    const ItemScores s = score_item(i, test.slice(i), load_tensor(sample_dir / (stem + ".tnsr")), zero_fills.slice(i));
    double item_mean = 0.0;
    for (std::size_t k = 0; k < s.per_sample_db.size(); ++k) {
      report << i << " sample_" << k << ' ' << s.per_sample_db[k] << '\n';
      item_mean += s.per_sample_db[k];
    }
    report << i << " mean_of_samples " << s.mean_of_samples_db << '\n';
    report << i << " zero_filled " << s.zero_filled_db << '\n';
    per_sample_sum += item_mean / static_cast<double>(s.per_sample_db.size());
    mean_sum += s.mean_of_samples_db;
    zf_sum += s.zero_filled_db;

    const AcceptanceTotals acc = read_acceptance(sample_dir / (stem + "_diagnostics.txt"));
    proposed += acc.proposed;
    accepted += acc.accepted;
    divergent += acc.divergent;
    acceptance << "# acceptance item " << i << ": rate "
               << (acc.proposed ? static_cast<double>(acc.accepted) / static_cast<double>(acc.proposed) : 0.0)
               << " proposed " << acc.proposed << " divergent " << acc.divergent << '\n';
    for (const auto& w : acc.warnings) acceptance << "# warning item " << i << ": " << w << '\n';
  }
  const double n = static_cast<double>(range.count);
  report << acceptance.str();
  report << "# acceptance overall: rate "
         << (proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0) << " proposed "
         << proposed << " divergent " << divergent << '\n';
  report << "# summary items " << range.count << ": per_sample " << per_sample_sum / n << " mean_of_samples "
         << mean_sum / n << " zero_filled " << zf_sum / n << '\n';

  ensure_dir(dir);
  write_text(dir / "report.txt", report.str());
  cfg.write_resolved(dir);
  spdlog::info("eval: {} items, per-sample {:.2f} dB, mean of samples {:.2f} dB, zero-filled {:.2f} dB",
               range.count, per_sample_sum / n, mean_sum / n, zf_sum / n);
}

}  // namespace scoreinv::cli
