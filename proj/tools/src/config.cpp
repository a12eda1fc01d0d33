#include "scoreinv_cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "scoreinv/error.hpp"

namespace scoreinv::cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view key) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : key) h = (h ^ c) * 0x100000001b3ULL;
  return splitmix64(run_seed ^ h);
}

bool is_seed_key(const std::string& key) { return key.size() > 5 && key.ends_with(".seed") && key != "run.seed"; }
bool is_path_key(const std::string& key) { return key.starts_with("paths.") || key == "train.resume"; }

}  // namespace

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

const std::vector<RunConfig::KeyInfo>& RunConfig::known_keys() {
  static const std::vector<KeyInfo> keys = {
      {"run.seed", "0", "master seed; every `auto` seed below derives from it"},

      {"data.kind", "phantoms", "phantoms | two_moons | gaussian"},
      {"data.train_count", "2000", "training examples"},
      {"data.test_count", "20", "held-out phantoms with simulated measurements"},
      {"data.previews", "4", "PGM previews written per split"},

      {"phantom.size", "32", "image side, power of two"},
      {"phantom.min_ellipses", "3", ""},
      {"phantom.max_ellipses", "7", ""},
      {"phantom.intensity_min", "0.1", ""},
      {"phantom.intensity_max", "0.5", ""},
      {"phantom.seed", "auto", ""},

      {"toy.dim", "2", "dimension of the gaussian toy"},
      {"toy.tau2", "1", "variance of the gaussian toy"},
      {"toy.per_arc", "16", "two-moons components per arc"},
      {"toy.radius", "1", "two-moons arc radius"},
      {"toy.std", "0.1", "two-moons component std"},
      {"toy.seed", "auto", ""},

      {"mask.acceleration", "4", ""},
      {"mask.center_fraction", "0.08", ""},
      {"mask.seed", "auto", ""},

      {"measurement.sigma_n", "0.1", "k-space noise std"},
      {"measurement.seed", "auto", ""},

      {"net.kind", "auto", "auto | mlp | conv (auto: conv for images)"},
      {"net.width", "auto", "hidden width (auto: 128 mlp, 16 conv)"},
      {"net.layers", "auto", "mlp hidden layers / conv layers (auto: 4 mlp, 3 conv)"},
      {"net.kernel", "3", "conv kernel size"},
      {"net.dilations", "1", "comma list cycled over conv layers"},
      {"net.seed", "auto", ""},

      {"train.learning_rate", "1e-4", ""},
      {"train.lr_final_fraction", "1", "cosine decay to this fraction of the rate; 1 = constant"},
      {"train.noise_scale", "1", "s in sigma_s ~ N(0, s^2)"},
      {"train.batch_size", "64", ""},
      {"train.steps", "1000", ""},
      {"train.beta1", "0.9", ""},
      {"train.beta2", "0.999", ""},
      {"train.adam_epsilon", "1e-8", ""},
      {"train.sigma_floor", "1e-3", "floor on |sigma| in the output division"},
      {"train.spectral_target", "2", ""},
      {"train.spectral_iters", "1", "power iterations per update"},
      {"train.output_scaling", "true", ""},
      {"train.data_scale", "auto", "network sees data / data_scale (auto: max |value| of the training set)"},
      {"train.resume", "", "checkpoint to continue from (empty: fresh network)"},
      {"train.seed", "auto", ""},

      {"hmc.sigma_init", "1", ""},
      {"hmc.gamma", "0.995", ""},
      {"hmc.epsilon", "0.1", ""},
      {"hmc.exponent", "1.5", ""},
      {"hmc.sigma_final", "0.01", ""},
      {"hmc.steps_per_temperature", "3", ""},
      {"hmc.leapfrog_steps", "5", ""},
      {"hmc.quad_nodes", "5", ""},
      {"hmc.quad_nodes_long", "9", ""},
      {"hmc.long_step", "1", "RMS displacement that switches to quad_nodes_long"},
      {"hmc.metropolis", "true", "false: plain annealed HMC"},
      {"hmc.n_chains", "4", ""},
      {"hmc.draws_per_chain", "1", ""},
      {"hmc.thin", "1", ""},
      {"hmc.apply_eds", "true", ""},
      {"hmc.sigma_floor", "1e-3", ""},
      {"hmc.seed", "auto", ""},

      {"sample.prior", "network", "network | gaussian | two_moons"},
      {"sample.mode", "inverse", "inverse | prior"},
      {"sample.init", "zero_filled", "zero_filled | zeros"},
      {"sample.first", "0", "first test item to reconstruct"},
      {"sample.count", "0", "items to reconstruct (0: all)"},

      {"paths.data", "data", ""},
      {"paths.checkpoint", "train/checkpoint.dsmc", ""},
      {"paths.samples", "samples", ""},
      {"paths.eval", "eval", ""},
  };
  return keys;
}

RunConfig::RunConfig() {
  for (const auto& k : known_keys()) values_[k.name] = k.default_value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) {
    std::string best;
    std::size_t best_d = std::string::npos;
    for (const auto& k : known_keys()) {
      const std::size_t d = edit_distance(key, k.name);
      if (d < best_d) {
        best_d = d;
        best = k.name;
      }
    }
    throw ParameterError("unknown config key '" + key + "' (did you mean '" + best + "'?)");
  }
  it->second = value;
}

void RunConfig::merge_text(std::string_view text, const std::string& origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ParameterError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (auto [it, fresh] = seen.emplace(key, lineno); !fresh) {
      throw ParameterError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "' (first set on line " +
                           std::to_string(it->second) + ")");
    }
    try {
      set(key, value);
    } catch (const ParameterError& e) {
      throw ParameterError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  merge_text(buf.str(), path.string());
}

void RunConfig::set_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ParameterError("--set expects key=value, got '" + std::string(assignment) + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::resolve() {
  const std::uint64_t run_seed = get_u64("run.seed");
  for (auto& [key, value] : values_) {
    if (is_seed_key(key) && value == "auto") value = std::to_string(derive_seed(run_seed, key));
    if (is_path_key(key) && !value.empty()) value = std::filesystem::absolute(value).lexically_normal().string();
  }
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ParameterError("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& v = get(key);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ParameterError("config key '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ParameterError("config key '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

std::size_t RunConfig::get_size(const std::string& key) const { return static_cast<std::size_t>(get_u64(key)); }

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParameterError("config key '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<int> RunConfig::get_int_list(const std::string& key) const {
  const std::string& v = get(key);
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    const auto comma = std::min(v.find(',', pos), v.size());
    const std::string item = trim(std::string_view(v).substr(pos, comma - pos));
    int x = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw ParameterError("config key '" + key + "' expects a comma-separated integer list, got '" + v + "'");
    }
    out.push_back(x);
    pos = comma + 1;
  }
  return out;
}

std::filesystem::path RunConfig::get_path(const std::string& key) const { return get(key); }

std::string RunConfig::resolved_text() const {
  std::ostringstream os;
  for (const auto& [key, value] : values_) os << key << " = " << value << "\n";
  return os.str();
}

void RunConfig::write_resolved(const std::filesystem::path& dir) const {
  const auto path = dir / kResolvedConfigName;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write resolved config: " + path.string());
  out << resolved_text();
  if (!out) throw IoError("failed writing resolved config: " + path.string());
}

}  // namespace scoreinv::cli
