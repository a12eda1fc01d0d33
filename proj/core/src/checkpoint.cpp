#include "scoreinv/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "scoreinv/error.hpp"
#include "scoreinv/tensor_io.hpp"

namespace scoreinv {

namespace {
constexpr char kMagic[4] = {'D', 'S', 'M', 'C'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  using namespace io;
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  const auto& layers = ckpt.net.layers();
  put_u32(out, static_cast<std::uint32_t>(layers.size()));
  for (const auto& layer : layers) {
    put_u32(out, static_cast<std::uint32_t>(layer.weight.rows()));
    put_u32(out, static_cast<std::uint32_t>(layer.weight.cols()));
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) put_f64(out, layer.weight.data()[i]);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) put_f64(out, layer.bias(i));
    put_u8(out, layer.tag());
  }
  const auto& c = ckpt.config;
  for (double v : {c.learning_rate, c.noise_scale, c.beta1, c.beta2, c.adam_epsilon, c.sigma_floor,
                   c.spectral_target, c.data_scale, c.lr_final_fraction}) {
    put_f64(out, v);
  }
  for (std::uint64_t v : {std::uint64_t{c.batch_size}, std::uint64_t{c.steps}, c.seed,
                          std::uint64_t{c.spectral_iters}, std::uint64_t{c.output_scaling ? 1u : 0u}}) {
    put_u64(out, v);
  }
  put_u64(out, ckpt.step);
  put_u64(out, ckpt.rng.seed());
  put_u64(out, ckpt.rng.stream_id());
  put_u64(out, ckpt.rng.counter());
}

Checkpoint read_checkpoint(std::istream& in) {
  using namespace io;
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw IoError("not a DSMC checkpoint (bad magic)");
  const auto version = get_u32(in);
  if (version != kVersion) throw IoError("unsupported DSMC version " + std::to_string(version));
  const auto count = get_u32(in);
  if (count == 0 || count > 4096) throw IoError("implausible DSMC layer count");
  std::vector<Layer> layers(count);
  for (auto& layer : layers) {
    const auto rows = get_u32(in);
    const auto cols = get_u32(in);
    if (rows == 0 || cols == 0) throw IoError("DSMC layer with empty weight");
    layer.weight.resize(rows, cols);
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = get_f64(in);
    layer.bias.resize(rows);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = get_f64(in);
    Layer::apply_tag(layer, get_u8(in));
  }
  Checkpoint ckpt;
  auto& c = ckpt.config;
  for (double* f : {&c.learning_rate, &c.noise_scale, &c.beta1, &c.beta2, &c.adam_epsilon, &c.sigma_floor,
                    &c.spectral_target, &c.data_scale, &c.lr_final_fraction}) {
    *f = get_f64(in);
  }
  c.batch_size = get_u64(in);
  c.steps = get_u64(in);
  c.seed = get_u64(in);
  c.spectral_iters = get_u64(in);
  c.output_scaling = get_u64(in) != 0;
  ckpt.step = get_u64(in);
  const auto seed = get_u64(in);
  const auto stream = get_u64(in);
  const auto counter = get_u64(in);
  ckpt.rng = RngStream::at(seed, stream, counter);

  NetworkOptions options;
  options.output_scaling = c.output_scaling;
  options.sigma_floor = c.sigma_floor;
  options.data_scale = c.data_scale;
  try {
    ckpt.net = ScoreNetwork(std::move(layers), options);
  } catch (const Error& e) {
    throw IoError(std::string("inconsistent DSMC network: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  write_checkpoint(out, ckpt);
  if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  try {
    return read_checkpoint(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace scoreinv
