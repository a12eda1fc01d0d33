#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "scoreinv/dsm.hpp"
#include "scoreinv/forward_models.hpp"
#include "scoreinv/hmc.hpp"
#include "scoreinv/phantom.hpp"
#include "scoreinv/score_models.hpp"
#include "scoreinv_cli/config.hpp"

namespace scoreinv::cli {

PhantomSpec phantom_spec(const RunConfig& cfg);
TwoMoonsSpec two_moons_spec(const RunConfig& cfg);
CartesianMaskSpec mask_spec(const RunConfig& cfg);
TrainConfig train_config(const RunConfig& cfg, std::size_t workers);
SamplerConfig sampler_config(const RunConfig& cfg, std::size_t workers);

/// Each command reads inputs named by paths.* and writes into its output
/// directory together with the resolved config. `cfg` must be resolved.
void cmd_make_data(const RunConfig& cfg, std::size_t workers);
void cmd_train(const RunConfig& cfg, std::size_t workers);
void cmd_sample(const RunConfig& cfg, std::size_t workers);
void cmd_eval(const RunConfig& cfg, std::size_t workers);

/// Per-item PSNR figures as they appear in the eval report.
struct ItemScores {
  std::size_t item = 0;
  std::vector<double> per_sample_db;
  double mean_of_samples_db = 0.0;
  double zero_filled_db = 0.0;
};

/// PSNRs against the magnitude of `truth` (H x W): each sample and the
/// complex mean of `samples` (n x H x W x 2) after taking magnitudes, and
/// the zero-filled reconstruction (H x W x 2).
ItemScores score_item(std::size_t item, const Tensor& truth, const Tensor& samples, const Tensor& zero_filled);

/// Parses the argument vector, runs one subcommand and maps failures to
/// exit codes: 0 success, 1 validation, 2 IO, 3 numerical.
int run(int argc, char** argv);

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitNumerical = 3;

}  // namespace scoreinv::cli
