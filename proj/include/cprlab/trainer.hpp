#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cprlab/denoiser.hpp"
#include "cprlab/preprocess.hpp"
#include "cprlab/session.hpp"

namespace cprlab::trainer {

// Preprocessing primitives live in cprlab::preprocess; re-exported here since
// training owns the impute -> normalize contract.
using preprocess::denormalize;
using preprocess::fit_stats;
using preprocess::impute;
using preprocess::ImputeResult;
using preprocess::normalize;
using preprocess::NormStats;

struct TrainConfig {
  std::size_t batch_size = 64;
  std::size_t max_epochs = 50;
  std::size_t patience = 3;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  double val_fraction = 0.2;
};

std::string train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const std::string& text);

struct WindowRef {
  std::size_t session = 0;
  std::size_t start = 0;
};

// Imputed + normalized sessions plus a deterministic window split.
struct Dataset {
  std::vector<std::array<std::vector<double>, kNumChannels>> values;
  std::vector<std::array<std::vector<std::uint8_t>, kNumChannels>> masks;
  std::array<NormStats, kNumChannels> stats;
  std::vector<WindowRef> train, val;
  std::size_t window = 512;
  std::size_t stride = 64;
};

// Windows every `stride` samples from every session, shuffled with `seed`;
// the first (1 - val_fraction) fraction trains, the rest validates.
Dataset make_dataset(const std::vector<SignalSession>& sessions,
                     std::size_t window, std::size_t stride,
                     std::uint64_t seed, double val_fraction = 0.2);

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  std::size_t stopped_epoch = 0;  // 1-based; last epoch that ran
  std::size_t best_epoch = 0;     // 1-based; epoch whose weights are returned
};

// Self-reconstruction: every window's target is the window itself, masked MAE
// over all five channels jointly through the fusion network. Early stopping
// restores the best-validation weights. Throws TrainingError when a loss goes
// non-finite.
TrainHistory fit(denoiser::DenoiserModel& model, const Dataset& data,
                 const TrainConfig& cfg);

std::string history_to_csv(const TrainHistory& h);

}  // namespace cprlab::trainer
