#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cprlab/autograd.hpp"
#include "cprlab/preprocess.hpp"
#include "cprlab/session.hpp"

namespace cprlab::baselines {

struct NlmsConfig {
  std::size_t order = 16;
  double mu = 0.05;
  double eps = 1e-6;
  std::size_t delay = 1;
};

// Normalized LMS in linear-prediction form: the filter predicts x[i] from the
// `order` samples ending at x[i-delay]; the a-priori prediction is the output.
// Weights start as passthrough (w[0]=1, rest 0); samples before the first
// full regressor pass through unchanged. Causal: output i uses inputs <= i.
std::vector<double> nlms_denoise(const std::vector<double>& x,
                                 const NlmsConfig& cfg);

struct VanillaAeConfig {
  std::size_t window = 512;
  std::size_t hidden = 64;
  double learning_rate = 1e-3;
  std::size_t epochs = 8;
  std::uint64_t seed = 0;
};

// Dense undercomplete autoencoder per channel (window -> hidden ReLU ->
// window linear), trained with masked MAE self-reconstruction on normalized
// noisy windows. No residual path, no fusion.
struct VanillaAeModel {
  struct ChannelNet {
    nn::NodePtr w1, b1, w2, b2;
  };
  std::array<ChannelNet, kNumChannels> nets;
  std::array<preprocess::NormStats, kNumChannels> norm_stats;
  std::size_t window = 512;
  std::size_t hidden = 64;
};

VanillaAeModel vanilla_ae_fit(const std::vector<SignalSession>& sessions,
                              const VanillaAeConfig& cfg);

SignalSession vanilla_ae_denoise(const VanillaAeModel& m,
                                 const SignalSession& s);

}  // namespace cprlab::baselines
