#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cprlab/autograd.hpp"
#include "cprlab/preprocess.hpp"
#include "cprlab/session.hpp"

namespace cprlab::denoiser {

struct ConvLayer {
  nn::NodePtr w;  // (kernel, in*out)
  nn::NodePtr b;  // (1, out)
  std::size_t kernel = 0, in_ch = 0, out_ch = 0;
};

struct DenseLayer {
  nn::NodePtr w;  // (in, out)
  nn::NodePtr b;  // (1, out)
};

// Per-channel residual autoencoder:
//   enc: conv(32,k5,ReLU) -> pool2 -> conv(16,k5,ReLU) -> pool2 (= code z)
//   residual: conv(16,k1,linear) on z; combined = z + residual
//   dec: concat(up2(combined), up2(z)) -> conv(16,k5,ReLU) -> up2
//        -> conv(32,k5,ReLU) -> conv(1,k5,linear)
struct ChannelAutoencoder {
  ConvLayer enc_conv1, enc_conv2, residual_conv, dec_conv1, dec_conv2, out_conv;
  static constexpr std::size_t kPool = 2;
  static constexpr std::size_t kUpsample = 2;
};

// Pointwise 5 -> 16 (ReLU) -> 5 (linear) map applied at every time step.
struct FusionNetwork {
  DenseLayer hidden, output;
};

struct DenoiserModel {
  std::array<ChannelAutoencoder, kNumChannels> per_channel;  // canonical order
  FusionNetwork fusion;
  std::array<preprocess::NormStats, kNumChannels> norm_stats;
  std::size_t window = 512;
  std::size_t stride = 256;
  int version = kCheckpointVersion;

  // Named parameter tensors in a fixed traversal order (checkpoint order).
  std::vector<std::pair<std::string, nn::NodePtr>> parameters() const;
  std::vector<nn::NodePtr> parameter_nodes() const;
  std::size_t parameter_count() const;
};

DenoiserModel build_model(std::uint64_t seed);

// Graph builders used by both training and inference.
nn::NodePtr forward_channel_graph(const ChannelAutoencoder& ae,
                                  const nn::NodePtr& input);
nn::NodePtr fuse_graph(const FusionNetwork& fusion,
                       const std::array<nn::NodePtr, kNumChannels>& channels);

// Value-level single-window passes.
nn::Tensor forward_channel(const DenoiserModel& m, const std::string& channel,
                           const nn::Tensor& window);
nn::Tensor fuse(const DenoiserModel& m,
                const std::array<nn::Tensor, kNumChannels>& windows);

// Overlap-add driver over a normalized (n, 5) tensor: regular windows every
// `stride` samples, averaged uniformly where they overlap. A tail window
// aligned to the end fills only samples no regular window reaches, which
// keeps overlap counts at powers of two (so averaging identical values is
// exact in floating point).
nn::Tensor window_overlap_add(
    const std::function<nn::Tensor(const nn::Tensor&)>& processor,
    const nn::Tensor& channels, std::size_t window, std::size_t stride);

// Impute -> normalize -> windowed forward + fusion -> overlap-add ->
// denormalize. Output has no NaN and preserves length.
SignalSession denoise_session(const DenoiserModel& m, const SignalSession& s);

// Checkpoint: one-line JSON header (format, version, window, stride, channel
// names, norm stats, tensor directory with byte offsets), then '\n', then the
// raw little-endian float64 payload. Round-trips bit-exactly.
void save_model(const DenoiserModel& m, const std::string& path);
DenoiserModel load_model(const std::string& path);

}  // namespace cprlab::denoiser
