#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cprlab/common.hpp"
#include "cprlab/session.hpp"

namespace cprlab::preprocess {

struct ImputeResult {
  std::vector<double> values;
  std::vector<std::uint8_t> mask;  // 1 = observed, 0 = imputed
};

// Fills NaN runs by linear interpolation between the nearest finite
// neighbors; leading/trailing NaNs copy the nearest finite value. Requires at
// least one finite sample.
ImputeResult impute(const std::vector<double>& x);

struct NormStats {
  double mean = 0.0;
  double std = 1.0;
};

// Per-channel z-score statistics over all given (already imputed) channels.
// Population standard deviation with a 1e-8 floor against constant channels.
std::array<NormStats, kNumChannels> fit_stats(
    const std::vector<std::array<std::vector<double>, kNumChannels>>& channels);

std::vector<double> normalize(const std::vector<double>& x, NormStats s);
std::vector<double> denormalize(const std::vector<double>& x, NormStats s);

struct ImputedSession {
  std::array<std::vector<double>, kNumChannels> values;
  std::array<std::vector<std::uint8_t>, kNumChannels> masks;
};

ImputedSession impute_session(const SignalSession& s);

}  // namespace cprlab::preprocess
