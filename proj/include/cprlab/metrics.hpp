#pragma once

#include <array>
#include <string>
#include <vector>

#include "cprlab/session.hpp"

namespace cprlab::metrics {

// 10*log10(sum(clean^2) / sum((estimate-clean)^2)); +infinity when the
// residual power is zero. All-zero clean input is an error.
double snr_db(const std::vector<double>& clean,
              const std::vector<double>& estimate);

// 10*log10(max|clean|^2 / mean((estimate-clean)^2)); +infinity on zero MSE.
double psnr_db(const std::vector<double>& clean,
               const std::vector<double>& estimate);

using Matrix5 = std::array<std::array<double, kNumChannels>, kNumChannels>;

// Pairwise Pearson correlations across the five channels. NaN samples are
// handled pairwise-complete (indices where either channel is NaN are dropped
// for that pair). Exactly symmetric with unit diagonal. A channel constant
// over its finite samples is a degenerate-channel error naming the channel.
Matrix5 correlation_matrix(const SignalSession& s);

// Pearson correlation between the 10 upper-triangle off-diagonal entries of
// two symmetric unit-diagonal matrices.
double matrix_similarity(const Matrix5& a, const Matrix5& b);

struct ChannelScore {
  double snr_db = 0.0;
  double psnr_db = 0.0;
};

struct EvalReport {
  std::string method;
  std::array<ChannelScore, kNumChannels> per_channel;
  double aggregate_snr_db = 0.0;   // mean of per-channel dB values
  double aggregate_psnr_db = 0.0;
  Matrix5 corr_before{};  // noisy session, imputed
  Matrix5 corr_after{};   // method output
  Matrix5 corr_clean{};   // reported for context
  double corr_similarity = 0.0;  // before vs after
};

EvalReport evaluate_method(const std::string& method,
                           const SignalSession& clean,
                           const SignalSession& noisy,
                           const SignalSession& denoised);

// JSON with the string tokens "inf"/"-inf"/"nan" for non-finite values.
std::string report_to_json(const EvalReport& r);

// Plot-ready tables: per-channel scores and flattened correlation matrices.
std::string scores_csv(const std::vector<EvalReport>& reports);
std::string correlations_csv(const std::vector<EvalReport>& reports);

}  // namespace cprlab::metrics
