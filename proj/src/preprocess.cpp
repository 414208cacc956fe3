#include "cprlab/preprocess.hpp"

#include <cmath>

namespace cprlab::preprocess {

ImputeResult impute(const std::vector<double>& x) {
  const std::size_t n = x.size();
  ImputeResult r;
  r.values = x;
  r.mask.assign(n, 1);

  std::size_t first_finite = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(x[i])) {
      first_finite = i;
      break;
    }
  }
  if (first_finite == n)
    throw InvalidInput("impute: channel has no finite samples");

  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(x[i])) r.mask[i] = 0;

  // Leading edge: copy the first finite value backwards.
  for (std::size_t i = 0; i < first_finite; ++i)
    r.values[i] = x[first_finite];

  std::size_t prev = first_finite;
  std::size_t i = first_finite + 1;
  while (i < n) {
    if (std::isfinite(x[i])) {
      prev = i;
      ++i;
      continue;
    }
    std::size_t next = i + 1;
    while (next < n && !std::isfinite(x[next])) ++next;
    if (next == n) {
      for (std::size_t j = i; j < n; ++j) r.values[j] = x[prev];  // trailing
      break;
    }
    const double a = x[prev];
    const double b = x[next];
    const double span = static_cast<double>(next - prev);
    for (std::size_t j = i; j < next; ++j)
      r.values[j] = a + (b - a) * static_cast<double>(j - prev) / span;
    prev = next;
    i = next + 1;
  }
  return r;
}

std::array<NormStats, kNumChannels> fit_stats(
    const std::vector<std::array<std::vector<double>, kNumChannels>>&
        channels) {
  if (channels.empty()) throw InvalidInput("fit_stats: no sessions");
  std::array<NormStats, kNumChannels> out;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& sess : channels) {
      for (double v : sess[c]) {
        if (!std::isfinite(v))
          throw InvalidInput("fit_stats: non-finite value (impute first)");
        sum += v;
      }
      n += sess[c].size();
    }
    if (n == 0) throw InvalidInput("fit_stats: empty channel");
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& sess : channels)
      for (double v : sess[c]) ss += (v - mean) * (v - mean);
    double std = std::sqrt(ss / static_cast<double>(n));
    if (std < 1e-8) std = 1e-8;
    out[c] = {mean, std};
  }
  return out;
}

std::vector<double> normalize(const std::vector<double>& x, NormStats s) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = (x[i] - s.mean) / s.std;
  return y;
}

std::vector<double> denormalize(const std::vector<double>& x, NormStats s) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * s.std + s.mean;
  return y;
}

ImputedSession impute_session(const SignalSession& s) {
  s.validate();
  ImputedSession out;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    ImputeResult r = impute(s.channels[c]);
    out.values[c] = std::move(r.values);
    out.masks[c] = std::move(r.mask);
  }
  return out;
}

}  // namespace cprlab::preprocess
