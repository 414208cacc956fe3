#ifndef CPRLAB_SESSION_HPP
#define CPRLAB_SESSION_HPP

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "cprlab/common.hpp"

namespace cprlab {

// Five aligned time-series channels at a fixed sample rate. Channel vectors
// always have identical length; kChannelNames gives the canonical order.
struct SignalSession {
  std::string patient_id;
  double sample_rate = 100.0;
  std::array<std::vector<double>, kNumChannels> channels;
  bool is_clean = false;

  std::size_t length() const { return channels[0].size(); }

  std::vector<double>& channel(int i) { return channels[static_cast<std::size_t>(i)]; }
  const std::vector<double>& channel(int i) const {
    return channels[static_cast<std::size_t>(i)];
  }

  // Throws InvalidInput if channel lengths disagree, or if is_clean is set
  // and any sample is non-finite.
  void validate() const;

  bool has_non_finite() const;
};

// Shortest decimal text that round-trips the exact 64-bit value.
// NaN is written as the literal token "NaN".
std::string format_value(double v);

// CSV schema: header "t,compression,pressure,velocity,force,pmouth",
// t in seconds with 6 decimal places, one row per sample.
std::string session_to_csv(const SignalSession& s);

// Parses the schema above. patient_id is taken from `id`; sample_rate is
// recovered from the first two t values. Throws SchemaError on a bad header
// or malformed row, MissingChannelError if a channel column is absent.
SignalSession session_from_csv(const std::string& text, const std::string& id);

void write_session_csv(const SignalSession& s, const std::string& path);
SignalSession read_session_csv(const std::string& path);

}  // namespace cprlab

#endif  // CPRLAB_SESSION_HPP
