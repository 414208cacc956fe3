#include "cprlab/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cprlab/common.hpp"
#include "json.hpp"

namespace cprlab::corruption {

namespace {

using nlohmann::json;

// Draw the start/duration pair shared by event-based injectors. Events are
// seeded at a mean spacing of `mean_interval` samples: n/mean_interval events,
// each with uniform start and duration in [1, max_duration].
std::size_t event_count(std::size_t n, std::size_t mean_interval) {
  if (mean_interval == 0) throw InvalidInput("corruption: mean_interval must be > 0");
  return n / mean_interval;
}

}  // namespace

std::string corruption_config_to_json(const CorruptionConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["gaussian"] = {{"enabled", cfg.gaussian_enabled},
                   {"mean", cfg.gaussian.mean},
                   {"std", cfg.gaussian.std},
                   {"noise_factor", cfg.gaussian.noise_factor},
                   {"probability", cfg.gaussian.probability}};
  j["salt_pepper"] = {{"enabled", cfg.salt_pepper_enabled},
                      {"salt_prob", cfg.salt_pepper.salt_prob},
                      {"pepper_prob", cfg.salt_pepper.pepper_prob},
                      {"salt_value", cfg.salt_pepper.salt_value},
                      {"pepper_value", cfg.salt_pepper.pepper_value}};
  j["baseline_wander"] = {{"enabled", cfg.baseline_enabled},
                          {"amplitude", cfg.baseline.amplitude},
                          {"period_s", cfg.baseline.period_s}};
  j["muscle_noise"] = {{"enabled", cfg.muscle_enabled},
                       {"amplitude", cfg.muscle.amplitude}};
  j["amplitude_changes"] = {{"enabled", cfg.amplitude_enabled},
                            {"mean_interval", cfg.amplitude.mean_interval},
                            {"max_duration", cfg.amplitude.max_duration},
                            {"fraction", cfg.amplitude.fraction}};
  j["depth_variations"] = {{"enabled", cfg.depth_enabled},
                           {"mean_interval", cfg.depth.mean_interval},
                           {"max_duration", cfg.depth.max_duration},
                           {"scale_min", cfg.depth.scale_min},
                           {"scale_max", cfg.depth.scale_max}};
  j["dropouts"] = {{"enabled", cfg.dropout_enabled},
                   {"mean_interval", cfg.dropout.mean_interval},
                   {"max_duration", cfg.dropout.max_duration}};
  return j.dump(2) + "\n";
}

CorruptionConfig corruption_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("corruption config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("corruption config: root must be an object");

  CorruptionConfig cfg;
  try {
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("gaussian")) {
      const auto& g = j.at("gaussian");
      if (g.contains("enabled")) cfg.gaussian_enabled = g.at("enabled").get<bool>();
      if (g.contains("mean")) cfg.gaussian.mean = g.at("mean").get<double>();
      if (g.contains("std")) cfg.gaussian.std = g.at("std").get<double>();
      if (g.contains("noise_factor"))
        cfg.gaussian.noise_factor = g.at("noise_factor").get<double>();
      if (g.contains("probability"))
        cfg.gaussian.probability = g.at("probability").get<double>();
    }
    if (j.contains("salt_pepper")) {
      const auto& g = j.at("salt_pepper");
      if (g.contains("enabled"))
        cfg.salt_pepper_enabled = g.at("enabled").get<bool>();
      if (g.contains("salt_prob"))
        cfg.salt_pepper.salt_prob = g.at("salt_prob").get<double>();
      if (g.contains("pepper_prob"))
        cfg.salt_pepper.pepper_prob = g.at("pepper_prob").get<double>();
      if (g.contains("salt_value"))
        cfg.salt_pepper.salt_value = g.at("salt_value").get<double>();
      if (g.contains("pepper_value"))
        cfg.salt_pepper.pepper_value = g.at("pepper_value").get<double>();
    }
    if (j.contains("baseline_wander")) {
      const auto& g = j.at("baseline_wander");
      if (g.contains("enabled")) cfg.baseline_enabled = g.at("enabled").get<bool>();
      if (g.contains("amplitude"))
        cfg.baseline.amplitude = g.at("amplitude").get<double>();
      if (g.contains("period_s"))
        cfg.baseline.period_s = g.at("period_s").get<double>();
    }
    if (j.contains("muscle_noise")) {
      const auto& g = j.at("muscle_noise");
      if (g.contains("enabled")) cfg.muscle_enabled = g.at("enabled").get<bool>();
      if (g.contains("amplitude"))
        cfg.muscle.amplitude = g.at("amplitude").get<double>();
    }
    if (j.contains("amplitude_changes")) {
      const auto& g = j.at("amplitude_changes");
      if (g.contains("enabled")) cfg.amplitude_enabled = g.at("enabled").get<bool>();
      if (g.contains("mean_interval"))
        cfg.amplitude.mean_interval = g.at("mean_interval").get<std::size_t>();
      if (g.contains("max_duration"))
        cfg.amplitude.max_duration = g.at("max_duration").get<std::size_t>();
      if (g.contains("fraction"))
        cfg.amplitude.fraction = g.at("fraction").get<double>();
    }
    if (j.contains("depth_variations")) {
      const auto& g = j.at("depth_variations");
      if (g.contains("enabled")) cfg.depth_enabled = g.at("enabled").get<bool>();
      if (g.contains("mean_interval"))
        cfg.depth.mean_interval = g.at("mean_interval").get<std::size_t>();
      if (g.contains("max_duration"))
        cfg.depth.max_duration = g.at("max_duration").get<std::size_t>();
      if (g.contains("scale_min"))
        cfg.depth.scale_min = g.at("scale_min").get<double>();
      if (g.contains("scale_max"))
        cfg.depth.scale_max = g.at("scale_max").get<double>();
    }
    if (j.contains("dropouts")) {
      const auto& g = j.at("dropouts");
      if (g.contains("enabled")) cfg.dropout_enabled = g.at("enabled").get<bool>();
      if (g.contains("mean_interval"))
        cfg.dropout.mean_interval = g.at("mean_interval").get<std::size_t>();
      if (g.contains("max_duration"))
        cfg.dropout.max_duration = g.at("max_duration").get<std::size_t>();
    }
  } catch (const json::type_error& e) {
    throw SchemaError(std::string("corruption config: bad field type: ") + e.what());
  }

  if (cfg.gaussian.probability < 0.0 || cfg.gaussian.probability > 1.0)
    throw InvalidInput("corruption config: gaussian probability must lie in [0,1]");
  if (cfg.salt_pepper.salt_prob < 0.0 || cfg.salt_pepper.pepper_prob < 0.0 ||
      cfg.salt_pepper.salt_prob + cfg.salt_pepper.pepper_prob > 1.0)
    throw InvalidInput("corruption config: salt/pepper probabilities must be "
                       ">= 0 and sum to <= 1");
  if (cfg.depth.scale_min > cfg.depth.scale_max)
    throw InvalidInput("corruption config: depth scale_min must be <= scale_max");
  return cfg;
}

void add_gaussian_noise(std::vector<double>& x, const GaussianNoiseParams& p,
                        SeededRng& rng) {
  for (double& v : x) {
    if (rng.uniform() < p.probability)
      v += p.mean + p.noise_factor * p.std * rng.normal();
  }
}

void add_salt_pepper(std::vector<double>& x, const SaltPepperParams& p,
                     SeededRng& rng) {
  for (double& v : x) {
    const double u = rng.uniform();
    if (u < p.salt_prob)
      v += p.salt_value;
    else if (u < p.salt_prob + p.pepper_prob)
      v -= p.pepper_value;
  }
}

void add_baseline_wander(std::vector<double>& x, const BaselineWanderParams& p,
                         double sample_rate) {
  if (!(sample_rate > 0.0))
    throw InvalidInput("baseline wander: sample_rate must be > 0");
  if (!(p.period_s > 0.0))
    throw InvalidInput("baseline wander: period must be > 0");
  const double w = 2.0 * 3.141592653589793238462643383279502884 /
                   (p.period_s * sample_rate);
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] += p.amplitude * std::sin(w * static_cast<double>(i));
}

void add_muscle_noise(std::vector<double>& x, const MuscleNoiseParams& p,
                      SeededRng& rng) {
  for (double& v : x) v += p.amplitude * rng.normal();
}

void add_amplitude_changes(std::vector<double>& x,
                           const AmplitudeChangeParams& p, SeededRng& rng,
                           std::vector<Event>* events) {
  const std::size_t n = x.size();
  if (n == 0) return;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : x) {
    if (std::isnan(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double p2p = (hi > lo) ? hi - lo : 0.0;
  const std::size_t k = event_count(n, p.mean_interval);
  for (std::size_t e = 0; e < k; ++e) {
    const std::size_t start = rng.uniform_int(n);
    const std::size_t dur = rng.uniform_int(p.max_duration) + 1;
    const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
    const double offset = sign * p.fraction * p2p;
    const std::size_t end = std::min(n, start + dur);
    for (std::size_t i = start; i < end; ++i) x[i] += offset;
    if (events) events->push_back({start, end - start, offset});
  }
}

void add_depth_variations(std::vector<double>& x, const DepthVariationParams& p,
                          SeededRng& rng, std::vector<Event>* events) {
  const std::size_t n = x.size();
  if (n == 0) return;
  const std::size_t k = event_count(n, p.mean_interval);
  for (std::size_t e = 0; e < k; ++e) {
    const std::size_t start = rng.uniform_int(n);
    const std::size_t dur = rng.uniform_int(p.max_duration) + 1;
    const double scale =
        p.scale_min + (p.scale_max - p.scale_min) * rng.uniform();
    const std::size_t end = std::min(n, start + dur);
    for (std::size_t i = start; i < end; ++i) x[i] *= scale;
    if (events) events->push_back({start, end - start, scale});
  }
}

void add_dropouts(std::vector<double>& x, const DropoutParams& p,
                  SeededRng& rng, std::vector<Event>* events) {
  const std::size_t n = x.size();
  if (n == 0) return;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::size_t k = event_count(n, p.mean_interval);
  for (std::size_t e = 0; e < k; ++e) {
    const std::size_t start = rng.uniform_int(n);
    const std::size_t dur = rng.uniform_int(p.max_duration) + 1;
    const std::size_t end = std::min(n, start + dur);
    for (std::size_t i = start; i < end; ++i) x[i] = nan;
    if (events) events->push_back({start, end - start, nan});
  }
}

SignalSession corrupt_session(const SignalSession& clean,
                              const CorruptionConfig& cfg) {
  clean.validate();
  SignalSession out = clean;
  out.is_clean = false;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    SeededRng rng(cfg.seed, c);
    auto& x = out.channels[c];
    if (cfg.gaussian_enabled) add_gaussian_noise(x, cfg.gaussian, rng);
    if (cfg.salt_pepper_enabled) add_salt_pepper(x, cfg.salt_pepper, rng);
    if (cfg.baseline_enabled)
      add_baseline_wander(x, cfg.baseline, out.sample_rate);
    if (cfg.muscle_enabled) add_muscle_noise(x, cfg.muscle, rng);
    if (cfg.amplitude_enabled) add_amplitude_changes(x, cfg.amplitude, rng);
    if (cfg.depth_enabled) add_depth_variations(x, cfg.depth, rng);
    if (cfg.dropout_enabled) add_dropouts(x, cfg.dropout, rng);
  }
  return out;
}

}  // namespace cprlab::corruption
