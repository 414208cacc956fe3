#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cprlab/rng.hpp"
#include "cprlab/session.hpp"

namespace cprlab::corruption {

// Additive Gaussian bursts: each sample independently corrupted with
// probability `probability`; corrupted samples get mean + noise_factor*std*N.
struct GaussianNoiseParams {
  double mean = 0.0;
  double std = 1.0;
  double noise_factor = 1.2;
  double probability = 0.1;
};

struct SaltPepperParams {
  double salt_prob = 1e-4;
  double pepper_prob = 1e-4;
  double salt_value = 1e-5;
  double pepper_value = 1e-5;
};

// Deterministic sinusoidal drift added to the whole channel.
struct BaselineWanderParams {
  double amplitude = 0.02;
  double period_s = 2.0;
};

// Broadband tremor: zero-mean Gaussian added to every sample.
struct MuscleNoiseParams {
  double amplitude = 0.05;
};

// Random constant offsets over short runs; offset magnitude is a fraction of
// the channel's peak-to-peak range, sign chosen per event.
struct AmplitudeChangeParams {
  std::size_t mean_interval = 500;   // expected samples between event starts
  std::size_t max_duration = 10;
  double fraction = 0.005;           // of peak-to-peak
};

// Random multiplicative rescaling over short runs; scales compound when
// events overlap.
struct DepthVariationParams {
  std::size_t mean_interval = 500;
  std::size_t max_duration = 20;
  double scale_min = 0.2;
  double scale_max = 1.8;
};

// Signal loss: runs of samples replaced by NaN.
struct DropoutParams {
  std::size_t mean_interval = 500;
  std::size_t max_duration = 10;
};

struct CorruptionConfig {
  std::uint64_t seed = 0;
  bool gaussian_enabled = true;
  bool salt_pepper_enabled = true;
  bool baseline_enabled = true;
  bool muscle_enabled = true;
  bool amplitude_enabled = true;
  bool depth_enabled = true;
  bool dropout_enabled = true;
  GaussianNoiseParams gaussian;
  SaltPepperParams salt_pepper;
  BaselineWanderParams baseline;
  MuscleNoiseParams muscle;
  AmplitudeChangeParams amplitude;
  DepthVariationParams depth;
  DropoutParams dropout;
};

std::string corruption_config_to_json(const CorruptionConfig& cfg);
CorruptionConfig corruption_config_from_json(const std::string& text);

// One localized artifact occurrence (for the event-based injectors).
struct Event {
  std::size_t start = 0;
  std::size_t duration = 0;
  double value = 0.0;  // offset or scale, injector-dependent
};

// Individual injectors. Each mutates `x` in place drawing from `rng`.
void add_gaussian_noise(std::vector<double>& x, const GaussianNoiseParams& p,
                        SeededRng& rng);
void add_salt_pepper(std::vector<double>& x, const SaltPepperParams& p,
                     SeededRng& rng);
void add_baseline_wander(std::vector<double>& x, const BaselineWanderParams& p,
                         double sample_rate);
void add_muscle_noise(std::vector<double>& x, const MuscleNoiseParams& p,
                      SeededRng& rng);
void add_amplitude_changes(std::vector<double>& x,
                           const AmplitudeChangeParams& p, SeededRng& rng,
                           std::vector<Event>* events = nullptr);
void add_depth_variations(std::vector<double>& x, const DepthVariationParams& p,
                          SeededRng& rng, std::vector<Event>* events = nullptr);
void add_dropouts(std::vector<double>& x, const DropoutParams& p,
                  SeededRng& rng, std::vector<Event>* events = nullptr);

// Applies every enabled injector to every channel, in a fixed order, each
// channel on its own deterministic RNG stream derived from cfg.seed.
SignalSession corrupt_session(const SignalSession& clean,
                              const CorruptionConfig& cfg);

}  // namespace cprlab::corruption
