#ifndef CPRLAB_COMMON_HPP
#define CPRLAB_COMMON_HPP

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cprlab {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kGeneratorVersion = 1;
inline constexpr int kCheckpointVersion = 1;

inline constexpr std::size_t kNumChannels = 5;

// Canonical channel order. Everything (CSV columns, RNG streams, model slots)
// indexes channels in this order.
inline constexpr std::array<const char*, kNumChannels> kChannelNames = {
    "compression", "pressure", "velocity", "force", "pmouth"};

// Returns -1 for unknown names.
inline int channel_index(std::string_view name) {
  for (std::size_t i = 0; i < kNumChannels; ++i)
    if (name == kChannelNames[i]) return static_cast<int>(i);
  return -1;
}

// Error hierarchy. The CLI maps each type to a distinct exit code.
struct InvalidInput : std::invalid_argument {
  explicit InvalidInput(const std::string& msg) : std::invalid_argument(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

struct MissingChannelError : std::runtime_error {
  explicit MissingChannelError(const std::string& msg)
      : std::runtime_error(msg) {}
};

struct VersionError : std::runtime_error {
  explicit VersionError(const std::string& msg) : std::runtime_error(msg) {}
};

struct TrainingError : std::runtime_error {
  explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cprlab

#endif  // CPRLAB_COMMON_HPP
