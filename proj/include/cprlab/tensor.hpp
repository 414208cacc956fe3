#pragma once

#include <cstddef>
#include <vector>

#include "cprlab/common.hpp"

namespace cprlab::nn {

// Length-major (time, channel) tensor: element (i, c) lives at data[i*channels+c].
struct Tensor {
  std::size_t length = 0;
  std::size_t channels = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::size_t len, std::size_t ch)
      : length(len), channels(ch), data(len * ch, 0.0) {}

  static Tensor scalar(double v) {
    Tensor t(1, 1);
    t.data[0] = v;
    return t;
  }

  double& at(std::size_t i, std::size_t c) { return data[i * channels + c]; }
  double at(std::size_t i, std::size_t c) const { return data[i * channels + c]; }
  std::size_t size() const { return data.size(); }
  bool same_shape(const Tensor& o) const {
    return length == o.length && channels == o.channels;
  }
};

inline std::string shape_str(const Tensor& t) {
  return "(" + std::to_string(t.length) + "," + std::to_string(t.channels) + ")";
}

}  // namespace cprlab::nn
