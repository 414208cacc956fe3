#include "cprlab/denoiser.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <map>

#include "cprlab/ioutil.hpp"
#include "json.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload assumes a little-endian host");

namespace cprlab::denoiser {

namespace {

using nn::NodePtr;
using nn::Tensor;
using nlohmann::json;

ConvLayer make_conv(std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
                    std::uint64_t seed, std::uint64_t stream) {
  ConvLayer l;
  l.kernel = kernel;
  l.in_ch = in_ch;
  l.out_ch = out_ch;
  Tensor w(kernel, in_ch * out_ch);
  SeededRng rng(seed, stream);
  nn::glorot_fill(w, kernel * in_ch, kernel * out_ch, rng);
  l.w = nn::leaf(std::move(w));
  l.b = nn::leaf(Tensor(1, out_ch));
  return l;
}

DenseLayer make_dense(std::size_t in_dim, std::size_t out_dim,
                      std::uint64_t seed, std::uint64_t stream) {
  DenseLayer l;
  Tensor w(in_dim, out_dim);
  SeededRng rng(seed, stream);
  nn::glorot_fill(w, in_dim, out_dim, rng);
  l.w = nn::leaf(std::move(w));
  l.b = nn::leaf(Tensor(1, out_dim));
  return l;
}

constexpr const char* kLayerNames[] = {"enc_conv1",     "enc_conv2",
                                       "residual_conv", "dec_conv1",
                                       "dec_conv2",     "out_conv"};

std::array<ConvLayer ChannelAutoencoder::*, 6> layer_members() {
  return {&ChannelAutoencoder::enc_conv1,     &ChannelAutoencoder::enc_conv2,
          &ChannelAutoencoder::residual_conv, &ChannelAutoencoder::dec_conv1,
          &ChannelAutoencoder::dec_conv2,     &ChannelAutoencoder::out_conv};
}

Tensor slice_rows(const Tensor& x, std::size_t start, std::size_t len) {
  Tensor y(len, x.channels);
  std::copy_n(x.data.begin() + static_cast<std::ptrdiff_t>(start * x.channels),
              len * x.channels, y.data.begin());
  return y;
}

Tensor extract_channel(const Tensor& x, std::size_t c) {
  Tensor y(x.length, 1);
  for (std::size_t i = 0; i < x.length; ++i) y.data[i] = x.at(i, c);
  return y;
}

}  // namespace

std::vector<std::pair<std::string, NodePtr>> DenoiserModel::parameters() const {
  std::vector<std::pair<std::string, NodePtr>> out;
  out.reserve(64);
  const auto members = layer_members();
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    const std::string prefix = std::string(kChannelNames[c]) + ".";
    for (std::size_t li = 0; li < members.size(); ++li) {
      const ConvLayer& l = per_channel[c].*members[li];
      out.emplace_back(prefix + kLayerNames[li] + ".w", l.w);
      out.emplace_back(prefix + kLayerNames[li] + ".b", l.b);
    }
  }
  out.emplace_back("fusion.hidden.w", fusion.hidden.w);
  out.emplace_back("fusion.hidden.b", fusion.hidden.b);
  out.emplace_back("fusion.output.w", fusion.output.w);
  out.emplace_back("fusion.output.b", fusion.output.b);
  return out;
}

std::vector<NodePtr> DenoiserModel::parameter_nodes() const {
  std::vector<NodePtr> out;
  for (auto& [name, p] : parameters()) out.push_back(p);
  return out;
}

std::size_t DenoiserModel::parameter_count() const {
  std::size_t n = 0;
  for (auto& [name, p] : parameters()) n += p->value.size();
  return n;
}

DenoiserModel build_model(std::uint64_t seed) {
  DenoiserModel m;
  std::uint64_t stream = 0;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    ChannelAutoencoder& ae = m.per_channel[c];
    ae.enc_conv1 = make_conv(1, 32, 5, seed, stream++);
    ae.enc_conv2 = make_conv(32, 16, 5, seed, stream++);
    ae.residual_conv = make_conv(16, 16, 1, seed, stream++);
    ae.dec_conv1 = make_conv(32, 16, 5, seed, stream++);
    ae.dec_conv2 = make_conv(16, 32, 5, seed, stream++);
    ae.out_conv = make_conv(32, 1, 5, seed, stream++);
  }
  m.fusion.hidden = make_dense(kNumChannels, 16, seed, stream++);
  m.fusion.output = make_dense(16, kNumChannels, seed, stream++);
  return m;
}

NodePtr forward_channel_graph(const ChannelAutoencoder& ae,
                              const NodePtr& input) {
  using namespace nn;
  auto h1 = relu(conv1d(input, ae.enc_conv1.w, ae.enc_conv1.b));
  auto p1 = maxpool1d(h1, ChannelAutoencoder::kPool);
  auto h2 = relu(conv1d(p1, ae.enc_conv2.w, ae.enc_conv2.b));
  auto z = maxpool1d(h2, ChannelAutoencoder::kPool);
  auto r = conv1d(z, ae.residual_conv.w, ae.residual_conv.b);
  auto combined = add(z, r);
  auto up_combined = upsample1d(combined, ChannelAutoencoder::kUpsample);
  auto up_code = upsample1d(z, ChannelAutoencoder::kUpsample);
  auto cat = concat_channels(up_combined, up_code);
  auto d1 = relu(conv1d(cat, ae.dec_conv1.w, ae.dec_conv1.b));
  auto u2 = upsample1d(d1, ChannelAutoencoder::kUpsample);
  auto d2 = relu(conv1d(u2, ae.dec_conv2.w, ae.dec_conv2.b));
  return conv1d(d2, ae.out_conv.w, ae.out_conv.b);
}

NodePtr fuse_graph(const FusionNetwork& fusion,
                   const std::array<NodePtr, kNumChannels>& channels) {
  using namespace nn;
  NodePtr stacked = channels[0];
  for (std::size_t c = 1; c < kNumChannels; ++c)
    stacked = concat_channels(stacked, channels[c]);
  auto h = relu(dense(stacked, fusion.hidden.w, fusion.hidden.b));
  return dense(h, fusion.output.w, fusion.output.b);
}

Tensor forward_channel(const DenoiserModel& m, const std::string& channel,
                       const Tensor& window) {
  if (window.length != m.window || window.channels != 1)
    throw InvalidInput("forward_channel: expected (" +
                       std::to_string(m.window) + ",1) window, got " +
                       nn::shape_str(window));
  const int c = channel_index(channel);
  if (c < 0)
    throw MissingChannelError("forward_channel: unknown channel '" + channel +
                              "'");
  return forward_channel_graph(m.per_channel[static_cast<std::size_t>(c)],
                               nn::constant(window))
      ->value;
}

Tensor fuse(const DenoiserModel& m,
            const std::array<Tensor, kNumChannels>& windows) {
  std::array<NodePtr, kNumChannels> nodes;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    if (!windows[c].same_shape(windows[0]) || windows[c].channels != 1)
      throw InvalidInput("fuse: windows must share shape (L,1)");
    nodes[c] = nn::constant(windows[c]);
  }
  return fuse_graph(m.fusion, nodes)->value;
}

Tensor window_overlap_add(
    const std::function<Tensor(const Tensor&)>& processor,
    const Tensor& channels, std::size_t window, std::size_t stride) {
  const std::size_t n = channels.length;
  const std::size_t C = channels.channels;
  if (window == 0 || stride == 0)
    throw InvalidInput("window_overlap_add: window and stride must be > 0");
  if (n < window)
    throw InvalidInput("window_overlap_add: input shorter than one window (" +
                       std::to_string(n) + " < " + std::to_string(window) +
                       ")");
  Tensor sums(n, C);
  std::vector<std::size_t> counts(n, 0);

  auto apply = [&](std::size_t start, std::size_t keep_from) {
    Tensor out = processor(slice_rows(channels, start, window));
    if (out.length != window || out.channels != C)
      throw InvalidInput("window_overlap_add: processor changed shape");
    for (std::size_t i = keep_from; i < window; ++i) {
      for (std::size_t c = 0; c < C; ++c)
        sums.at(start + i, c) += out.at(i, c);
      ++counts[start + i];
    }
  };

  std::size_t covered = 0;
  for (std::size_t s = 0; s + window <= n; s += stride) {
    apply(s, 0);
    covered = s + window;
  }
  if (covered < n) {
    const std::size_t s = n - window;
    apply(s, covered - s);  // tail window fills only the uncovered samples
  }

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < C; ++c)
      sums.at(i, c) /= static_cast<double>(counts[i]);
  return sums;
}

SignalSession denoise_session(const DenoiserModel& m, const SignalSession& s) {
  s.validate();
  const std::size_t n = s.length();
  if (n < m.window)
    throw InvalidInput("denoise_session: session length " + std::to_string(n) +
                       " is shorter than one window of " +
                       std::to_string(m.window));

  const preprocess::ImputedSession imp = preprocess::impute_session(s);
  Tensor x(n, kNumChannels);
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    const auto norm = preprocess::normalize(imp.values[c], m.norm_stats[c]);
    for (std::size_t i = 0; i < n; ++i) x.at(i, c) = norm[i];
  }

  auto processor = [&m](const Tensor& win) {
    std::array<NodePtr, kNumChannels> outs;
    for (std::size_t c = 0; c < kNumChannels; ++c)
      outs[c] = forward_channel_graph(m.per_channel[c],
                                      nn::constant(extract_channel(win, c)));
    return fuse_graph(m.fusion, outs)->value;
  };
  Tensor y = window_overlap_add(processor, x, m.window, m.stride);

  SignalSession out;
  out.patient_id = s.patient_id;
  out.sample_rate = s.sample_rate;
  out.is_clean = false;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    std::vector<double> ch(n);
    for (std::size_t i = 0; i < n; ++i) ch[i] = y.at(i, c);
    out.channels[c] = preprocess::denormalize(ch, m.norm_stats[c]);
  }
  return out;
}

void save_model(const DenoiserModel& m, const std::string& path) {
  const auto params = m.parameters();
  json header;
  header["format"] = "cprlab-checkpoint";
  header["version"] = m.version;
  header["window"] = m.window;
  header["stride"] = m.stride;
  json names = json::array();
  json stats = json::object();
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    names.push_back(kChannelNames[c]);
    stats[kChannelNames[c]] = {{"mean", m.norm_stats[c].mean},
                               {"std", m.norm_stats[c].std}};
  }
  header["channels"] = names;
  header["norm_stats"] = stats;

  json tensors = json::array();
  std::size_t offset = 0;
  std::string payload;
  for (const auto& [name, p] : params) {
    const Tensor& t = p->value;
    tensors.push_back({{"name", name},
                       {"length", t.length},
                       {"channels", t.channels},
                       {"offset", offset}});
    const std::size_t bytes = t.size() * sizeof(double);
    payload.append(reinterpret_cast<const char*>(t.data.data()), bytes);
    offset += bytes;
  }
  header["tensors"] = tensors;

  std::string blob = header.dump();
  blob.push_back('\n');
  blob += payload;
  ioutil::atomic_write_file(path, blob);
}

DenoiserModel load_model(const std::string& path) {
  const std::string blob = ioutil::read_file(path);
  const std::size_t nl = blob.find('\n');
  if (nl == std::string::npos)
    throw SchemaError("checkpoint: missing header line: " + path);

  json header;
  try {
    header = json::parse(blob.substr(0, nl));
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("checkpoint: corrupted header: ") + e.what());
  }
  if (!header.is_object() || header.value("format", "") != "cprlab-checkpoint")
    throw SchemaError("checkpoint: not a cprlab checkpoint: " + path);
  const int version = header.value("version", -1);
  if (version != kCheckpointVersion)
    throw VersionError("checkpoint: unsupported version " +
                       std::to_string(version) + " (expected " +
                       std::to_string(kCheckpointVersion) + ")");

  DenoiserModel m = build_model(0);
  m.version = version;
  try {
    m.window = header.at("window").get<std::size_t>();
    m.stride = header.at("stride").get<std::size_t>();
    const auto& stats = header.at("norm_stats");
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      const auto& s = stats.at(kChannelNames[c]);
      m.norm_stats[c].mean = s.at("mean").get<double>();
      m.norm_stats[c].std = s.at("std").get<double>();
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("checkpoint: bad header field: ") + e.what());
  }

  const std::string_view payload(blob.data() + nl + 1, blob.size() - nl - 1);
  if (!header.contains("tensors") || !header["tensors"].is_array())
    throw SchemaError("checkpoint: missing tensor directory");

  auto params = m.parameters();
  std::map<std::string, NodePtr> by_name(params.begin(), params.end());
  std::size_t loaded = 0;
  for (const auto& entry : header["tensors"]) {
    std::string name;
    std::size_t length = 0, channels = 0, offset = 0;
    try {
      name = entry.at("name").get<std::string>();
      length = entry.at("length").get<std::size_t>();
      channels = entry.at("channels").get<std::size_t>();
      offset = entry.at("offset").get<std::size_t>();
    } catch (const json::exception& e) {
      throw SchemaError(std::string("checkpoint: bad tensor entry: ") +
                        e.what());
    }
    auto it = by_name.find(name);
    if (it == by_name.end())
      throw SchemaError("checkpoint: unknown tensor " + name);
    Tensor& t = it->second->value;
    if (t.length != length || t.channels != channels)
      throw SchemaError("checkpoint: tensor " + name + " has shape (" +
                        std::to_string(length) + "," +
                        std::to_string(channels) + "), expected " +
                        nn::shape_str(t));
    const std::size_t bytes = t.size() * sizeof(double);
    if (offset + bytes > payload.size())
      throw SchemaError("checkpoint: payload truncated at tensor " + name);
    std::memcpy(t.data.data(), payload.data() + offset, bytes);
    ++loaded;
  }
  if (loaded != params.size())
    throw SchemaError("checkpoint: expected " +
                      std::to_string(params.size()) + " tensors, found " +
                      std::to_string(loaded));
  return m;
}

}  // namespace cprlab::denoiser
