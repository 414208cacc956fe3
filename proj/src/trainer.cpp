#include "cprlab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cprlab/adam.hpp"
#include "cprlab/rng.hpp"
#include "json.hpp"

namespace cprlab::trainer {

namespace {

using denoiser::DenoiserModel;
using nlohmann::json;
using nn::NodePtr;
using nn::Tensor;

void validate(const TrainConfig& cfg) {
  if (cfg.batch_size < 1) throw InvalidInput("TrainConfig: batch_size must be >= 1");
  if (cfg.patience < 1) throw InvalidInput("TrainConfig: patience must be >= 1");
  if (cfg.max_epochs < 1) throw InvalidInput("TrainConfig: max_epochs must be >= 1");
  if (!(cfg.val_fraction > 0.0 && cfg.val_fraction < 1.0))
    throw InvalidInput("TrainConfig: val_fraction must lie in (0,1)");
  if (!std::isfinite(cfg.learning_rate) || cfg.learning_rate < 0.0)
    throw InvalidInput("TrainConfig: learning_rate must be finite and >= 0");
}

struct WindowGraph {
  NodePtr loss;  // scalar sum of masked absolute errors
  NodePtr fused;
  std::size_t unmasked = 0;
};

WindowGraph build_window(const DenoiserModel& model, const Dataset& data,
                         const WindowRef& ref) {
  const std::size_t W = data.window;
  std::array<NodePtr, kNumChannels> outs;
  Tensor target(W, kNumChannels);
  Tensor mask(W, kNumChannels);
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    const auto& v = data.values[ref.session][c];
    const auto& m = data.masks[ref.session][c];
    Tensor in(W, 1);
    for (std::size_t i = 0; i < W; ++i) {
      in.data[i] = v[ref.start + i];
      target.at(i, c) = v[ref.start + i];
      mask.at(i, c) = m[ref.start + i] ? 1.0 : 0.0;
    }
    outs[c] = denoiser::forward_channel_graph(model.per_channel[c],
                                              nn::constant(std::move(in)));
  }
  WindowGraph g;
  g.unmasked = nn::count_unmasked(mask);
  g.fused = denoiser::fuse_graph(model.fusion, outs);
  g.loss = nn::masked_abs_sum(g.fused, std::move(target), std::move(mask));
  return g;
}

std::size_t count_unmasked(const Dataset& data, const WindowRef& ref) {
  std::size_t n = 0;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    const auto& m = data.masks[ref.session][c];
    for (std::size_t i = 0; i < data.window; ++i)
      if (m[ref.start + i]) ++n;
  }
  return n;
}

[[noreturn]] void throw_non_finite(std::size_t epoch, std::size_t batch,
                                   const WindowGraph& g) {
  const char* channel = "unknown";
  const Tensor& f = g.fused->value;
  for (std::size_t c = 0; c < kNumChannels && std::string(channel) == "unknown";
       ++c)
    for (std::size_t i = 0; i < f.length; ++i)
      if (!std::isfinite(f.at(i, c))) {
        channel = kChannelNames[c];
        break;
      }
  throw TrainingError("training diverged: non-finite loss at epoch " +
                      std::to_string(epoch) + ", batch " +
                      std::to_string(batch) + ", channel " + channel);
}

void shuffle(std::vector<WindowRef>& refs, SeededRng& rng) {
  for (std::size_t i = refs.size(); i > 1; --i) {
    const std::size_t j = rng.uniform_int(i);
    std::swap(refs[i - 1], refs[j]);
  }
}

}  // namespace

std::string train_config_to_json(const TrainConfig& cfg) {
  json j = {{"batch_size", cfg.batch_size},
            {"max_epochs", cfg.max_epochs},
            {"patience", cfg.patience},
            {"learning_rate", cfg.learning_rate},
            {"seed", cfg.seed},
            {"val_fraction", cfg.val_fraction}};
  return j.dump(2) + "\n";
}

TrainConfig train_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("train config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("train config: root must be an object");
  TrainConfig cfg;
  try {
    if (j.contains("batch_size")) cfg.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("max_epochs")) cfg.max_epochs = j.at("max_epochs").get<std::size_t>();
    if (j.contains("patience")) cfg.patience = j.at("patience").get<std::size_t>();
    if (j.contains("learning_rate"))
      cfg.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("val_fraction"))
      cfg.val_fraction = j.at("val_fraction").get<double>();
  } catch (const json::type_error& e) {
    throw SchemaError(std::string("train config: bad field type: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

Dataset make_dataset(const std::vector<SignalSession>& sessions,
                     std::size_t window, std::size_t stride,
                     std::uint64_t seed, double val_fraction) {
  if (sessions.empty()) throw InvalidInput("make_dataset: no sessions");
  if (window == 0 || stride == 0)
    throw InvalidInput("make_dataset: window and stride must be > 0");
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw InvalidInput("make_dataset: val_fraction must lie in (0,1)");

  Dataset d;
  d.window = window;
  d.stride = stride;
  for (const auto& s : sessions) {
    if (s.length() < window)
      throw InvalidInput("make_dataset: session " + s.patient_id +
                         " is shorter than one window");
    preprocess::ImputedSession imp = preprocess::impute_session(s);
    d.values.push_back(std::move(imp.values));
    d.masks.push_back(std::move(imp.masks));
  }
  d.stats = preprocess::fit_stats(d.values);
  for (auto& sess : d.values)
    for (std::size_t c = 0; c < kNumChannels; ++c)
      sess[c] = preprocess::normalize(sess[c], d.stats[c]);

  std::vector<WindowRef> refs;
  for (std::size_t si = 0; si < d.values.size(); ++si) {
    const std::size_t len = d.values[si][0].size();
    for (std::size_t start = 0; start + window <= len; start += stride)
      refs.push_back({si, start});
  }
  SeededRng rng(seed, 0);
  shuffle(refs, rng);

  const auto n_val = static_cast<std::size_t>(
      std::floor(val_fraction * static_cast<double>(refs.size())));
  const std::size_t n_train = refs.size() - n_val;
  d.train.assign(refs.begin(), refs.begin() + static_cast<std::ptrdiff_t>(n_train));
  d.val.assign(refs.begin() + static_cast<std::ptrdiff_t>(n_train), refs.end());
  if (d.train.empty()) throw InvalidInput("make_dataset: empty training split");
  return d;
}

TrainHistory fit(DenoiserModel& model, const Dataset& data,
                 const TrainConfig& cfg) {
  validate(cfg);
  if (data.train.empty()) throw InvalidInput("fit: empty training split");
  if (data.window != model.window)
    throw InvalidInput("fit: dataset window " + std::to_string(data.window) +
                       " does not match model window " +
                       std::to_string(model.window));
  model.norm_stats = data.stats;

  const auto params = model.parameter_nodes();
  nn::Adam adam(params, {cfg.learning_rate, 0.9, 0.999, 1e-8});

  auto snapshot = [&params]() {
    std::vector<Tensor> w;
    w.reserve(params.size());
    for (const auto& p : params) w.push_back(p->value);
    return w;
  };
  auto restore = [&params](const std::vector<Tensor>& w) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = w[i];
  };

  auto eval_split = [&](const std::vector<WindowRef>& refs, std::size_t epoch) {
    double abs_sum = 0.0;
    std::size_t total = 0;
    for (const auto& ref : refs) {
      WindowGraph g = build_window(model, data, ref);
      const double v = g.loss->value.data[0];
      if (!std::isfinite(v)) throw_non_finite(epoch, 0, g);
      abs_sum += v;
      total += g.unmasked;
    }
    return total ? abs_sum / static_cast<double>(total) : 0.0;
  };

  TrainHistory hist;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<Tensor> best_weights;
  std::size_t bad_epochs = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::vector<WindowRef> order = data.train;
    SeededRng rng(cfg.seed, epoch);
    shuffle(order, rng);

    double epoch_abs = 0.0;
    std::size_t epoch_total = 0;
    std::size_t batch_index = 0;
    for (std::size_t off = 0; off < order.size();
         off += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), off + cfg.batch_size);
      std::size_t total = 0;
      for (std::size_t i = off; i < end; ++i)
        total += count_unmasked(data, order[i]);
      if (total == 0) continue;

      adam.zero_grad();
      double batch_abs = 0.0;
      for (std::size_t i = off; i < end; ++i) {
        WindowGraph g = build_window(model, data, order[i]);
        const double v = g.loss->value.data[0];
        if (!std::isfinite(v)) throw_non_finite(epoch, batch_index, g);
        batch_abs += v;
        nn::backward(g.loss, 1.0 / static_cast<double>(total));
      }
      adam.step();
      epoch_abs += batch_abs;
      epoch_total += total;
    }

    EpochStats es;
    es.train_loss = epoch_total ? epoch_abs / static_cast<double>(epoch_total)
                                : 0.0;
    es.val_loss = data.val.empty() ? es.train_loss : eval_split(data.val, epoch);
    hist.epochs.push_back(es);
    hist.stopped_epoch = epoch;

    if (es.val_loss < best_val) {
      best_val = es.val_loss;
      hist.best_epoch = epoch;
      best_weights = snapshot();
      bad_epochs = 0;
    } else {
      ++bad_epochs;
      if (bad_epochs >= cfg.patience) break;
    }
  }

  if (!best_weights.empty()) restore(best_weights);
  return hist;
}

std::string history_to_csv(const TrainHistory& h) {
  std::string out = "epoch,train_loss,val_loss\n";
  for (std::size_t i = 0; i < h.epochs.size(); ++i) {
    out += std::to_string(i + 1);
    out += ',';
    out += format_value(h.epochs[i].train_loss);
    out += ',';
    out += format_value(h.epochs[i].val_loss);
    out += '\n';
  }
  return out;
}

}  // namespace cprlab::trainer
