#include "cprlab/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "cprlab/adam.hpp"
#include "cprlab/denoiser.hpp"
#include "cprlab/trainer.hpp"

namespace cprlab::baselines {

namespace {

using nn::NodePtr;
using nn::Tensor;

void validate(const NlmsConfig& cfg) {
  if (cfg.order < 1) throw InvalidInput("NlmsConfig: order must be >= 1");
  if (!(cfg.mu >= 0.0 && cfg.mu <= 2.0))
    throw InvalidInput("NlmsConfig: mu must lie in [0,2]");
  if (!(cfg.eps > 0.0)) throw InvalidInput("NlmsConfig: eps must be > 0");
  if (cfg.delay < 1) throw InvalidInput("NlmsConfig: delay must be >= 1");
}

NodePtr vanilla_forward(const VanillaAeModel::ChannelNet& net,
                        const NodePtr& in, std::size_t window) {
  auto flat = nn::reshape(in, 1, window);
  auto h = nn::relu(nn::dense(flat, net.w1, net.b1));
  auto o = nn::dense(h, net.w2, net.b2);
  return nn::reshape(o, window, 1);
}

}  // namespace

std::vector<double> nlms_denoise(const std::vector<double>& x,
                                 const NlmsConfig& cfg) {
  validate(cfg);
  const std::size_t n = x.size();
  if (n <= cfg.order + cfg.delay)
    throw InvalidInput("nlms_denoise: input length " + std::to_string(n) +
                       " must exceed order + delay");
  for (double v : x)
    if (!std::isfinite(v))
      throw InvalidInput("nlms_denoise: input must be finite (impute first)");

  std::vector<double> w(cfg.order, 0.0);
  w[0] = 1.0;  // passthrough start: predict the most recent available sample
  std::vector<double> y = x;

  const std::size_t first = cfg.delay + cfg.order - 1;
  for (std::size_t i = first; i < n; ++i) {
    double pred = 0.0;
    double unorm = cfg.eps;
    for (std::size_t j = 0; j < cfg.order; ++j) {
      const double u = x[i - cfg.delay - j];
      pred += w[j] * u;
      unorm += u * u;
    }
    y[i] = pred;
    const double e = x[i] - pred;
    const double g = cfg.mu * e / unorm;
    for (std::size_t j = 0; j < cfg.order; ++j) w[j] += g * x[i - cfg.delay - j];
    if (!std::isfinite(w[0]))
      throw TrainingError("nlms_denoise: filter weights diverged at index " +
                          std::to_string(i));
  }
  return y;
}

VanillaAeModel vanilla_ae_fit(const std::vector<SignalSession>& sessions,
                              const VanillaAeConfig& cfg) {
  if (!(cfg.hidden >= 1 && cfg.hidden < cfg.window))
    throw InvalidInput("VanillaAeConfig: requires 1 <= hidden < window");
  if (cfg.epochs < 1) throw InvalidInput("VanillaAeConfig: epochs must be >= 1");

  // Shares the impute/normalize/window pipeline with the proposed method.
  trainer::Dataset data =
      trainer::make_dataset(sessions, cfg.window, 64, cfg.seed);

  VanillaAeModel m;
  m.window = cfg.window;
  m.hidden = cfg.hidden;
  m.norm_stats = data.stats;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    auto& net = m.nets[c];
    Tensor w1(cfg.window, cfg.hidden);
    Tensor w2(cfg.hidden, cfg.window);
    SeededRng r1(cfg.seed, 2 * c);
    SeededRng r2(cfg.seed, 2 * c + 1);
    nn::glorot_fill(w1, cfg.window, cfg.hidden, r1);
    nn::glorot_fill(w2, cfg.hidden, cfg.window, r2);
    net.w1 = nn::leaf(std::move(w1));
    net.b1 = nn::leaf(Tensor(1, cfg.hidden));
    net.w2 = nn::leaf(std::move(w2));
    net.b2 = nn::leaf(Tensor(1, cfg.window));
  }

  constexpr std::size_t kBatch = 64;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    auto& net = m.nets[c];
    nn::Adam adam({net.w1, net.b1, net.w2, net.b2},
                  {cfg.learning_rate, 0.9, 0.999, 1e-8});
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
      std::vector<trainer::WindowRef> order = data.train;
      SeededRng rng(cfg.seed, 100 + c * cfg.epochs + epoch);
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.uniform_int(i)]);

      for (std::size_t off = 0; off < order.size(); off += kBatch) {
        const std::size_t end = std::min(order.size(), off + kBatch);
        std::size_t total = 0;
        for (std::size_t i = off; i < end; ++i) {
          const auto& mk = data.masks[order[i].session][c];
          for (std::size_t t = 0; t < cfg.window; ++t)
            if (mk[order[i].start + t]) ++total;
        }
        if (total == 0) continue;
        adam.zero_grad();
        for (std::size_t i = off; i < end; ++i) {
          const auto& ref = order[i];
          const auto& v = data.values[ref.session][c];
          const auto& mk = data.masks[ref.session][c];
          Tensor in(cfg.window, 1), target(cfg.window, 1), mask(cfg.window, 1);
          for (std::size_t t = 0; t < cfg.window; ++t) {
            in.data[t] = v[ref.start + t];
            target.data[t] = v[ref.start + t];
            mask.data[t] = mk[ref.start + t] ? 1.0 : 0.0;
          }
          auto out = vanilla_forward(net, nn::constant(std::move(in)),
                                     cfg.window);
          auto loss =
              nn::masked_abs_sum(out, std::move(target), std::move(mask));
          if (!std::isfinite(loss->value.data[0]))
            throw TrainingError(
                "vanilla_ae_fit: non-finite loss at epoch " +
                std::to_string(epoch) + ", channel " +
                std::string(kChannelNames[c]));
          nn::backward(loss, 1.0 / static_cast<double>(total));
        }
        adam.step();
      }
    }
  }
  return m;
}

SignalSession vanilla_ae_denoise(const VanillaAeModel& m,
                                 const SignalSession& s) {
  s.validate();
  const std::size_t n = s.length();
  if (n < m.window)
    throw InvalidInput("vanilla_ae_denoise: session shorter than one window");

  const preprocess::ImputedSession imp = preprocess::impute_session(s);
  Tensor x(n, kNumChannels);
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    const auto norm = preprocess::normalize(imp.values[c], m.norm_stats[c]);
    for (std::size_t i = 0; i < n; ++i) x.at(i, c) = norm[i];
  }

  auto processor = [&m](const Tensor& win) {
    Tensor out(win.length, kNumChannels);
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      Tensor in(win.length, 1);
      for (std::size_t i = 0; i < win.length; ++i) in.data[i] = win.at(i, c);
      const Tensor yc =
          vanilla_forward(m.nets[c], nn::constant(std::move(in)), m.window)
              ->value;
      for (std::size_t i = 0; i < win.length; ++i) out.at(i, c) = yc.data[i];
    }
    return out;
  };
  Tensor y = denoiser::window_overlap_add(processor, x, m.window, m.window / 2);

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

}  // namespace cprlab::baselines
