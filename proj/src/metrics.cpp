#include "cprlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cprlab/preprocess.hpp"
#include "json.hpp"

namespace cprlab::metrics {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_pair(const std::vector<double>& clean,
                  const std::vector<double>& estimate, const char* op) {
  if (clean.size() != estimate.size())
    throw InvalidInput(std::string(op) + ": length mismatch " +
                       std::to_string(clean.size()) + " vs " +
                       std::to_string(estimate.size()));
  if (clean.empty()) throw InvalidInput(std::string(op) + ": empty input");
  for (double v : clean)
    if (!std::isfinite(v))
      throw InvalidInput(std::string(op) + ": clean signal must be finite");
}

json number_token(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json matrix_json(const Matrix5& m) {
  json rows = json::array();
  for (const auto& row : m) {
    json r = json::array();
    for (double v : row) r.push_back(number_token(v));
    rows.push_back(r);
  }
  return rows;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b,
               const char* degenerate_what) {
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw InvalidInput(degenerate_what);
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

double snr_db(const std::vector<double>& clean,
              const std::vector<double>& estimate) {
  require_pair(clean, estimate, "snr_db");
  double sig = 0.0, res = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    sig += clean[i] * clean[i];
    const double d = estimate[i] - clean[i];
    res += d * d;
  }
  if (sig == 0.0) throw InvalidInput("snr_db: clean signal is identically zero");
  if (res == 0.0) return kInf;
  return 10.0 * std::log10(sig / res);
}

double psnr_db(const std::vector<double>& clean,
               const std::vector<double>& estimate) {
  require_pair(clean, estimate, "psnr_db");
  double peak = 0.0, res = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    peak = std::max(peak, std::abs(clean[i]));
    const double d = estimate[i] - clean[i];
    res += d * d;
  }
  if (peak == 0.0)
    throw InvalidInput("psnr_db: clean signal is identically zero");
  const double mse = res / static_cast<double>(clean.size());
  if (mse == 0.0) return kInf;
  return 10.0 * std::log10(peak * peak / mse);
}

Matrix5 correlation_matrix(const SignalSession& s) {
  s.validate();
  const std::size_t n = s.length();
  if (n < 2) throw InvalidInput("correlation_matrix: need >= 2 samples");

  // A channel that is constant over its finite samples has no defined
  // correlation with anything.
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    double first = std::numeric_limits<double>::quiet_NaN();
    bool varies = false;
    for (double v : s.channels[c]) {
      if (std::isnan(v)) continue;
      if (std::isnan(first))
        first = v;
      else if (v != first)
        varies = true;
    }
    if (std::isnan(first) || !varies)
      throw InvalidInput(std::string("correlation_matrix: channel '") +
                         kChannelNames[c] + "' is constant");
  }

  Matrix5 m{};
  for (std::size_t i = 0; i < kNumChannels; ++i) m[i][i] = 1.0;
  for (std::size_t i = 0; i < kNumChannels; ++i) {
    for (std::size_t j = i + 1; j < kNumChannels; ++j) {
      std::vector<double> a, b;
      a.reserve(n);
      b.reserve(n);
      for (std::size_t t = 0; t < n; ++t) {
        const double va = s.channels[i][t];
        const double vb = s.channels[j][t];
        if (std::isnan(va) || std::isnan(vb)) continue;
        a.push_back(va);
        b.push_back(vb);
      }
      if (a.size() < 2)
        throw InvalidInput("correlation_matrix: fewer than 2 complete pairs "
                           "between '" +
                           std::string(kChannelNames[i]) + "' and '" +
                           kChannelNames[j] + "'");
      const std::string what =
          "correlation_matrix: channel '" + std::string(kChannelNames[i]) +
          "' or '" + kChannelNames[j] + "' is constant on complete pairs";
      const double r = pearson(a, b, what.c_str());
      m[i][j] = r;
      m[j][i] = r;  // mirrored, so the matrix is exactly symmetric
    }
  }
  return m;
}

double matrix_similarity(const Matrix5& a, const Matrix5& b) {
  auto check = [](const Matrix5& m, const char* name) {
    for (std::size_t i = 0; i < kNumChannels; ++i) {
      if (m[i][i] != 1.0)
        throw InvalidInput(std::string("matrix_similarity: ") + name +
                           " lacks a unit diagonal");
      for (std::size_t j = i + 1; j < kNumChannels; ++j)
        if (m[i][j] != m[j][i])
          throw InvalidInput(std::string("matrix_similarity: ") + name +
                             " is not symmetric");
    }
  };
  check(a, "first matrix");
  check(b, "second matrix");
  std::vector<double> ta, tb;
  for (std::size_t i = 0; i < kNumChannels; ++i)
    for (std::size_t j = i + 1; j < kNumChannels; ++j) {
      ta.push_back(a[i][j]);
      tb.push_back(b[i][j]);
    }
  return pearson(ta, tb,
                 "matrix_similarity: off-diagonal triangle has zero variance");
}

EvalReport evaluate_method(const std::string& method,
                           const SignalSession& clean,
                           const SignalSession& noisy,
                           const SignalSession& denoised) {
  clean.validate();
  noisy.validate();
  denoised.validate();
  if (clean.length() != noisy.length() || clean.length() != denoised.length())
    throw InvalidInput("evaluate_method: session lengths differ");

  EvalReport r;
  r.method = method;
  double snr_sum = 0.0, psnr_sum = 0.0;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    r.per_channel[c].snr_db = snr_db(clean.channels[c], denoised.channels[c]);
    r.per_channel[c].psnr_db = psnr_db(clean.channels[c], denoised.channels[c]);
    snr_sum += r.per_channel[c].snr_db;
    psnr_sum += r.per_channel[c].psnr_db;
  }
  r.aggregate_snr_db = snr_sum / kNumChannels;
  r.aggregate_psnr_db = psnr_sum / kNumChannels;

  SignalSession imputed_noisy = noisy;
  const preprocess::ImputedSession imp = preprocess::impute_session(noisy);
  imputed_noisy.channels = imp.values;
  r.corr_before = correlation_matrix(imputed_noisy);
  r.corr_after = correlation_matrix(denoised);
  r.corr_clean = correlation_matrix(clean);
  r.corr_similarity = matrix_similarity(r.corr_before, r.corr_after);
  return r;
}

std::string report_to_json(const EvalReport& r) {
  json j;
  j["method"] = r.method;
  json pc = json::object();
  for (std::size_t c = 0; c < kNumChannels; ++c)
    pc[kChannelNames[c]] = {{"snr_db", number_token(r.per_channel[c].snr_db)},
                            {"psnr_db", number_token(r.per_channel[c].psnr_db)}};
  j["per_channel"] = pc;
  j["aggregate_snr_db"] = number_token(r.aggregate_snr_db);
  j["aggregate_psnr_db"] = number_token(r.aggregate_psnr_db);
  j["corr_before"] = matrix_json(r.corr_before);
  j["corr_after"] = matrix_json(r.corr_after);
  j["corr_clean"] = matrix_json(r.corr_clean);
  j["corr_similarity"] = number_token(r.corr_similarity);
  return j.dump(2) + "\n";
}

std::string scores_csv(const std::vector<EvalReport>& reports) {
  std::string out = "method,channel,snr_db,psnr_db\n";
  for (const auto& r : reports) {
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      out += r.method;
      out += ',';
      out += kChannelNames[c];
      out += ',';
      out += format_value(r.per_channel[c].snr_db);
      out += ',';
      out += format_value(r.per_channel[c].psnr_db);
      out += '\n';
    }
    out += r.method;
    out += ",aggregate,";
    out += format_value(r.aggregate_snr_db);
    out += ',';
    out += format_value(r.aggregate_psnr_db);
    out += '\n';
  }
  return out;
}

std::string correlations_csv(const std::vector<EvalReport>& reports) {
  std::string out = "method,matrix,row,col,value\n";
  auto emit = [&out](const std::string& method, const char* which,
                     const Matrix5& m) {
    for (std::size_t i = 0; i < kNumChannels; ++i)
      for (std::size_t j = 0; j < kNumChannels; ++j) {
        out += method;
        out += ',';
        out += which;
        out += ',';
        out += kChannelNames[i];
        out += ',';
        out += kChannelNames[j];
        out += ',';
        out += format_value(m[i][j]);
        out += '\n';
      }
  };
  for (const auto& r : reports) {
    emit(r.method, "before", r.corr_before);
    emit(r.method, "after", r.corr_after);
    emit(r.method, "clean", r.corr_clean);
  }
  return out;
}

}  // namespace cprlab::metrics
