#include "cprlab/session.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cprlab/ioutil.hpp"

namespace cprlab {

namespace {

constexpr const char* kCsvHeader = "t,compression,pressure,velocity,force,pmouth";

double parse_value(std::string_view tok, std::size_t line_no) {
  if (tok == "NaN" || tok == "nan" || tok == "NAN")
    return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc{} || ptr != end)
    throw SchemaError("bad numeric field '" + std::string(tok) + "' at line " +
                      std::to_string(line_no));
  return v;
}

}  // namespace

void SignalSession::validate() const {
  const std::size_t n = channels[0].size();
  for (std::size_t c = 1; c < kNumChannels; ++c) {
    if (channels[c].size() != n)
      throw InvalidInput("session '" + patient_id + "': channel " +
                         kChannelNames[c] + " has length " +
                         std::to_string(channels[c].size()) +
                         ", expected " + std::to_string(n));
  }
  if (is_clean && has_non_finite())
    throw InvalidInput("session '" + patient_id +
                       "' is flagged clean but contains non-finite samples");
}

bool SignalSession::has_non_finite() const {
  for (const auto& ch : channels)
    for (double v : ch)
      if (!std::isfinite(v)) return true;
  return false;
}

std::string format_value(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string session_to_csv(const SignalSession& s) {
  s.validate();
  std::string out;
  out.reserve(s.length() * 64 + 64);
  out += kCsvHeader;
  out += '\n';
  char tbuf[32];
  for (std::size_t i = 0; i < s.length(); ++i) {
    std::snprintf(tbuf, sizeof(tbuf), "%.6f",
                  static_cast<double>(i) / s.sample_rate);
    out += tbuf;
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      out += ',';
      out += format_value(s.channels[c][i]);
    }
    out += '\n';
  }
  return out;
}

SignalSession session_from_csv(const std::string& text, const std::string& id) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty session CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  // Header must carry t plus all five channels; tolerate column reordering
  // but not absence.
  std::vector<std::string> cols;
  {
    std::stringstream hs(line);
    std::string tok;
    while (std::getline(hs, tok, ',')) cols.push_back(tok);
  }
  if (cols.empty() || cols[0] != "t")
    throw SchemaError("session CSV must start with a 't' column, got '" + line + "'");
  std::array<int, kNumChannels> col_of{};
  col_of.fill(-1);
  for (std::size_t j = 1; j < cols.size(); ++j) {
    const int ci = channel_index(cols[j]);
    if (ci < 0) throw SchemaError("unknown session CSV column '" + cols[j] + "'");
    col_of[static_cast<std::size_t>(ci)] = static_cast<int>(j);
  }
  for (std::size_t c = 0; c < kNumChannels; ++c)
    if (col_of[static_cast<std::size_t>(c)] < 0)
      throw MissingChannelError("session CSV is missing channel '" +
                                std::string(kChannelNames[c]) + "'");

  SignalSession s;
  s.patient_id = id;
  std::vector<double> t_values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> toks;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      toks.emplace_back(line.data() + pos,
                        (comma == std::string::npos ? line.size() : comma) - pos);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (toks.size() != cols.size())
      throw SchemaError("line " + std::to_string(line_no) + " has " +
                        std::to_string(toks.size()) + " fields, expected " +
                        std::to_string(cols.size()));
    t_values.push_back(parse_value(toks[0], line_no));
    for (std::size_t c = 0; c < kNumChannels; ++c)
      s.channels[c].push_back(
          parse_value(toks[static_cast<std::size_t>(col_of[static_cast<std::size_t>(c)])], line_no));
  }
  if (t_values.size() >= 2) {
    const double dt = t_values[1] - t_values[0];
    if (dt > 0.0) {
      double fs = 1.0 / dt;
      // t is printed with 6 decimals, so snap rates that are integral to
      // within the print precision.
      if (std::abs(fs - std::round(fs)) < 1e-6) fs = std::round(fs);
      s.sample_rate = fs;
    }
  }
  s.is_clean = false;
  s.validate();
  return s;
}

void write_session_csv(const SignalSession& s, const std::string& path) {
  ioutil::atomic_write_file(path, session_to_csv(s));
}

SignalSession read_session_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return session_from_csv(ss.str(), std::filesystem::path(path).stem().string());
}

}  // namespace cprlab
