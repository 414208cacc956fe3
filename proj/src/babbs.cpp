#include "cprlab/babbs.hpp"

#include <cmath>
#include <cstdio>

#include "cprlab/common.hpp"

namespace cprlab::babbs {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InvalidInput(what);
}

// Phase of sample i within its compression cycle, in [0,1). Formed from the
// exact integer products i*rate and 60*fs so samples one cycle apart get
// bit-identical phases whenever samples-per-cycle is integral.
inline double cycle_phase(std::size_t i, double rate, double fs) {
  const double num = std::fmod(static_cast<double>(i) * rate, 60.0 * fs);
  return num / (60.0 * fs);
}

}  // namespace

void validate(const BabbsParams& p) {
  // Equal bounds are allowed: they collapse the sigmoid to a constant, which
  // is the standard way to pin E or F to a fixed value.
  require(std::isfinite(p.e_min) && std::isfinite(p.e_max) &&
              p.e_min <= p.e_max,
          "BabbsParams: requires e_min <= e_max");
  require(std::isfinite(p.f_min) && std::isfinite(p.f_max) &&
              p.f_min <= p.f_max,
          "BabbsParams: requires f_min <= f_max");
  require(p.pe > 0.0, "BabbsParams: requires pe > 0");
  require(p.pf > 0.0, "BabbsParams: requires pf > 0");
  require(p.d_target > 0.0, "BabbsParams: requires d_target > 0");
}

void validate(const CprProtocol& p) {
  require(p.duty > 0.0 && p.duty < 1.0, "CprProtocol: duty must lie in (0,1)");
  require(p.compression_rate > 0.0, "CprProtocol: compression_rate must be > 0");
  require(p.decompression_depth >= 0.0 &&
              p.compression_depth > p.decompression_depth,
          "CprProtocol: requires compression_depth > decompression_depth >= 0");
  require(p.n_cycles >= 1, "CprProtocol: n_cycles must be >= 1");
  require(p.sample_rate >= 20.0 * (p.compression_rate / 60.0),
          "CprProtocol: sample_rate must resolve >= 20 samples per cycle");
  require(p.target_dbp > 0.0, "CprProtocol: target_dbp must be > 0");
}

void validate(const PatientProfile& p) {
  require(p.external_force > 0.0, "PatientProfile: external_force must be > 0");
  require(p.chest_compliance > 0.0,
          "PatientProfile: chest_compliance must be > 0");
  require(p.airway_resistance > 0.0,
          "PatientProfile: airway_resistance must be > 0");
}

double elastance(double d, const BabbsParams& p) {
  validate(p);
  if (!std::isfinite(d)) throw InvalidInput("elastance: depth must be finite");
  return p.e_min + (p.e_max - p.e_min) / (1.0 + std::exp(p.pe * (p.d_target - d)));
}

double resistance(double d, const BabbsParams& p) {
  validate(p);
  if (!std::isfinite(d)) throw InvalidInput("resistance: depth must be finite");
  return p.f_min + (p.f_max - p.f_min) / (1.0 + std::exp(p.pf * (p.d_target - d)));
}

double diastolic_bp(double d, const BabbsParams& p) {
  if (!std::isfinite(d) || d < 0.0)
    throw InvalidInput("diastolic_bp: depth must be finite and >= 0");
  return elastance(d, p) * d - resistance(d, p) * d * d;
}

double coronary_pp(double dbp, double duty, double rate) {
  if (!(duty > 0.0 && duty < 1.0))
    throw InvalidInput("coronary_pp: duty must lie in (0,1)");
  if (!(rate > 0.0)) throw InvalidInput("coronary_pp: rate must be > 0");
  return dbp * duty / (duty + 1.0 / rate);
}

HemoState hemo_at(double d, const BabbsParams& p, const CprProtocol& proto) {
  HemoState h;
  h.e = elastance(d, p);
  h.f = resistance(d, p);
  h.dbp = h.e * d - h.f * d * d;
  h.cpp = coronary_pp(h.dbp, proto.duty, proto.compression_rate);
  return h;
}

SignalSession synthesize_session(const PatientProfile& profile,
                                 const CprProtocol& protocol,
                                 const BabbsParams& params) {
  validate(profile);
  validate(protocol);
  validate(params);

  const double fs = protocol.sample_rate;
  const double rate = protocol.compression_rate;
  const double dd = protocol.decompression_depth;
  const double dc = protocol.compression_depth;
  const double span = dc - dd;
  const auto n = static_cast<std::size_t>(std::llround(
      static_cast<double>(protocol.n_cycles) * 60.0 / rate * fs));

  SignalSession s;
  s.patient_id = profile.patient_id;
  s.sample_rate = fs;
  s.is_clean = true;
  for (auto& ch : s.channels) ch.resize(n);

  auto& compression = s.channel(0);
  auto& pressure = s.channel(1);
  auto& velocity = s.channel(2);
  auto& force = s.channel(3);
  auto& pmouth = s.channel(4);

  // Pulse centred in the cycle: rest plateaus of width (1-duty)/2 on both
  // sides, so sessions start and end at rest and the discrete velocity
  // integral telescopes to zero.
  const double pulse_start = (1.0 - protocol.duty) / 2.0;
  const double two_pi = 2.0 * 3.141592653589793238462643383279502884;
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = cycle_phase(i, rate, fs);
    double d = dd;
    if (phi >= pulse_start && phi < pulse_start + protocol.duty) {
      const double u = (phi - pulse_start) / protocol.duty;  // [0,1) over pulse
      d = dd + span * 0.5 * (1.0 - std::cos(two_pi * u));
    }
    compression[i] = d;
  }

  // velocity = d(compression)/dt, central differences, one-sided endpoints.
  if (n >= 2) {
    velocity[0] = (compression[1] - compression[0]) * fs;
    velocity[n - 1] = (compression[n - 1] - compression[n - 2]) * fs;
    for (std::size_t i = 1; i + 1 < n; ++i)
      velocity[i] = (compression[i + 1] - compression[i - 1]) * 0.5 * fs;
  } else if (n == 1) {
    velocity[0] = 0.0;
  }

  // Normalized displacement drives force and pressure. Calibrate against the
  // sampled peak so the per-cycle pressure maximum lands on target_dbp.
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) peak = std::max(peak, compression[i] - dd);
  if (!(peak > 0.0))
    throw InvalidInput("synthesize_session: sampling never hits the pulse");

  const HemoState hemo = hemo_at(dc, params, protocol);
  const double cpp = hemo.cpp;
  for (std::size_t i = 0; i < n; ++i) {
    const double norm = (compression[i] - dd) / peak;
    force[i] = profile.external_force * norm;
    pressure[i] = cpp + (protocol.target_dbp - cpp) * norm;
  }

  // Single-compartment airway: displaced volume 0.02 L per mm of depth,
  // pmouth = R*dV/dt + V/(C*10.197).
  std::vector<double> volume(n);
  for (std::size_t i = 0; i < n; ++i) volume[i] = 0.02 * (compression[i] - dd);
  for (std::size_t i = 0; i < n; ++i) {
    double flow;
    if (n == 1)
      flow = 0.0;
    else if (i == 0)
      flow = (volume[1] - volume[0]) * fs;
    else if (i + 1 == n)
      flow = (volume[n - 1] - volume[n - 2]) * fs;
    else
      flow = (volume[i + 1] - volume[i - 1]) * 0.5 * fs;
    pmouth[i] = profile.airway_resistance * flow +
                volume[i] / (profile.chest_compliance * 10.197);
  }

  s.validate();
  return s;
}

std::vector<PatientProfile> patient_sweep() {
  std::vector<PatientProfile> out;
  out.reserve(150);
  int idx = 0;
  for (int fi = 0; fi < 6; ++fi) {
    for (int ci = 0; ci < 5; ++ci) {
      for (int ri = 0; ri < 5; ++ri) {
        PatientProfile p;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "p%03d", idx++);
        p.patient_id = buf;
        p.external_force = 500.0 + 100.0 * fi;
        p.chest_compliance = 0.01 * (ci + 1);
        p.airway_resistance = 1.0 * (ri + 1);
        out.push_back(p);
      }
    }
  }
  return out;
}

}  // namespace cprlab::babbs
