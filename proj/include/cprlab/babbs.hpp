#ifndef CPRLAB_BABBS_HPP
#define CPRLAB_BABBS_HPP

#include <string>
#include <vector>

#include "cprlab/session.hpp"

namespace cprlab::babbs {

// Sigmoidal elastance/resistance constants of the arterial model.
// Units: elastance mmHg/mm, resistance mmHg/mm^2, pe/pf 1/mm, d_target mm.
struct BabbsParams {
  double e_min = 0.6;
  double e_max = 2.2;
  double f_min = 0.005;
  double f_max = 0.02;
  double pe = 0.2;
  double pf = 0.2;
  double d_target = 50.0;
};

// Compression protocol. Rates in compressions/min, depths in mm,
// target_dbp in mmHg, sample_rate in Hz.
struct CprProtocol {
  double compression_rate = 100.0;
  double compression_depth = 50.0;
  double decompression_depth = 10.0;
  double duty = 0.5;
  double target_dbp = 40.0;
  int n_cycles = 100;
  double sample_rate = 100.0;
};

// One simulated patient condition. external_force N, chest_compliance L/kPa,
// airway_resistance cmH2O/(L/s).
struct PatientProfile {
  std::string patient_id;
  double external_force = 500.0;
  double chest_compliance = 0.01;
  double airway_resistance = 1.0;
};

// Scalar hemodynamics at a given depth: elastance, resistance, the diastolic
// pressure they produce, and the perfusion pressure under the protocol.
struct HemoState {
  double cpp = 0.0;
  double dbp = 0.0;
  double e = 0.0;
  double f = 0.0;
};

void validate(const BabbsParams& p);
void validate(const CprProtocol& p);
void validate(const PatientProfile& p);

// E(d) = e_min + (e_max - e_min) / (1 + exp(pe * (d_target - d))).
double elastance(double d, const BabbsParams& p);

// F(d) = f_min + (f_max - f_min) / (1 + exp(pf * (d_target - d))).
double resistance(double d, const BabbsParams& p);

// DBP(d) = E(d)*d - F(d)*d^2, d >= 0.
double diastolic_bp(double d, const BabbsParams& p);

// CPP = dbp * duty / (duty + 1/rate). rate stays in compressions/min, its
// native protocol unit; no per-second conversion is applied.
double coronary_pp(double dbp, double duty, double rate);

HemoState hemo_at(double d, const BabbsParams& p, const CprProtocol& proto);

// Deterministic five-channel synthesis for one patient.
//
// Per cycle the compression channel follows a raised-cosine pulse of width
// duty*cycle centred in the cycle (rest plateau at decompression_depth on
// both sides), so each session begins and ends at rest. velocity is the
// central-difference derivative of compression, force is external_force
// times the normalized displacement, pressure is calibrated to swing from
// the model CPP up to target_dbp, and pmouth combines resistive and
// compliant airway pressure from the displaced volume.
SignalSession synthesize_session(const PatientProfile& profile,
                                 const CprProtocol& protocol,
                                 const BabbsParams& params);

// Full sweep grid: force 500..1000 step 100 (major), compliance
// 0.01..0.05 step 0.01, resistance 1..5 step 1. 150 profiles.
std::vector<PatientProfile> patient_sweep();

}  // namespace cprlab::babbs

#endif  // CPRLAB_BABBS_HPP
