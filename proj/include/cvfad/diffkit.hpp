#pragma once

// Discrete differentiators and the filters used to build the capacitor-voltage
// active-damping path.

#include "cvfad/ztf.hpp"

namespace cvfad::diffkit {

struct LeadDesign {
  double pole_pz = 0.75;  // 0 < pz < 1
  void validate() const;
};

struct NotchDesign {
  double m = 0.125;  // m > 0, sets the stop-band width around Nyquist
  void validate() const;
};

/// Capacitor-voltage feedback parameters.
struct ADParams {
  double ka = 12.0;   // damping gain, V per A of emulated capacitor current
  double cf = 9.8e-6; // F
  LeadDesign lead;
  NotchDesign notch;
  double ts = 1e-4;   // s
  void validate() const;
};

// (z - 1) / (ts z)
ztf::RationalTF make_backward(double ts);

// (z - 1) / ts. Improper: kept for comparison plots only, every loop
// assembly rejects it.
ztf::RationalTF make_forward(double ts);

// (2 / ts) (z - 1) / (z + 1)
ztf::RationalTF make_tustin(double ts);

// pz z / (z + pz); the pole at -pz adds phase lead over most of the band.
ztf::RationalTF make_lead(const LeadDesign& design, double ts);

// (m + 1)(z + 1)(2z - 1) / ((2m + 2) z^2 + z - 1): unity DC gain, zero at Nyquist.
ztf::RationalTF make_notch(const NotchDesign& design, double ts);

// (pz / ts) (z - 1) / (z + pz), i.e. backward times lead with the z/z factor cancelled.
ztf::RationalTF make_backward_lead(const LeadDesign& design, double ts);

// Backward-lead cascaded with the Nyquist notch.
ztf::RationalTF make_proposed(const LeadDesign& lead, const NotchDesign& notch, double ts);

// ka * cf * proposed: maps capacitor voltage to the inverter-voltage correction.
ztf::RationalTF make_ad_filter(const ADParams& p);

struct DifferentiatorError {
  double max_mag_err_db = 0.0;    // largest |20 log10(|G| / w)|
  double mag_err_at_hz = 0.0;
  double max_phase_err_deg = 0.0; // largest |arg G - 90 deg|
  double phase_err_at_hz = 0.0;
};

/// Compares tf with an ideal differentiator jw on n log-spaced frequencies.
DifferentiatorError differentiator_error(const ztf::RationalTF& tf, double f_lo, double f_hi, int n);

/// Picks the notch width for a band that must pass nearly untouched.
///
/// Tries m in {0.5, 1, 2, 4, 8, 16} and returns the first whose magnitude
/// deviates from unity by less than 0.5 dB at f_center. The deviation grows
/// with m, so when none qualifies the narrower values {0.25, 0.125, ...,
/// 1/64} are tried in turn. Throws NoFeasibleM if nothing qualifies.
NotchDesign design_notch_for_band(double f_center, double ts);

}  // namespace cvfad::diffkit
