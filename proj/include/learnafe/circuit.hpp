#pragma once

// Subthreshold DSSF bandpass channel model.
//
// Units: currents in amperes, capacitances in farads, widths in micrometers,
// slope voltages (n*U_T) in volts. Each channel is parameterized by two frozen
// baselines (I_2, C_1) and two ratios phi_I = I_1/I_2, phi_C = C_2/C_1.

#include <span>
#include <string>
#include <vector>

#include "learnafe/common.hpp"

namespace learnafe::circuit {

struct PdkConstants {
  double nut_nmos = 0.038;      // V
  double nut_pmos = 0.059;      // V
  double vdd = 0.6;             // V
  double cap_density = 2.0;     // fF/um^2  (t)
  double cap_fringe = 0.19;     // fF/um    (C_eff)

  /// Throws DomainError unless every field is strictly positive.
  void validate() const;
};

/// Loads PDK constants from a JSON file. Keys: nut_nmos_v, nut_pmos_v, vdd_v,
/// cap_density_ff_per_um2, cap_fringe_ff_per_um. Missing keys keep defaults.
PdkConstants load_pdk(const std::string& path);

struct SubthresholdModel {
  double prefactor_i0 = 0.0;  // A, lumped I_d0 * W/L * exp(-V_th/nut)
  double vth = 0.0;           // V, absorbed into the prefactor (always 0)
  double nut = 0.0;           // V
  double rms_residual = 0.0;  // in ln(A)
};

struct ChannelParams {
  double i2_base = 0.0;  // A
  double c1_base = 0.0;  // F
  double phi_i = 3.0;
  double phi_c = 7.36;

  void validate() const;
};

struct ChannelResponse {
  double fc = 0.0;  // Hz
  double q = 0.0;
  double a = 0.0;   // linear passband gain
};

struct CapGeometry {
  double w_c = 0.0;  // um, square plate side
};

/// Small-signal element values of one channel.
struct CircuitValues {
  double gm1 = 0.0;  // S
  double gm2 = 0.0;  // S
  double c1 = 0.0;   // F
  double c2 = 0.0;   // F
};

struct BankParams {
  std::vector<ChannelParams> channels;
  PdkConstants pdk;

  /// Checks channel count, per-channel invariants and increasing f_c.
  void validate() const;
};

struct BankConfig {
  std::size_t channels = kNumChannels;
  double c1 = 1e-12;          // F, shared by all channels
  double phi_i = 3.0;
  double phi_c = 7.36;
  double fc_first = 100.0;    // Hz
  double current_ratio = 1.298;
};

// Smooth map enforcing phi > 1: phi = 1 + softplus(raw).
double phi_from_raw(double raw);
double raw_from_phi(double phi);
double dphi_draw(double raw);

double gm_from_current(double i_d, double nut);
double gm2_from(double phi_i, double gm1, const PdkConstants& pdk);

double capacitance_of(CapGeometry geom, const PdkConstants& pdk);
CapGeometry width_for_capacitance(double c, const PdkConstants& pdk);

CircuitValues circuit_values(const ChannelParams& ch, const PdkConstants& pdk);
ChannelResponse derive_response(const ChannelParams& ch, const PdkConstants& pdk);

/// I_2 that places the center frequency of a channel at fc.
double i2_for_center(double fc, double c1, double phi_i, double phi_c, const PdkConstants& pdk);

BankParams init_bank(const BankConfig& cfg, const PdkConstants& pdk = {});

struct PowerReport {
  double total = 0.0;                 // W
  std::vector<double> per_channel;    // W
};

/// Sum over channels of 2*V_DD*(I_1 + I_3), with I_3 taken as I_2.
PowerReport estimate_power(const BankParams& bank);
/// Sum of squared plate sides of C_1 and C_2 over channels, in mm^2.
double estimate_cap_area(const BankParams& bank);

struct IvPoint {
  double vgs = 0.0;  // V
  double id = 0.0;   // A
};

/// Least-squares fit of ln(I_d) against V_gs.
SubthresholdModel fit_subthreshold_slope(std::span<const IvPoint> points);

}  // namespace learnafe::circuit
