#include "learnafe/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "json.hpp"

namespace learnafe::circuit {

namespace {

constexpr double kPi = std::numbers::pi;

// C[pF] = (W^2 t + 2 W C_eff) * 1e-3 with W in um; the return is in farads.
constexpr double kFemtoToFarad = 1e-15;

}  // namespace

void PdkConstants::validate() const {
  if (!(nut_nmos > 0) || !(nut_pmos > 0) || !(vdd > 0) || !(cap_density > 0) ||
      !(cap_fringe > 0)) {
    throw DomainError("PDK constants must all be strictly positive");
  }
}

PdkConstants load_pdk(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open PDK config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed PDK config " + path + ": " + e.what());
  }
  if (j.contains("pdk")) j = j["pdk"];
  PdkConstants pdk;
  pdk.nut_nmos = j.value("nut_nmos_v", pdk.nut_nmos);
  pdk.nut_pmos = j.value("nut_pmos_v", pdk.nut_pmos);
  pdk.vdd = j.value("vdd_v", pdk.vdd);
  pdk.cap_density = j.value("cap_density_ff_per_um2", pdk.cap_density);
  pdk.cap_fringe = j.value("cap_fringe_ff_per_um", pdk.cap_fringe);
  pdk.validate();
  return pdk;
}

void ChannelParams::validate() const {
  if (!(i2_base > 0) || !(c1_base > 0)) {
    throw DomainError("channel baselines I_2 and C_1 must be positive");
  }
  if (!(phi_i > 1.0)) throw ConstraintViolation("phi_I must exceed 1");
  if (!(phi_c > 1.0)) throw ConstraintViolation("phi_C must exceed 1");
}

void BankParams::validate() const {
  pdk.validate();
  if (channels.size() != kNumChannels) {
    throw DomainError("bank must have exactly 16 channels");
  }
  double prev = 0.0;
  for (const auto& ch : channels) {
    ch.validate();
    const double fc = derive_response(ch, pdk).fc;
    if (!(fc > prev)) throw DomainError("channel center frequencies must increase");
    prev = fc;
  }
}

double phi_from_raw(double raw) {
  // log1p(exp(x)) without overflow
  const double sp = raw > 30.0 ? raw : std::log1p(std::exp(raw));
  return 1.0 + sp;
}

double raw_from_phi(double phi) {
  if (!(phi > 1.0)) throw ConstraintViolation("phi must exceed 1");
  const double y = phi - 1.0;
  return y > 30.0 ? y : std::log(std::expm1(y));
}

double dphi_draw(double raw) { return 1.0 / (1.0 + std::exp(-raw)); }

double gm_from_current(double i_d, double nut) {
  if (!(nut > 0)) throw DomainError("n*U_T must be positive");
  if (i_d < 0) throw DomainError("drain current must be non-negative");
  return i_d / nut;
}

double gm2_from(double phi_i, double gm1, const PdkConstants& pdk) {
  if (!(phi_i > 1.0)) throw ConstraintViolation("phi_I must exceed 1");
  return (phi_i - 1.0) * gm1 * pdk.nut_pmos / pdk.nut_nmos;
}

double capacitance_of(CapGeometry geom, const PdkConstants& pdk) {
  if (geom.w_c < 0) throw DomainError("capacitor width must be non-negative");
  const double w = geom.w_c;
  return (w * w * pdk.cap_density + 2.0 * w * pdk.cap_fringe) * kFemtoToFarad;
}

CapGeometry width_for_capacitance(double c, const PdkConstants& pdk) {
  if (!(c > 0)) throw DomainError("capacitance must be positive");
  // t W^2 + 2 C_eff W - c_fF = 0, positive root in the cancellation-free form
  const double c_ff = c / kFemtoToFarad;
  const double b = pdk.cap_fringe;
  const double root = std::sqrt(b * b + pdk.cap_density * c_ff);
  return {c_ff / (b + root)};
}

CircuitValues circuit_values(const ChannelParams& ch, const PdkConstants& pdk) {
  ch.validate();
  CircuitValues v;
  // gm1 follows from the I_2 branch on the PMOS slope.
  v.gm1 = gm_from_current(ch.i2_base, pdk.nut_pmos);
  v.gm2 = gm2_from(ch.phi_i, v.gm1, pdk);
  v.c1 = ch.c1_base;
  v.c2 = ch.phi_c * ch.c1_base;
  return v;
}

ChannelResponse derive_response(const ChannelParams& ch, const PdkConstants& pdk) {
  ch.validate();
  const double pm1 = ch.phi_i - 1.0;
  ChannelResponse r;
  r.fc = ch.i2_base * std::sqrt(pm1) /
         (4.0 * kPi * ch.c1_base * std::sqrt(pdk.nut_nmos * pdk.nut_pmos * ch.phi_c));
  r.q = std::sqrt(pdk.nut_pmos / pdk.nut_nmos * ch.phi_c * pm1);
  r.a = ch.phi_c;
  return r;
}

double i2_for_center(double fc, double c1, double phi_i, double phi_c, const PdkConstants& pdk) {
  if (!(fc > 0) || !(c1 > 0)) throw DomainError("fc and C_1 must be positive");
  if (!(phi_i > 1.0) || !(phi_c > 1.0)) throw ConstraintViolation("phi must exceed 1");
  return fc * 4.0 * kPi * c1 * std::sqrt(pdk.nut_nmos * pdk.nut_pmos * phi_c) /
         std::sqrt(phi_i - 1.0);
}

BankParams init_bank(const BankConfig& cfg, const PdkConstants& pdk) {
  pdk.validate();
  BankParams bank;
  bank.pdk = pdk;
  double i2 = i2_for_center(cfg.fc_first, cfg.c1, cfg.phi_i, cfg.phi_c, pdk);
  for (std::size_t k = 0; k < cfg.channels; ++k) {
    bank.channels.push_back({i2, cfg.c1, cfg.phi_i, cfg.phi_c});
    i2 *= cfg.current_ratio;
  }
  return bank;
}

PowerReport estimate_power(const BankParams& bank) {
  PowerReport r;
  r.per_channel.reserve(bank.channels.size());
  for (const auto& ch : bank.channels) {
    const double i1 = ch.phi_i * ch.i2_base;
    const double p = 2.0 * bank.pdk.vdd * (i1 + ch.i2_base);
    r.per_channel.push_back(p);
    r.total += p;
  }
  return r;
}

double estimate_cap_area(const BankParams& bank) {
  double um2 = 0.0;
  for (const auto& ch : bank.channels) {
    const double w1 = width_for_capacitance(ch.c1_base, bank.pdk).w_c;
    const double w2 = width_for_capacitance(ch.phi_c * ch.c1_base, bank.pdk).w_c;
    um2 += w1 * w1 + w2 * w2;
  }
  return um2 * 1e-6;
}

SubthresholdModel fit_subthreshold_slope(std::span<const IvPoint> points) {
  if (points.size() < 3) throw DomainError("slope fit needs at least 3 points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    if (!(p.id > 0)) throw DomainError("drain currents must be positive");
    mx += p.vgs;
    my += std::log(p.id);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    const double dx = p.vgs - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(p.id) - my);
  }
  const double scale = std::max(1.0, mx * mx);
  if (!(sxx > 1e-24 * scale * n) || !(sxy > 0)) {
    throw SingularFitError("I-V data do not determine a positive subthreshold slope");
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  SubthresholdModel m;
  m.nut = 1.0 / slope;
  m.prefactor_i0 = std::exp(intercept);
  m.vth = 0.0;
  double ss = 0.0;
  for (const auto& p : points) {
    const double r = std::log(p.id) - (intercept + slope * p.vgs);
    ss += r * r;
  }
  m.rms_residual = std::sqrt(ss / n);
  return m;
}

}  // namespace learnafe::circuit
