#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "learnafe/circuit.hpp"
#include "oracles.hpp"

using namespace learnafe;
using namespace learnafe::circuit;

TEST(Transconductance, SubthresholdSlope) {
  EXPECT_NEAR(gm_from_current(38e-9, 0.038), 1e-6, 1e-15);
  EXPECT_NEAR(gm_from_current(59e-9, 0.059), 1e-6, 1e-15);
  EXPECT_EQ(gm_from_current(0.0, 0.038), 0.0);
  EXPECT_THROW(gm_from_current(1e-9, 0.0), DomainError);
  EXPECT_THROW(gm_from_current(-1e-9, 0.038), DomainError);
}

TEST(Transconductance, SecondStage) {
  const PdkConstants pdk;
  EXPECT_NEAR(gm2_from(3.0, 1e-6, pdk), 2.0 * 0.059 / 0.038 * 1e-6, 1e-15);
  EXPECT_NEAR(gm2_from(3.0, 1e-6, pdk), 3.1053e-6, 1e-10);
  EXPECT_NEAR(gm2_from(1.0 + 1e-12, 1e-6, pdk), 0.0, 1e-17);
  EXPECT_DOUBLE_EQ(gm2_from(2.5, 2e-6, pdk), 2.0 * gm2_from(2.5, 1e-6, pdk));
  EXPECT_THROW(gm2_from(1.0, 1e-6, pdk), ConstraintViolation);
}

TEST(Capacitor, Geometry) {
  const PdkConstants pdk;
  EXPECT_NEAR(capacitance_of({10.0}, pdk), 0.2038e-12, 1e-20);
  EXPECT_EQ(capacitance_of({0.0}, pdk), 0.0);
  EXPECT_NEAR(width_for_capacitance(1e-12, pdk).w_c, 22.27, 0.005);
  double prev = -1.0;
  for (double w = 0.1; w <= 1000.0; w *= 1.7) {
    const double c = capacitance_of({w}, pdk);
    EXPECT_GT(c, prev);
    prev = c;
    EXPECT_LT(oracle::rel_err(width_for_capacitance(c, pdk).w_c, w), 1e-9) << w;
  }
  EXPECT_THROW(width_for_capacitance(0.0, pdk), DomainError);
  EXPECT_THROW(capacitance_of({-1.0}, pdk), DomainError);
}

TEST(Response, PaperOperatingPoint) {
  const PdkConstants pdk;
  const ChannelParams ch{0.11416e-9, 1e-12, 3.0, 7.36};
  const auto r = derive_response(ch, pdk);
  EXPECT_NEAR(r.q, 4.78, 0.005);
  EXPECT_NEAR(r.a, 7.36, 1e-12);
  EXPECT_NEAR(20 * std::log10(r.a), 17.34, 0.01);
  EXPECT_NEAR(r.fc, 100.0, 0.1);
}

TEST(Response, MatchesCoefficientOracle) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const PdkConstants pdk;
  for (int i = 0; i < 200; ++i) {
    const ChannelParams ch{1e-11 * std::pow(1e3, u(rng)), 1e-13 * std::pow(1e2, u(rng)),
                           1.0 + 1e-2 * std::pow(1e3, u(rng)), 1.0 + 1e-2 * std::pow(1e3, u(rng))};
    // rebuild gm and C from the primitive relations
    const double gm1 = ch.i2_base / pdk.nut_pmos;
    const double gm2 = (ch.phi_i - 1.0) * gm1 * pdk.nut_pmos / pdk.nut_nmos;
    const double c1 = ch.c1_base, c2 = ch.phi_c * ch.c1_base;
    const auto r = derive_response(ch, pdk);
    EXPECT_LT(oracle::rel_err(r.fc, std::sqrt(gm1 * gm2 / (4 * c1 * c2)) / (2 * oracle::kPi)), 1e-9);
    EXPECT_LT(oracle::rel_err(r.q, std::sqrt(gm2 / gm1 * c2 / c1)), 1e-9);
    EXPECT_LT(oracle::rel_err(r.a, c2 / c1), 1e-12);
    EXPECT_GT(r.a, 1.0);
  }
}

TEST(Response, VanishesAtConstraintBoundary) {
  const PdkConstants pdk;
  const auto r = derive_response({1e-10, 1e-12, 1.0 + 1e-12, 7.36}, pdk);
  EXPECT_LT(r.fc, 1e-3);
  EXPECT_LT(r.q, 1e-5);
  EXPECT_THROW(derive_response({1e-10, 1e-12, 1.0, 7.36}, pdk), ConstraintViolation);
  EXPECT_THROW(derive_response({1e-10, 1e-12, 3.0, 0.5}, pdk), ConstraintViolation);
  EXPECT_THROW(derive_response({0.0, 1e-12, 3.0, 7.36}, pdk), DomainError);
}

TEST(Reparameterization, SoftplusMap) {
  for (double raw : {-30.0, -3.0, 0.0, 0.5, 4.0, 40.0}) {
    const double phi = phi_from_raw(raw);
    EXPECT_GT(phi, 1.0);
    if (phi - 1.0 > 1e-10) {
      EXPECT_NEAR(raw_from_phi(phi), raw, 1e-8 * std::max(1.0, std::abs(raw)));
    }
    const double fd = oracle::central_diff(phi_from_raw, raw, 1e-6);
    EXPECT_NEAR(dphi_draw(raw), fd, 1e-8);
  }
  EXPECT_THROW(raw_from_phi(1.0), ConstraintViolation);
}

TEST(Bank, Initialization) {
  const auto bank = init_bank({}, {});
  ASSERT_EQ(bank.channels.size(), 16u);
  EXPECT_NO_THROW(bank.validate());
  EXPECT_NEAR(bank.channels[0].i2_base, 0.114e-9, 0.0005e-9);
  const double f16 = derive_response(bank.channels[15], bank.pdk).fc;
  EXPECT_NEAR(f16, 100.0 * std::pow(1.298, 15), 1e-6);
  EXPECT_NEAR(f16, 5005.0, 5.0);
  for (const auto& ch : bank.channels) {
    const auto r = derive_response(ch, bank.pdk);
    EXPECT_NEAR(r.q, 4.78, 0.005);
    EXPECT_NEAR(r.a, 7.36, 1e-12);
  }
}

TEST(Bank, ValidationRejectsBadBanks) {
  auto bank = init_bank({}, {});
  std::swap(bank.channels[3], bank.channels[4]);
  EXPECT_THROW(bank.validate(), DomainError);
  bank = init_bank({}, {});
  bank.channels.pop_back();
  EXPECT_THROW(bank.validate(), DomainError);
}

TEST(Hardware, Power) {
  BankParams empty;
  EXPECT_EQ(estimate_power(empty).total, 0.0);
  BankParams one;
  one.channels.push_back({1e-9, 1e-12, 3.0, 7.36});
  EXPECT_NEAR(estimate_power(one).total, 4.8e-9, 1e-20);
  auto bank = init_bank({}, {});
  const auto p = estimate_power(bank);
  EXPECT_NEAR(p.total * 1e9, 118.0, 2.0);
  double sum = 0;
  for (double v : p.per_channel) sum += v;
  EXPECT_DOUBLE_EQ(sum, p.total);
  bank.channels[7].phi_i += 0.1;
  EXPECT_GT(estimate_power(bank).total, p.total);
}

TEST(Hardware, Area) {
  BankParams empty;
  EXPECT_EQ(estimate_cap_area(empty), 0.0);
  auto bank = init_bank({}, {});
  const double a = estimate_cap_area(bank);
  EXPECT_NEAR(a, 0.066, 0.001);
  EXPECT_NEAR(a, 0.0653, 0.1 * 0.0653);
  bank.channels[2].phi_c += 0.5;
  EXPECT_GT(estimate_cap_area(bank), a);
  // order-independent sum
  auto rev = init_bank({}, {});
  std::reverse(rev.channels.begin(), rev.channels.end());
  EXPECT_NEAR(estimate_cap_area(rev), a, 1e-15);
}

TEST(SlopeFit, RecoversExactExponential) {
  for (double nut : {0.038, 0.059}) {
    std::vector<IvPoint> pts;
    for (double v = 0.1; v <= 0.4; v += 0.02) pts.push_back({v, 1e-15 * std::exp(v / nut)});
    const auto m = fit_subthreshold_slope(pts);
    EXPECT_NEAR(m.nut, nut, 1e-6);
    EXPECT_NEAR(m.prefactor_i0, 1e-15, 1e-21);
    EXPECT_LT(m.rms_residual, 1e-9);
  }
}

TEST(SlopeFit, Degenerate) {
  std::vector<IvPoint> same = {{0.2, 1e-9}, {0.2, 2e-9}, {0.2, 3e-9}};
  EXPECT_THROW(fit_subthreshold_slope(same), SingularFitError);
  std::vector<IvPoint> two = {{0.1, 1e-9}, {0.2, 2e-9}};
  EXPECT_THROW(fit_subthreshold_slope(two), DomainError);
  std::vector<IvPoint> neg = {{0.1, 1e-9}, {0.2, -2e-9}, {0.3, 3e-9}};
  EXPECT_THROW(fit_subthreshold_slope(neg), DomainError);
}

TEST(Pdk, LoadsJsonAndRejectsBadValues) {
  const auto dir = std::filesystem::temp_directory_path() / "learnafe_pdk_test";
  std::filesystem::create_directories(dir);
  const auto good = (dir / "good.json").string();
  std::ofstream(good) << R"({"pdk": {"nut_nmos_v": 0.04, "vdd_v": 0.8}})";
  const auto pdk = load_pdk(good);
  EXPECT_EQ(pdk.nut_nmos, 0.04);
  EXPECT_EQ(pdk.vdd, 0.8);
  EXPECT_EQ(pdk.nut_pmos, 0.059);
  const auto bad = (dir / "bad.json").string();
  std::ofstream(bad) << R"({"vdd_v": -1})";
  EXPECT_THROW(load_pdk(bad), DomainError);
  std::ofstream(bad) << "{not json";
  EXPECT_THROW(load_pdk(bad), FormatError);
}
