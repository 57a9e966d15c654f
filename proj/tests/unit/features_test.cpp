#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "learnafe/features.hpp"
#include "oracles.hpp"

using namespace learnafe;
using namespace learnafe::features;

namespace {

Array2D<double> random_channels(std::size_t cols, std::uint64_t seed) {
  Array2D<double> a(kNumChannels, cols);
  const auto r = oracle::white_noise(a.data().size(), seed);
  std::copy(r.begin(), r.end(), a.data().begin());
  return a;
}

std::string transient_text(double step, std::size_t rows, std::size_t channels = kNumChannels) {
  std::ostringstream s;
  s << "time_s";
  for (std::size_t c = 1; c <= channels; ++c) s << ",ch" << (c < 10 ? "0" : "") << c;
  s << "\n";
  for (std::size_t r = 0; r < rows; ++r) {
    s << r * step;
    for (std::size_t c = 0; c < channels; ++c) s << "," << 0.001 * (c + 1) * std::sin(0.01 * r);
    s << "\n";
  }
  return s.str();
}

}  // namespace

TEST(Spectrogram, FrameCount) {
  EXPECT_EQ(frame_count(20000, 200), 100u);
  EXPECT_EQ(frame_count(20199, 200), 100u);
  EXPECT_EQ(frame_count(199, 200), 0u);
  EXPECT_EQ(frame_count(100, 0), 0u);
}

TEST(Spectrogram, NegativeInputGivesZeroRows) {
  Array2D<double> x(kNumChannels, 1000, -0.3);
  x(5, 17) = 0.0;
  const auto s = spectrogram(x, {});
  EXPECT_EQ(s.values.rows(), kNumChannels);
  EXPECT_EQ(s.values.cols(), 5u);
  for (double v : s.values.data()) EXPECT_EQ(v, 0.0);
}

TEST(Spectrogram, ConstantInput) {
  const double c = 0.37;
  Array2D<double> x(kNumChannels, 2000, c);
  for (double theta : {0.5, 1.0, 3.0}) {
    const auto s = spectrogram(x, {200, theta, SpikeMode::Continuous});
    for (double v : s.values.data()) EXPECT_NEAR(v, c * 200 / theta, 1e-12);
  }
}

TEST(Spectrogram, ScalingAndMonotonicity) {
  const auto x = random_channels(2000, 1);
  auto x2 = x;
  for (auto& v : x2.data()) v *= 2.0;
  const auto a = spectrogram(x, {}), b = spectrogram(x2, {});
  for (std::size_t i = 0; i < a.values.data().size(); ++i) {
    EXPECT_NEAR(b.values.data()[i], 2.0 * a.values.data()[i], 1e-12);
  }
  const auto h = spectrogram(x, {200, 2.0, SpikeMode::Continuous});
  for (std::size_t i = 0; i < a.values.data().size(); ++i) {
    EXPECT_NEAR(h.values.data()[i], 0.5 * a.values.data()[i], 1e-12);
  }
  auto bumped = x;
  for (std::size_t t = 0; t < bumped.cols(); ++t) bumped(3, t) += 0.1;
  const auto m = spectrogram(bumped, {});
  for (std::size_t f = 0; f < m.values.cols(); ++f) EXPECT_GE(m.values(3, f), a.values(3, f));
}

TEST(Spectrogram, QuantizedFloors) {
  Array2D<double> x(kNumChannels, 10, 0.0);
  x(0, 0) = 2.9;
  x(1, 3) = 3.0;
  const auto s = spectrogram(x, {10, 1.0, SpikeMode::Quantized});
  EXPECT_EQ(s.values(0, 0), 2.0);
  EXPECT_EQ(s.values(1, 0), 3.0);
  const auto q = random_channels(1000, 2);
  const auto qa = spectrogram(q, {100, 0.5, SpikeMode::Quantized});
  const auto ca = spectrogram(q, {100, 0.5, SpikeMode::Continuous});
  for (std::size_t i = 0; i < qa.values.data().size(); ++i) {
    EXPECT_EQ(qa.values.data()[i], std::floor(ca.values.data()[i]));
  }
  EXPECT_THROW(grad_spectrogram(q, qa.values, {100, 0.5, SpikeMode::Quantized}), ModeError);
}

TEST(Spectrogram, RejectsBadConfig) {
  Array2D<double> x(kNumChannels, 100, 1.0);
  EXPECT_THROW(spectrogram(x, {200, 1.0, SpikeMode::Continuous}), DomainError);
  EXPECT_THROW(spectrogram(x, {20, 0.0, SpikeMode::Continuous}), DomainError);
  EXPECT_THROW(spectrogram(x, {0, 1.0, SpikeMode::Continuous}), DomainError);
}

TEST(Spectrogram, GradientMatchesFiniteDifferences) {
  const FeatureConfig cfg{20, 0.7, SpikeMode::Continuous};
  auto x = random_channels(100, 3);
  // keep samples away from the rectifier kink
  for (auto& v : x.data()) {
    if (std::abs(v) < 1e-3) v = 0.01;
  }
  const auto s = spectrogram(x, cfg);
  Array2D<double> up(s.values.rows(), s.values.cols());
  const auto r = oracle::white_noise(up.data().size(), 4);
  std::copy(r.begin(), r.end(), up.data().begin());
  const auto g = grad_spectrogram(x, up, cfg);
  ASSERT_EQ(g.rows(), x.rows());
  ASSERT_EQ(g.cols(), x.cols());
  for (std::size_t i = 0; i < x.data().size(); i += 7) {
    auto y = x;
    const double fd = oracle::central_diff(
        [&](double v) {
          y.data()[i] = v;
          const auto sv = spectrogram(y, cfg);
          double l = 0;
          for (std::size_t k = 0; k < up.data().size(); ++k) l += sv.values.data()[k] * up.data()[k];
          return l;
        },
        x.data()[i], 1e-6);
    EXPECT_LT(oracle::rel_err(fd, g.data()[i], 1e-8), 1e-4);
  }
  Array2D<double> zero(kNumChannels, 100, 0.0);
  const auto gz = grad_spectrogram(zero, up, cfg);
  for (double v : gz.data()) EXPECT_EQ(v, 0.0);
}

TEST(Transient, RoundTrip) {
  const auto x = random_channels(300, 5);
  std::stringstream s;
  write_transient(s, x);
  const auto y = parse_transient(s);
  ASSERT_EQ(y.rows(), x.rows());
  ASSERT_EQ(y.cols(), x.cols());
  for (std::size_t i = 0; i < x.data().size(); ++i) EXPECT_EQ(y.data()[i], x.data()[i]);
}

TEST(Transient, StepTolerance) {
  std::istringstream ok(transient_text(50e-6 * 1.001, 50));
  EXPECT_EQ(parse_transient(ok).cols(), 50u);
  std::istringstream slow(transient_text(60e-6, 50));
  EXPECT_THROW(parse_transient(slow), FormatError);
}

TEST(Transient, RejectsMalformedFiles) {
  std::istringstream fifteen(transient_text(50e-6, 10, 15));
  EXPECT_THROW(parse_transient(fifteen), FormatError);
  std::istringstream empty("");
  EXPECT_THROW(parse_transient(empty), FormatError);
  std::istringstream header_only(transient_text(50e-6, 0));
  EXPECT_THROW(parse_transient(header_only), FormatError);
  auto text = transient_text(50e-6, 10);
  text.replace(text.rfind("0.0"), 3, "abc");
  std::istringstream bad(text);
  EXPECT_THROW(parse_transient(bad), FormatError);
  EXPECT_THROW(import_transient("/nonexistent/transient.csv"), FormatError);
}

TEST(SpectrogramCsv, HeaderAndRows) {
  Array2D<double> x(kNumChannels, 600, 1.0);
  const auto s = spectrogram(x, {});
  std::ostringstream out;
  write_spectrogram_csv(out, s);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "channel,frame0,frame1,frame2");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, kNumChannels);
}
