#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "learnafe/nn/dscnn.hpp"
#include "learnafe/nn/kernels.hpp"
#include "learnafe/nn/layers.hpp"
#include "learnafe/nn/optim.hpp"
#include "oracles.hpp"

using namespace learnafe;
using namespace learnafe::nn;

namespace {

template <class T>
std::vector<T> random_vec(std::size_t n, std::uint64_t seed) {
  const auto r = oracle::white_noise(n, seed);
  return {r.begin(), r.end()};
}

template <class T>
Tensor<T> random_input(std::size_t n, std::size_t f, std::uint64_t seed) {
  Tensor<T> x({n, 1, kNumChannels, f});
  const auto r = oracle::white_noise(x.numel(), seed);
  for (std::size_t i = 0; i < x.numel(); ++i) x.data[i] = static_cast<T>(std::abs(r[i]) * 3.0);
  return x;
}

DscnnConfig small_config() {
  DscnnConfig c;
  c.channels = 8;
  c.blocks = 2;
  return c;
}

struct ConvCase {
  std::size_t n, ci, h, w, co, kh, kw, sh, sw, groups;
};

}  // namespace

class ConvKernels : public ::testing::TestWithParam<ConvCase> {};

TEST_P(ConvKernels, OptimizedMatchesReferenceAndSerialMatchesParallel) {
  const auto p = GetParam();
  const auto s = same_conv_shape(p.n, p.ci, p.h, p.w, p.co, p.kh, p.kw, p.sh, p.sw, p.groups);
  EXPECT_EQ(s.oh, (p.h + p.sh - 1) / p.sh);
  EXPECT_EQ(s.ow, (p.w + p.sw - 1) / p.sw);
  const auto x = random_vec<double>(s.x_size(), 1), w = random_vec<double>(s.w_size(), 2);
  const auto b = random_vec<double>(s.co, 3), dy = random_vec<double>(s.y_size(), 4);
  std::vector<double> yr(s.y_size()), ys(s.y_size()), yp(s.y_size());
  reference::conv2d_forward(s, x.data(), w.data(), b.data(), yr.data());
  conv2d_forward(s, x.data(), w.data(), b.data(), ys.data(), Exec::Serial);
  conv2d_forward(s, x.data(), w.data(), b.data(), yp.data(), Exec::Parallel);
  for (std::size_t i = 0; i < yr.size(); ++i) EXPECT_NEAR(ys[i], yr[i], 1e-12);
  EXPECT_EQ(ys, yp);

  std::vector<double> dxr(s.x_size()), dxs(s.x_size()), dxp(s.x_size());
  reference::conv2d_backward_data(s, dy.data(), w.data(), dxr.data());
  conv2d_backward_data(s, dy.data(), w.data(), dxs.data(), Exec::Serial);
  conv2d_backward_data(s, dy.data(), w.data(), dxp.data(), Exec::Parallel);
  for (std::size_t i = 0; i < dxr.size(); ++i) EXPECT_NEAR(dxs[i], dxr[i], 1e-12);
  EXPECT_EQ(dxs, dxp);

  std::vector<double> dwr(s.w_size()), dws(s.w_size()), dwp(s.w_size());
  std::vector<double> dbr(s.co), dbs(s.co), dbp(s.co);
  reference::conv2d_backward_weight(s, dy.data(), x.data(), dwr.data(), dbr.data());
  conv2d_backward_weight(s, dy.data(), x.data(), dws.data(), dbs.data(), Exec::Serial);
  conv2d_backward_weight(s, dy.data(), x.data(), dwp.data(), dbp.data(), Exec::Parallel);
  for (std::size_t i = 0; i < dwr.size(); ++i) EXPECT_NEAR(dws[i], dwr[i], 1e-12);
  for (std::size_t i = 0; i < dbr.size(); ++i) EXPECT_NEAR(dbs[i], dbr[i], 1e-12);
  EXPECT_EQ(dws, dwp);
  EXPECT_EQ(dbs, dbp);

  // adjoint identity: <conv(x), dy> == <x, conv^T(dy)> without bias
  std::vector<double> y0(s.y_size());
  conv2d_forward<double>(s, x.data(), w.data(), nullptr, y0.data());
  const double lhs = std::inner_product(y0.begin(), y0.end(), dy.begin(), 0.0);
  const double rhs = std::inner_product(x.begin(), x.end(), dxs.begin(), 0.0);
  EXPECT_NEAR(lhs, rhs, 1e-9 * std::max(1.0, std::abs(lhs)));
}

INSTANTIATE_TEST_SUITE_P(
    Shapes, ConvKernels,
    ::testing::Values(ConvCase{2, 1, 16, 40, 8, 4, 10, 1, 2, 1}, ConvCase{3, 8, 16, 20, 8, 3, 3, 1, 1, 8},
                      ConvCase{2, 8, 16, 20, 6, 1, 1, 1, 1, 1}, ConvCase{1, 4, 7, 9, 4, 3, 3, 2, 2, 2},
                      ConvCase{2, 3, 5, 5, 6, 5, 5, 3, 1, 3}));

TEST(ConvKernels, RejectsBadShapes) {
  EXPECT_THROW(same_conv_shape(1, 3, 4, 4, 4, 3, 3, 1, 1, 2), DomainError);
  EXPECT_THROW(same_conv_shape(1, 2, 4, 4, 2, 3, 3, 0, 1, 1), DomainError);
  EXPECT_THROW(same_conv_shape(1, 2, 0, 4, 2, 3, 3, 1, 1, 1), DomainError);
}

TEST(BatchNorm, TrainingStatistics) {
  const std::size_t n = 4, c = 3, hw = 10;
  auto x = random_vec<double>(n * c * hw, 5);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 3.0 * x[i] + 2.0;
  std::vector<double> gamma(c, 1.0), beta(c, 0.0), rm(c, 0.0), rv(c, 1.0), y(x.size());
  BatchNormCache<double> cache;
  batchnorm_forward(x.data(), n, c, hw, gamma.data(), beta.data(), rm.data(), rv.data(), true, {}, y.data(),
                    cache);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double m = 0, v = 0, bm = 0, bv = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t t = 0; t < hw; ++t) {
        m += y[(i * c + ch) * hw + t];
        bm += x[(i * c + ch) * hw + t];
      }
    }
    m /= n * hw;
    bm /= n * hw;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t t = 0; t < hw; ++t) {
        v += std::pow(y[(i * c + ch) * hw + t] - m, 2);
        bv += std::pow(x[(i * c + ch) * hw + t] - bm, 2);
      }
    }
    v /= n * hw;
    EXPECT_NEAR(m, 0.0, 1e-5);
    EXPECT_NEAR(v, 1.0, 1e-5);
    EXPECT_NEAR(rm[ch], 0.1 * bm, 1e-12);
    EXPECT_NEAR(rv[ch], 0.9 + 0.1 * bv / (n * hw - 1), 1e-12);
  }
}

TEST(BatchNorm, IdentityWhenStatisticsMatch) {
  const std::size_t n = 3, c = 2, hw = 8;
  auto x = random_vec<double>(n * c * hw, 6);
  std::vector<double> gamma(c), beta(c), rm(c, 0.0), rv(c, 1.0), y(x.size());
  // gamma = batch std, beta = batch mean recovers the input
  for (std::size_t ch = 0; ch < c; ++ch) {
    double m = 0, v = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t t = 0; t < hw; ++t) m += x[(i * c + ch) * hw + t];
    m /= n * hw;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t t = 0; t < hw; ++t) v += std::pow(x[(i * c + ch) * hw + t] - m, 2);
    v /= n * hw;
    gamma[ch] = std::sqrt(v + 1e-7);
    beta[ch] = m;
  }
  BatchNormCache<double> cache;
  batchnorm_forward(x.data(), n, c, hw, gamma.data(), beta.data(), rm.data(), rv.data(), true, {}, y.data(),
                    cache);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], x[i], 1e-6);
}

TEST(BatchNorm, EvalUsesRunningStatsAndNeedsNoBatch) {
  const std::size_t c = 2, hw = 3;
  std::vector<double> x = {1, 2, 3, 4, 5, 6}, gamma = {2.0, 1.0}, beta = {0.5, -1.0};
  std::vector<double> rm = {1.0, 4.0}, rv = {4.0, 0.25}, y(6);
  BatchNormCache<double> cache;
  batchnorm_forward(x.data(), 1, c, hw, gamma.data(), beta.data(), rm.data(), rv.data(), false, {}, y.data(),
                    cache);
  EXPECT_NEAR(y[0], 2.0 * (1 - 1) / std::sqrt(4 + 1e-7) + 0.5, 1e-12);
  EXPECT_NEAR(y[5], (6 - 4) / std::sqrt(0.25 + 1e-7) - 1.0, 1e-12);
  EXPECT_EQ(rm[0], 1.0);
  EXPECT_THROW(batchnorm_forward(x.data(), 1, c, hw, gamma.data(), beta.data(), rm.data(), rv.data(), true,
                                 {}, y.data(), cache),
               DomainError);
}

TEST(BatchNorm, SerialMatchesParallel) {
  const std::size_t n = 5, c = 8, hw = 40;
  const auto x = random_vec<double>(n * c * hw, 7), dy = random_vec<double>(n * c * hw, 8);
  std::vector<double> gamma(c, 1.3), beta(c, 0.1);
  std::vector<double> out[2], dx[2], dg[2], db[2];
  for (int k = 0; k < 2; ++k) {
    const Exec e = k ? Exec::Parallel : Exec::Serial;
    std::vector<double> rm(c, 0.0), rv(c, 1.0);
    out[k].resize(x.size());
    dx[k].resize(x.size());
    dg[k].resize(c);
    db[k].resize(c);
    BatchNormCache<double> cache;
    batchnorm_forward(x.data(), n, c, hw, gamma.data(), beta.data(), rm.data(), rv.data(), true, {},
                      out[k].data(), cache, e);
    batchnorm_backward(dy.data(), n, c, hw, gamma.data(), cache, dx[k].data(), dg[k].data(), db[k].data(), e);
  }
  EXPECT_EQ(out[0], out[1]);
  EXPECT_EQ(dx[0], dx[1]);
  EXPECT_EQ(dg[0], dg[1]);
  EXPECT_EQ(db[0], db[1]);
}

TEST(Softmax, CrossEntropyValues) {
  std::vector<double> logits(12, 0.0), grad(12);
  EXPECT_NEAR(softmax_cross_entropy<double>(logits, 3, grad), std::log(12.0), 1e-12);
  double s = 0;
  for (double g : grad) s += g;
  EXPECT_NEAR(s, 0.0, 1e-15);
  logits[5] = 30.0;
  EXPECT_LT(softmax_cross_entropy<double>(logits, 5, grad), 1e-11);
  EXPECT_NEAR(softmax_cross_entropy<double>(logits, 0, grad), 30.0, 1e-9);
  // huge logits stay finite
  logits[5] = 1e4;
  EXPECT_TRUE(std::isfinite(softmax_cross_entropy<double>(logits, 0, grad)));
  EXPECT_THROW(softmax_cross_entropy<double>(logits, 12, grad), DomainError);
  EXPECT_THROW(softmax_cross_entropy<double>(logits, -1, grad), DomainError);
}

TEST(Softmax, SumsToOneAndGradientMatchesFd) {
  const auto l = oracle::white_noise(12, 9, 4.0);
  const auto p = softmax(l);
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
  std::vector<double> logits(l.begin(), l.end()), grad(12), tmp(12);
  softmax_cross_entropy<double>(logits, 7, grad);
  for (std::size_t k = 0; k < 12; ++k) {
    auto y = logits;
    const double fd = oracle::central_diff(
        [&](double v) {
          y[k] = v;
          return softmax_cross_entropy<double>(y, 7, tmp);
        },
        logits[k], 1e-6);
    EXPECT_NEAR(grad[k], fd, 1e-8);
  }
  EXPECT_EQ(argmax<double>(p), argmax<double>(logits));
}

TEST(Dscnn, ParameterCounts) {
  const Dscnn<float> full;
  std::size_t total = 0;
  for (const auto& p : full.parameters()) total += p.value.numel();
  EXPECT_EQ(full.parameter_count(), total);
  EXPECT_EQ(full.parameter_count(), full.config().expected_parameter_count());
  EXPECT_EQ(full.parameter_count(), 22604u);
  const Dscnn<float> small(small_config());
  EXPECT_EQ(small.parameter_count(), small.config().expected_parameter_count());
  DscnnConfig bad;
  bad.channels = 0;
  EXPECT_THROW(Dscnn<float>{bad}, DomainError);
}

TEST(Dscnn, OutputShapeAndZeroInput) {
  Dscnn<float> m(small_config(), 3);
  const auto x = random_input<float>(2, 100, 1);
  const auto logits = m.forward(x, true);
  ASSERT_EQ(logits.shape, (std::vector<std::size_t>{2, 12}));
  Tensor<float> zero({1, 1, kNumChannels, 100}, 0.0f);
  EXPECT_EQ(m.forward(zero, false).shape, (std::vector<std::size_t>{1, 12}));
  // eval mode, zero input: every layer outputs zero up to the classifier bias
  Dscnn<float> fresh(small_config(), 3);
  const auto zf = fresh.forward(zero, false);
  for (std::size_t k = 0; k < 12; ++k) EXPECT_EQ(zf.data[k], fresh.parameter("fc.bias").value.data[k]);
  EXPECT_THROW(m.forward(Tensor<float>({1, 1, 15, 100}), false), DomainError);
  EXPECT_THROW(m.forward(Tensor<float>({1, 1, 16, 5}), false), DomainError);
  auto nan_input = zero;
  nan_input.data[3] = std::nanf("");
  EXPECT_THROW(m.forward(nan_input, false), DomainError);
}

TEST(Dscnn, BackwardContract) {
  Dscnn<double> m(small_config(), 4);
  Tensor<double> dl({2, 12}, 1.0);
  EXPECT_THROW(m.backward(dl), StateError);
  const auto x = random_input<double>(2, 60, 2);
  m.forward(x, true);
  const auto g1 = m.backward(dl);
  std::vector<std::vector<double>> grads1;
  for (const auto& p : m.parameters()) grads1.push_back(p.value.grad);
  EXPECT_THROW(m.backward(dl), StateError);
  // doubling the upstream gradient doubles everything (running stats aside)
  Dscnn<double> m2(small_config(), 4);
  m2.forward(x, true);
  Tensor<double> dl2({2, 12}, 2.0);
  const auto g2 = m2.backward(dl2);
  for (std::size_t i = 0; i < g1.numel(); ++i) EXPECT_NEAR(g2.data[i], 2.0 * g1.data[i], 1e-12);
  for (std::size_t p = 0; p < grads1.size(); ++p) {
    for (std::size_t i = 0; i < grads1[p].size(); ++i) {
      EXPECT_NEAR(m2.parameters()[p].value.grad[i], 2.0 * grads1[p][i], 1e-12);
    }
  }
  m2.set_trainable(false);
  m2.forward(x, true);
  m2.backward(dl);
  for (const auto& p : m2.parameters()) {
    for (double v : p.value.grad) EXPECT_EQ(v, 0.0);
  }
}

TEST(Dscnn, FloatGradientMatchesFiniteDifferences) {
  DscnnConfig cfg = small_config();
  Dscnn<float> m(cfg, 5);
  Dscnn<double> md(cfg, 5);
  const auto xd = random_input<double>(2, 20, 3);
  Tensor<float> x({2, 1, kNumChannels, 20});
  for (std::size_t i = 0; i < x.numel(); ++i) x.data[i] = static_cast<float>(xd.data[i]);
  const std::vector<int> labels = {1, 4};
  Tensor<float> dl;
  m.forward(x, true);
  auto logits = m.forward(x, true);
  softmax_cross_entropy_batch(logits, labels, dl);
  m.backward(dl);
  auto& w = m.parameter("block1.pointwise").value;
  // double-precision loss as a function of one float weight
  const auto loss_at = [&](std::size_t i, double v) {
    for (std::size_t k = 0; k < w.numel(); ++k) {
      md.parameter("block1.pointwise").value.data[k] = (k == i) ? v : w.data[k];
    }
    for (auto name : {"stem.weight", "stem.bias", "block0.depthwise", "block0.pointwise", "block0.bn.gamma",
                      "block0.bn.beta", "block1.depthwise", "block1.bn.gamma", "block1.bn.beta", "fc.weight",
                      "fc.bias"}) {
      const auto& src = m.parameter(name).value.data;
      auto& dst = md.parameter(name).value.data;
      for (std::size_t k = 0; k < src.size(); ++k) dst[k] = src[k];
    }
    Tensor<double> dd;
    const auto ld = md.forward(xd, true);
    return softmax_cross_entropy_batch(ld, labels, dd);
  };
  for (std::size_t i = 0; i < w.numel(); i += 5) {
    const double fd = oracle::central_diff([&](double v) { return loss_at(i, v); }, w.data[i], 1e-4);
    EXPECT_LT(std::abs(fd - w.grad[i]), 1e-3 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Dscnn, SerialMatchesParallel) {
  Dscnn<float> a(small_config(), 6), b(small_config(), 6);
  const auto x = random_input<float>(3, 50, 4);
  const auto la = a.forward(x, true, Exec::Serial), lb = b.forward(x, true, Exec::Parallel);
  EXPECT_EQ(la.data, lb.data);
  Tensor<float> dl({3, 12}, 0.25f);
  EXPECT_EQ(a.backward(dl, Exec::Serial).data, b.backward(dl, Exec::Parallel).data);
  for (std::size_t p = 0; p < a.parameters().size(); ++p) {
    EXPECT_EQ(a.parameters()[p].value.grad, b.parameters()[p].value.grad);
  }
}

TEST(AdamW, FirstStepAndDecay) {
  std::vector<double> w = {0.5, -2.0}, g = {0.1, -0.3};
  AdamW<double> opt({0.01, 0.9, 0.999, 1e-8, 0.0, DecayKind::L2});
  opt.step({{w, g, true, true}});
  // bias-corrected first step is lr * sign(g)
  EXPECT_NEAR(w[0], 0.5 - 0.01, 1e-9);
  EXPECT_NEAR(w[1], -2.0 + 0.01, 1e-9);

  std::vector<double> l2 = {0.5, -2.0}, l1 = {0.5, -2.0}, zero = {0.0, 0.0};
  AdamW<double> o2({0.1, 0.9, 0.999, 1e-8, 0.2, DecayKind::L2});
  AdamW<double> o1({0.1, 0.9, 0.999, 1e-8, 0.2, DecayKind::L1});
  o2.step({{l2, zero, true, true}});
  o1.step({{l1, zero, true, true}});
  EXPECT_NEAR(l2[0], 0.5 * (1 - 0.02), 1e-12);
  EXPECT_NEAR(l2[1], -2.0 * (1 - 0.02), 1e-12);
  EXPECT_NEAR(l1[0], 0.5 - 0.02, 1e-12);
  EXPECT_NEAR(l1[1], -2.0 + 0.02, 1e-12);

  std::vector<double> frozen = {1.0}, nodecay = {1.0}, one = {1.0};
  AdamW<double> o3({0.1, 0.9, 0.999, 1e-8, 0.5, DecayKind::L2});
  o3.step({{frozen, one, true, false}, {nodecay, std::vector<double>{0.0}, false, true}});
  EXPECT_EQ(frozen[0], 1.0);
  EXPECT_EQ(nodecay[0], 1.0);
  EXPECT_THROW(o3.step({{frozen, one, true, true}}), StateError);
}

TEST(AdamW, MinimizesQuadratic) {
  std::vector<double> w = {3.0, -4.0}, g(2);
  AdamW<double> opt({0.05});
  for (int i = 0; i < 2000; ++i) {
    g[0] = 2 * (w[0] - 1.0);
    g[1] = 2 * (w[1] + 0.5);
    opt.step({{w, g, true, true}});
  }
  EXPECT_NEAR(w[0], 1.0, 1e-3);
  EXPECT_NEAR(w[1], -0.5, 1e-3);
  EXPECT_EQ(opt.steps(), 2000);
}
