#include "learnafe/hyperopt/gp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace learnafe::hyperopt {

namespace {

constexpr double kSqrt5 = 2.23606797749978969640;
constexpr double kLogLenLo = -4.6, kLogLenHi = 2.3;  // lengthscale in [0.01, 10]
constexpr double kLogSigLo = -4.6, kLogSigHi = 4.6;

struct Fit {
  double lml = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd chol;
  Eigen::VectorXd alpha;
  std::vector<double> grad;
  double jitter = 0.0;
};

double noise_of(const GpHyper& h) { return std::exp(h.log_noise_var); }

// Log marginal likelihood and its gradient with respect to
// (log lengthscales, log signal variance, log noise variance).
Fit evaluate(const std::vector<std::vector<double>>& x, const Eigen::VectorXd& y,
             const GpHyper& h, bool want_grad) {
  const auto n = static_cast<Eigen::Index>(x.size());
  const std::size_t d = h.log_lengthscales.size();
  std::vector<double> inv_l2(d);
  for (std::size_t k = 0; k < d; ++k) inv_l2[k] = std::exp(-2.0 * h.log_lengthscales[k]);
  const double s2 = std::exp(h.log_signal_var);

  Eigen::MatrixXd kf(n, n);
  std::vector<Eigen::MatrixXd> dl(want_grad ? d : 0, Eigen::MatrixXd::Zero(n, n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      double r2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double t = x[i][k] - x[j][k];
        r2 += t * t * inv_l2[k];
      }
      const double r = std::sqrt(r2);
      const double e = std::exp(-kSqrt5 * r);
      kf(i, j) = kf(j, i) = s2 * (1.0 + kSqrt5 * r + 5.0 * r2 / 3.0) * e;
      if (want_grad) {
        // dk/dlog l_k = s2 (5/3)(1 + sqrt5 r) e^{-sqrt5 r} delta_k^2 / l_k^2
        const double common = s2 * (5.0 / 3.0) * (1.0 + kSqrt5 * r) * e;
        for (std::size_t k = 0; k < d; ++k) {
          const double t = x[i][k] - x[j][k];
          dl[k](i, j) = dl[k](j, i) = common * t * t * inv_l2[k];
        }
      }
    }
  }

  Fit f;
  const double noise = noise_of(h);
  for (double jitter = 0.0; jitter <= 1e-2; jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0) {
    Eigen::MatrixXd k = kf;
    k.diagonal().array() += noise + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) continue;
    f.chol = llt.matrixL();
    f.alpha = llt.solve(y);
    f.jitter = jitter;
    const double logdet = 2.0 * f.chol.diagonal().array().log().sum();
    f.lml = -0.5 * y.dot(f.alpha) - 0.5 * logdet -
            0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    if (want_grad) {
      const Eigen::MatrixXd kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
      const Eigen::MatrixXd w = f.alpha * f.alpha.transpose() - kinv;
      f.grad.resize(d + 2);
      for (std::size_t q = 0; q < d; ++q) f.grad[q] = 0.5 * (w.array() * dl[q].array()).sum();
      f.grad[d] = 0.5 * (w.array() * kf.array()).sum();
      f.grad[d + 1] = 0.5 * noise * w.trace();
    }
    return f;
  }
  throw SingularFitError("kernel matrix is not positive definite even with jitter");
}

std::vector<double> pack(const GpHyper& h) {
  std::vector<double> v = h.log_lengthscales;
  v.push_back(h.log_signal_var);
  v.push_back(h.log_noise_var);
  return v;
}

GpHyper unpack(const std::vector<double>& v, std::size_t d) {
  GpHyper h;
  h.log_lengthscales.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(d));
  h.log_signal_var = v[d];
  h.log_noise_var = v[d + 1];
  return h;
}

void project(std::vector<double>& v, std::size_t d, double log_noise_lo) {
  for (std::size_t k = 0; k < d; ++k) v[k] = std::clamp(v[k], kLogLenLo, kLogLenHi);
  v[d] = std::clamp(v[d], kLogSigLo, kLogSigHi);
  v[d + 1] = std::clamp(v[d + 1], log_noise_lo, 0.0);
}

// Projected gradient ascent with a backtracking step.
std::pair<GpHyper, double> ascend(const std::vector<std::vector<double>>& x,
                                  const Eigen::VectorXd& y, std::vector<double> v,
                                  const GpOptions& opts) {
  const std::size_t d = x[0].size();
  const double log_noise_lo = std::log(opts.noise_floor);
  project(v, d, log_noise_lo);
  Fit cur = evaluate(x, y, unpack(v, d), true);
  double step = 0.1;
  for (std::size_t it = 0; it < opts.iterations && step > 1e-8; ++it) {
    double gnorm = 0.0;
    for (double g : cur.grad) gnorm += g * g;
    gnorm = std::sqrt(gnorm);
    if (gnorm < 1e-8) break;
    bool moved = false;
    while (step > 1e-8) {
      std::vector<double> cand = v;
      for (std::size_t q = 0; q < v.size(); ++q) cand[q] += step * cur.grad[q] / gnorm;
      project(cand, d, log_noise_lo);
      Fit next = evaluate(x, y, unpack(cand, d), true);
      if (next.lml > cur.lml) {
        const bool tiny = next.lml - cur.lml < 1e-10;
        v = std::move(cand);
        cur = std::move(next);
        step = std::min(step * 2.0, 2.0);
        moved = !tiny;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return {unpack(v, d), cur.lml};
}

}  // namespace

double matern52(std::span<const double> a, std::span<const double> b, const GpHyper& h) {
  double r2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = (a[k] - b[k]) * std::exp(-h.log_lengthscales[k]);
    r2 += t * t;
  }
  const double r = std::sqrt(r2);
  return std::exp(h.log_signal_var) * (1.0 + kSqrt5 * r + 5.0 * r2 / 3.0) * std::exp(-kSqrt5 * r);
}

GpPosterior gp_fit(const std::vector<std::vector<double>>& x_in, const std::vector<double>& y_in,
                   const GpOptions& opts) {
  if (x_in.size() != y_in.size()) throw DomainError("need one target per input");
  if (x_in.size() < 2) throw DomainError("GP fit needs at least two observations");
  if (!(opts.noise_floor > 0)) throw DomainError("noise floor must be positive");
  const std::size_t d = x_in[0].size();
  if (d == 0) throw DomainError("inputs must have at least one dimension");
  for (std::size_t i = 0; i < x_in.size(); ++i) {
    if (x_in[i].size() != d) throw DomainError("inputs must share one dimension");
    if (!std::isfinite(y_in[i])) throw DomainError("targets must be finite");
  }

  std::vector<std::size_t> order(x_in.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (x_in[a] != x_in[b]) return x_in[a] < x_in[b];
    return y_in[a] < y_in[b];
  });

  GpPosterior p;
  p.dims_ = d;
  const std::size_t n = order.size();
  for (std::size_t i : order) {
    p.x_.push_back(x_in[i]);
    p.y_.push_back(y_in[i]);
  }
  p.y_mean_ = std::accumulate(p.y_.begin(), p.y_.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : p.y_) ss += (v - p.y_mean_) * (v - p.y_mean_);
  p.y_std_ = std::sqrt(ss / static_cast<double>(n));
  if (!(p.y_std_ > 1e-12)) p.y_std_ = 1.0;
  p.best_ = *std::max_element(p.y_.begin(), p.y_.end());
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    p.y_[i] = (p.y_[i] - p.y_mean_) / p.y_std_;
    y(static_cast<Eigen::Index>(i)) = p.y_[i];
  }

  if (opts.fixed) {
    if (opts.fixed->log_lengthscales.size() != d) throw DomainError("lengthscale count != dims");
    p.hyper_ = *opts.fixed;
  } else {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s <= opts.restarts; ++s) {
      GpHyper h;
      h.log_lengthscales.assign(d, std::log(0.3));
      h.log_signal_var = 0.0;
      h.log_noise_var = std::log(std::max(opts.noise_floor, 1e-3));
      if (s > 0) {
        for (auto& l : h.log_lengthscales) l = std::log(0.05) + u(rng) * std::log(40.0);
        h.log_signal_var = -1.0 + 2.0 * u(rng);
        h.log_noise_var = std::log(opts.noise_floor) + u(rng) * -std::log(opts.noise_floor) * 0.5;
      }
      try {
        auto [fit, lml] = ascend(p.x_, y, pack(h), opts);
        if (lml > best) {
          best = lml;
          p.hyper_ = fit;
        }
      } catch (const SingularFitError&) {
      }
    }
    if (!std::isfinite(best)) throw SingularFitError("no restart produced a factorizable kernel");
  }
  p.hyper_.log_noise_var = std::max(p.hyper_.log_noise_var, std::log(opts.noise_floor));

  const Fit f = evaluate(p.x_, y, p.hyper_, false);
  p.lml_ = f.lml;
  p.jitter_ = f.jitter;
  p.chol_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      p.chol_[i * n + j] = f.chol(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  p.alpha_.assign(f.alpha.data(), f.alpha.data() + f.alpha.size());
  return p;
}

Prediction GpPosterior::predict(std::span<const double> x) const {
  if (x.size() != dims_) throw DomainError("query dimension mismatch");
  const std::size_t n = y_.size();
  std::vector<double> ks(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ks[i] = matern52(x, x_[i], hyper_);
    mean += ks[i] * alpha_[i];
  }
  // v = L^-1 k*
  for (std::size_t i = 0; i < n; ++i) {
    double s = ks[i];
    for (std::size_t j = 0; j < i; ++j) s -= chol_[i * n + j] * ks[j];
    ks[i] = s / chol_[i * n + i];
  }
  double var = std::exp(hyper_.log_signal_var);
  for (double v : ks) var -= v * v;
  var = std::max(var, 0.0);
  return {mean * y_std_ + y_mean_, var * y_std_ * y_std_};
}

double expected_improvement(double mu, double sigma, double best) {
  if (sigma < 0) throw DomainError("sigma must be non-negative");
  const double diff = mu - best;
  if (sigma == 0.0) return std::max(diff, 0.0);
  const double z = diff / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(diff * cdf + sigma * pdf, 0.0);
}

}  // namespace learnafe::hyperopt
