#pragma once

// Gaussian-process regression with a Matern-5/2 ARD kernel on the unit cube,
// and the expected-improvement acquisition.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "learnafe/common.hpp"

namespace learnafe::hyperopt {

struct GpHyper {
  std::vector<double> log_lengthscales;
  double log_signal_var = 0.0;
  double log_noise_var = 0.0;
};

struct GpOptions {
  double noise_floor = 1e-6;  // lower bound on the standardized noise variance
  std::size_t restarts = 4;
  std::size_t iterations = 200;
  std::uint64_t seed = 0x6b1d;
  std::optional<GpHyper> fixed;  // skip the likelihood fit
};

struct Prediction {
  double mean = 0.0;
  double var = 0.0;
};

class GpPosterior {
 public:
  std::size_t dims() const { return dims_; }
  std::size_t size() const { return y_.size(); }
  const GpHyper& hyper() const { return hyper_; }
  double log_marginal_likelihood() const { return lml_; }
  /// Largest observed target, in original units.
  double best_observed() const { return best_; }
  /// Jitter added to the diagonal to make the Cholesky factorization succeed.
  double jitter() const { return jitter_; }

  /// Posterior of the latent function at x (unit cube), in original units.
  Prediction predict(std::span<const double> x) const;

 private:
  friend GpPosterior gp_fit(const std::vector<std::vector<double>>&, const std::vector<double>&,
                            const GpOptions&);
  std::size_t dims_ = 0;
  GpHyper hyper_;
  std::vector<std::vector<double>> x_;
  std::vector<double> y_;      // standardized
  std::vector<double> chol_;   // lower factor, row-major n x n
  std::vector<double> alpha_;  // K^-1 y
  double y_mean_ = 0.0, y_std_ = 1.0, best_ = 0.0, lml_ = 0.0, jitter_ = 0.0;
};

/// Fits a GP to inputs in [0,1]^d. Points are put in a canonical order first,
/// so the result does not depend on the order of the observations. Throws
/// DomainError with fewer than two points and SingularFitError when no jitter
/// up to 1e-2 makes the kernel matrix factorizable.
GpPosterior gp_fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                   const GpOptions& opts = {});

/// Matern-5/2 ARD kernel value between two unit-cube points.
double matern52(std::span<const double> a, std::span<const double> b, const GpHyper& h);

/// E[max(f - best, 0)] for f ~ N(mu, sigma^2).
double expected_improvement(double mu, double sigma, double best);

}  // namespace learnafe::hyperopt
