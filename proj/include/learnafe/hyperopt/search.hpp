#pragma once

// Sequential Bayesian optimization and a random-search baseline over a box
// of (optionally log-scaled) dimensions.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "learnafe/hyperopt/gp.hpp"

namespace learnafe::hyperopt {

struct Dimension {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  bool log_scale = false;
};

struct SearchSpace {
  std::vector<Dimension> dims;

  void validate() const;
  std::size_t size() const { return dims.size(); }
  std::vector<double> to_unit(const std::vector<double>& x) const;
  std::vector<double> from_unit(const std::vector<double>& u) const;
  bool contains(const std::vector<double>& x) const;

  /// lr, l2, lambda_ce, lambda_i, lambda_c with the default log bounds.
  static SearchSpace hyperparams();
};

enum class TrialStatus { Completed, Failed };

struct TrialRecord {
  std::size_t trial = 0;
  std::vector<double> x;
  double acc = std::numeric_limits<double>::quiet_NaN();
  TrialStatus status = TrialStatus::Failed;
  std::uint64_t seed = 0;
};

/// Maps a point and a per-trial seed to a score to maximize. Exceptions and
/// non-finite results mark the trial as failed.
using Objective = std::function<double(const std::vector<double>& x, std::uint64_t seed)>;

struct SearchOptions {
  std::size_t total = 25;
  std::size_t init = 10;  // trial 0 plus init-1 quasi-random points
  std::uint64_t seed = 1;
  std::optional<std::vector<double>> start;  // trial 0; the box center if unset
  std::size_t candidates = 4096;
  std::size_t refine = 8;
  GpOptions gp;
};

struct SearchResult {
  std::vector<TrialRecord> ledger;
  std::optional<TrialRecord> best;  // unset when every trial failed
};

/// Point of the scrambled Halton sequence (random digit permutations per
/// base, drawn from `seed`).
std::vector<double> scrambled_halton(std::size_t index, std::size_t dims, std::uint64_t seed);

/// EI maximizer over quasi-random candidates plus compass-search refinement.
std::vector<double> suggest_next(const GpPosterior& posterior, const SearchSpace& space,
                                 std::uint64_t seed, std::size_t candidates = 4096,
                                 std::size_t refine = 8);

/// Runs trials up to opts.total. Records in `resume` are kept as-is and their
/// trial indices are skipped; `on_trial` sees each new record.
SearchResult run_search(const Objective& objective, const SearchSpace& space,
                        const SearchOptions& opts = {},
                        const std::vector<TrialRecord>& resume = {},
                        const std::function<void(const std::vector<TrialRecord>&)>& on_trial = {});

SearchResult random_search(const Objective& objective, const SearchSpace& space,
                           const SearchOptions& opts = {},
                           const std::vector<TrialRecord>& resume = {},
                           const std::function<void(const std::vector<TrialRecord>&)>& on_trial = {});

/// Running maximum of completed accuracies (NaN until the first success).
std::vector<double> incumbent_curve(const std::vector<TrialRecord>& ledger);

/// Ledger CSV, header trial,lr,l2,lambda_ce,lambda_i,lambda_c,acc,status,seed
/// for the hyperparameter space; other spaces use their dimension names.
std::string ledger_csv(const std::vector<TrialRecord>& ledger, const SearchSpace& space);
std::vector<TrialRecord> parse_ledger(const std::string& text, const SearchSpace& space);

/// Branin function negated and rescaled so the global maximum is 1 and the
/// minimum over [-5,10]x[0,15] is 0.
double branin_score(double x1, double x2);
SearchSpace branin_space();

}  // namespace learnafe::hyperopt
