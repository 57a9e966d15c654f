#include "learnafe/hyperopt/search.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "learnafe/io/csv.hpp"

namespace learnafe::hyperopt {

void SearchSpace::validate() const {
  if (dims.empty()) throw DomainError("search space has no dimensions");
  for (const auto& d : dims) {
    if (!(d.lo < d.hi)) throw DomainError("dimension '" + d.name + "' needs lo < hi");
    if (d.log_scale && !(d.lo > 0)) {
      throw DomainError("log-scaled dimension '" + d.name + "' needs positive bounds");
    }
  }
}

std::vector<double> SearchSpace::to_unit(const std::vector<double>& x) const {
  if (x.size() != dims.size()) throw DomainError("point dimension mismatch");
  std::vector<double> u(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const auto& d = dims[k];
    u[k] = d.log_scale ? std::log(x[k] / d.lo) / std::log(d.hi / d.lo)
                       : (x[k] - d.lo) / (d.hi - d.lo);
  }
  return u;
}

std::vector<double> SearchSpace::from_unit(const std::vector<double>& u) const {
  if (u.size() != dims.size()) throw DomainError("point dimension mismatch");
  std::vector<double> x(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const auto& d = dims[k];
    const double t = std::clamp(u[k], 0.0, 1.0);
    x[k] = d.log_scale ? d.lo * std::pow(d.hi / d.lo, t) : d.lo + t * (d.hi - d.lo);
    x[k] = std::clamp(x[k], d.lo, d.hi);
  }
  return x;
}

bool SearchSpace::contains(const std::vector<double>& x) const {
  if (x.size() != dims.size()) return false;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] >= dims[k].lo && x[k] <= dims[k].hi)) return false;
  }
  return true;
}

SearchSpace SearchSpace::hyperparams() {
  return {{{"lr", 1e-4, 1e-1, true},
           {"l2", 1e-6, 1e-2, true},
           {"lambda_ce", 0.1, 10.0, true},
           {"lambda_i", 1e-4, 1e-1, true},
           {"lambda_c", 1e-4, 1e-1, true}}};
}

std::vector<double> scrambled_halton(std::size_t index, std::size_t dims, std::uint64_t seed) {
  static constexpr std::array<unsigned, 16> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19,
                                                       23, 29, 31, 37, 41, 43, 47, 53};
  if (dims > kPrimes.size()) throw DomainError("scrambled_halton supports up to 16 dimensions");
  std::vector<double> out(dims);
  for (std::size_t k = 0; k < dims; ++k) {
    const unsigned base = kPrimes[k];
    std::vector<unsigned> perm(base);
    for (unsigned i = 0; i < base; ++i) perm[i] = i;
    std::mt19937_64 rng(derive_seed(seed, k));
    std::shuffle(perm.begin(), perm.end(), rng);
    double v = 0.0, w = 1.0 / base;
    std::size_t i = index;
    // all digit positions, including the infinite tail of zeros, are permuted
    while (w > 1e-17) {
      v += perm[i % base] * w;
      i /= base;
      w /= base;
    }
    out[k] = std::min(v, std::nextafter(1.0, 0.0));
  }
  return out;
}

namespace {

double ei_at(const GpPosterior& post, const std::vector<double>& u) {
  const Prediction p = post.predict(u);
  return expected_improvement(p.mean, std::sqrt(p.var), post.best_observed());
}

}  // namespace

std::vector<double> suggest_next(const GpPosterior& posterior, const SearchSpace& space,
                                 std::uint64_t seed, std::size_t candidates,
                                 std::size_t refine) {
  space.validate();
  const std::size_t d = space.size();
  if (posterior.dims() != d) throw DomainError("posterior and space dimensions differ");
  if (candidates == 0) throw DomainError("need at least one candidate");

  std::vector<std::pair<double, std::vector<double>>> pool;
  pool.reserve(candidates);
  for (std::size_t i = 0; i < candidates; ++i) {
    auto u = scrambled_halton(i + 1, d, seed);
    pool.emplace_back(ei_at(posterior, u), std::move(u));
  }
  const std::size_t keep = std::min(std::max<std::size_t>(refine, 1), pool.size());
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first; });

  double best_ei = pool[0].first;
  std::vector<double> best = pool[0].second;
  for (std::size_t s = 0; s < keep; ++s) {
    auto [val, u] = pool[s];
    double step = 0.05;
    for (int it = 0; it < 200 && step > 1e-4; ++it) {
      bool improved = false;
      for (std::size_t k = 0; k < d && !improved; ++k) {
        for (double dir : {1.0, -1.0}) {
          auto c = u;
          c[k] = std::clamp(c[k] + dir * step, 0.0, 1.0);
          const double e = ei_at(posterior, c);
          if (e > val) {
            val = e;
            u = std::move(c);
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (val > best_ei) {
      best_ei = val;
      best = u;
    }
  }
  return space.from_unit(best);
}

namespace {

TrialRecord evaluate_trial(const Objective& objective, std::size_t t, std::vector<double> x,
                           std::uint64_t seed) {
  TrialRecord r;
  r.trial = t;
  r.x = std::move(x);
  r.seed = seed;
  try {
    const double acc = objective(r.x, seed);
    if (std::isfinite(acc)) {
      r.acc = acc;
      r.status = TrialStatus::Completed;
    }
  } catch (const std::exception&) {
    r.status = TrialStatus::Failed;
  }
  return r;
}

std::optional<TrialRecord> best_of(const std::vector<TrialRecord>& ledger) {
  std::optional<TrialRecord> best;
  for (const auto& r : ledger) {
    if (r.status == TrialStatus::Completed && (!best || r.acc > best->acc)) best = r;
  }
  return best;
}

const TrialRecord* find_trial(const std::vector<TrialRecord>& resume, std::size_t t) {
  for (const auto& r : resume) {
    if (r.trial == t) return &r;
  }
  return nullptr;
}

}  // namespace

SearchResult run_search(const Objective& objective, const SearchSpace& space,
                        const SearchOptions& opts, const std::vector<TrialRecord>& resume,
                        const std::function<void(const std::vector<TrialRecord>&)>& on_trial) {
  space.validate();
  if (opts.init == 0 || opts.init > opts.total) throw DomainError("need 0 < init <= total");
  const std::size_t d = space.size();
  SearchResult res;
  for (std::size_t t = 0; t < opts.total; ++t) {
    if (const auto* r = find_trial(resume, t)) {
      res.ledger.push_back(*r);
      continue;
    }
    const std::uint64_t trial_seed = derive_seed(opts.seed, t);
    std::vector<double> x;
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    for (const auto& r : res.ledger) {
      if (r.status == TrialStatus::Completed) {
        xs.push_back(space.to_unit(r.x));
        ys.push_back(r.acc);
      }
    }
    if (t == 0) {
      x = opts.start ? *opts.start : space.from_unit(std::vector<double>(d, 0.5));
      if (!space.contains(x)) throw DomainError("start point lies outside the search space");
    } else if (t < opts.init || xs.size() < 2) {
      x = space.from_unit(scrambled_halton(t, d, derive_seed(opts.seed, 0x4a17)));
    } else {
      const GpPosterior post = gp_fit(xs, ys, opts.gp);
      x = suggest_next(post, space, derive_seed(opts.seed, 0xe1, t), opts.candidates,
                       opts.refine);
    }
    res.ledger.push_back(evaluate_trial(objective, t, std::move(x), trial_seed));
    if (on_trial) on_trial(res.ledger);
  }
  res.best = best_of(res.ledger);
  return res;
}

SearchResult random_search(const Objective& objective, const SearchSpace& space,
                           const SearchOptions& opts, const std::vector<TrialRecord>& resume,
                           const std::function<void(const std::vector<TrialRecord>&)>& on_trial) {
  space.validate();
  SearchResult res;
  for (std::size_t t = 0; t < opts.total; ++t) {
    if (const auto* r = find_trial(resume, t)) {
      res.ledger.push_back(*r);
      continue;
    }
    std::mt19937_64 rng(derive_seed(opts.seed, 0x7a2d, t));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> unit(space.size());
    for (auto& v : unit) v = u(rng);
    res.ledger.push_back(
        evaluate_trial(objective, t, space.from_unit(unit), derive_seed(opts.seed, t)));
    if (on_trial) on_trial(res.ledger);
  }
  res.best = best_of(res.ledger);
  return res;
}

std::vector<double> incumbent_curve(const std::vector<TrialRecord>& ledger) {
  std::vector<double> out;
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : ledger) {
    if (r.status == TrialStatus::Completed && (std::isnan(best) || r.acc > best)) best = r.acc;
    out.push_back(best);
  }
  return out;
}

std::string ledger_csv(const std::vector<TrialRecord>& ledger, const SearchSpace& space) {
  std::ostringstream out;
  out << "trial";
  for (const auto& d : space.dims) out << ',' << d.name;
  out << ",acc,status,seed\n";
  for (const auto& r : ledger) {
    out << r.trial;
    for (double v : r.x) out << ',' << io::format_double(v);
    out << ',' << (r.status == TrialStatus::Completed ? io::format_double(r.acc) : "nan") << ','
        << (r.status == TrialStatus::Completed ? "completed" : "failed") << ',' << r.seed << '\n';
  }
  return out.str();
}

std::vector<TrialRecord> parse_ledger(const std::string& text, const SearchSpace& space) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) return {};
  const auto header = io::split_fields(line);
  const std::size_t width = space.size() + 4;
  if (header.size() != width || header.front() != "trial" || header[width - 3] != "acc") {
    throw FormatError("ledger header does not match the search space");
  }
  for (std::size_t k = 0; k < space.size(); ++k) {
    if (header[k + 1] != space.dims[k].name) throw FormatError("ledger column mismatch");
  }
  std::vector<TrialRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = io::split_fields(line);
    if (f.size() != width) {
      throw FormatError("ledger line " + std::to_string(lineno) + " has " +
                        std::to_string(f.size()) + " fields");
    }
    try {
      TrialRecord r;
      r.trial = std::stoul(f[0]);
      for (std::size_t k = 0; k < space.size(); ++k) r.x.push_back(std::stod(f[k + 1]));
      const std::string& status = f[width - 2];
      if (status == "completed") {
        r.status = TrialStatus::Completed;
        r.acc = std::stod(f[width - 3]);
      } else if (status == "failed") {
        r.status = TrialStatus::Failed;
      } else {
        throw FormatError("unknown trial status '" + status + "'");
      }
      r.seed = std::stoull(f[width - 1]);
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw FormatError("ledger line " + std::to_string(lineno) + " is malformed");
    }
  }
  return out;
}

namespace {

double branin(double x1, double x2) {
  constexpr double pi = std::numbers::pi;
  const double b = 5.1 / (4.0 * pi * pi), c = 5.0 / pi, t = 1.0 / (8.0 * pi);
  const double q = x2 - b * x1 * x1 + c * x1 - 6.0;
  return q * q + 10.0 * (1.0 - t) * std::cos(x1) + 10.0;
}

}  // namespace

double branin_score(double x1, double x2) {
  static const double fmin = 0.397887357729738;
  static const double fmax = branin(-5.0, 0.0);
  return (fmax - branin(x1, x2)) / (fmax - fmin);
}

SearchSpace branin_space() { return {{{"x1", -5.0, 10.0, false}, {"x2", 0.0, 15.0, false}}}; }

}  // namespace learnafe::hyperopt
