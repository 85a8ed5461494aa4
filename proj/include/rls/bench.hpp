#ifndef RLS_BENCH_HPP
#define RLS_BENCH_HPP

// Monte-Carlo harness for exact support recovery probabilities.
//
// Every trial owns its random streams: the instance seed is a hash of
// (base seed, sweep-point coordinates, trial number) and the solver seed is a
// hash of the instance seed. Trials can therefore run on any number of
// threads and the aggregated records are bitwise reproducible.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rls/instance.hpp"
#include "rls/rng.hpp"
#include "rls/solvers.hpp"

namespace rls {

enum class SolverKind { Rls, RlsFixed, Rawls, Omp, Oracle };

struct SolverSpec {
  SolverKind kind = SolverKind::Rls;
  Index n0 = 0;  // RlsFixed only
  Index m = 0;   // RlsFixed only

  static SolverSpec rls() { return {SolverKind::Rls}; }
  static SolverSpec rls_fixed(Index n0, Index m) { return {SolverKind::RlsFixed, n0, m}; }
  static SolverSpec rawls() { return {SolverKind::Rawls}; }
  static SolverSpec omp() { return {SolverKind::Omp}; }
  static SolverSpec oracle() { return {SolverKind::Oracle}; }

  std::string tag() const {
    switch (kind) {
      case SolverKind::Rls: return "rls";
      case SolverKind::RlsFixed: return "rls_fixed[n0=" + std::to_string(n0) + ",m=" + std::to_string(m) + "]";
      case SolverKind::Rawls: return "rawls";
      case SolverKind::Omp: return "omp";
      case SolverKind::Oracle: return "oracle";
    }
    return "unknown";
  }

  /// Inverse of tag(): rls, rawls, omp, oracle, rls_fixed[n0=<int>,m=<int>].
  static SolverSpec parse(const std::string& text) {
    if (text == "rls") return rls();
    if (text == "rawls") return rawls();
    if (text == "omp") return omp();
    if (text == "oracle") return oracle();
    long n0 = 0, m = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "rls_fixed[n0=%ld,m=%ld%c", &n0, &m, &tail) == 3 && tail == ']' &&
        text.back() == ']' && n0 >= 1 && m >= 1)
      return rls_fixed(n0, m);
    throw std::invalid_argument("unknown solver '" + text + "'");
  }

  friend bool operator==(const SolverSpec&, const SolverSpec&) = default;
};

/// Largest number of (support, sign) patterns the exhaustive decoder will visit.
inline constexpr double kOracleSearchLimit = 1e6;

inline double oracle_search_space(Index d, Index k) {
  double c = 1.0;
  for (Index i = 0; i < k; ++i) c = c * static_cast<double>(d - i) / static_cast<double>(i + 1);
  return std::round(c) * std::pow(2.0, static_cast<double>(k));
}

struct SweepConfig {
  Ensemble ensemble = Ensemble::gaussian();
  Index d = 64;
  std::vector<Index> n_values;
  std::vector<Index> k_values;
  double sigma = 0.0;
  std::vector<SolverSpec> solvers;
  Index trials = 200;
  std::uint64_t base_seed = 0;
  RlsParams rls_params;
  bool fixed_design = false;   // reuse one design per (N, k) point across trials
  bool record_timing = false;  // wall_seconds stays 0 unless set, keeping CSVs reproducible
  unsigned threads = 1;        // 0 = hardware concurrency

  void validate() const {
    if (d < 1) throw std::invalid_argument("D must be positive");
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be finite and nonnegative");
    if (ensemble.kind == EnsembleKind::ToeplitzGaussian && !(ensemble.rho > 0.0 && ensemble.rho < 1.0))
      throw std::invalid_argument("rho must lie in (0,1)");
    rls_params.validate();
    for (Index n : n_values)
      if (n < 1) throw std::invalid_argument("every N must be at least 1");
    for (Index k : k_values)
      if (k < 1 || k > d) throw std::invalid_argument("every k must satisfy 1 <= k <= D");
    for (const auto& s : solvers) {
      if (s.kind == SolverKind::RlsFixed) {
        if (s.m < 1) throw std::invalid_argument("rls_fixed needs m >= 1");
        for (Index n : n_values)
          if (s.n0 < 1 || s.n0 > n) throw std::invalid_argument(s.tag() + ": n0 exceeds N=" + std::to_string(n));
      }
      if (s.kind == SolverKind::Oracle)
        for (Index k : k_values)
          if (oracle_search_space(d, k) > kOracleSearchLimit)
            throw std::invalid_argument("oracle search space too large at k=" + std::to_string(k));
    }
  }
};

struct ResultRecord {
  Ensemble ensemble;
  Index d = 0;
  Index n = 0;
  Index k = 0;
  double sigma = 0.0;
  SolverSpec solver;
  Index trials = 0;
  Index successes_set = 0;
  Index successes_signed = 0;
  double prob_set = 0.0;
  double prob_signed = 0.0;
  double wall_seconds = 0.0;
  Index degenerate = 0;  // trials aborted by a degenerate peeling step (counted as failures)
};

struct RecoveryMatch {
  bool set_match = false;
  bool signed_match = false;
};

/// Compares an estimate to the true support; order-insensitive, and a length
/// mismatch is simply a failure.
inline RecoveryMatch exact_recovery(const Signal& theta_star, const SignedSupport& estimate) {
  RecoveryMatch r;
  if (estimate.sorted_indices() != theta_star.support) return r;
  r.set_match = true;
  r.signed_match = std::all_of(estimate.entries.begin(), estimate.entries.end(), [&](const SignedIndex& e) {
    return theta_star.values[static_cast<std::size_t>(e.index)] == e.sign;
  });
  return r;
}

/// Exhaustive decoder: the ternary theta with exactly k nonzeros minimizing
/// ||X theta - y||, ties resolved to the lexicographically smallest theta.
inline SignedSupport brute_force_oracle(const Matrix& x, const Vector& y, Index k) {
  const Index d = x.cols();
  if (k < 0 || k > d) throw std::invalid_argument("sparsity k must satisfy 0 <= k <= D");
  if (y.size() != x.rows()) throw std::invalid_argument("observation length does not match design rows");
  if (oracle_search_space(d, k) > kOracleSearchLimit) throw std::invalid_argument("oracle search space exceeds 1e6 patterns");

  std::vector<Index> combo(static_cast<std::size_t>(k));
  std::iota(combo.begin(), combo.end(), Index{0});
  std::vector<int> best_theta;
  double best_res = std::numeric_limits<double>::infinity();
  std::vector<int> theta(static_cast<std::size_t>(d), 0);
  Vector r(y.size());
  const std::uint64_t patterns = std::uint64_t{1} << k;

  while (true) {
    for (std::uint64_t bits = 0; bits < patterns; ++bits) {
      r = -y;
      std::fill(theta.begin(), theta.end(), 0);
      for (Index i = 0; i < k; ++i) {
        const int s = (bits >> i) & 1U ? 1 : -1;
        theta[static_cast<std::size_t>(combo[static_cast<std::size_t>(i)])] = s;
        r += static_cast<double>(s) * x.col(combo[static_cast<std::size_t>(i)]);
      }
      const double res = r.squaredNorm();
      if (res < best_res || (res == best_res && theta < best_theta)) {
        best_res = res;
        best_theta = theta;
      }
    }
    // next k-combination in lexicographic order
    Index i = k - 1;
    while (i >= 0 && combo[static_cast<std::size_t>(i)] == d - k + i) --i;
    if (i < 0) break;
    ++combo[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) combo[static_cast<std::size_t>(j)] = combo[static_cast<std::size_t>(j - 1)] + 1;
  }

  SignedSupport out;
  for (Index j = 0; j < d; ++j)
    if (best_theta[static_cast<std::size_t>(j)] != 0) out.entries.push_back({j, best_theta[static_cast<std::size_t>(j)]});
  return out;
}

/// One grid point of a sweep.
struct SweepPoint {
  Ensemble ensemble;
  Index d = 0;
  Index n = 0;
  Index k = 0;
  double sigma = 0.0;
  SolverSpec solver;
  Index trials = 0;
  std::uint64_t base_seed = 0;
  RlsParams rls_params;
  bool fixed_design = false;
};

struct TrialSeeds {
  std::uint64_t instance = 0;
  std::uint64_t design = 0;  // equals `instance` unless the design is fixed across trials
  std::uint64_t solver = 0;
};

/// Seeds depend on the problem coordinates and the trial only, never on the
/// solver, so all solvers at a grid point see the same instances.
inline TrialSeeds trial_seeds(const SweepPoint& p, Index t) {
  TrialSeeds s;
  const auto ens = static_cast<std::uint64_t>(p.ensemble.kind);
  s.instance = derive_seed(p.base_seed, {ens, seed_key(p.ensemble.rho), static_cast<std::uint64_t>(p.d),
                                         static_cast<std::uint64_t>(p.n), static_cast<std::uint64_t>(p.k),
                                         seed_key(p.sigma), static_cast<std::uint64_t>(t)});
  s.design = p.fixed_design ? derive_seed(p.base_seed, {ens, seed_key(p.ensemble.rho), static_cast<std::uint64_t>(p.d),
                                                        static_cast<std::uint64_t>(p.n), 0xde5167ULL})
                            : s.instance;
  s.solver = derive_seed(s.instance, {0x50a1e5ULL});
  return s;
}

inline ProblemInstance trial_instance(const SweepPoint& p, Index t) {
  const TrialSeeds s = trial_seeds(p, t);
  if (!p.fixed_design) return gen_instance(p.ensemble, p.n, p.d, p.k, p.sigma, s.instance);
  Stream design_rng = make_stream(s.design);
  Stream rng = make_stream(s.instance);
  ProblemInstance inst;
  inst.x = gen_design(p.ensemble, p.n, p.d, design_rng);
  inst.theta_star = gen_signal(p.d, p.k, rng);
  inst.y = gen_observation(inst.x, inst.theta_star, p.sigma, rng);
  inst.sigma = p.sigma;
  inst.seed = s.instance;
  return inst;
}

inline SignedSupport run_solver(const SolverSpec& spec, const RlsParams& base, const Matrix& x, const Vector& y,
                                Index k, std::uint64_t seed) {
  switch (spec.kind) {
    case SolverKind::Rls: {
      RlsParams p = base;
      p.seed = seed;
      return solve_rls(x, y, k, p);
    }
    case SolverKind::RlsFixed: return solve_rls_fixed(x, y, k, spec.n0, spec.m, seed);
    case SolverKind::Rawls: return solve_rawls(x, y, k, base.m, seed);
    case SolverKind::Omp: return solve_omp(x, y, k);
    case SolverKind::Oracle: return brute_force_oracle(x, y, k);
  }
  throw std::invalid_argument("unknown solver");
}

struct TrialOutcome {
  RecoveryMatch match;
  bool degenerate = false;
  double seconds = 0.0;
};

inline TrialOutcome run_trial(const SweepPoint& p, Index t) {
  const ProblemInstance inst = trial_instance(p, t);
  TrialOutcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    const SignedSupport est = run_solver(p.solver, p.rls_params, inst.x.entries, inst.y, p.k, trial_seeds(p, t).solver);
    out.match = exact_recovery(inst.theta_star, est);
  } catch (const DegenerateStepError&) {
    out.degenerate = true;
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

namespace detail {

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Results are
/// written by index, so scheduling never affects them.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline ResultRecord aggregate(const SweepPoint& p, const TrialOutcome* outcomes, bool record_timing) {
  ResultRecord r;
  r.ensemble = p.ensemble;
  r.d = p.d;
  r.n = p.n;
  r.k = p.k;
  r.sigma = p.sigma;
  r.solver = p.solver;
  r.trials = p.trials;
  double seconds = 0.0;
  for (Index t = 0; t < p.trials; ++t) {
    const auto& o = outcomes[t];
    r.successes_set += o.match.set_match;
    r.successes_signed += o.match.signed_match;
    r.degenerate += o.degenerate;
    seconds += o.seconds;
  }
  r.prob_set = static_cast<double>(r.successes_set) / static_cast<double>(p.trials);
  r.prob_signed = static_cast<double>(r.successes_signed) / static_cast<double>(p.trials);
  r.wall_seconds = record_timing ? seconds : 0.0;
  return r;
}

}  // namespace detail

/// Per-trial outcomes of one point, in trial order.
inline std::vector<TrialOutcome> run_point_trials(const SweepPoint& p, unsigned threads = 1) {
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(p.trials));
  detail::parallel_for(outcomes.size(), threads, [&](std::size_t t) { outcomes[t] = run_trial(p, static_cast<Index>(t)); });
  return outcomes;
}

inline ResultRecord run_point(const SweepPoint& p, unsigned threads = 1, bool record_timing = false) {
  if (p.trials < 1) throw std::invalid_argument("trials must be at least 1");
  const auto outcomes = run_point_trials(p, threads);
  return detail::aggregate(p, outcomes.data(), record_timing);
}

/// Grid points in record order: N outermost, then k, then solver.
inline std::vector<SweepPoint> sweep_points(const SweepConfig& c) {
  std::vector<SweepPoint> pts;
  for (Index n : c.n_values)
    for (Index k : c.k_values)
      for (const auto& s : c.solvers)
        pts.push_back({c.ensemble, c.d, n, k, c.sigma, s, c.trials, c.base_seed, c.rls_params, c.fixed_design});
  return pts;
}

/// Runs the whole grid with trials spread over `config.threads` workers.
inline std::vector<ResultRecord> run_sweep(const SweepConfig& config) {
  config.validate();
  const auto pts = sweep_points(config);
  const std::size_t per = static_cast<std::size_t>(config.trials);
  std::vector<TrialOutcome> outcomes(pts.size() * per);
  detail::parallel_for(outcomes.size(), config.threads, [&](std::size_t i) {
    outcomes[i] = run_trial(pts[i / per], static_cast<Index>(i % per));
  });
  std::vector<ResultRecord> records;
  records.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    records.push_back(detail::aggregate(pts[i], outcomes.data() + i * per, config.record_timing));
  return records;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

inline constexpr const char* kResultsCsvHeader =
    "ensemble,D,N,k,sigma,solver,trials,successes_set,successes_signed,prob_set,prob_signed,wall_seconds";

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_results_csv(std::ostream& os, const std::vector<ResultRecord>& records, bool header = true) {
  if (header) os << kResultsCsvHeader << '\n';
  for (const auto& r : records) {
    os << ensemble_tag(r.ensemble) << ',' << r.d << ',' << r.n << ',' << r.k << ',' << format_double(r.sigma) << ','
       << csv_field(r.solver.tag()) << ',' << r.trials << ',' << r.successes_set << ',' << r.successes_signed << ','
       << format_double(r.prob_set) << ',' << format_double(r.prob_signed) << ',' << format_double(r.wall_seconds)
       << '\n';
  }
}

enum class PlotAxis { N, K, SubsetFraction };

/// Two-column (x, prob_set) series, one per solver and sigma. Fixed-size RLS
/// records are grouped by m so that an n0/N sweep forms one curve per m.
inline std::map<std::string, std::vector<std::pair<double, double>>> plot_series(const std::vector<ResultRecord>& records,
                                                                                 PlotAxis axis) {
  std::map<std::string, std::vector<std::pair<double, double>>> out;
  for (const auto& r : records) {
    std::string key = r.solver.kind == SolverKind::RlsFixed ? "rls_fixed_m" + std::to_string(r.solver.m) : r.solver.tag();
    key += "_sigma" + format_double(r.sigma);
    double xval = 0.0;
    switch (axis) {
      case PlotAxis::N: xval = static_cast<double>(r.n); break;
      case PlotAxis::K: xval = static_cast<double>(r.k); break;
      case PlotAxis::SubsetFraction:
        xval = r.solver.kind == SolverKind::RlsFixed ? static_cast<double>(r.solver.n0) / static_cast<double>(r.n) : 1.0;
        break;
    }
    out[key].emplace_back(xval, r.prob_set);
  }
  for (auto& [_, pts] : out) std::stable_sort(pts.begin(), pts.end());
  return out;
}

}  // namespace rls

#endif
