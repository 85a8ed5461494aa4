#ifndef RLS_SOLVERS_HPP
#define RLS_SOLVERS_HPP

// Greedy peeling solvers for ternary support recovery:
//
//   solve_rls        averaged least squares over random row subsets at several
//                    subset sizes, majority vote per step, OMP flip for the last
//                    coordinate
//   solve_rls_fixed  one subset size, no vote, OMP flip kept
//   solve_rawls      one subset size floor(0.6 min(D_k, N)), no vote, no flip
//   solve_omp        classical orthogonal matching pursuit
//
// Every peel fixes one (column, sign), drops the column and subtracts
// sign * column from the observation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rls/linalg.hpp"
#include "rls/rng.hpp"

namespace rls {

/// Raised when the averaged estimate is identically zero (only possible when
/// the current observation is zero) and no coordinate can be nominated.
class DegenerateStepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SignedIndex {
  Index index = 0;
  int sign = 1;

  friend bool operator==(const SignedIndex&, const SignedIndex&) = default;
};

/// Solver output in selection order.
struct SignedSupport {
  std::vector<SignedIndex> entries;

  std::size_t size() const { return entries.size(); }

  std::vector<Index> sorted_indices() const {
    std::vector<Index> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.index);
    std::sort(out.begin(), out.end());
    return out;
  }

  friend bool operator==(const SignedSupport&, const SignedSupport&) = default;
};

struct Candidate {
  Index index = 0;
  int sign = 1;
  double score = 0.0;
};

enum class VoteMode {
  PerStep,    // vote over subset sizes inside every peeling step (default)
  WholePeel,  // one complete peel per subset size, then vote over the resulting sets
};

struct RlsParams {
  Index m = 100;
  double frac_lo = 0.85;
  double frac_hi = 0.9;
  Index votes = 5;
  std::uint64_t seed = 0;
  VoteMode vote_mode = VoteMode::PerStep;

  void validate() const {
    if (!(frac_lo > 0.0 && frac_lo <= frac_hi && frac_hi <= 1.0))
      throw std::invalid_argument("subset fractions must satisfy 0 < frac_lo <= frac_hi <= 1");
    if (m < 1) throw std::invalid_argument("m must be at least 1");
    if (votes < 1) throw std::invalid_argument("votes must be at least 1");
  }
};

namespace detail {

inline Index argmax_abs(const Vector& v) {
  Index best = 0;
  double best_val = -1.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best_val) {
      best_val = a;
      best = i;
    }
  }
  return best;
}

/// Active columns of the design together with their original column numbers.
class ActiveSystem {
 public:
  ActiveSystem(const Matrix& x, const Vector& y) : x_(x), y_(y), original_(static_cast<std::size_t>(x.cols())) {
    if (y.size() != x.rows()) throw std::invalid_argument("observation length does not match design rows");
    std::iota(original_.begin(), original_.end(), Index{0});
  }

  const Matrix& x() const { return x_; }
  const Vector& y() const { return y_; }
  Index cols() const { return x_.cols(); }
  Index rows() const { return x_.rows(); }
  Index original(Index active) const { return original_[static_cast<std::size_t>(active)]; }

  /// Fixes (column, sign): y <- y - sign * column, then drops the column.
  SignedIndex peel(Index active, int sign) {
    y_ -= static_cast<double>(sign) * x_.col(active);
    const SignedIndex out{original(active), sign};
    const Index tail = x_.cols() - active - 1;
    if (tail > 0) x_.middleCols(active, tail) = x_.rightCols(tail).eval();
    x_.conservativeResize(Eigen::NoChange, x_.cols() - 1);
    original_.erase(original_.begin() + active);
    return out;
  }

 private:
  Matrix x_;
  Vector y_;
  std::vector<Index> original_;
};

inline void require_k(Index k, Index d) {
  if (k < 1 || k > d) throw std::invalid_argument("sparsity k must satisfy 1 <= k <= D");
}

}  // namespace detail

/// Averages the minimum-norm least-squares solutions of `m` random n0-row
/// subsystems and nominates the coordinate of largest magnitude.
inline Candidate peel_step(const Matrix& x_active, const Vector& y_cur, Index n0, Index m, Stream& rng) {
  const Index n = x_active.rows();
  if (y_cur.size() != n) throw std::invalid_argument("observation length does not match design rows");
  if (n0 < 1 || n0 > n) throw std::invalid_argument("subset size n0 must satisfy 1 <= n0 <= N");
  if (x_active.cols() < 1) throw std::invalid_argument("no active columns");
  if (m < 1) throw std::invalid_argument("m must be at least 1");

  std::vector<Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Index{0});
  MinNormSolver solver;
  Vector sum = Vector::Zero(x_active.cols());
  for (Index i = 0; i < m; ++i) {
    // Partial Fisher-Yates: the first n0 slots become a uniform n0-subset.
    for (Index j = 0; j < n0; ++j) {
      std::uniform_int_distribution<Index> pick(j, n - 1);
      std::swap(rows[static_cast<std::size_t>(j)], rows[static_cast<std::size_t>(pick(rng))]);
    }
    sum += solver.solve_rows(x_active, y_cur, std::span<const Index>(rows.data(), static_cast<std::size_t>(n0)));
  }
  const Vector mean = sum / static_cast<double>(m);
  const Index best = detail::argmax_abs(mean);
  const double score = std::abs(mean(best));
  if (!(score > 0.0)) throw DegenerateStepError("averaged least-squares estimate is identically zero");
  return {best, mean(best) > 0.0 ? 1 : -1, score};
}

/// `votes` subset sizes evenly spaced (inclusive) over
/// [frac_lo * min(d_k, n), frac_hi * min(d_k, n)], rounded to nearest, clamped to [1, n].
inline std::vector<Index> subset_sizes(Index d_k, Index n, double frac_lo, double frac_hi, Index votes) {
  if (d_k < 1 || n < 1) throw std::invalid_argument("subset_sizes needs d_k >= 1 and n >= 1");
  if (votes < 1) throw std::invalid_argument("votes must be at least 1");
  if (!(frac_lo > 0.0 && frac_lo <= frac_hi && frac_hi <= 1.0))
    throw std::invalid_argument("subset fractions must satisfy 0 < frac_lo <= frac_hi <= 1");
  const double base = static_cast<double>(std::min(d_k, n));
  const double lo = frac_lo * base;
  const double hi = frac_hi * base;
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(votes));
  for (Index i = 0; i < votes; ++i) {
    const double v = votes == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(votes - 1);
    out.push_back(std::clamp(static_cast<Index>(std::lround(v)), Index{1}, n));
  }
  return out;
}

/// Plurality over candidate indices. Ties among the most frequent indices are
/// broken uniformly at random, enumerated in order of first appearance. The
/// sign is the majority sign of the winner's candidates; a sign tie goes to
/// the highest-scoring candidate.
inline SignedIndex majority_vote(std::span<const Candidate> candidates, Stream& rng) {
  if (candidates.empty()) throw std::invalid_argument("majority_vote needs at least one candidate");
  std::vector<Index> order;
  std::vector<int> counts;
  for (const auto& c : candidates) {
    auto it = std::find(order.begin(), order.end(), c.index);
    if (it == order.end()) {
      order.push_back(c.index);
      counts.push_back(1);
    } else {
      ++counts[static_cast<std::size_t>(it - order.begin())];
    }
  }
  const int top = *std::max_element(counts.begin(), counts.end());
  std::vector<Index> leaders;
  for (std::size_t i = 0; i < order.size(); ++i)
    if (counts[i] == top) leaders.push_back(order[i]);
  Index winner = leaders.front();
  if (leaders.size() > 1) {
    std::uniform_int_distribution<std::size_t> pick(0, leaders.size() - 1);
    winner = leaders[pick(rng)];
  }

  int balance = 0;
  const Candidate* strongest = nullptr;
  for (const auto& c : candidates) {
    if (c.index != winner) continue;
    balance += c.sign;
    if (!strongest || c.score > strongest->score) strongest = &c;
  }
  const int sign = balance > 0 ? 1 : balance < 0 ? -1 : strongest->sign;
  return {winner, sign};
}

/// Column with the largest |<y, column>|; lowest index on exact ties.
inline Candidate omp_single_step(const Matrix& x_active, const Vector& y_cur) {
  if (x_active.cols() < 1) throw std::invalid_argument("no active columns");
  if (y_cur.size() != x_active.rows()) throw std::invalid_argument("observation length does not match design rows");
  const Vector corr = x_active.transpose() * y_cur;
  const Index best = detail::argmax_abs(corr);
  return {best, corr(best) >= 0.0 ? 1 : -1, std::abs(corr(best))};
}

namespace detail {

// One peeling pass with a caller-chosen nominator per step, then the OMP flip.
template <typename Nominate>
SignedSupport peel_then_flip(const Matrix& x, const Vector& y, Index k, Nominate&& nominate) {
  ActiveSystem sys(x, y);
  SignedSupport out;
  out.entries.reserve(static_cast<std::size_t>(k));
  for (Index step = 0; step + 1 < k; ++step) {
    const SignedIndex pick = nominate(sys);
    out.entries.push_back(sys.peel(pick.index, pick.sign));
  }
  const Candidate last = omp_single_step(sys.x(), sys.y());
  out.entries.push_back({sys.original(last.index), last.sign});
  return out;
}

inline SignedSupport rls_per_step(const Matrix& x, const Vector& y, Index k, const RlsParams& p, Stream& rng) {
  return peel_then_flip(x, y, k, [&](const ActiveSystem& sys) {
    const auto sizes = subset_sizes(sys.cols(), sys.rows(), p.frac_lo, p.frac_hi, p.votes);
    std::vector<Candidate> cands;
    cands.reserve(sizes.size());
    for (Index n0 : sizes) cands.push_back(peel_step(sys.x(), sys.y(), n0, p.m, rng));
    return majority_vote(cands, rng);
  });
}

inline SignedSupport rls_whole_peel(const Matrix& x, const Vector& y, Index k, const RlsParams& p, Stream& rng) {
  std::vector<SignedSupport> runs;
  for (Index v = 0; v < p.votes; ++v) {
    runs.push_back(peel_then_flip(x, y, k, [&](const ActiveSystem& sys) {
      const auto sizes = subset_sizes(sys.cols(), sys.rows(), p.frac_lo, p.frac_hi, p.votes);
      const Candidate c = peel_step(sys.x(), sys.y(), sizes[static_cast<std::size_t>(v)], p.m, rng);
      return SignedIndex{c.index, c.sign};
    }));
  }
  std::vector<std::vector<Index>> sets;
  std::vector<int> counts;
  std::vector<std::size_t> first_run;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    auto s = runs[r].sorted_indices();
    auto it = std::find(sets.begin(), sets.end(), s);
    if (it == sets.end()) {
      sets.push_back(std::move(s));
      counts.push_back(1);
      first_run.push_back(r);
    } else {
      ++counts[static_cast<std::size_t>(it - sets.begin())];
    }
  }
  const int top = *std::max_element(counts.begin(), counts.end());
  std::vector<std::size_t> leaders;
  for (std::size_t i = 0; i < sets.size(); ++i)
    if (counts[i] == top) leaders.push_back(i);
  std::size_t winner = leaders.front();
  if (leaders.size() > 1) {
    std::uniform_int_distribution<std::size_t> pick(0, leaders.size() - 1);
    winner = leaders[pick(rng)];
  }
  return runs[first_run[winner]];
}

}  // namespace detail

/// Refined least squares: k-1 voted peeling steps and an OMP flip for the last
/// coordinate. All randomness comes from `params.seed`.
inline SignedSupport solve_rls(const Matrix& x, const Vector& y, Index k, const RlsParams& params) {
  params.validate();
  detail::require_k(k, x.cols());
  if (y.size() != x.rows()) throw std::invalid_argument("observation length does not match design rows");
  Stream rng = make_stream(params.seed);
  return params.vote_mode == VoteMode::PerStep ? detail::rls_per_step(x, y, k, params, rng)
                                               : detail::rls_whole_peel(x, y, k, params, rng);
}

/// Refined least squares at a single fixed subset size `n0` with no vote.
inline SignedSupport solve_rls_fixed(const Matrix& x, const Vector& y, Index k, Index n0, Index m,
                                     std::uint64_t seed) {
  detail::require_k(k, x.cols());
  if (n0 < 1 || n0 > x.rows()) throw std::invalid_argument("subset size n0 must satisfy 1 <= n0 <= N");
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  Stream rng = make_stream(seed);
  return detail::peel_then_flip(x, y, k, [&](const detail::ActiveSystem& sys) {
    const Candidate c = peel_step(sys.x(), sys.y(), n0, m, rng);
    return SignedIndex{c.index, c.sign};
  });
}

/// Subset size RAWLS uses with `d_k` active columns and `n` rows.
inline Index rawls_subset_size(Index d_k, Index n) {
  return std::max<Index>(1, static_cast<Index>(std::floor(0.6 * static_cast<double>(std::min(d_k, n)))));
}

/// Randomly aggregated least squares: k averaged-least-squares peels at size
/// floor(0.6 min(D_k, N)), no vote and no OMP flip.
inline SignedSupport solve_rawls(const Matrix& x, const Vector& y, Index k, Index m, std::uint64_t seed) {
  detail::require_k(k, x.cols());
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  detail::ActiveSystem sys(x, y);
  Stream rng = make_stream(seed);
  SignedSupport out;
  for (Index step = 0; step < k; ++step) {
    const Candidate c = peel_step(sys.x(), sys.y(), rawls_subset_size(sys.cols(), sys.rows()), m, rng);
    out.entries.push_back(sys.peel(c.index, c.sign));
  }
  return out;
}

/// Orthogonal matching pursuit with a least-squares refit after every selection.
/// Signs come from the final refit coefficients.
inline SignedSupport solve_omp(const Matrix& x, const Vector& y, Index k) {
  detail::require_k(k, x.cols());
  if (y.size() != x.rows()) throw std::invalid_argument("observation length does not match design rows");
  std::vector<Index> chosen;
  std::vector<bool> used(static_cast<std::size_t>(x.cols()), false);
  Vector residual = y;
  Vector coeff;
  Matrix sub(x.rows(), 0);
  MinNormSolver solver;
  for (Index it = 0; it < k; ++it) {
    const Vector corr = x.transpose() * residual;
    Index best = -1;
    double best_val = -1.0;
    for (Index j = 0; j < corr.size(); ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      if (std::abs(corr(j)) > best_val) {
        best_val = std::abs(corr(j));
        best = j;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    chosen.push_back(best);
    sub.conservativeResize(Eigen::NoChange, sub.cols() + 1);
    sub.col(sub.cols() - 1) = x.col(best);
    coeff = solver.solve(sub, y);
    residual = y - sub * coeff;
  }
  SignedSupport out;
  for (std::size_t i = 0; i < chosen.size(); ++i)
    out.entries.push_back({chosen[i], coeff(static_cast<Index>(i)) >= 0.0 ? 1 : -1});
  return out;
}

}  // namespace rls

#endif
