#ifndef RLS_LINALG_HPP
#define RLS_LINALG_HPP

// Minimum-norm least squares and the Moore-Penrose pseudo-inverse.
//
// The SVD routines are the reference path. MinNormSolver is the kernel the
// peeling solvers call thousands of times per trial: a Householder QR of the
// (possibly transposed) system, falling back to the SVD path whenever the
// triangular factor looks rank deficient.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include <Eigen/Dense>

namespace rls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct LstSqSolution {
  Vector theta_hat;
  Index rank = 0;
  double residual_norm = 0.0;
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + " has non-finite entries");
}

inline void require_tol_factor(double f) {
  if (!(f > 0.0) || !std::isfinite(f)) throw std::invalid_argument("sv_tol_factor must be positive");
}

/// Singular values at or below max(n,d) * sigma_max * eps * factor count as zero.
inline double sv_cutoff(Index n, Index d, double sigma_max, double factor) {
  return static_cast<double>(std::max(n, d)) * sigma_max * std::numeric_limits<double>::epsilon() * factor;
}

}  // namespace detail

inline LstSqSolution min_norm_least_squares(const Eigen::Ref<const Matrix>& a,
                                            const Eigen::Ref<const Vector>& b,
                                            double sv_tol_factor = 1.0) {
  if (b.size() != a.rows()) throw std::invalid_argument("right-hand side length does not match rows");
  detail::require_tol_factor(sv_tol_factor);
  detail::require_finite(a, "matrix");
  detail::require_finite(b, "right-hand side");

  LstSqSolution out;
  out.theta_hat = Vector::Zero(a.cols());
  if (a.size() == 0) {
    out.residual_norm = b.norm();
    return out;
  }
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cut = detail::sv_cutoff(a.rows(), a.cols(), s.size() ? s(0) : 0.0, sv_tol_factor);
  Vector coeff = svd.matrixU().transpose() * b;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) {
      coeff(i) /= s(i);
      ++out.rank;
    } else {
      coeff(i) = 0.0;
    }
  }
  out.theta_hat = svd.matrixV() * coeff;
  out.residual_norm = (a * out.theta_hat - b).norm();
  return out;
}

inline Matrix pseudo_inverse(const Eigen::Ref<const Matrix>& a, double sv_tol_factor = 1.0) {
  detail::require_tol_factor(sv_tol_factor);
  detail::require_finite(a, "matrix");
  if (a.size() == 0) return Matrix::Zero(a.cols(), a.rows());
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cut = detail::sv_cutoff(a.rows(), a.cols(), s(0), sv_tol_factor);
  Vector inv = Vector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Reusable QR workspace for repeated minimum-norm solves on row subsets.
///
/// Wide systems (rows < cols) factor A^T = QR and return Q R^{-T} b, which is
/// the row-space solution; tall or square systems factor A = QR and return
/// R^{-1} Q^T b. Either way the answer is A^+ b when A has full rank. If the
/// smallest |R_ii| falls below rank_guard * max |R_ii|, the SVD path decides.
class MinNormSolver {
 public:
  static constexpr double kDefaultRankGuard = 1.5e-8;

  explicit MinNormSolver(double sv_tol_factor = 1.0, double rank_guard = kDefaultRankGuard)
      : tol_factor_(sv_tol_factor), rank_guard_(rank_guard) {
    detail::require_tol_factor(sv_tol_factor);
  }

  /// Solves on the rows of (x, y) listed in `rows`.
  const Vector& solve_rows(const Matrix& x, const Vector& y, std::span<const Index> rows) {
    const Index n = static_cast<Index>(rows.size());
    const Index d = x.cols();
    b_.resize(n);
    for (Index i = 0; i < n; ++i) b_(i) = y(rows[static_cast<std::size_t>(i)]);
    if (n < d) {
      work_.resize(d, n);
      for (Index i = 0; i < n; ++i) work_.col(i) = x.row(rows[static_cast<std::size_t>(i)]).transpose();
    } else {
      work_.resize(n, d);
      for (Index i = 0; i < n; ++i) work_.row(i) = x.row(rows[static_cast<std::size_t>(i)]);
    }
    return factor_and_solve(n < d);
  }

  const Vector& solve(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Vector>& b) {
    if (b.size() != a.rows()) throw std::invalid_argument("right-hand side length does not match rows");
    b_ = b;
    const bool wide = a.rows() < a.cols();
    if (wide) work_ = a.transpose();
    else work_ = a;
    return factor_and_solve(wide);
  }

  /// Number of solves that were routed to the SVD fallback.
  long fallbacks() const { return fallbacks_; }

 private:
  const Vector& factor_and_solve(bool wide) {
    const Index n = wide ? work_.cols() : work_.rows();
    const Index d = wide ? work_.rows() : work_.cols();
    if (!work_.allFinite() || !b_.allFinite()) throw std::invalid_argument("system has non-finite entries");
    theta_.setZero(d);
    const Index r = std::min(n, d);
    if (r == 0) return theta_;

    qr_.compute(work_);
    const auto diag = qr_.matrixQR().diagonal().head(r).cwiseAbs();
    if (!(diag.minCoeff() > rank_guard_ * diag.maxCoeff())) return fallback(wide);

    const auto upper = qr_.matrixQR().topLeftCorner(r, r).template triangularView<Eigen::Upper>();
    if (wide) {
      theta_.head(r) = b_;
      upper.transpose().solveInPlace(theta_.head(r));
      theta_.applyOnTheLeft(qr_.householderQ());
    } else {
      b_.applyOnTheLeft(qr_.householderQ().transpose());
      theta_ = b_.head(r);
      upper.solveInPlace(theta_);
    }
    return theta_;
  }

  const Vector& fallback(bool wide) {
    ++fallbacks_;
    if (wide) {
      Matrix a = work_.transpose();
      theta_ = min_norm_least_squares(a, b_, tol_factor_).theta_hat;
    } else {
      theta_ = min_norm_least_squares(work_, b_, tol_factor_).theta_hat;
    }
    return theta_;
  }

  double tol_factor_;
  double rank_guard_;
  long fallbacks_ = 0;
  Matrix work_;
  Vector b_;
  Vector theta_;
  Eigen::HouseholderQR<Matrix> qr_;
};

}  // namespace rls

#endif
