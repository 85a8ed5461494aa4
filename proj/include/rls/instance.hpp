#ifndef RLS_INSTANCE_HPP
#define RLS_INSTANCE_HPP

// Problem instances y = X theta* + noise with ternary theta*, the three design
// ensembles used in the experiments, and the plain-text instance file format.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iosfwd>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rls/rng.hpp"

namespace rls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class EnsembleKind { GaussianIID, ToeplitzGaussian, Bernoulli };

struct Ensemble {
  EnsembleKind kind = EnsembleKind::GaussianIID;
  double rho = 0.0;  // only meaningful for ToeplitzGaussian

  static Ensemble gaussian() { return {EnsembleKind::GaussianIID, 0.0}; }
  static Ensemble toeplitz(double rho) { return {EnsembleKind::ToeplitzGaussian, rho}; }
  static Ensemble bernoulli() { return {EnsembleKind::Bernoulli, 0.0}; }

  friend bool operator==(const Ensemble&, const Ensemble&) = default;
};

/// Short tag used in CSV output and instance files: gaussian, toeplitz, bernoulli.
inline std::string ensemble_tag(const Ensemble& e) {
  switch (e.kind) {
    case EnsembleKind::GaussianIID: return "gaussian";
    case EnsembleKind::ToeplitzGaussian: return "toeplitz";
    case EnsembleKind::Bernoulli: return "bernoulli";
  }
  return "unknown";
}

inline EnsembleKind parse_ensemble_kind(std::string_view tag) {
  if (tag == "gaussian") return EnsembleKind::GaussianIID;
  if (tag == "toeplitz") return EnsembleKind::ToeplitzGaussian;
  if (tag == "bernoulli") return EnsembleKind::Bernoulli;
  throw std::invalid_argument("unknown ensemble '" + std::string(tag) + "'");
}

struct DesignMatrix {
  Matrix entries;
  Ensemble ensemble;

  Index rows() const { return entries.rows(); }
  Index cols() const { return entries.cols(); }
};

/// Ternary signal. `support` is sorted and lists exactly the nonzero positions.
struct Signal {
  std::vector<int> values;
  std::vector<Index> support;

  Index size() const { return static_cast<Index>(values.size()); }
  Index sparsity() const { return static_cast<Index>(support.size()); }

  Vector as_vector() const {
    Vector v(size());
    for (Index i = 0; i < size(); ++i) v(i) = values[static_cast<std::size_t>(i)];
    return v;
  }

  /// Builds a signal from raw ternary values; throws if any entry is outside {-1,0,1}.
  static Signal from_values(std::vector<int> values) {
    Signal s;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] < -1 || values[i] > 1)
        throw std::invalid_argument("signal entries must be in {-1,0,1}");
      if (values[i] != 0) s.support.push_back(static_cast<Index>(i));
    }
    s.values = std::move(values);
    return s;
  }
};

struct ProblemInstance {
  DesignMatrix x;
  Signal theta_star;
  Vector y;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  Index n() const { return x.rows(); }
  Index d() const { return x.cols(); }
  Index k() const { return theta_star.sparsity(); }
};

namespace detail {

inline void require_dims(Index n, Index d) {
  if (n < 1 || d < 1) throw std::invalid_argument("design matrix dimensions must be positive");
}

// Row-major fill order keeps the draw sequence independent of storage order.
inline Matrix standard_normal(Index n, Index d, Stream& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) z(i, j) = normal(rng);
  return z;
}

}  // namespace detail

inline DesignMatrix gen_gaussian_design(Index n, Index d, Stream& rng) {
  detail::require_dims(n, d);
  return {detail::standard_normal(n, d, rng), Ensemble::gaussian()};
}

/// Covariance rho^|i-j| used for correlated rows.
inline Matrix toeplitz_covariance(Index d, double rho) {
  Matrix sigma(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) sigma(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
  return sigma;
}

/// Rows are i.i.d. N(0, Sigma) with Sigma_ij = rho^|i-j|, obtained as z L^T with
/// Sigma = L L^T.
inline DesignMatrix gen_toeplitz_design(Index n, Index d, double rho, Stream& rng) {
  detail::require_dims(n, d);
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (0,1)");
  Eigen::LLT<Matrix> llt(toeplitz_covariance(d, rho));
  if (llt.info() != Eigen::Success) throw std::runtime_error("Toeplitz covariance is not positive definite");
  Matrix z = detail::standard_normal(n, d, rng);
  Matrix lower = llt.matrixL();
  return {z * lower.transpose(), Ensemble::toeplitz(rho)};
}

inline DesignMatrix gen_bernoulli_design(Index n, Index d, Stream& rng) {
  detail::require_dims(n, d);
  Matrix b(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) b(i, j) = random_sign(rng);
  return {std::move(b), Ensemble::bernoulli()};
}

inline DesignMatrix gen_design(const Ensemble& e, Index n, Index d, Stream& rng) {
  switch (e.kind) {
    case EnsembleKind::GaussianIID: return gen_gaussian_design(n, d, rng);
    case EnsembleKind::ToeplitzGaussian: return gen_toeplitz_design(n, d, e.rho, rng);
    case EnsembleKind::Bernoulli: return gen_bernoulli_design(n, d, rng);
  }
  throw std::invalid_argument("unknown ensemble");
}

/// Uniform k-subset support, independent fair signs on it.
inline Signal gen_signal(Index d, Index k, Stream& rng) {
  if (d < 0 || k < 0) throw std::invalid_argument("negative signal size");
  if (k > d) throw std::invalid_argument("sparsity k exceeds dimension D");
  std::vector<Index> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, d - 1);
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
  }
  Signal s;
  s.values.assign(static_cast<std::size_t>(d), 0);
  s.support.assign(perm.begin(), perm.begin() + k);
  std::sort(s.support.begin(), s.support.end());
  for (Index idx : s.support) s.values[static_cast<std::size_t>(idx)] = random_sign(rng);
  return s;
}

inline Vector gen_observation(const DesignMatrix& x, const Signal& theta, double sigma, Stream& rng) {
  if (theta.size() != x.cols()) throw std::invalid_argument("signal length does not match design columns");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be a finite nonnegative number");
  Vector y = x.entries * theta.as_vector();
  if (sigma > 0.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < y.size(); ++i) y(i) += sigma * normal(rng);
  }
  return y;
}

/// Draws design, signal and noise from one stream, in that order.
inline ProblemInstance gen_instance(const Ensemble& e, Index n, Index d, Index k, double sigma,
                                    std::uint64_t seed) {
  Stream rng = make_stream(seed);
  ProblemInstance inst;
  inst.x = gen_design(e, n, d, rng);
  inst.theta_star = gen_signal(d, k, rng);
  inst.y = gen_observation(inst.x, inst.theta_star, sigma, rng);
  inst.sigma = sigma;
  inst.seed = seed;
  return inst;
}

// ---------------------------------------------------------------------------
// Instance files
//
//   # ensemble = gaussian
//   # rho = 0.29999999999999999        (toeplitz only)
//   # N = 50
//   # D = 64
//   # k = 30
//   # sigma = 0.5
//   # seed = 7
//   <N comma-separated rows of X>
//   <blank>
//   <y, comma-separated>
//   <blank>
//   <theta*, comma-separated>
// ---------------------------------------------------------------------------

/// Malformed or unreadable instance file.
class InstanceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_instance(std::ostream& os, const ProblemInstance& inst) {
  os << "# ensemble = " << ensemble_tag(inst.x.ensemble) << '\n';
  if (inst.x.ensemble.kind == EnsembleKind::ToeplitzGaussian)
    os << "# rho = " << format_double(inst.x.ensemble.rho) << '\n';
  os << "# N = " << inst.n() << '\n'
     << "# D = " << inst.d() << '\n'
     << "# k = " << inst.k() << '\n'
     << "# sigma = " << format_double(inst.sigma) << '\n'
     << "# seed = " << inst.seed << '\n';
  for (Index i = 0; i < inst.n(); ++i) {
    for (Index j = 0; j < inst.d(); ++j) {
      if (j) os << ',';
      os << format_double(inst.x.entries(i, j));
    }
    os << '\n';
  }
  os << '\n';
  for (Index i = 0; i < inst.y.size(); ++i) os << (i ? "," : "") << format_double(inst.y(i));
  os << "\n\n";
  for (Index i = 0; i < inst.d(); ++i) os << (i ? "," : "") << inst.theta_star.values[static_cast<std::size_t>(i)];
  os << '\n';
}

inline void save_instance(const std::string& path, const ProblemInstance& inst) {
  std::ofstream out(path);
  if (!out) throw InstanceFormatError("cannot open '" + path + "' for writing");
  write_instance(out, inst);
  if (!out) throw InstanceFormatError("write to '" + path + "' failed");
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<double> parse_csv_doubles(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const std::string t = trim(cell);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      throw InstanceFormatError("not a number: '" + t + "'");
    }
    if (used != t.size()) throw InstanceFormatError("trailing characters in '" + t + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace detail

inline ProblemInstance read_instance(std::istream& is) {
  ProblemInstance inst;
  Index n = -1, d = -1, k = -1;
  Ensemble ens;
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = detail::trim(std::string_view(line).substr(1, eq - 1));
      const std::string val = detail::trim(std::string_view(line).substr(eq + 1));
      try {
        if (key == "ensemble") ens.kind = parse_ensemble_kind(val);
        else if (key == "rho") ens.rho = std::stod(val);
        else if (key == "N") n = std::stol(val);
        else if (key == "D") d = std::stol(val);
        else if (key == "k") k = std::stol(val);
        else if (key == "sigma") inst.sigma = std::stod(val);
        else if (key == "seed") inst.seed = std::stoull(val);
      } catch (const std::exception& e) {
        throw InstanceFormatError("bad metadata '" + key + "': " + e.what());
      }
      continue;
    }
    lines.push_back(line);
  }
  if (n < 1 || d < 1) throw InstanceFormatError("missing or invalid N/D metadata");

  // Split the body into blank-separated blocks.
  std::vector<std::vector<std::string>> blocks(1);
  for (auto& l : lines) {
    if (detail::trim(l).empty()) {
      if (!blocks.back().empty()) blocks.emplace_back();
    } else {
      blocks.back().push_back(l);
    }
  }
  if (blocks.back().empty()) blocks.pop_back();
  if (blocks.size() != 3) throw InstanceFormatError("expected matrix, y and theta blocks");
  if (static_cast<Index>(blocks[0].size()) != n) throw InstanceFormatError("matrix row count does not match N");
  if (blocks[1].size() != 1 || blocks[2].size() != 1) throw InstanceFormatError("y and theta must be single lines");

  inst.x.ensemble = ens;
  inst.x.entries.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    const auto row = detail::parse_csv_doubles(blocks[0][static_cast<std::size_t>(i)]);
    if (static_cast<Index>(row.size()) != d) throw InstanceFormatError("matrix row length does not match D");
    for (Index j = 0; j < d; ++j) inst.x.entries(i, j) = row[static_cast<std::size_t>(j)];
  }
  const auto yv = detail::parse_csv_doubles(blocks[1][0]);
  if (static_cast<Index>(yv.size()) != n) throw InstanceFormatError("y length does not match N");
  inst.y = Eigen::Map<const Vector>(yv.data(), n);

  const auto tv = detail::parse_csv_doubles(blocks[2][0]);
  if (static_cast<Index>(tv.size()) != d) throw InstanceFormatError("theta length does not match D");
  std::vector<int> vals;
  for (double v : tv) {
    if (v != -1.0 && v != 0.0 && v != 1.0) throw InstanceFormatError("theta entries must be -1, 0 or 1");
    vals.push_back(static_cast<int>(v));
  }
  inst.theta_star = Signal::from_values(std::move(vals));
  if (k >= 0 && k != inst.k()) throw InstanceFormatError("k metadata does not match theta support");
  return inst;
}

inline ProblemInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InstanceFormatError("cannot open '" + path + "'");
  return read_instance(in);
}

}  // namespace rls

#endif
