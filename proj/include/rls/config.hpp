#ifndef RLS_CONFIG_HPP
#define RLS_CONFIG_HPP

// Plain-text `key = value` configuration files with '#' comments. Keys are
// checked against a whitelist; later assignments (including command-line
// overrides) replace earlier ones.

#include <cstdint>
#include <cstdlib>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rls/bench.hpp"
#include "rls/instance.hpp"

namespace rls {

/// Config text that cannot be parsed (bad syntax, unknown key, bad number).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::set<std::string>& bench_config_keys() {
  static const std::set<std::string> keys{
      "ensemble", "rho",   "D",        "N",       "k",          "sigma",         "solvers",
      "trials",   "seed",  "m",        "votes",   "frac_lo",    "frac_hi",       "vote_mode",
      "fixed_design", "record_timing", "threads", "plot_x"};
  return keys;
}

inline const std::set<std::string>& theory_config_keys() {
  static const std::set<std::string> keys{"D", "N", "trials", "seed", "lambdas"};
  return keys;
}

class CliConfig {
 public:
  explicit CliConfig(const std::set<std::string>& allowed) : allowed_(&allowed) {}

  void set(const std::string& key, const std::string& value) {
    if (!allowed_->count(key)) throw ConfigError("unknown configuration key '" + key + "'");
    values_[key] = value;
  }

  /// Parses `key=value` as given on the command line.
  void set_assignment(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + text + "'");
    set(detail::trim(text.substr(0, eq)), detail::trim(text.substr(eq + 1)));
  }

  void read(std::istream& is) {
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (detail::trim(line).empty()) continue;
      if (line.find('=') == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      set_assignment(line);
    }
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::optional<std::string> get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

 private:
  const std::set<std::string>* allowed_;
  std::map<std::string, std::string> values_;
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;  // commas inside rls_fixed[...] do not split
  for (char c : text) {
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

inline long parse_long(const std::string& s) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("not an integer: '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("not an integer: '" + s + "'");
  return v;
}

inline double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

inline std::uint64_t parse_seed(const std::string& s) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a seed: '" + s + "'");
  }
  if (used != s.size() || s.find('-') != std::string::npos) throw ConfigError("not a seed: '" + s + "'");
  return v;
}

inline bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("not a boolean: '" + s + "'");
}

}  // namespace detail

/// Integer list: comma-separated items, each either a value or an inclusive
/// range `first:last:step` (step defaults to 1).
inline std::vector<Index> parse_index_list(const std::string& text) {
  std::vector<Index> out;
  for (const auto& item : detail::split_list(text)) {
    if (item.empty()) throw ConfigError("empty list item in '" + text + "'");
    std::vector<std::string> parts;
    std::stringstream ss(item);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(detail::trim(p));
    if (parts.size() == 1) {
      out.push_back(detail::parse_long(parts[0]));
    } else if (parts.size() == 2 || parts.size() == 3) {
      const long first = detail::parse_long(parts[0]);
      const long last = detail::parse_long(parts[1]);
      const long step = parts.size() == 3 ? detail::parse_long(parts[2]) : 1;
      if (step <= 0) throw ConfigError("range step must be positive in '" + item + "'");
      for (long v = first; v <= last; v += step) out.push_back(v);
    } else {
      throw ConfigError("bad range '" + item + "'");
    }
  }
  return out;
}

inline std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : detail::split_list(text)) out.push_back(detail::parse_double(item));
  return out;
}

/// Seed used when neither the config nor a flag provides one: $RLS_SEED, else 0.
inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("RLS_SEED"); env && *env) return detail::parse_seed(env);
  return 0;
}

/// Everything `bench` needs. A list of sigmas runs one sweep per sigma.
struct BenchSettings {
  SweepConfig sweep;
  std::vector<double> sigmas;
  PlotAxis plot_axis = PlotAxis::N;
};

inline BenchSettings bench_settings(const CliConfig& cfg) {
  BenchSettings b;
  SweepConfig& s = b.sweep;
  const auto get = [&](const char* key) { return cfg.get(key); };

  if (auto v = get("ensemble")) s.ensemble.kind = parse_ensemble_kind(*v);
  if (s.ensemble.kind == EnsembleKind::ToeplitzGaussian) s.ensemble.rho = 0.3;
  if (auto v = get("rho")) s.ensemble.rho = detail::parse_double(*v);
  if (auto v = get("D")) s.d = detail::parse_long(*v);
  if (auto v = get("N")) s.n_values = parse_index_list(*v);
  else throw ConfigError("missing key 'N'");
  if (auto v = get("k")) s.k_values = parse_index_list(*v);
  else throw ConfigError("missing key 'k'");
  b.sigmas = get("sigma") ? parse_double_list(*get("sigma")) : std::vector<double>{0.0};
  if (b.sigmas.empty()) throw ConfigError("sigma list is empty");
  s.sigma = b.sigmas.front();
  if (auto v = get("solvers")) {
    for (const auto& t : detail::split_list(*v)) s.solvers.push_back(SolverSpec::parse(t));
  } else {
    s.solvers = {SolverSpec::rls()};
  }
  if (auto v = get("trials")) s.trials = detail::parse_long(*v);
  s.base_seed = get("seed") ? detail::parse_seed(*get("seed")) : default_seed();
  if (auto v = get("m")) s.rls_params.m = detail::parse_long(*v);
  if (auto v = get("votes")) s.rls_params.votes = detail::parse_long(*v);
  if (auto v = get("frac_lo")) s.rls_params.frac_lo = detail::parse_double(*v);
  if (auto v = get("frac_hi")) s.rls_params.frac_hi = detail::parse_double(*v);
  if (auto v = get("vote_mode")) {
    if (*v == "per_step") s.rls_params.vote_mode = VoteMode::PerStep;
    else if (*v == "whole_peel") s.rls_params.vote_mode = VoteMode::WholePeel;
    else throw ConfigError("vote_mode must be per_step or whole_peel");
  }
  if (auto v = get("fixed_design")) s.fixed_design = detail::parse_bool(*v);
  if (auto v = get("record_timing")) s.record_timing = detail::parse_bool(*v);
  if (auto v = get("threads")) s.threads = static_cast<unsigned>(detail::parse_long(*v));
  if (auto v = get("plot_x")) {
    if (*v == "N") b.plot_axis = PlotAxis::N;
    else if (*v == "k") b.plot_axis = PlotAxis::K;
    else if (*v == "n0_frac") b.plot_axis = PlotAxis::SubsetFraction;
    else throw ConfigError("plot_x must be N, k or n0_frac");
  }
  for (double sg : b.sigmas) {
    SweepConfig probe = s;
    probe.sigma = sg;
    probe.validate();
  }
  return b;
}

struct TheorySettings {
  Index d = 300;
  std::vector<Index> n_values;
  Index trials = 100;
  std::uint64_t seed = 0;
  std::vector<double> lambdas{0.1, 0.3, 0.5, 0.7, 0.9};
};

inline TheorySettings theory_settings(const CliConfig& cfg) {
  TheorySettings t;
  if (auto v = cfg.get("D")) t.d = detail::parse_long(*v);
  if (auto v = cfg.get("N")) t.n_values = parse_index_list(*v);
  else t.n_values = parse_index_list("10:290:20");
  if (auto v = cfg.get("trials")) t.trials = detail::parse_long(*v);
  t.seed = cfg.get("seed") ? detail::parse_seed(*cfg.get("seed")) : default_seed();
  if (auto v = cfg.get("lambdas")) t.lambdas = parse_double_list(*v);
  if (t.trials < 2) throw std::invalid_argument("theory needs at least two trials");
  for (Index n : t.n_values)
    if (n < 1 || n >= t.d) throw std::invalid_argument("every N must satisfy 0 < N < D (got " + std::to_string(n) + ")");
  for (double l : t.lambdas)
    if (!(l > 0.0 && l < 1.0)) throw std::invalid_argument("lambdas must lie in (0,1)");
  return t;
}

}  // namespace rls

#endif
