// rls: generate instances, run solvers, Monte-Carlo sweeps and the
// Marchenko-Pastur checks from the command line.
//
// Exit status: 0 success (solve: set match), 1 usage or other error,
// 2 I/O or parse error, 3 solve finished but the support does not match.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rls/rls.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitIo = 2;
constexpr int kExitMismatch = 3;

struct GenOptions {
  std::string ensemble = "gaussian";
  double rho = 0.3;
  long n = 0, d = 0, k = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out;
};

struct SolveOptions {
  std::string instance;
  std::string solver = "rls";
  long m = 100;
  long votes = 5;
  double frac_lo = 0.85, frac_hi = 0.9;
  long n0 = 0;
  std::string vote_mode = "per_step";
  std::uint64_t seed = 0;
  bool seed_given = false;
};

struct BenchOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  std::string plot_prefix;
  long threads = -1;
  long trials = -1;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

struct TheoryOptions {
  std::string config;
  long d = -1;
  std::string n_grid;
  long trials = -1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out;
  std::string mp_out;
};

int cmd_gen(const GenOptions& o) {
  const rls::Ensemble ens{rls::parse_ensemble_kind(o.ensemble), o.ensemble == "toeplitz" ? o.rho : 0.0};
  if (o.k > o.d) throw std::invalid_argument("k must not exceed D");
  const std::uint64_t seed = o.seed_given ? o.seed : rls::default_seed();
  const auto inst = rls::gen_instance(ens, o.n, o.d, o.k, o.sigma, seed);
  rls::save_instance(o.out, inst);
  std::cout << "wrote " << o.out << " (seed " << seed << ")\n";
  return kExitOk;
}

int cmd_solve(const SolveOptions& o) {
  const auto inst = rls::load_instance(o.instance);
  const std::uint64_t seed = o.seed_given ? o.seed : rls::default_seed();
  rls::RlsParams params;
  params.m = o.m;
  params.votes = o.votes;
  params.frac_lo = o.frac_lo;
  params.frac_hi = o.frac_hi;
  params.seed = seed;
  params.vote_mode = o.vote_mode == "whole_peel" ? rls::VoteMode::WholePeel : rls::VoteMode::PerStep;

  rls::SolverSpec spec = o.solver == "rls_fixed" ? rls::SolverSpec::rls_fixed(o.n0, o.m) : rls::SolverSpec::parse(o.solver);
  if (inst.k() < 1) throw std::invalid_argument("instance has an empty support; nothing to recover");

  const auto start = std::chrono::steady_clock::now();
  const auto est = rls::run_solver(spec, params, inst.x.entries, inst.y, inst.k(), seed);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto match = rls::exact_recovery(inst.theta_star, est);

  std::cout << "solver: " << spec.tag() << "\nsupport:";
  for (const auto& e : est.entries) std::cout << ' ' << (e.sign > 0 ? '+' : '-') << e.index;
  std::cout << "\nset_match: " << (match.set_match ? "true" : "false")
            << "\nsigned_match: " << (match.signed_match ? "true" : "false") << "\nseconds: " << secs << '\n';
  return match.set_match ? kExitOk : kExitMismatch;
}

void load_config(rls::CliConfig& cfg, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw rls::InstanceFormatError("cannot open config '" + path + "'");
  cfg.read(in);
}

void write_plot_files(const std::string& prefix, const std::vector<rls::ResultRecord>& records, rls::PlotAxis axis) {
  for (const auto& [name, pts] : rls::plot_series(records, axis)) {
    const std::string path = prefix + "_" + name + ".dat";
    std::ofstream out(path);
    if (!out) throw rls::InstanceFormatError("cannot write '" + path + "'");
    for (const auto& [x, p] : pts) out << rls::format_double(x) << ' ' << rls::format_double(p) << '\n';
    std::cerr << "plot data: " << path << '\n';
  }
}

int cmd_bench(const BenchOptions& o) {
  rls::CliConfig cfg(rls::bench_config_keys());
  load_config(cfg, o.config);
  for (const auto& kv : o.overrides) cfg.set_assignment(kv);
  if (o.trials >= 0) cfg.set("trials", std::to_string(o.trials));
  if (o.threads >= 0) cfg.set("threads", std::to_string(o.threads));
  if (o.seed_given) cfg.set("seed", std::to_string(o.seed));
  const auto settings = rls::bench_settings(cfg);

  std::vector<rls::ResultRecord> records;
  const auto start = std::chrono::steady_clock::now();
  for (double sigma : settings.sigmas) {
    auto sweep = settings.sweep;
    sweep.sigma = sigma;
    auto part = rls::run_sweep(sweep);
    records.insert(records.end(), part.begin(), part.end());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (o.out.empty()) {
    rls::write_results_csv(std::cout, records);
  } else {
    std::ofstream out(o.out);
    if (!out) throw rls::InstanceFormatError("cannot write '" + o.out + "'");
    rls::write_results_csv(out, records);
  }
  if (!o.plot_prefix.empty()) write_plot_files(o.plot_prefix, records, settings.plot_axis);

  std::ostream& summary = o.out.empty() ? std::cerr : std::cout;
  char line[160];
  std::snprintf(line, sizeof line, "%-24s %6s %5s %4s %7s %9s %9s\n", "solver", "sigma", "N", "k", "trials", "prob_set",
                "prob_sgn");
  summary << line;
  for (const auto& r : records) {
    std::snprintf(line, sizeof line, "%-24s %6.3g %5ld %4ld %7ld %9.3f %9.3f\n", r.solver.tag().c_str(), r.sigma,
                  static_cast<long>(r.n), static_cast<long>(r.k), static_cast<long>(r.trials), r.prob_set, r.prob_signed);
    summary << line;
  }
  summary << "total " << records.size() << " points in " << secs << " s\n";
  return kExitOk;
}

int cmd_theory(const TheoryOptions& o) {
  rls::CliConfig cfg(rls::theory_config_keys());
  load_config(cfg, o.config);
  if (o.d >= 0) cfg.set("D", std::to_string(o.d));
  if (!o.n_grid.empty()) cfg.set("N", o.n_grid);
  if (o.trials >= 0) cfg.set("trials", std::to_string(o.trials));
  if (o.seed_given) cfg.set("seed", std::to_string(o.seed));
  const auto t = rls::theory_settings(cfg);

  std::ostringstream err_csv, mp_csv;
  err_csv << "N,D,predicted,empirical_mean,std_error,rel_deviation\n";
  char line[200];
  std::printf("%6s %6s %12s %12s %12s %10s\n", "N", "D", "predicted", "empirical", "std_error", "rel_dev");
  for (rls::Index n : t.n_values) {
    rls::Stream rng = rls::make_stream(rls::derive_seed(t.seed, {static_cast<std::uint64_t>(t.d), static_cast<std::uint64_t>(n)}));
    const double pred = rls::predicted_error_norm(n, t.d);
    const auto est = rls::empirical_error_norm(n, t.d, t.trials, rng);
    const double rel = std::abs(est.mean - pred) / pred;
    std::printf("%6ld %6ld %12.6f %12.6f %12.6f %10.4f\n", static_cast<long>(n), static_cast<long>(t.d), pred, est.mean,
                est.std_error, rel);
    err_csv << n << ',' << t.d << ',' << rls::format_double(pred) << ',' << rls::format_double(est.mean) << ','
            << rls::format_double(est.std_error) << ',' << rls::format_double(rel) << '\n';
  }

  mp_csv << "lambda,closed_form,quadrature,abs_error,normalization\n";
  std::printf("\n%8s %14s %14s %12s %14s\n", "lambda", "closed_form", "quadrature", "abs_error", "normalization");
  for (double l : t.lambdas) {
    const rls::MpParams p(l);
    const double closed = rls::mp_inverse_moment(p);
    const double quad = rls::mp_inverse_moment_quadrature(p);
    const double norm = rls::mp_normalization_quadrature(p);
    std::snprintf(line, sizeof line, "%8.3f %14.10f %14.10f %12.3e %14.10f\n", l, closed, quad, std::abs(quad - closed), norm);
    std::cout << line;
    mp_csv << rls::format_double(l) << ',' << rls::format_double(closed) << ',' << rls::format_double(quad) << ','
           << rls::format_double(std::abs(quad - closed)) << ',' << rls::format_double(norm) << '\n';
  }

  auto dump = [](const std::string& path, const std::string& text) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw rls::InstanceFormatError("cannot write '" + path + "'");
    out << text;
  };
  dump(o.out, err_csv.str());
  dump(o.mp_out, mp_csv.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Support recovery with refined least squares"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Generate a problem instance file");
  g->add_option("--ensemble", gen.ensemble, "gaussian | toeplitz | bernoulli")
      ->check(CLI::IsMember({"gaussian", "toeplitz", "bernoulli"}));
  g->add_option("--rho", gen.rho, "Toeplitz correlation");
  g->add_option("--N", gen.n, "Number of equations")->required()->check(CLI::PositiveNumber);
  g->add_option("--D", gen.d, "Number of variables")->required()->check(CLI::PositiveNumber);
  g->add_option("--k", gen.k, "Sparsity")->required()->check(CLI::NonNegativeNumber);
  g->add_option("--sigma", gen.sigma, "Noise standard deviation")->check(CLI::NonNegativeNumber);
  auto* gseed = g->add_option("--seed", gen.seed, "Seed (default $RLS_SEED or 0)");
  g->add_option("--out", gen.out, "Output path")->required();

  SolveOptions solve;
  auto* s = app.add_subcommand("solve", "Recover the support of an instance file");
  s->add_option("--instance", solve.instance, "Instance file")->required();
  s->add_option("--solver", solve.solver, "rls | rls_fixed | rawls | omp | oracle")
      ->check(CLI::IsMember({"rls", "rls_fixed", "rawls", "omp", "oracle"}));
  s->add_option("--m", solve.m, "Subsets per averaged estimate")->check(CLI::PositiveNumber);
  s->add_option("--votes", solve.votes, "Subset sizes voted per step")->check(CLI::PositiveNumber);
  s->add_option("--frac-lo", solve.frac_lo, "Lower subset fraction");
  s->add_option("--frac-hi", solve.frac_hi, "Upper subset fraction");
  s->add_option("--n0", solve.n0, "Subset size for rls_fixed");
  s->add_option("--vote-mode", solve.vote_mode, "per_step | whole_peel")
      ->check(CLI::IsMember({"per_step", "whole_peel"}));
  auto* sseed = s->add_option("--seed", solve.seed, "Solver seed (default $RLS_SEED or 0)");

  BenchOptions bench;
  auto* b = app.add_subcommand("bench", "Run a Monte-Carlo sweep");
  b->add_option("--config", bench.config, "key = value configuration file");
  b->add_option("--set", bench.overrides, "Override a configuration key (key=value)");
  b->add_option("--out", bench.out, "Results CSV (default: standard output)");
  b->add_option("--plot-prefix", bench.plot_prefix, "Write <prefix>_<series>.dat plot files");
  b->add_option("--threads", bench.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  b->add_option("--trials", bench.trials, "Override trial count")->check(CLI::PositiveNumber);
  auto* bseed = b->add_option("--seed", bench.seed, "Override base seed");

  TheoryOptions theory;
  auto* t = app.add_subcommand("theory", "Noise amplification and Marchenko-Pastur checks");
  t->add_option("--config", theory.config, "key = value configuration file");
  t->add_option("--D", theory.d, "Number of variables")->check(CLI::PositiveNumber);
  t->add_option("--N", theory.n_grid, "N grid, e.g. 10:290:20 or 30,100,150");
  t->add_option("--trials", theory.trials, "Monte-Carlo trials per N")->check(CLI::PositiveNumber);
  auto* tseed = t->add_option("--seed", theory.seed, "Seed");
  t->add_option("--out", theory.out, "CSV of the per-N table");
  t->add_option("--mp-out", theory.mp_out, "CSV of the Marchenko-Pastur table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }
  gen.seed_given = gseed->count() > 0;
  solve.seed_given = sseed->count() > 0;
  bench.seed_given = bseed->count() > 0;
  theory.seed_given = tseed->count() > 0;

  try {
    if (*g) return cmd_gen(gen);
    if (*s) return cmd_solve(solve);
    if (*b) return cmd_bench(bench);
    if (*t) return cmd_theory(theory);
  } catch (const rls::InstanceFormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const rls::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
