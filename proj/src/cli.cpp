#include <svmlab/cli.hpp>
#include <svmlab/experiments.hpp>
#include <svmlab/io.hpp>
#include <svmlab/problems.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <map>
#include <cmath>
#include <ostream>

namespace svmlab {

namespace {

struct Defaults {
  const char* problem;
  double sigma;
  double lambda;
  const char* out;
};

Defaults defaults_for(const std::string& subcommand) {
  if (subcommand == "levelsets") return {"sine-2d", 0.2, 1e-3, "levelsets.csv"};
  if (subcommand == "compare") return {"gap-step-1d", 0.1, 1e-6, "compare.csv"};
  if (subcommand == "verify") return {"", 0.2, 1e-4, "verify.csv"};
  return {"power-gap-1d", 0.2, 1e-4, "rates.csv"};
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

Problem problem_from(const RunConfig& c) { return make_problem(c.problem, c.p, c.noiseless); }

}  // namespace

std::filesystem::path sibling_path(const std::filesystem::path& path, const std::string& suffix) {
  std::filesystem::path out = path.parent_path();
  out /= path.stem().string() + suffix + path.extension().string();
  return out;
}

RunConfig parse_args(const std::vector<std::string>& args) {
  CLI::App app{"Kernel SVM fast-rate experiments"};
  app.require_subcommand(1, 1);

  RunConfig c;
  std::string surrogate = "hinge";
  std::string out;
  std::vector<std::pair<std::string, CLI::App*>> subs;
  CLI::Option* sigma_opt = nullptr;
  CLI::Option* lambda_opt = nullptr;
  CLI::Option* problem_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  std::map<std::string, std::array<CLI::Option*, 4>> tracked;

  const std::pair<const char*, const char*> commands[] = {
      {"rates", "excess risk against sample size over random trials"},
      {"levelsets", "zero level lines of an SVM trained on a 2-D lattice"},
      {"compare", "hinge against least squares on a 1-D lattice"},
      {"verify", "numerical inequality suite; exit code counts violations"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    problem_opt = sub->add_option("--problem", c.problem, "power-gap-1d | power-full-1d | sine-2d | gap-step-1d");
    sub->add_option("--p", c.p, "margin exponent of the power problems");
    sigma_opt = sub->add_option("--sigma", c.sigma, "Gaussian kernel width");
    lambda_opt = sub->add_option("--lambda", c.lambda, "regularization parameter");
    sub->add_option("--n-grid", c.n_grid, "comma-separated sample sizes")->delimiter(',');
    sub->add_option("--trials", c.trials, "trials per sample size (verify: random functions per check)");
    sub->add_option("--seed", c.seed, "root random seed");
    out_opt = sub->add_option("--out", out, "output CSV path");
    sub->add_flag("--noiseless", c.noiseless, "noiseless variant (sine-2d)");
    sub->add_option("--tolerance", c.tolerance, "solver KKT tolerance (verify: identity residual)");
    sub->add_option("--max-sweeps", c.max_sweeps, "solver sweep budget");
    sub->add_option("--surrogate", surrogate, "rates: hinge | least-squares");
    sub->add_option("--train-side", c.train_side, "curated lattice side");
    sub->add_option("--test-side", c.test_side, "levelsets: evaluation lattice side");
    sub->add_option("--threads", c.threads, "worker threads for rates (0 = all)");
    tracked[name] = {problem_opt, sigma_opt, lambda_opt, out_opt};
    subs.emplace_back(name, sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested(app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) c.subcommand = name;
  }
  const Defaults d = defaults_for(c.subcommand);
  const auto& opts = tracked[c.subcommand];
  if (opts[0]->count() == 0) c.problem = d.problem;
  if (opts[1]->count() == 0) c.sigma = d.sigma;
  if (opts[2]->count() == 0) c.lambda = d.lambda;
  c.out = opts[3]->count() == 0 ? std::filesystem::path(d.out) : std::filesystem::path(out);
  if (c.n_grid.empty()) c.n_grid = default_n_grid();

  require(c.p > 0.0, "--p must be positive");
  require(c.sigma > 0.0 && std::isfinite(c.sigma), "--sigma must be positive");
  require(c.lambda > 0.0 && std::isfinite(c.lambda), "--lambda must be positive");
  require(c.tolerance > 0.0 && std::isfinite(c.tolerance), "--tolerance must be positive");
  require(c.trials >= 1, "--trials must be at least 1");
  require(c.max_sweeps >= 1, "--max-sweeps must be at least 1");
  require(c.train_side >= 2, "--train-side must be at least 2");
  require(c.test_side >= 2, "--test-side must be at least 2");
  require(!c.out.empty(), "--out must not be empty");
  for (std::int64_t n : c.n_grid) require(n >= 1, "--n-grid entries must be positive");
  if (surrogate == "hinge") {
    c.surrogate = Surrogate::hinge;
  } else if (surrogate == "least-squares") {
    c.surrogate = Surrogate::least_squares;
  } else {
    throw UsageError("--surrogate must be hinge or least-squares");
  }
  if (!c.problem.empty()) {
    try {
      parse_problem_kind(c.problem);
    } catch (const InputError& e) {
      throw UsageError(e.what());
    }
  }
  return c;
}

namespace {

int run_rates(const RunConfig& c, std::ostream& log) {
  const Problem problem = problem_from(c);
  RateConfig rc;
  rc.sigma = c.sigma;
  rc.lambda = c.lambda;
  rc.n_grid = c.n_grid;
  rc.trials = c.trials;
  rc.seed = c.seed;
  rc.tolerance = c.tolerance;
  rc.max_sweeps = c.max_sweeps;
  rc.surrogate = c.surrogate;
  rc.threads = c.threads;
  const RateTable table = run_rate_experiment(problem, rc);

  ResultTable rows;
  rows.columns = {"n", "trial", "seed", "excess_risk", "surrogate_excess", "zero_error",
                  "converged", "lipschitz", "disagreement"};
  for (const RateRow& r : table.rows) {
    rows.add_row({r.n, r.trial, std::to_string(r.seed), r.excess_risk, r.surrogate_excess,
                  std::int64_t{r.zero_error}, std::int64_t{r.converged}, r.lipschitz, r.disagreement});
  }
  write_results(rows, c.out);

  ResultTable summary;
  summary.columns = {"n", "trials", "mean", "stddev", "median", "zero_fraction", "mean_surrogate"};
  for (const RateSummary& s : summarize(table)) {
    summary.add_row({s.n, s.trials, s.mean, s.stddev, s.median, s.zero_fraction, s.mean_surrogate});
    log << "n=" << s.n << " mean=" << s.mean << " median=" << s.median << " zero_fraction=" << s.zero_fraction
        << '\n';
  }
  write_results(summary, sibling_path(c.out, "_summary"));

  ResultTable fit;
  fit.columns = {"n_min", "status", "c_hat", "r_squared", "points", "perfect_ns"};
  const std::int64_t n_min = 256;
  try {
    const RateFit f = fit_exponential_rate(table, n_min);
    std::string perfect;
    for (std::int64_t n : f.perfect_ns) perfect += (perfect.empty() ? "" : " ") + std::to_string(n);
    fit.add_row({n_min, std::string("ok"), f.c_hat, f.r_squared, static_cast<std::int64_t>(f.points), perfect});
    log << "fit n>=" << n_min << ": c_hat=" << f.c_hat << " r2=" << f.r_squared << '\n';
  } catch (const InputError&) {
    fit.add_row({n_min, std::string("insufficient"), 0.0, 0.0, std::int64_t{0}, std::string()});
    log << "fit n>=" << n_min << ": fewer than 3 sizes with positive mean error\n";
  }
  write_results(fit, sibling_path(c.out, "_fit"));
  log << "wrote " << c.out.string() << '\n';
  return 0;
}

int run_levelsets(const RunConfig& c, std::ostream& log) {
  const Problem problem = problem_from(c);
  if (problem.dimension() != 2) throw UsageError("levelsets needs a 2-D problem (sine-2d)");
  LevelsetConfig lc;
  lc.sigma = c.sigma;
  lc.lambda = c.lambda;
  lc.train_side = static_cast<std::size_t>(c.train_side);
  lc.test_side = static_cast<std::size_t>(c.test_side);
  lc.tolerance = c.tolerance;
  lc.max_sweeps = c.max_sweeps;
  lc.seed = c.seed;
  const LevelGrid grid = run_levelset_experiment(problem, lc);

  ResultTable values;
  values.columns = {"x", "y", "g"};
  for (std::size_t j = 0; j < grid.ys.size(); ++j) {
    for (std::size_t i = 0; i < grid.xs.size(); ++i) {
      values.add_row({grid.xs[i], grid.ys[j], grid.g[j * grid.xs.size() + i]});
    }
  }
  write_results(values, c.out);

  ResultTable lines;
  lines.columns = {"line", "vertex", "x", "y", "closed"};
  for (std::size_t l = 0; l < grid.lines.size(); ++l) {
    const Polyline& pl = grid.lines[l];
    for (std::size_t v = 0; v < pl.vertices.size(); ++v) {
      lines.add_row({static_cast<std::int64_t>(l), static_cast<std::int64_t>(v), pl.vertices[v].x, pl.vertices[v].y,
                     std::int64_t{pl.closed}});
    }
  }
  write_results(lines, sibling_path(c.out, "_lines"));

  ResultTable summary;
  summary.columns = {"symmetric_difference", "excess_risk", "lines", "sweeps", "kkt_residual", "converged"};
  summary.add_row({grid.symmetric_difference, grid.excess_risk, static_cast<std::int64_t>(grid.lines.size()),
                   grid.stats.sweeps, grid.stats.kkt_residual, std::int64_t{grid.stats.converged}});
  write_results(summary, sibling_path(c.out, "_summary"));
  log << "symmetric difference " << grid.symmetric_difference << ", " << grid.lines.size() << " level lines\n";
  return 0;
}

int run_compare(const RunConfig& c, std::ostream& log) {
  const Problem problem = problem_from(c);
  if (problem.dimension() != 1) throw UsageError("compare needs a 1-D problem");
  ComparisonConfig cc;
  cc.sigma = c.sigma;
  cc.lambda = c.lambda;
  cc.train_side = static_cast<std::size_t>(c.train_side);
  cc.tolerance = c.tolerance;
  cc.max_sweeps = c.max_sweeps;
  cc.seed = c.seed;
  const ComparisonReport report = run_surrogate_comparison(problem, cc);

  ResultTable rows;
  rows.columns = {"surrogate", "sign_agreement", "overshoot", "spurious_sign_changes", "max_disagreement_distance",
                  "sweeps", "kkt_residual", "converged"};
  for (const SurrogateReport* r : {&report.hinge, &report.least_squares}) {
    rows.add_row({std::string(to_string(r->surrogate)), r->sign_agreement, r->overshoot, r->spurious_sign_changes,
                  r->max_disagreement_distance, r->stats.sweeps, r->stats.kkt_residual,
                  std::int64_t{r->stats.converged}});
    log << to_string(r->surrogate) << ": agreement " << r->sign_agreement << ", overshoot " << r->overshoot << '\n';
  }
  write_results(rows, c.out);

  ResultTable curves;
  curves.columns = {"x", "eta", "g_hinge", "g_least_squares"};
  for (std::size_t k = 0; k < report.quadrature.size(); ++k) {
    curves.add_row({report.quadrature.nodes[k](0), report.eta[k], report.hinge.g[k], report.least_squares.g[k]});
  }
  write_results(curves, sibling_path(c.out, "_curves"));
  return 0;
}

int run_verify(const RunConfig& c, std::ostream& log) {
  std::vector<Problem> problems;
  if (c.problem.empty()) {
    for (ProblemKind kind :
         {ProblemKind::power_gap_1d, ProblemKind::power_full_1d, ProblemKind::sine_2d, ProblemKind::gap_step_1d}) {
      ProblemOptions o;
      o.p = c.p;
      o.noiseless = c.noiseless;
      problems.push_back(make_problem(kind, o));
    }
  } else {
    problems.push_back(problem_from(c));
  }
  VerifyConfig vc;
  vc.trials = c.trials;
  vc.seed = c.seed;
  vc.identity_tolerance = c.tolerance;
  const std::vector<CheckRecord> records = run_verification_suite(problems, vc);

  ResultTable table;
  table.columns = {"check", "problem", "instance", "lhs", "rhs", "holds"};
  std::int64_t violations = 0;
  for (const CheckRecord& r : records) {
    table.add_row({r.check, r.problem, r.instance, r.lhs, r.rhs, std::int64_t{r.holds}});
    if (!r.holds) {
      ++violations;
      log << "violated: " << r.check << ' ' << r.problem << " #" << r.instance << " lhs=" << r.lhs
          << " rhs=" << r.rhs << '\n';
    }
  }
  write_results(table, c.out);
  log << records.size() << " checks, " << violations << " violated\n";
  return static_cast<int>(std::min<std::int64_t>(violations, 125));
}

}  // namespace

int run(const RunConfig& config, std::ostream& log) {
  if (config.subcommand == "rates") return run_rates(config, log);
  if (config.subcommand == "levelsets") return run_levelsets(config, log);
  if (config.subcommand == "compare") return run_compare(config, log);
  if (config.subcommand == "verify") return run_verify(config, log);
  throw UsageError("unknown subcommand '" + config.subcommand + "'");
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    return run(parse_args(args), out);
  } catch (const HelpRequested& h) {
    out << h.what();
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\nrun with --help for usage\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace svmlab
