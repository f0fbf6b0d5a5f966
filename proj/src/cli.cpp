#include "mixrate/cli.hpp"

#include <cmath>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "mixrate/errors.hpp"
#include "mixrate/estimator.hpp"
#include "mixrate/hard_instances.hpp"
#include "mixrate/identifiability.hpp"
#include "mixrate/io.hpp"
#include "mixrate/moment_problem.hpp"
#include "mixrate/parallel.hpp"
#include "mixrate/scaling_tree.hpp"

namespace mixrate::cli {

using nlohmann::json;

namespace {

const char *kind_name(ErrorKind k) {
  switch (k) {
  case ErrorKind::validation:
    return "validation";
  case ErrorKind::infeasible:
    return "infeasible";
  case ErrorKind::io:
    return "io";
  }
  return "unknown";
}

int exit_code(ErrorKind k) {
  switch (k) {
  case ErrorKind::validation:
    return 2;
  case ErrorKind::infeasible:
    return 3;
  case ErrorKind::io:
    return 4;
  }
  return 1;
}

void report_error(std::ostream &err, const char *kind, const std::string &message) {
  err << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

// -inf exponents (identically vanishing quantities) serialize as null.
json exponent_json(double e) { return std::isfinite(e) ? json(e) : json(nullptr); }

void reject_unknown(const json &j, const std::set<std::string> &allowed, const std::string &where) {
  if (!j.is_object()) throw ArgumentError(where + " must be a JSON object");
  for (const auto &[key, _] : j.items())
    if (!allowed.count(key)) throw ArgumentError("unknown key '" + key + "' in " + where);
}

template <class T> T field(const json &j, const char *key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception &) {
    throw ArgumentError(std::string("field '") + key + "' has the wrong type");
  }
}

std::shared_ptr<const ComponentFamily> make_family(const std::string &name, double sigma) {
  return FamilyRegistry::instance().make(name, {{"sigma", sigma}});
}

json fit_json(const FitResult &fit) {
  return {{"g_hat", to_json(fit.g_hat)},
          {"achieved_ks", fit.achieved_ks},
          {"restarts_used", fit.restarts_used},
          {"best_objective_trace", fit.best_objective_trace}};
}

json scw_json(const ScalingTreeReport &r) {
  json exps = json::array();
  for (const auto &row : r.pairwise_exponents) {
    json out = json::array();
    for (double e : row) out.push_back(exponent_json(e));
    exps.push_back(out);
  }
  json nodes = json::array();
  for (const auto &node : r.tree)
    nodes.push_back({{"members", node.members},
                     {"parent", node.parent},
                     {"children", node.children},
                     {"diameter_exponent", exponent_json(node.diameter_exponent)},
                     {"weight_exponent", exponent_json(node.weight_exponent)}});
  return {{"name", r.name},
          {"pass", r.pass},
          {"ratio_range", {r.ratio_range.first, r.ratio_range.second}},
          {"n_grid", r.n_grid},
          {"lhs", r.lhs},
          {"rhs", r.rhs},
          {"pairwise_exponents", exps},
          {"tree", nodes}};
}

std::vector<std::size_t> to_sizes(const std::vector<double> &xs) {
  std::vector<std::size_t> out;
  for (double x : xs) {
    if (!(x >= 1.0) || x != std::floor(x)) throw ArgumentError("sample sizes must be positive integers");
    out.push_back(static_cast<std::size_t>(x));
  }
  return out;
}

struct Outputs {
  std::string out_path;
  std::string csv_path;
  std::ostream &out;

  void json_result(const json &j) const { text(j.dump(2) + "\n"); }
  void text(const std::string &s) const {
    if (out_path.empty())
      out << s;
    else
      write_text_file(out_path, s);
  }
  void csv(const std::string &s) const {
    if (!csv_path.empty()) write_text_file(csv_path, s);
  }
};

} // namespace

RateSweepConfig rate_sweep_config_from_json(const json &j) {
  reject_unknown(j, {"family", "sigma", "truth", "m", "m0", "n_grid", "reps", "seed", "estimator"},
                 "rate-sweep config");
  RateSweepConfig cfg;
  cfg.family = make_family(field<std::string>(j, "family", "gaussian"), field(j, "sigma", 1.0));
  cfg.m = field(j, "m", 1);
  cfg.m0 = field(j, "m0", 1);
  cfg.reps = field(j, "reps", 20);
  cfg.seed = field<std::uint64_t>(j, "seed", 0);
  if (!j.contains("n_grid")) throw ArgumentError("rate-sweep config needs 'n_grid'");
  cfg.n_grid = to_sizes(field<std::vector<double>>(j, "n_grid", {}));

  if (!j.contains("truth")) throw ArgumentError("rate-sweep config needs 'truth'");
  const auto &t = j.at("truth");
  reject_unknown(t, {"kind", "distribution", "u", "m", "base_moments", "g0", "scale_n"}, "truth");
  const auto kind = field<std::string>(t, "kind", "fixed");
  if (kind == "fixed") {
    if (!t.contains("distribution")) throw ArgumentError("fixed truth needs 'distribution'");
    cfg.truth.kind = TruthSpec::Kind::fixed;
    cfg.truth.distribution = mixing_from_json(t.at("distribution"));
  } else if (kind == "hard_instance") {
    cfg.truth.kind = TruthSpec::Kind::hard_instance;
    auto &spec = cfg.truth.instance;
    if (t.contains("g0")) spec.g0 = mixing_from_json(t.at("g0"));
    spec.m = field(t, "m", cfg.m);
    spec.u = field(t, "u", 12.0);
    spec.base_moments = field(t, "base_moments", spec.base_moments);
    if (t.contains("scale_n")) cfg.truth.scale_n = field(t, "scale_n", 1.0);
    spec.validate();
  } else {
    throw ArgumentError("truth kind must be 'fixed' or 'hard_instance', got '" + kind + "'");
  }

  if (j.contains("estimator")) {
    const auto &e = j.at("estimator");
    reject_unknown(e, {"restarts", "max_iter", "weight_floor", "merge_radius", "early_stop"},
                   "estimator");
    auto &o = cfg.estimator;
    o.restarts = field(e, "restarts", o.restarts);
    o.max_iter = field(e, "max_iter", o.max_iter);
    o.weight_floor = field(e, "weight_floor", o.weight_floor);
    o.merge_radius = field(e, "merge_radius", o.merge_radius);
    o.early_stop = field(e, "early_stop", o.early_stop);
  }
  return cfg;
}

json to_json(const RateSweepReport &r) {
  json errors = json::array();
  for (const auto &row : r.errors) {
    json out = json::array();
    for (double e : row) out.push_back(std::isnan(e) ? json(nullptr) : json(e));
    errors.push_back(out);
  }
  return {{"n_grid", r.n_grid},       {"errors", errors},     {"mean", r.mean},
          {"median", r.median},       {"q25", r.q25},         {"q75", r.q75},
          {"failures", r.failures},   {"fitted_slope", r.fitted_slope},
          {"slope_stderr", r.slope_stderr}, {"theory_slope", r.theory_slope}};
}

json to_json(const LanReport &r) {
  return {{"u", r.u},
          {"n", r.n},
          {"reps", r.reps},
          {"rejected", r.rejected},
          {"sample_mean", r.sample_mean},
          {"sample_var", r.sample_var},
          {"gamma_hat", r.gamma_hat},
          {"gamma_stderr", r.gamma_stderr},
          {"signature_gap", r.signature_gap},
          {"variance_ratio", r.variance_ratio},
          {"y_mean", r.y_mean},
          {"y_stderr", r.y_stderr},
          {"log_lr", r.log_lr}};
}

json to_json(const DkwReport &r) {
  return {{"n", r.n}, {"reps", r.reps}, {"q50", r.q50}, {"q95", r.q95}, {"q99", r.q99}};
}

int dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Minimax estimation of finite mixtures in the Wasserstein metric", "mixrate"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_path, csv_path;
  std::uint64_t seed = 1;
  int nthreads = 0;
  app.add_option("--out", out_path, "Write the JSON result here instead of stdout");
  app.add_option("--csv", csv_path, "Write replicate-level CSV here");
  app.add_option("--seed", seed, "Master random seed");
  app.add_option("--threads", nthreads, "Worker threads (default: MIXRATE_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  std::string family = "gaussian";
  double sigma = 1.0;
  auto add_family = [&](CLI::App *sub) {
    sub->add_option("--family", family, "Component family")->capture_default_str();
    sub->add_option("--sigma", sigma, "Family scale")->capture_default_str();
  };

  std::vector<double> moments;
  int d = 0;
  double theta_lo = ThetaBounds{}.lo, theta_hi = ThetaBounds{}.hi;
  auto *solve = app.add_subcommand("solve-moments", "Recover a d-atomic measure from moments 1, m1, ..");
  solve->add_option("--moments", moments, "Moments starting with 1")->required()->delimiter(',');
  solve->add_option("--d", d, "Number of atoms")->required();
  solve->add_option("--theta-lo", theta_lo)->capture_default_str();
  solve->add_option("--theta-hi", theta_hi)->capture_default_str();

  auto *hankel = app.add_subcommand("hankel", "Leading Hankel determinants as CSV rows k,det");
  hankel->add_option("--moments", moments, "Moments starting with 1")->required()->delimiter(',');

  std::string g1_path, g2_path;
  auto *wass = app.add_subcommand("wasserstein", "W1 distance between two mixing distributions");
  wass->add_option("--g1", g1_path)->required();
  wass->add_option("--g2", g2_path)->required();

  int m = 2, m0 = 1;
  double u = 0.0, n = 1000.0;
  std::vector<double> base_moments;
  std::string g0_path;
  auto *hard = app.add_subcommand("hard-instance", "Build the local hard instance G_n(u)");
  hard->add_option("--m", m)->capture_default_str();
  hard->add_option("--m0", m0)->capture_default_str();
  hard->add_option("--u", u)->capture_default_str();
  hard->add_option("--n", n)->capture_default_str();
  hard->add_option("--base-moments", base_moments, "Block moments m1..m_{2d-2}")->delimiter(',');
  hard->add_option("--g0", g0_path, "Centre measure (default delta_0)");

  std::vector<double> thetas;
  int order = 2, budget = 10000;
  auto *ident = app.add_subcommand("identifiability", "Strong-identifiability margin");
  add_family(ident);
  ident->add_option("--thetas", thetas)->required()->delimiter(',');
  ident->add_option("--k", order, "Derivative order")->capture_default_str();
  ident->add_option("--budget", budget, "Objective evaluations")->capture_default_str();

  auto *sep = app.add_subcommand("separation", "KS / W^(2m-2m0+1) for two mixing distributions");
  add_family(sep);
  sep->add_option("--g1", g1_path)->required();
  sep->add_option("--g2", g2_path)->required();
  sep->add_option("--m", m)->capture_default_str();
  sep->add_option("--m0", m0)->capture_default_str();

  std::string samples_path;
  EstimatorOptions est;
  auto *estimate = app.add_subcommand("estimate", "Minimum-KS-distance fit");
  add_family(estimate);
  estimate->add_option("--samples", samples_path, "CSV file, one value per line")->required();
  estimate->add_option("--m", m)->capture_default_str();
  estimate->add_option("--restarts", est.restarts)->capture_default_str();
  estimate->add_option("--max-iter", est.max_iter)->capture_default_str();

  std::string config_path;
  auto *sweep = app.add_subcommand("rate-sweep", "Monte Carlo rate sweep");
  sweep->add_option("--config", config_path, "JSON configuration")->required();

  int reps = 500;
  double lan_u = 12.0, lan_n = 4096;
  auto *lan = app.add_subcommand("lan", "Log-likelihood ratios along the hard instance");
  add_family(lan);
  lan->add_option("--u", lan_u)->capture_default_str();
  lan->add_option("--n", lan_n)->capture_default_str();
  lan->add_option("--reps", reps)->capture_default_str();

  std::size_t dkw_n = 10000;
  int dkw_reps = 1000;
  auto *dkw = app.add_subcommand("dkw", "Quantiles of sqrt(n) KS for a fixed mixture");
  dkw->add_option("--n", dkw_n)->capture_default_str();
  dkw->add_option("--reps", dkw_reps)->capture_default_str();

  std::string instance = "example", n_grid_spec = "1e2:1e6:5";
  ScwOptions scw;
  auto *scwc = app.add_subcommand("scw-check", "Scaling-tree order check");
  scwc->add_option("--instance", instance)
      ->check(CLI::IsMember({"example", "three-level", "constant"}))
      ->capture_default_str();
  scwc->add_option("--n-grid", n_grid_spec, "a:b:k log grid")->capture_default_str();
  scwc->add_option("--snap-tol", scw.snap_tol)->capture_default_str();
  scwc->add_option("--bound", scw.bound)->capture_default_str();

  std::vector<double> power_grid = {256, 1024, 4096, 16384};
  double level = 0.25;
  int power_reps = 500;
  auto *contig = app.add_subcommand("contiguity", "Likelihood-ratio test power along the hard instance");
  add_family(contig);
  contig->add_option("--u", lan_u)->capture_default_str();
  contig->add_option("--n-grid", power_grid)->delimiter(',');
  contig->add_option("--reps", power_reps)->capture_default_str();
  contig->add_option("--level", level)->capture_default_str();

  std::vector<std::string> argv_store = {"mixrate"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char *> argv;
  for (auto &s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError &e) {
    report_error(err, "validation", e.what());
    err << app.help();
    return 2;
  }

  const Outputs io{out_path, csv_path, out};
  try {
    if (nthreads > 0) set_threads(nthreads);

    if (solve->parsed()) {
      const auto g = solve_moment_problem(MomentSequence(moments), d, ThetaBounds{theta_lo, theta_hi});
      io.json_result(to_json(g));
    } else if (hankel->parsed()) {
      const auto rep = hankel_determinants(MomentSequence(moments));
      std::ostringstream os;
      os.precision(17);
      os << "k,det\n";
      for (std::size_t k = 0; k < rep.dets.size(); ++k) os << k + 1 << "," << rep.dets[k] << "\n";
      io.text(os.str());
    } else if (wass->parsed()) {
      const auto a = load_mixing_distribution(g1_path);
      const auto b = load_mixing_distribution(g2_path);
      io.json_result({{"w1", wasserstein_w1(a, b)}});
    } else if (hard->parsed()) {
      HardInstanceSpec spec = default_hard_instance(u, n);
      if (!g0_path.empty()) spec.g0 = load_mixing_distribution(g0_path);
      if (spec.m0() != m0)
        throw ArgumentError("--m0 " + std::to_string(m0) + " does not match the " +
                            std::to_string(spec.m0()) + "-atom centre measure (pass --g0)");
      spec.m = m;
      if (!base_moments.empty())
        spec.base_moments = base_moments;
      else if (spec.d() != 2)
        throw ArgumentError("--base-moments is required unless m - m0 = 1");
      io.json_result(to_json(build_gn(spec)));
    } else if (ident->parsed()) {
      const auto fam = make_family(family, sigma);
      MarginQuery q;
      q.family = fam.get();
      q.support = thetas;
      q.order = order;
      q.search_budget = budget;
      q.seed = seed;
      const auto r = identifiability_margin(q);
      io.json_result({{"margin", r.margin},
                      {"argmin_alpha", std::vector<double>(r.argmin_alpha.begin(), r.argmin_alpha.end())},
                      {"evaluations", r.evaluations}});
    } else if (sep->parsed()) {
      const auto fam = make_family(family, sigma);
      const auto r = separation_ratio(*fam, load_mixing_distribution(g1_path),
                                      load_mixing_distribution(g2_path), m, m0);
      io.json_result({{"ks", r.ks}, {"w1", r.w1}, {"exponent", r.exponent}, {"ratio", r.ratio}});
    } else if (estimate->parsed()) {
      const auto fam = make_family(family, sigma);
      est.seed = seed;
      const auto xs = load_samples_csv(samples_path);
      io.json_result(fit_json(fit_min_distance(xs, *fam, m, est)));
    } else if (sweep->parsed()) {
      const auto cfg = rate_sweep_config_from_json(read_json_file(config_path));
      const auto rep = rate_sweep(cfg);
      io.json_result(to_json(rep));
      std::ostringstream os;
      os.precision(17);
      os << "grid_index,n,replicate,error\n";
      for (std::size_t i = 0; i < rep.n_grid.size(); ++i)
        for (std::size_t r = 0; r < rep.errors[i].size(); ++r)
          os << i << "," << rep.n_grid[i] << "," << r << "," << rep.errors[i][r] << "\n";
      io.csv(os.str());
    } else if (lan->parsed()) {
      LanConfig cfg;
      cfg.family = make_family(family, sigma);
      cfg.u = lan_u;
      cfg.n = lan_n;
      cfg.reps = reps;
      cfg.seed = seed;
      const auto rep = lan_simulate(cfg);
      io.json_result(to_json(rep));
      std::ostringstream os;
      os.precision(17);
      os << "replicate,log_lr\n";
      for (std::size_t r = 0; r < rep.log_lr.size(); ++r) os << r << "," << rep.log_lr[r] << "\n";
      io.csv(os.str());
    } else if (dkw->parsed()) {
      const auto rep = dkw_calibration(dkw_n, dkw_reps, seed);
      io.json_result(to_json(rep));
      std::ostringstream os;
      os.precision(17);
      os << "replicate,scaled_ks\n";
      for (std::size_t r = 0; r < rep.scaled_ks.size(); ++r) os << r << "," << rep.scaled_ks[r] << "\n";
      io.csv(os.str());
    } else if (scwc->parsed()) {
      const auto grid = parse_log_grid(n_grid_spec);
      const auto fam = instance == "example"       ? example_pair_family(grid)
                       : instance == "three-level" ? three_level_family(grid)
                                                   : constant_family(grid);
      io.json_result(scw_json(check_scw(fam, scw)));
    } else if (contig->parsed()) {
      LanConfig cfg;
      cfg.family = make_family(family, sigma);
      cfg.u = lan_u;
      cfg.reps = power_reps;
      cfg.seed = seed;
      const auto rows = contiguity_demo(cfg, to_sizes(power_grid), level);
      json j = json::array();
      std::ostringstream os;
      os.precision(17);
      os << "n,critical,power\n";
      for (const auto &row : rows) {
        j.push_back({{"n", row.n}, {"critical", row.critical}, {"power", row.power}});
        os << row.n << "," << row.critical << "," << row.power << "\n";
      }
      io.json_result({{"u", lan_u}, {"level", level}, {"rows", j}});
      io.csv(os.str());
    }
  } catch (const Error &e) {
    report_error(err, kind_name(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception &e) {
    report_error(err, "internal", e.what());
    return 1;
  }
  return 0;
}

int dispatch(int argc, char **argv) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

} // namespace mixrate::cli
