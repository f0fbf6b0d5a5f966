#include "mixrate/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mixrate/errors.hpp"

namespace mixrate {

MixingDistribution TruthSpec::at(double n) const {
  if (kind == Kind::fixed) {
    if (!distribution) throw ArgumentError("fixed truth needs a distribution");
    return *distribution;
  }
  auto spec = instance;
  spec.n = scale_n.value_or(n);
  return build_gn(spec);
}

SlopeFit loglog_slope(const std::vector<double> &x, const std::vector<double> &y) {
  if (x.size() != y.size() || x.size() < 2) throw ArgumentError("slope fit needs >= 2 points");
  const double k = static_cast<double>(x.size());
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ArgumentError("log-log fit needs positive values");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / k;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  const double slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - my - slope * (lx[i] - mx);
    ssr += r * r;
  }
  const double stderr = x.size() > 2 ? std::sqrt(ssr / (k - 2.0) / sxx) : 0.0;
  return {slope, stderr};
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ArgumentError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

RateSweepReport rate_sweep(const RateSweepConfig &cfg, Execution exec) {
  if (!cfg.family) throw ArgumentError("rate sweep needs a component family");
  if (cfg.reps < 20) throw ArgumentError("rate sweep needs reps >= 20");
  if (cfg.n_grid.size() < 4) throw ArgumentError("rate sweep needs at least 4 grid points");
  if (!std::is_sorted(cfg.n_grid.begin(), cfg.n_grid.end()) || cfg.n_grid.front() < 1)
    throw ArgumentError("n_grid must be increasing positive integers");
  if (cfg.n_grid.back() < 64 * cfg.n_grid.front())
    throw ArgumentError("n_grid must span at least a factor of 64");
  if (cfg.m < 1 || cfg.m0 < 1 || cfg.m0 > cfg.m) throw ArgumentError("need 1 <= m0 <= m");

  const std::size_t grid = cfg.n_grid.size();
  const auto reps = static_cast<std::size_t>(cfg.reps);
  std::vector<MixingDistribution> truths;
  for (auto n : cfg.n_grid) truths.push_back(cfg.truth.at(static_cast<double>(n)));

  RateSweepReport report;
  report.n_grid = cfg.n_grid;
  report.errors.assign(grid, std::vector<double>(reps, std::numeric_limits<double>::quiet_NaN()));
  report.theory_slope = -1.0 / (4.0 * (cfg.m - cfg.m0) + 2.0);

  for_each_index(
      grid * reps,
      [&](std::size_t task) {
        const std::size_t i = task / reps;
        const std::size_t r = task % reps;
        const auto seed = sub_seed(cfg.seed, i, r);
        try {
          const auto xs = sample(*cfg.family, truths[i], cfg.n_grid[i], seed);
          auto opts = cfg.estimator;
          opts.seed = splitmix64(seed);
          const auto fit = fit_min_distance(xs, *cfg.family, cfg.m, opts);
          report.errors[i][r] = wasserstein_error(fit, truths[i]);
        } catch (const Error &) {
          // Recorded as NaN and counted below.
        }
      },
      exec);

  std::size_t failed_total = 0;
  for (std::size_t i = 0; i < grid; ++i) {
    std::vector<double> ok;
    for (double e : report.errors[i])
      if (!std::isnan(e)) ok.push_back(e);
    const int failed = static_cast<int>(reps - ok.size());
    report.failures.push_back(failed);
    failed_total += static_cast<std::size_t>(failed);
    if (ok.empty()) throw Error(ErrorKind::infeasible, "every fit failed at a grid point");
    report.mean.push_back(std::accumulate(ok.begin(), ok.end(), 0.0) / static_cast<double>(ok.size()));
    report.median.push_back(empirical_quantile(ok, 0.5));
    report.q25.push_back(empirical_quantile(ok, 0.25));
    report.q75.push_back(empirical_quantile(ok, 0.75));
  }
  if (static_cast<double>(failed_total) > 0.05 * static_cast<double>(grid * reps)) {
    std::ostringstream os;
    os << failed_total << " of " << grid * reps << " fits failed (more than 5%)";
    throw Error(ErrorKind::infeasible, os.str());
  }

  std::vector<double> ns(cfg.n_grid.begin(), cfg.n_grid.end());
  const auto fit = loglog_slope(ns, report.median);
  report.fitted_slope = fit.slope;
  report.slope_stderr = fit.stderr;
  return report;
}

DkwReport dkw_calibration(std::size_t n, int reps, std::uint64_t seed,
                          std::shared_ptr<const ComponentFamily> family,
                          std::optional<MixingDistribution> truth, Execution exec) {
  if (n < 100) throw ArgumentError("DKW calibration needs n >= 100");
  if (reps < 200) throw ArgumentError("DKW calibration needs reps >= 200");
  if (!family) family = std::make_shared<const GaussianLocationFamily>();
  if (!truth) truth = MixingDistribution({{0.8, -1.0}, {0.2, 4.0}});

  DkwReport report;
  report.n = n;
  report.reps = reps;
  report.scaled_ks.assign(static_cast<std::size_t>(reps), 0.0);
  const double root_n = std::sqrt(static_cast<double>(n));
  for_each_index(
      report.scaled_ks.size(),
      [&](std::size_t r) {
        const EmpiricalCDF ecdf(sample(*family, *truth, n, sub_seed(seed, 0, r)));
        report.scaled_ks[r] = root_n * ks_distance(*family, *truth, ecdf, Execution::serial);
      },
      exec);
  report.q50 = empirical_quantile(report.scaled_ks, 0.5);
  report.q95 = empirical_quantile(report.scaled_ks, 0.95);
  report.q99 = empirical_quantile(report.scaled_ks, 0.99);
  return report;
}

std::optional<double> log_likelihood_ratio(const ComponentFamily &family,
                                           const MixingDistribution &alt,
                                           const MixingDistribution &null,
                                           const std::vector<double> &xs) {
  double z = 0.0;
  for (double x : xs) {
    const double f0 = mixture_pdf(family, null, x);
    if (f0 < 1e-300) return std::nullopt;
    z += std::log1p((mixture_pdf(family, alt, x) - f0) / f0);
  }
  return z;
}

namespace {

struct LanReplicate {
  bool accepted = false;
  double z = 0.0;
  double sum_y = 0.0, sum_y2 = 0.0;
  double sum_q = 0.0, sum_q2 = 0.0;
  std::size_t count = 0;
};

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

} // namespace

LanReport lan_simulate(const LanConfig &cfg, Execution exec) {
  if (!cfg.family) throw ArgumentError("LAN simulation needs a component family");
  if (cfg.u == 0.0) throw ArgumentError("LAN simulation needs u != 0");
  if (cfg.reps < 100) throw ArgumentError("LAN simulation needs reps >= 100");
  if (!(cfg.n >= 1.0)) throw ArgumentError("LAN simulation needs n >= 1");

  auto null_spec = cfg.spec;
  null_spec.u = 0.0;
  null_spec.n = cfg.n;
  auto alt_spec = null_spec;
  alt_spec.u = cfg.u;
  const auto g_null = build_gn(null_spec);
  const auto g_alt = build_gn(alt_spec);

  const int order = 2 * cfg.spec.d() - 1;
  if (order > cfg.family->max_order())
    throw ArgumentError("family max_order is below 2d-1 = " + std::to_string(order));
  const auto centre = cfg.spec.g0.atoms()[cfg.spec.perturbed_index()];
  const double score_scale = centre.weight / factorial(order);
  const auto n = static_cast<std::size_t>(std::llround(cfg.n));

  std::vector<LanReplicate> reps(static_cast<std::size_t>(cfg.reps));
  for_each_index(
      reps.size(),
      [&](std::size_t r) {
        const auto xs = sample(*cfg.family, g_null, n, sub_seed(cfg.seed, 0, r));
        LanReplicate out;
        for (double x : xs) {
          const double f0 = mixture_pdf(*cfg.family, g_null, x);
          if (f0 < 1e-300) {
            reps[r] = LanReplicate{};
            return;
          }
          const double y = (mixture_pdf(*cfg.family, g_alt, x) - f0) / f0;
          const double score = score_scale * cfg.family->pdf_theta_deriv(order, x, centre.theta) / f0;
          const double q = score * score;
          out.z += std::log1p(y);
          out.sum_y += y;
          out.sum_y2 += y * y;
          out.sum_q += q;
          out.sum_q2 += q * q;
        }
        out.count = xs.size();
        out.accepted = true;
        reps[r] = out;
      },
      exec);

  LanReport report;
  report.u = cfg.u;
  report.n = n;
  report.reps = cfg.reps;
  double sy = 0.0, sy2 = 0.0, sq = 0.0, sq2 = 0.0;
  std::size_t count = 0;
  for (const auto &r : reps) {
    if (!r.accepted) {
      ++report.rejected;
      continue;
    }
    report.log_lr.push_back(r.z);
    sy += r.sum_y;
    sy2 += r.sum_y2;
    sq += r.sum_q;
    sq2 += r.sum_q2;
    count += r.count;
  }
  if (report.log_lr.size() < 2) throw Error(ErrorKind::infeasible, "too many rejected replicates");

  const double k = static_cast<double>(report.log_lr.size());
  report.sample_mean = std::accumulate(report.log_lr.begin(), report.log_lr.end(), 0.0) / k;
  double ss = 0.0;
  for (double z : report.log_lr) ss += (z - report.sample_mean) * (z - report.sample_mean);
  report.sample_var = ss / (k - 1.0);

  const double nobs = static_cast<double>(count);
  report.gamma_hat = sq / nobs;
  report.gamma_stderr = std::sqrt(std::max(0.0, sq2 / nobs - report.gamma_hat * report.gamma_hat) / nobs);
  report.y_mean = sy / nobs;
  report.y_stderr = std::sqrt(std::max(0.0, sy2 / nobs - report.y_mean * report.y_mean) / nobs);

  const double shift = cfg.u * cfg.u * report.gamma_hat;
  report.signature_gap = std::abs(report.sample_mean + 0.5 * shift) / shift;
  report.variance_ratio = report.sample_var / shift;
  return report;
}

std::vector<PowerRow> contiguity_demo(const LanConfig &cfg, const std::vector<std::size_t> &n_grid,
                                      double level, Execution exec) {
  if (!cfg.family) throw ArgumentError("contiguity demo needs a component family");
  if (cfg.reps < 100) throw ArgumentError("contiguity demo needs reps >= 100");
  if (!(level > 0.0 && level < 1.0)) throw ArgumentError("level must lie in (0, 1)");
  if (n_grid.empty()) throw ArgumentError("n_grid must be nonempty");

  std::vector<PowerRow> rows;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    auto null_spec = cfg.spec;
    null_spec.u = 0.0;
    null_spec.n = static_cast<double>(n_grid[i]);
    auto alt_spec = null_spec;
    alt_spec.u = cfg.u;
    const auto g_null = build_gn(null_spec);
    const auto g_alt = build_gn(alt_spec);

    const auto reps = static_cast<std::size_t>(cfg.reps);
    std::vector<double> z_null(reps), z_alt(reps);
    std::vector<char> ok(reps, 1);
    for_each_index(
        reps,
        [&](std::size_t r) {
          const auto seed = sub_seed(cfg.seed, i, r);
          const auto x0 = sample(*cfg.family, g_null, n_grid[i], seed);
          const auto x1 = sample(*cfg.family, g_alt, n_grid[i], seed);
          const auto a = log_likelihood_ratio(*cfg.family, g_alt, g_null, x0);
          const auto b = log_likelihood_ratio(*cfg.family, g_alt, g_null, x1);
          if (!a || !b) {
            ok[r] = 0;
            return;
          }
          z_null[r] = *a;
          z_alt[r] = *b;
        },
        exec);
    std::vector<double> nulls, alts;
    for (std::size_t r = 0; r < reps; ++r)
      if (ok[r]) {
        nulls.push_back(z_null[r]);
        alts.push_back(z_alt[r]);
      }
    if (nulls.empty()) throw Error(ErrorKind::infeasible, "every replicate underflowed");

    // Randomized Neyman-Pearson test: reject when Z > c, and with probability
    // gamma when Z == c, so the null rejection rate equals the level.
    std::sort(nulls.begin(), nulls.end());
    const double total = static_cast<double>(nulls.size());
    double c = nulls.back();
    for (double v : nulls) {
      const auto above = nulls.end() - std::upper_bound(nulls.begin(), nulls.end(), v);
      if (static_cast<double>(above) / total <= level) {
        c = v;
        break;
      }
    }
    const auto above = static_cast<double>(nulls.end() - std::upper_bound(nulls.begin(), nulls.end(), c));
    const auto [eq_lo, eq_hi] = std::equal_range(nulls.begin(), nulls.end(), c);
    const auto equal = static_cast<double>(eq_hi - eq_lo);
    const double gamma = equal > 0.0 ? (level * total - above) / equal : 0.0;

    double power = 0.0;
    for (double z : alts) power += z > c ? 1.0 : (z == c ? gamma : 0.0);
    rows.push_back({n_grid[i], c, power / static_cast<double>(alts.size())});
  }
  return rows;
}

} // namespace mixrate
