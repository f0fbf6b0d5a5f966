// Acceptance gate. Each criterion prints one PASS/FAIL line; the exit status
// is nonzero if any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "mixrate/experiments.hpp"
#include "mixrate/hard_instances.hpp"
#include "mixrate/identifiability.hpp"
#include "mixrate/measures.hpp"
#include "mixrate/mixture_model.hpp"
#include "mixrate/moment_problem.hpp"
#include "mixrate/scaling_tree.hpp"
#include "../support.hpp"

using namespace mixrate;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string &what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

const GaussianLocationFamily gauss;

double fd_jacobian_det(const MixingDistribution &g) {
  const int d = static_cast<int>(g.size());
  std::vector<double> x = g.weights();
  for (double t : g.locations()) x.push_back(t);
  auto phi = [&](const std::vector<double> &p) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * d);
    for (int k = 0; k < 2 * d; ++k)
      for (int j = 0; j < d; ++j)
        out(k) += p[static_cast<std::size_t>(j)] * std::pow(p[static_cast<std::size_t>(d + j)], k);
    return out;
  };
  const double h = 1e-5;
  Eigen::MatrixXd jac(2 * d, 2 * d);
  for (int c = 0; c < 2 * d; ++c) {
    auto xp = x, xm = x;
    xp[static_cast<std::size_t>(c)] += h;
    xm[static_cast<std::size_t>(c)] -= h;
    jac.col(c) = (phi(xp) - phi(xm)) / (2.0 * h);
  }
  return jac.determinant();
}

MixingDistribution paper_first() { return MixingDistribution({{0.5, -2.0}, {0.5, 2.0}}); }
MixingDistribution paper_second() { return MixingDistribution({{0.8, -1.0}, {0.2, 4.0}}); }

void criterion1(Outcome &o) {
  const auto g = solve_moment_problem(MomentSequence({1.0, 0.0, 4.0, 12.0}), 2);
  const double expected[2][2] = {{0.8, -1.0}, {0.2, 4.0}};
  double err = g.size() == 2 ? 0.0 : 1e300;
  for (std::size_t j = 0; j < std::min<std::size_t>(2, g.size()); ++j)
    err = std::max({err, std::abs(g.atoms()[j].weight - expected[j][0]),
                    std::abs(g.atoms()[j].theta - expected[j][1])});
  o.detail << "paper coordinate error " << err;
  o.require(err <= 1e-8, "paper solve <= 1e-8");

  testing::Rng rng(2024);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const auto h = testing::random_mixing(rng, 4, -3.0, 3.0, 0.1, 0.05);
    const auto back = solve_moment_problem(phi_map(h), static_cast<int>(h.size()), h.bounds());
    worst = std::max(worst, wasserstein_w1(back, h));
  }
  o.detail << ", worst round-trip W " << worst;
  o.require(worst <= 1e-7, "round trip <= 1e-7");
}

void criterion2(Outcome &o) {
  testing::Rng rng(77);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto g = testing::random_mixing(rng, 3, -1.5, 1.5, 0.2, 0.05);
    const double closed = phi_jacobian_det(g);
    worst = std::max(worst, std::abs(fd_jacobian_det(g) - closed) / std::abs(closed));
  }
  o.detail << "worst relative error " << worst;
  o.require(worst <= 1e-5, "relative error <= 1e-5");
}

void criterion3(Outcome &o) {
  testing::Rng rng(3);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto a = testing::random_mixing(rng, 5);
    const auto b = testing::random_mixing(rng, 5);
    std::vector<double> kinks = a.locations();
    for (double x : b.locations()) kinks.push_back(x);
    std::sort(kinks.begin(), kinks.end());
    worst = std::max(worst, std::abs(wasserstein_w1(a, b) - wasserstein_dual_lb(a, b, kinks)));
  }
  o.detail << "worst primal-dual gap " << worst;
  o.require(worst <= 1e-9, "primal = dual within 1e-9");

  double scaling = 0.0;
  for (double n = 1.0; n <= 1e8; n *= 10.0) {
    const double s = std::pow(n, -1.0 / 6.0);
    const double w = wasserstein_w1(homothety(paper_first(), 0.0, s), homothety(paper_second(), 0.0, s));
    scaling = std::max(scaling, std::abs(w - 1.8 * s));
  }
  o.detail << ", worst |W - 1.8 n^{-1/6}| " << scaling;
  o.require(scaling <= 1e-12, "n-scaling exact to 1e-12");
}

void criterion4(Outcome &o) {
  double worst = 0.0;
  for (int u = -5; u <= 12; ++u)
    for (double n : {1e2, 1e3, 1e4, 1e5, 1e6}) {
      const auto spec = default_hard_instance(u, n);
      const auto g = build_gn(spec);
      const double expected[] = {1.0, 0.0, 4.0, static_cast<double>(u)};
      for (int k = 0; k <= 3; ++k) {
        double mk = 0.0;
        for (const auto &a : g.atoms()) mk += a.weight * std::pow(a.theta / spec.shrink(), k);
        worst = std::max(worst, std::abs(mk - expected[k]));
      }
    }
  o.detail << "worst block-moment error " << worst;
  o.require(worst <= 1e-8, "block moments within 1e-8");

  const std::vector<double> grid = {1e2, 1e3, 1e4, 1e5, 1e6};
  double spread = 0.0;
  for (auto [u1, u2] : std::vector<std::pair<double, double>>{{0, 12}, {-5, 5}, {3, 4}, {-2, 11}}) {
    std::vector<double> scaled;
    for (double n : grid)
      scaled.push_back(wasserstein_w1(build_gn(default_hard_instance(u1, n)), build_gn(default_hard_instance(u2, n))) *
                       std::pow(n, 1.0 / 6.0));
    const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
    spread = std::max(spread, *hi - *lo);
  }
  o.detail << ", worst spread of W n^{1/6} " << spread;
  o.require(spread <= 1e-10, "W n^{1/6} constant to 1e-10");
}

void criterion5(Outcome &o) {
  const auto r = dkw_calibration(10000, 1000, 5);
  o.detail << "q50 " << r.q50 << ", q95 " << r.q95;
  o.require(r.q95 <= 1.63, "q95 <= 1.63");
  o.require(r.q50 >= 0.7 && r.q50 <= 1.0, "median in [0.7, 1.0]");
}

void criterion6(Outcome &o) {
  RateSweepConfig a;
  a.family = FamilyRegistry::instance().make("gaussian", {});
  a.truth.kind = TruthSpec::Kind::fixed;
  a.truth.distribution = MixingDistribution::dirac(0.0);
  a.m = a.m0 = 1;
  a.n_grid = {256, 1024, 4096, 16384};
  a.reps = 100;
  a.seed = 6;

  RateSweepConfig b = a;
  b.truth.kind = TruthSpec::Kind::hard_instance;
  b.truth.distribution.reset();
  b.truth.instance = default_hard_instance(12.0);
  b.m = 2;
  b.m0 = 1;

  const auto ra = rate_sweep(a);
  const auto rb = rate_sweep(b);
  o.detail << "slope(a) " << ra.fitted_slope << " +- " << ra.slope_stderr << ", slope(b) " << rb.fitted_slope
           << " +- " << rb.slope_stderr;
  o.require(ra.fitted_slope >= -0.62 && ra.fitted_slope <= -0.38, "(a) slope in [-0.62, -0.38]");
  o.require(rb.fitted_slope > -0.40 && rb.fitted_slope < -0.04, "(b) slope in (-0.40, -0.04)");
  o.require(rb.fitted_slope - ra.fitted_slope >= 0.1, "(c) difference >= 0.1");
}

void criterion7(Outcome &o) {
  LanConfig cfg;
  cfg.family = FamilyRegistry::instance().make("gaussian", {});
  cfg.u = 12.0;
  cfg.reps = 500;
  cfg.seed = 7;
  cfg.n = 4096;
  const auto mid = lan_simulate(cfg);
  const double scale = cfg.u * cfg.u * mid.gamma_hat;
  const double var_ratio = mid.sample_var / scale;
  o.detail << "n=4096 gap " << mid.signature_gap << ", var ratio " << var_ratio;
  o.require(mid.signature_gap <= 0.25, "gap <= 0.25");
  o.require(var_ratio >= 0.5 && var_ratio <= 2.0, "variance ratio in [0.5, 2]");
  cfg.n = 256;
  const auto small = lan_simulate(cfg);
  cfg.n = 16384;
  const auto large = lan_simulate(cfg);
  o.detail << ", gap(256) " << small.signature_gap << ", gap(16384) " << large.signature_gap;
  o.require(large.signature_gap <= small.signature_gap, "gap(16384) <= gap(256)");
}

void criterion8(Outcome &o) {
  LanConfig cfg;
  cfg.family = FamilyRegistry::instance().make("gaussian", {});
  cfg.u = 12.0;
  cfg.reps = 500;
  cfg.seed = 8;
  std::vector<std::size_t> grid;
  for (std::size_t n = 256; n <= 16384; n *= 2) grid.push_back(n);
  const auto rows = contiguity_demo(cfg, grid, 0.25);
  double worst = 0.0;
  o.detail << "power";
  for (const auto &r : rows) {
    o.detail << " " << r.n << ":" << r.power;
    worst = std::max(worst, r.power);
  }
  o.require(worst <= 0.95, "power <= 0.95 at every n");
}

void criterion9(Outcome &o) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  double min_ratio = 1e300, worst_degradation = 0.0;
  for (int t = 0; t < 200; ++t) {
    const double u1 = u(rng), u2 = u(rng);
    double lo = 1e300, hi = 0.0;
    for (double n : {1e2, 1e3, 1e4}) {
      const auto r = separation_ratio(gauss, build_gn(default_hard_instance(u1, n)),
                                      build_gn(default_hard_instance(u2, n)), 2, 1);
      lo = std::min(lo, r.ratio);
      hi = std::max(hi, r.ratio);
    }
    min_ratio = std::min(min_ratio, lo);
    worst_degradation = std::max(worst_degradation, hi / lo);
  }
  o.detail << "min ratio " << min_ratio << ", worst max/min " << worst_degradation;
  o.require(min_ratio > 0.0, "min ratio > 0");
  o.require(worst_degradation <= 10.0, "degradation <= 10x");
}

void criterion10(Outcome &o) {
  const auto grid = parse_log_grid("1e2:1e6:9");
  for (const auto &fam : {example_pair_family(grid), three_level_family(grid)}) {
    const auto r = check_scw(fam);
    o.detail << fam.name << " ratio [" << r.ratio_range.first << ", " << r.ratio_range.second << "] ";
    o.require(r.pass, fam.name + " PASS");
  }
}

void criterion11(Outcome &o) {
  auto margin = [](double gap) {
    MarginQuery q;
    q.family = &gauss;
    q.support = {0.0, gap};
    q.order = 2;
    q.search_budget = 10000;
    q.seed = 11;
    return identifiability_margin(q).margin;
  };
  const double base = margin(5.0);
  o.detail << "margin(0,5) " << base << ", halvings";
  o.require(base > 0.01, "margin > 0.01");
  double prev = base;
  for (double gap : {1.0, 0.5, 0.25, 0.125}) {
    const double m = margin(gap);
    o.detail << " " << m;
    o.require(m < prev, "monotone decrease at gap " + std::to_string(gap));
    prev = m;
  }
}

const std::vector<std::function<void(Outcome &)>> kCriteria = {
    criterion1, criterion2, criterion3, criterion4,  criterion5, criterion6,
    criterion7, criterion8, criterion9, criterion10, criterion11};

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"mixrate acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-11); default all")->check(CLI::Range(0, 11));
  CLI11_PARSE(app, argc, argv);

  int failures = 0;
  for (int k = 1; k <= static_cast<int>(kCriteria.size()); ++k) {
    if (only != 0 && k != only) continue;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      kCriteria[static_cast<std::size_t>(k - 1)](o);
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s (%.2f s) %s\n", k, o.pass ? "PASS" : "FAIL", secs, o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
