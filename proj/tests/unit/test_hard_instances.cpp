#include <doctest.h>

#include <cmath>

#include "mixrate/errors.hpp"
#include "mixrate/hard_instances.hpp"
#include "support.hpp"

using namespace mixrate;

namespace {

// Direct W1 of a measure against delta_0: sum of w_j |theta_j|.
double w_to_origin(const MixingDistribution &g) {
  double s = 0.0;
  for (const auto &a : g.atoms()) s += a.weight * std::abs(a.theta);
  return s;
}

} // namespace

TEST_CASE("paper example instances") {
  for (double n : {1.0, 100.0, 1e4, 1e6}) {
    const double s = std::pow(n, -1.0 / 6.0);
    const auto g0 = build_gn(default_hard_instance(0.0, n));
    REQUIRE(g0.size() == 2);
    CHECK(g0.atoms()[0].weight == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g0.atoms()[0].theta == doctest::Approx(-2.0 * s).epsilon(1e-12));
    CHECK(g0.atoms()[1].theta == doctest::Approx(2.0 * s).epsilon(1e-12));
    const auto g12 = build_gn(default_hard_instance(12.0, n));
    REQUIRE(g12.size() == 2);
    CHECK(g12.atoms()[0].weight == doctest::Approx(0.8).epsilon(1e-10));
    CHECK(g12.atoms()[0].theta == doctest::Approx(-s).epsilon(1e-10));
    CHECK(g12.atoms()[1].theta == doctest::Approx(4.0 * s).epsilon(1e-10));
  }
}

TEST_CASE("homothety in n") {
  const auto base = default_hard_instance();
  for (double n : {10.0, 1e3, 1e5}) {
    auto a = base, b = base, a1 = base, b1 = base;
    a.u = a1.u = -3.0;
    b.u = b1.u = 7.0;
    a.n = b.n = n;
    const double expected = std::pow(n, -1.0 / 6.0) * wasserstein_w1(build_gn(a1), build_gn(b1));
    CHECK(std::abs(wasserstein_w1(build_gn(a), build_gn(b)) - expected) <= 1e-12);
    CHECK(build_gn(a) == homothety(build_gn(a1), 0.0, std::pow(n, -1.0 / 6.0)));
  }
}

TEST_CASE("convergence to g0") {
  const std::vector<double> grid = {1e2, 1e3, 1e4, 1e5};
  const auto rep0 = convergence_to_g0(default_hard_instance(), 0.0, grid);
  const auto rep12 = convergence_to_g0(default_hard_instance(), 12.0, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = std::pow(grid[i], -1.0 / 6.0);
    CHECK(rep0.rows[i].second == doctest::Approx(2.0 * s).epsilon(1e-12));
    CHECK(rep12.rows[i].second == doctest::Approx(1.6 * s).epsilon(1e-10));
    CHECK(rep12.rows[i].second ==
          doctest::Approx(w_to_origin(build_gn(default_hard_instance(12.0, grid[i])))).epsilon(1e-14));
    CHECK(std::abs(rep12.rows[i].second / s - rep12.c_u) <= 1e-12);
  }
  CHECK_THROWS_AS(convergence_to_g0(default_hard_instance(), 0.0, {}), ArgumentError);
}

TEST_CASE("separation rate") {
  const std::vector<double> grid = {1.0, 1e2, 1e4, 1e6};
  const auto rep = separation_rate(default_hard_instance(), 0.0, 12.0, grid);
  CHECK(rep.c == doctest::Approx(1.8).epsilon(1e-10));
  for (const auto &[n, w] : rep.rows) {
    CHECK(w == doctest::Approx(1.8 * std::pow(n, -1.0 / 6.0)).epsilon(1e-10));
    CHECK(std::abs(w * std::pow(n, 1.0 / 6.0) - rep.c) <= 1e-10);
  }
  CHECK_THROWS_AS(separation_rate(default_hard_instance(), 3.0, 3.0, grid), ArgumentError);

  testing::Rng rng(12);
  std::uniform_real_distribution<double> ud(-5.0, 12.0);
  for (int t = 0; t < 50; ++t) {
    const double u1 = ud(rng), u2 = ud(rng);
    CHECK(separation_rate(default_hard_instance(), u1, u2, {1e3}).c > 0.0);
  }
}

TEST_CASE("exact log-log slope") {
  std::vector<double> lx, ly;
  for (double n : {1e2, 1e3, 1e4, 1e5, 1e6}) {
    auto a = default_hard_instance(1.0, n), b = default_hard_instance(9.0, n);
    lx.push_back(std::log(n));
    ly.push_back(std::log(wasserstein_w1(build_gn(a), build_gn(b))));
  }
  for (std::size_t i = 1; i < lx.size(); ++i)
    CHECK((ly[i] - ly[i - 1]) / (lx[i] - lx[i - 1]) == doctest::Approx(-1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("moment pinning of the perturbed block") {
  for (int u = -5; u <= 12; ++u)
    for (double n : {1e2, 1e4}) {
      const auto spec = default_hard_instance(u, n);
      const auto g = build_gn(spec);
      const double s = spec.shrink();
      const double expected[] = {1.0, 0.0, 4.0, static_cast<double>(u)};
      for (int k = 0; k <= 3; ++k) {
        double mk = 0.0;
        for (const auto &a : g.atoms()) mk += a.weight * std::pow(a.theta / s, k);
        CHECK(std::abs(mk - expected[k]) <= 1e-8);
      }
    }
}

TEST_CASE("multi-atom centre and higher d") {
  HardInstanceSpec spec;
  spec.g0 = MixingDistribution({{0.4, -3.0}, {0.6, 2.0}});
  spec.m = 3;
  spec.u = 5.0;
  spec.n = 1000.0;
  CHECK(spec.d() == 2);
  const auto g = build_gn(spec);
  REQUIRE(g.size() == 3);
  CHECK(g.atoms()[0].theta == -3.0);
  CHECK(g.atoms()[0].weight == doctest::Approx(0.4));
  double block_u = 0.0;
  for (std::size_t j = 1; j < 3; ++j)
    block_u += g.atoms()[j].weight / 0.6 * std::pow((g.atoms()[j].theta - 2.0) / spec.shrink(), 3);
  CHECK(block_u == doctest::Approx(5.0).epsilon(1e-9));

  HardInstanceSpec d3;
  d3.m = 3;
  d3.base_moments = {0.0, 1.0, 0.0, 3.0}; // standard normal moments
  d3.u = 0.5;
  d3.n = 1e6;
  CHECK(d3.d() == 3);
  const auto g3 = build_gn(d3);
  CHECK(g3.size() == 3);
  double m5 = 0.0;
  for (const auto &a : g3.atoms()) m5 += a.weight * std::pow(a.theta / d3.shrink(), 5);
  CHECK(m5 == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("hard instance errors") {
  auto spec = default_hard_instance(1000.0, 1.0);
  CHECK_THROWS_AS(build_gn(spec), DomainError);
  try {
    build_gn(spec);
  } catch (const DomainError &e) {
    CHECK(std::string(e.what()).find("larger n") != std::string::npos);
  }
  auto bad = default_hard_instance(0.0, 10.0);
  bad.base_moments = {0.0, -1.0};
  CHECK_THROWS_AS(build_gn(bad), InfeasibleError);
  auto wrong = default_hard_instance();
  wrong.base_moments = {0.0};
  CHECK_THROWS_AS(build_gn(wrong), ArgumentError);
  auto edge = default_hard_instance();
  edge.g0 = MixingDistribution::dirac(10.0);
  CHECK_THROWS_AS(build_gn(edge), ArgumentError);
  CHECK_NOTHROW(default_hard_instance().validate());
}

TEST_CASE("u max schedule") {
  CHECK(default_u_max(0.0) == 0.0);
  CHECK(default_u_max(std::exp(2.0) - 1.0) == doctest::Approx(2.0));
  // H(u_max(n)) n^{-1/6} -> 0 for the default instance: the block spread grows
  // slower than the shrink factor.
  double prev = 1e300;
  for (double n : {1e4, 1e6, 1e8, 1e10}) {
    const auto g = build_gn(default_hard_instance(default_u_max(n), n));
    const double spread = g.atoms().back().theta - g.atoms().front().theta;
    CHECK(spread < prev);
    prev = spread;
  }
}
