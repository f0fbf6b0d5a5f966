#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mixrate/errors.hpp"
#include "mixrate/mixture_model.hpp"
#include "support.hpp"

using namespace mixrate;

namespace {

const GaussianLocationFamily gauss;

// Composite Simpson on [a, b] with an even number of panels.
template <class F> double simpson(F f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// A deliberately broken family: pdf is off by a factor of two.
class BadFamily final : public ComponentFamily {
public:
  std::string name() const override { return "bad"; }
  int max_order() const noexcept override { return 2; }
  ThetaBounds theta_bounds() const noexcept override { return {}; }
  double scale() const noexcept override { return 1.0; }
  double cdf(double x, double t) const override { return gauss.cdf(x, t); }
  double pdf(double x, double t) const override { return 2.0 * gauss.pdf(x, t); }
  double cdf_theta_deriv(int p, double x, double t) const override { return gauss.cdf_theta_deriv(p, x, t); }
  double pdf_theta_deriv(int p, double x, double t) const override { return gauss.pdf_theta_deriv(p, x, t); }
  double draw(Rng &rng, double t) const override { return gauss.draw(rng, t); }
};

} // namespace

TEST_CASE("mixture cdf examples") {
  CHECK(mixture_cdf(gauss, MixingDistribution::dirac(0), 0.0) == doctest::Approx(0.5));
  CHECK(mixture_cdf(gauss, MixingDistribution({{0.5, -1.0}, {0.5, 1.0}}), 0.0) == doctest::Approx(0.5));
  CHECK(mixture_cdf(gauss, MixingDistribution::dirac(0), 1.0) ==
        doctest::Approx(testing::std_normal_cdf(1.0)).epsilon(1e-14));
}

TEST_CASE("mixture pdf examples") {
  const double phi0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  CHECK(mixture_pdf(gauss, MixingDistribution::dirac(0), 0.0) == doctest::Approx(phi0).epsilon(1e-14));
  CHECK(mixture_pdf(gauss, MixingDistribution({{0.5, -1.0}, {0.5, 1.0}}), 0.0) ==
        doctest::Approx(std::exp(-0.5) * phi0).epsilon(1e-14));
}

TEST_CASE("mixture pdf integrates to one") {
  testing::Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto g = testing::random_mixing(rng, 4);
    const double mass = simpson([&](double x) { return mixture_pdf(gauss, g, x); }, -15.0, 15.0, 6000);
    CHECK(std::abs(mass - 1.0) <= 1e-8);
  }
}

TEST_CASE("cdf derivative vector") {
  const auto v = cdf_deriv_vector(gauss, 3, 0.7, 0.7);
  REQUIRE(v.size() == 4);
  CHECK(v[0] == doctest::Approx(0.5));
  CHECK(v[1] == doctest::Approx(-1.0 / std::sqrt(2.0 * std::numbers::pi)));
  CHECK(std::abs(v[2]) <= 1e-15);
  const double h = 1e-4;
  const double fd = (gauss.cdf_theta_deriv(2, 1.0, h) - gauss.cdf_theta_deriv(2, 1.0, -h)) / (2 * h);
  CHECK(std::abs(gauss.cdf_theta_deriv(3, 1.0, 0.0) - fd) <= 1e-5);
  CHECK_THROWS_AS(cdf_deriv_vector(gauss, 9, 0.0, 0.0), ArgumentError);
}

TEST_CASE("derivative consistency over a grid") {
  const double h = 1e-4;
  for (int p = 1; p <= 8; ++p)
    for (double x = -3.0; x <= 3.0; x += 0.5)
      for (double t : {-1.0, 0.0, 0.8}) {
        const double exact = gauss.cdf_theta_deriv(p, x, t);
        const double fd =
            (gauss.cdf_theta_deriv(p - 1, x, t + h) - gauss.cdf_theta_deriv(p - 1, x, t - h)) / (2 * h);
        CHECK(std::abs(exact - fd) <= 1e-4 * std::max(1.0, std::abs(exact)));
        const double exact_pdf = gauss.pdf_theta_deriv(p, x, t);
        const double fd_pdf =
            (gauss.pdf_theta_deriv(p - 1, x, t + h) - gauss.pdf_theta_deriv(p - 1, x, t - h)) / (2 * h);
        CHECK(std::abs(exact_pdf - fd_pdf) <= 1e-4 * std::max(1.0, std::abs(exact_pdf)));
      }
}

TEST_CASE("gaussian derivative identity") {
  // F^{(p)}(x, theta) = (-1)^p f^{(p-1)}(x - theta) for p >= 1.
  for (int p = 1; p <= 6; ++p)
    for (double z : {-2.0, -0.3, 0.0, 1.1}) {
      const double fp = gauss.pdf_theta_deriv(p - 1, z, 0.0) * ((p - 1) % 2 ? -1.0 : 1.0);
      CHECK(gauss.cdf_theta_deriv(p, z, 0.0) == doctest::Approx((p % 2 ? -1.0 : 1.0) * fp).epsilon(1e-12));
    }
}

TEST_CASE("monotone cdf and Lipschitz transfer") {
  testing::Rng rng(8);
  const double k0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  for (int t = 0; t < 1000; ++t) {
    const auto a = testing::random_mixing(rng, 4);
    const auto b = testing::random_mixing(rng, 4);
    const double w = wasserstein_w1(a, b);
    double prev = 0.0;
    for (double x = -6.0; x <= 6.0; x += 0.25) {
      const double fa = mixture_cdf(gauss, a, x);
      CHECK(fa >= prev);
      prev = fa;
      CHECK(std::abs(fa - mixture_cdf(gauss, b, x)) <= k0 * w + 1e-14);
    }
  }
}

TEST_CASE("sampling") {
  const auto g = MixingDistribution::dirac(0);
  CHECK_THROWS_AS(sample(gauss, g, 0, 1), ArgumentError);
  const auto xs = sample(gauss, g, 100000, 42);
  double mean = 0.0;
  for (double x : xs) mean += x / static_cast<double>(xs.size());
  CHECK(std::abs(mean) <= 4.0 / std::sqrt(1e5));
  CHECK(sample(gauss, g, 100, 42) == sample(gauss, g, 100, 42));
  CHECK(sample(gauss, g, 100, 42) != sample(gauss, g, 100, 43));
  const auto two = sample(gauss, MixingDistribution({{0.8, -1.0}, {0.2, 4.0}}), 50000, 9);
  int right = 0;
  for (double x : two) right += x > 1.5;
  CHECK(right / 50000.0 == doctest::Approx(0.8 * (1 - testing::std_normal_cdf(2.5)) +
                                           0.2 * testing::std_normal_cdf(2.5)).epsilon(0.03));
}

TEST_CASE("registry and validation") {
  auto fam = FamilyRegistry::instance().make("gaussian", {{"sigma", 2.0}});
  CHECK(fam->scale() == 2.0);
  CHECK_THROWS_AS(FamilyRegistry::instance().make("cauchy", {}), ArgumentError);
  CHECK_THROWS_AS(FamilyRegistry::instance().make("gaussian", {{"sigma", -1.0}}), ArgumentError);
  CHECK_NOTHROW(validate_family(gauss));
  CHECK_THROWS_AS(validate_family(BadFamily()), ArgumentError);
  FamilyRegistry::instance().add("bad", [](const std::map<std::string, double> &) {
    return std::make_shared<const BadFamily>();
  });
  CHECK_THROWS_AS(FamilyRegistry::instance().make("bad", {}), ArgumentError);
}

TEST_CASE("hermite polynomials") {
  CHECK(hermite_he(0, 0.3) == 1.0);
  CHECK(hermite_he(3, 2.0) == doctest::Approx(8.0 - 6.0));
  CHECK(hermite_he(4, 1.0) == doctest::Approx(1.0 - 6.0 + 3.0));
}

TEST_CASE("unbiased mixing moment estimate") {
  const MixingDistribution g({{0.8, -1.0}, {0.2, 4.0}});
  const auto xs = sample(gauss, g, 200000, 5);
  const auto m2 = gauss.mixing_moment_estimate(xs, 2);
  REQUIRE(m2.has_value());
  CHECK(*m2 == doctest::Approx(4.0).epsilon(0.03));
}
