#include "mixrate/mixture_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mixrate/errors.hpp"

namespace mixrate {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double std_normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
double std_normal_cdf(double z) { return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0); }

} // namespace

double hermite_he(int n, double z) {
  if (n < 0) throw ArgumentError("Hermite degree must be >= 0");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = z;
  for (int k = 1; k < n; ++k) {
    const double next = z * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

GaussianLocationFamily::GaussianLocationFamily(double sigma, int max_order, ThetaBounds bounds)
    : sigma_(sigma), max_order_(max_order), bounds_(bounds) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ArgumentError("sigma must be > 0");
  if (max_order < 0) throw ArgumentError("max_order must be >= 0");
}

double GaussianLocationFamily::cdf(double x, double theta) const {
  return std_normal_cdf((x - theta) / sigma_);
}

double GaussianLocationFamily::pdf(double x, double theta) const {
  return std_normal_pdf((x - theta) / sigma_) / sigma_;
}

// d^p/dtheta^p phi((x - theta)/sigma)/sigma = He_p(z) phi(z) / sigma^{p+1}.
double GaussianLocationFamily::pdf_theta_deriv(int p, double x, double theta) const {
  if (p < 0 || p > max_order_) throw ArgumentError("derivative order out of range");
  const double z = (x - theta) / sigma_;
  return hermite_he(p, z) * std_normal_pdf(z) / std::pow(sigma_, p + 1);
}

// F^{(p)} = -He_{p-1}(z) phi(z) / sigma^p for p >= 1.
double GaussianLocationFamily::cdf_theta_deriv(int p, double x, double theta) const {
  if (p < 0 || p > max_order_) throw ArgumentError("derivative order out of range");
  if (p == 0) return cdf(x, theta);
  const double z = (x - theta) / sigma_;
  return -hermite_he(p - 1, z) * std_normal_pdf(z) / std::pow(sigma_, p);
}

double GaussianLocationFamily::draw(Rng &rng, double theta) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  return theta + sigma_ * normal(rng);
}

// E[sigma^k He_k(X / sigma)] = theta^k for X ~ N(theta, sigma^2).
std::optional<double>
GaussianLocationFamily::mixing_moment_estimate(const std::vector<double> &sample, int k) const {
  if (sample.empty() || k < 0) return std::nullopt;
  double s = 0.0;
  for (double x : sample) s += hermite_he(k, x / sigma_);
  return std::pow(sigma_, k) * s / static_cast<double>(sample.size());
}

void validate_family(const ComponentFamily &family) {
  const auto bounds = family.theta_bounds();
  const double s = family.scale();
  if (!(s > 0.0)) throw ArgumentError(family.name() + ": scale() must be positive");
  const double mid = std::clamp(0.0, bounds.lo, bounds.hi);
  const std::vector<double> thetas = {std::clamp(mid - s, bounds.lo, bounds.hi), mid,
                                      std::clamp(mid + s, bounds.lo, bounds.hi)};
  auto fail = [&](const std::string &what, double x, double theta) {
    std::ostringstream os;
    os << family.name() << ": " << what << " at x=" << x << ", theta=" << theta;
    throw ArgumentError(os.str());
  };

  for (double theta : thetas) {
    if (std::abs(family.cdf(theta - 40.0 * s, theta)) > 1e-8) fail("cdf lower limit != 0", theta - 40.0 * s, theta);
    if (std::abs(family.cdf(theta + 40.0 * s, theta) - 1.0) > 1e-8) fail("cdf upper limit != 1", theta + 40.0 * s, theta);

    // Composite Simpson on [theta - 40s, theta + 40s].
    const int panels = 8000;
    const double a = theta - 40.0 * s;
    const double h = 80.0 * s / panels;
    double integral = family.pdf(a, theta) + family.pdf(a + panels * h, theta);
    double prev_cdf = family.cdf(a, theta);
    for (int i = 1; i < panels; ++i) {
      const double x = a + i * h;
      integral += (i % 2 ? 4.0 : 2.0) * family.pdf(x, theta);
      const double c = family.cdf(x, theta);
      if (c < prev_cdf - 1e-15) fail("cdf decreasing", x, theta);
      prev_cdf = c;
    }
    integral *= h / 3.0;
    if (std::abs(integral - 1.0) > 1e-8) fail("pdf does not integrate to 1", a, theta);

    if (family.cdf_theta_deriv(0, theta + 0.3 * s, theta) != family.cdf(theta + 0.3 * s, theta))
      fail("cdf_theta_deriv(0) != cdf", theta + 0.3 * s, theta);

    const double step = 1e-4 * s;
    for (int p = 1; p <= family.max_order(); ++p) {
      for (double dx : {-2.0, -0.7, 0.0, 0.4, 1.5}) {
        const double x = theta + dx * s;
        const double exact = family.cdf_theta_deriv(p, x, theta);
        const double fd = (family.cdf_theta_deriv(p - 1, x, theta + step) -
                           family.cdf_theta_deriv(p - 1, x, theta - step)) /
                          (2.0 * step);
        if (std::abs(exact - fd) > 1e-5 * std::max(1.0, std::abs(exact)))
          fail("cdf_theta_deriv(" + std::to_string(p) + ") inconsistent with finite difference",
               x, theta);
      }
    }
  }
}

FamilyRegistry::FamilyRegistry() {
  factories_["gaussian"] = [](const std::map<std::string, double> &params) {
    double sigma = 1.0;
    if (auto it = params.find("sigma"); it != params.end()) sigma = it->second;
    return std::make_shared<const GaussianLocationFamily>(sigma);
  };
}

FamilyRegistry &FamilyRegistry::instance() {
  static FamilyRegistry registry;
  return registry;
}

void FamilyRegistry::add(const std::string &name, FamilyFactory factory) {
  factories_[name] = [factory = std::move(factory)](const std::map<std::string, double> &p) {
    auto fam = factory(p);
    validate_family(*fam);
    return fam;
  };
}

std::shared_ptr<const ComponentFamily>
FamilyRegistry::make(const std::string &name, const std::map<std::string, double> &params) const {
  auto it = factories_.find(name);
  if (it == factories_.end()) throw ArgumentError("unknown component family '" + name + "'");
  return it->second(params);
}

std::vector<std::string> FamilyRegistry::names() const {
  std::vector<std::string> out;
  for (const auto &[name, _] : factories_) out.push_back(name);
  return out;
}

double mixture_cdf(const ComponentFamily &fam, const MixingDistribution &g, double x) {
  double s = 0.0;
  for (const auto &a : g.atoms()) s += a.weight * fam.cdf(x, a.theta);
  return std::clamp(s, 0.0, 1.0);
}

double mixture_pdf(const ComponentFamily &fam, const MixingDistribution &g, double x) {
  double s = 0.0;
  for (const auto &a : g.atoms()) s += a.weight * fam.pdf(x, a.theta);
  return s;
}

std::vector<double> cdf_deriv_vector(const ComponentFamily &fam, int p_max, double x,
                                     double theta) {
  if (p_max < 0 || p_max > fam.max_order())
    throw ArgumentError("p_max exceeds the family's max_order");
  std::vector<double> out(static_cast<std::size_t>(p_max + 1));
  for (int p = 0; p <= p_max; ++p) out[static_cast<std::size_t>(p)] = fam.cdf_theta_deriv(p, x, theta);
  return out;
}

std::vector<double> sample(const ComponentFamily &fam, const MixingDistribution &g, std::size_t n,
                           Rng &rng) {
  if (n == 0) throw ArgumentError("sample size must be >= 1");
  const auto atoms = g.atoms();
  std::vector<double> cumulative(atoms.size());
  double c = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) cumulative[j] = (c += atoms[j].weight);
  std::uniform_real_distribution<double> uniform(0.0, c);

  std::vector<double> out(n);
  for (auto &x : out) {
    const double u = uniform(rng);
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                                                atoms.size() - 1);
    x = fam.draw(rng, atoms[j].theta);
  }
  return out;
}

std::vector<double> sample(const ComponentFamily &fam, const MixingDistribution &g, std::size_t n,
                           std::uint64_t seed) {
  Rng rng(seed);
  return sample(fam, g, n, rng);
}

} // namespace mixrate
