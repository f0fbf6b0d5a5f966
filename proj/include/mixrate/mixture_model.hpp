#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mixrate/measures.hpp"

namespace mixrate {

using Rng = std::mt19937_64;

/// One-parameter kernel {F(x, theta), f(x, theta)} with theta-derivatives.
///
/// Implementations must be immutable and thread-safe: every member is const
/// and evaluation is pure.
class ComponentFamily {
public:
  virtual ~ComponentFamily() = default;

  virtual std::string name() const = 0;
  virtual int max_order() const noexcept = 0;
  virtual ThetaBounds theta_bounds() const noexcept = 0;
  /// Typical spread of one component; used to size x-grids.
  virtual double scale() const noexcept = 0;

  virtual double cdf(double x, double theta) const = 0;
  virtual double pdf(double x, double theta) const = 0;
  /// p-th theta-derivative of F; p = 0 gives F itself.
  virtual double cdf_theta_deriv(int p, double x, double theta) const = 0;
  /// p-th theta-derivative of f; p = 0 gives f itself.
  virtual double pdf_theta_deriv(int p, double x, double theta) const = 0;

  /// One draw from the component at theta.
  virtual double draw(Rng &rng, double theta) const = 0;

  /// Unbiased estimate of the k-th power moment of the mixing distribution
  /// from a sample, when the family admits one (used to seed estimators).
  virtual std::optional<double> mixing_moment_estimate(const std::vector<double> &sample,
                                                       int k) const {
    (void)sample;
    (void)k;
    return std::nullopt;
  }
};

/// N(theta, sigma^2) location family with Hermite closed-form derivatives.
class GaussianLocationFamily final : public ComponentFamily {
public:
  explicit GaussianLocationFamily(double sigma = 1.0, int max_order = 8,
                                  ThetaBounds bounds = {});

  std::string name() const override { return "gaussian"; }
  int max_order() const noexcept override { return max_order_; }
  ThetaBounds theta_bounds() const noexcept override { return bounds_; }
  double scale() const noexcept override { return sigma_; }
  double sigma() const noexcept { return sigma_; }

  double cdf(double x, double theta) const override;
  double pdf(double x, double theta) const override;
  double cdf_theta_deriv(int p, double x, double theta) const override;
  double pdf_theta_deriv(int p, double x, double theta) const override;
  double draw(Rng &rng, double theta) const override;
  std::optional<double> mixing_moment_estimate(const std::vector<double> &sample,
                                               int k) const override;

private:
  double sigma_;
  int max_order_;
  ThetaBounds bounds_;
};

/// Probabilists' Hermite polynomial He_n(z).
double hermite_he(int n, double z);

/// Registration-time checks of the ComponentFamily contract: monotone cdf
/// with limits 0 and 1, unit pdf mass, and derivative consistency against
/// central finite differences. Throws ArgumentError on the first violation.
void validate_family(const ComponentFamily &family);

using FamilyFactory = std::function<std::shared_ptr<const ComponentFamily>(
    const std::map<std::string, double> &params)>;

/// Name -> factory table. "gaussian" (parameter "sigma") is pre-registered;
/// user families are validated when first constructed.
class FamilyRegistry {
public:
  static FamilyRegistry &instance();

  void add(const std::string &name, FamilyFactory factory);
  std::shared_ptr<const ComponentFamily> make(const std::string &name,
                                              const std::map<std::string, double> &params) const;
  std::vector<std::string> names() const;

private:
  FamilyRegistry();
  std::map<std::string, FamilyFactory> factories_;
};

double mixture_cdf(const ComponentFamily &fam, const MixingDistribution &g, double x);
double mixture_pdf(const ComponentFamily &fam, const MixingDistribution &g, double x);

/// F^{(p)}(x, theta) for p = 0..p_max.
std::vector<double> cdf_deriv_vector(const ComponentFamily &fam, int p_max, double x,
                                     double theta);

/// n i.i.d. draws from f(., g), deterministic in seed.
std::vector<double> sample(const ComponentFamily &fam, const MixingDistribution &g, std::size_t n,
                           std::uint64_t seed);

/// Same as sample() but drawing from a caller-owned generator.
std::vector<double> sample(const ComponentFamily &fam, const MixingDistribution &g, std::size_t n,
                           Rng &rng);

} // namespace mixrate
