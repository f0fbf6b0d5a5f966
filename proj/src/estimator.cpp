#include "mixrate/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

#include "mixrate/errors.hpp"
#include "mixrate/moment_problem.hpp"
#include "mixrate/nelder_mead.hpp"

namespace mixrate {

EmpiricalCDF::EmpiricalCDF(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw ArgumentError("empirical CDF needs at least one sample");
  for (double x : sorted_)
    if (!std::isfinite(x)) throw ArgumentError("samples must be finite");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCDF::operator()(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

namespace {

inline double mixture_cdf_raw(const ComponentFamily &family, std::span<const Atom> atoms,
                              double x) {
  double s = 0.0;
  for (const auto &a : atoms) s += a.weight * family.cdf(x, a.theta);
  return s;
}

inline double ks_term(double f, std::size_t i, double n) {
  return std::max(std::abs(f - static_cast<double>(i + 1) / n),
                  std::abs(f - static_cast<double>(i) / n));
}

} // namespace

namespace serial {
double ks_distance(const ComponentFamily &family, std::span<const Atom> atoms,
                   const EmpiricalCDF &ecdf) {
  const auto xs = ecdf.sorted_samples();
  const double n = static_cast<double>(xs.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    sup = std::max(sup, ks_term(mixture_cdf_raw(family, atoms, xs[i]), i, n));
  return sup;
}
} // namespace serial

double ks_distance(const ComponentFamily &family, std::span<const Atom> atoms,
                   const EmpiricalCDF &ecdf, Execution exec) {
  const auto xs = ecdf.sorted_samples();
  constexpr std::size_t kParallelThreshold = 4096;
  if (exec == Execution::serial || xs.size() < kParallelThreshold || threads() == 1 ||
      omp_in_parallel())
    return serial::ks_distance(family, atoms, ecdf);

  const double n = static_cast<double>(xs.size());
  const auto count = static_cast<long long>(xs.size());
  double sup = 0.0;
#pragma omp parallel for reduction(max : sup) schedule(static) num_threads(threads())
  for (long long i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    sup = std::max(sup, ks_term(mixture_cdf_raw(family, atoms, xs[k]), k, n));
  }
  return sup;
}

double ks_distance(const ComponentFamily &family, const MixingDistribution &g,
                   const EmpiricalCDF &ecdf, Execution exec) {
  return ks_distance(family, g.atoms(), ecdf, exec);
}

MixingDistribution canonical_candidate(std::vector<Atom> atoms, const ThetaBounds &bounds,
                                       double weight_floor, double merge_radius) {
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom &a, const Atom &b) { return a.theta < b.theta; });
  double total = 0.0;
  for (const auto &a : atoms) total += a.weight;
  for (auto &a : atoms) a.weight /= total;
  std::erase_if(atoms, [&](const Atom &a) { return a.weight < weight_floor; });
  if (atoms.empty()) throw ArgumentError("all candidate weights fell below the floor");

  std::vector<Atom> merged;
  for (const auto &a : atoms) {
    if (!merged.empty() && a.theta - merged.back().theta < merge_radius) {
      auto &b = merged.back();
      const double w = b.weight + a.weight;
      b.theta = std::clamp((b.weight * b.theta + a.weight * a.theta) / w, bounds.lo, bounds.hi);
      b.weight = w;
    } else {
      merged.push_back(a);
    }
  }
  return MixingDistribution::normalized(std::move(merged), bounds);
}

namespace {

constexpr double kLogitClamp = 30.0;

class Parameterization {
public:
  Parameterization(int m, ThetaBounds bounds) : m_(m), bounds_(bounds) {}

  std::size_t dim() const { return static_cast<std::size_t>(2 * m_ - 1); }

  void decode(const std::vector<double> &x, std::vector<Atom> &atoms) const {
    atoms.resize(static_cast<std::size_t>(m_));
    // The last atom's logit is pinned at 0.
    double peak = 0.0;
    for (int j = 0; j < m_ - 1; ++j) peak = std::max(peak, std::clamp(x[j], -kLogitClamp, kLogitClamp));
    double total = std::exp(-peak);
    for (int j = 0; j < m_ - 1; ++j) {
      const double e = std::exp(std::clamp(x[j], -kLogitClamp, kLogitClamp) - peak);
      atoms[static_cast<std::size_t>(j)].weight = e;
      total += e;
    }
    atoms.back().weight = std::exp(-peak);
    for (auto &a : atoms) a.weight /= total;
    for (int j = 0; j < m_; ++j)
      atoms[static_cast<std::size_t>(j)].theta =
          std::clamp(x[static_cast<std::size_t>(m_ - 1 + j)], bounds_.lo, bounds_.hi);
  }

  std::vector<double> encode(std::vector<Atom> atoms) const {
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom &a, const Atom &b) { return a.theta < b.theta; });
    std::vector<double> x(dim());
    const double last = std::max(atoms.back().weight, 1e-12);
    for (int j = 0; j < m_ - 1; ++j)
      x[static_cast<std::size_t>(j)] = std::clamp(
          std::log(std::max(atoms[static_cast<std::size_t>(j)].weight, 1e-12) / last),
          -kLogitClamp, kLogitClamp);
    for (int j = 0; j < m_; ++j)
      x[static_cast<std::size_t>(m_ - 1 + j)] =
          std::clamp(atoms[static_cast<std::size_t>(j)].theta, bounds_.lo, bounds_.hi);
    return x;
  }

private:
  int m_;
  ThetaBounds bounds_;
};

double quantile(const std::vector<double> &sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// m atoms at evenly spaced sample quantiles, equal weights.
std::vector<Atom> quantile_start(const std::vector<double> &sorted, int m, const ThetaBounds &b) {
  std::vector<Atom> atoms;
  for (int j = 0; j < m; ++j) {
    const double q = (j + 0.5) / m;
    atoms.push_back({1.0 / m, std::clamp(quantile(sorted, q), b.lo, b.hi)});
  }
  return atoms;
}

std::optional<std::vector<Atom>> moment_start(const std::vector<double> &sorted,
                                              const ComponentFamily &family, int m) {
  std::vector<double> moments = {1.0};
  for (int k = 1; k <= 2 * m - 1; ++k) {
    const auto mk = family.mixing_moment_estimate(sorted, k);
    if (!mk) return std::nullopt;
    moments.push_back(*mk);
  }
  try {
    const auto g = solve_moment_problem(MomentSequence(moments), m);
    std::vector<Atom> atoms(g.atoms().begin(), g.atoms().end());
    const auto b = family.theta_bounds();
    for (auto &a : atoms) a.theta = std::clamp(a.theta, b.lo, b.hi);
    return atoms;
  } catch (const Error &) {
    return std::nullopt;
  }
}

std::vector<Atom> random_start(const std::vector<double> &sorted, int m, const ThetaBounds &b,
                               std::uint64_t seed) {
  Rng rng(seed);
  const double lo = std::clamp(quantile(sorted, 0.01), b.lo, b.hi);
  const double hi = std::clamp(quantile(sorted, 0.99), b.lo, b.hi);
  std::uniform_real_distribution<double> loc(lo, std::max(hi, lo));
  std::exponential_distribution<double> gamma1(1.0);
  std::vector<Atom> atoms;
  for (int j = 0; j < m; ++j) atoms.push_back({gamma1(rng) + 1e-3, loc(rng)});
  return atoms;
}

struct LocalFit {
  MixingDistribution g;
  double ks;
};

LocalFit local_search(const EmpiricalCDF &ecdf, const std::vector<double> &sorted,
                      const ComponentFamily &family, int m, std::vector<Atom> start,
                      const EstimatorOptions &opts) {
  const auto bounds = family.theta_bounds();
  const Parameterization param(m, bounds);
  const double n = static_cast<double>(ecdf.size());

  std::vector<Atom> scratch;
  auto objective = [&](const std::vector<double> &x) {
    param.decode(x, scratch);
    return ks_distance(family, std::span<const Atom>(scratch), ecdf, Execution::parallel);
  };

  const double spread = std::max(quantile(sorted, 0.9) - quantile(sorted, 0.1), 0.1 * family.scale());
  std::vector<double> steps(param.dim());
  for (int j = 0; j < m - 1; ++j) steps[static_cast<std::size_t>(j)] = 1.0;
  for (int j = 0; j < m; ++j) steps[static_cast<std::size_t>(m - 1 + j)] = 0.25 * spread;

  const double ftol = 0.05 / n;
  auto result = detail::nelder_mead(objective, param.encode(std::move(start)), steps, opts.max_iter,
                                    ftol, 1e-6);
  // One fresh simplex around the incumbent guards against early collapse.
  for (auto &s : steps) s *= 0.1;
  auto polished = detail::nelder_mead(objective, result.x, steps, opts.max_iter, ftol, 1e-7);
  if (polished.f <= result.f) result = std::move(polished);

  param.decode(result.x, scratch);
  auto g = canonical_candidate(scratch, bounds, opts.weight_floor, opts.merge_radius);
  const double ks = ks_distance(family, g, ecdf, Execution::serial);
  return {std::move(g), ks};
}

} // namespace

FitResult fit_from_initial(std::span<const double> samples, const ComponentFamily &family,
                           std::vector<Atom> initial, const EstimatorOptions &opts) {
  if (samples.empty()) throw ArgumentError("fit needs at least one sample");
  if (initial.empty()) throw ArgumentError("initial mixture needs at least one atom");
  const EmpiricalCDF ecdf(std::vector<double>(samples.begin(), samples.end()));
  const std::vector<double> sorted(ecdf.sorted_samples().begin(), ecdf.sorted_samples().end());
  const int m = static_cast<int>(initial.size());
  auto local = local_search(ecdf, sorted, family, m, std::move(initial), opts);
  return {local.g, local.ks, 1, {local.ks}};
}

FitResult fit_min_distance(std::span<const double> samples, const ComponentFamily &family, int m,
                           const EstimatorOptions &opts) {
  if (samples.empty()) throw ArgumentError("fit needs at least one sample");
  if (m < 1) throw ArgumentError("m must be >= 1");
  if (opts.restarts < 1) throw ArgumentError("restarts must be >= 1");
  if (opts.max_iter < 1) throw ArgumentError("max_iter must be >= 1");

  const EmpiricalCDF ecdf(std::vector<double>(samples.begin(), samples.end()));
  const std::vector<double> sorted(ecdf.sorted_samples().begin(), ecdf.sorted_samples().end());
  const auto bounds = family.theta_bounds();
  const double n = static_cast<double>(sorted.size());
  const double slack = 1.0 / (2.0 * n);

  std::optional<LocalFit> best;
  std::vector<double> trace;
  int small_improvements = 0;
  int used = 0;
  for (int r = 0; r < opts.restarts; ++r) {
    std::vector<Atom> start;
    if (r == 0) {
      if (auto s = moment_start(sorted, family, m)) start = std::move(*s);
    }
    if (start.empty() && r <= 1) start = quantile_start(sorted, m, bounds);
    if (start.empty()) start = random_start(sorted, m, bounds, opts.seed + static_cast<std::uint64_t>(r));

    auto local = local_search(ecdf, sorted, family, m, std::move(start), opts);
    ++used;
    const double previous = best ? best->ks : std::numeric_limits<double>::infinity();
    if (!best || local.ks < best->ks) best = std::move(local);
    trace.push_back(best->ks);

    if (opts.early_stop) {
      small_improvements = (previous - best->ks < slack) ? small_improvements + 1 : 0;
      if (small_improvements >= 2) break;
    }
  }
  return {best->g, best->ks, used, std::move(trace)};
}

double wasserstein_error(const FitResult &fit, const MixingDistribution &g_true) {
  return wasserstein_w1(fit.g_hat, g_true);
}

} // namespace mixrate
