#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mixrate/measures.hpp"

namespace testing {

using Rng = std::mt19937_64;

// Random mixing distribution with up to max_atoms atoms in [lo, hi], atoms at
// least min_gap apart and weights at least min_weight.
inline mixrate::MixingDistribution random_mixing(Rng &rng, int max_atoms, double lo = -3.0,
                                                 double hi = 3.0, double min_gap = 0.0,
                                                 double min_weight = 0.0, int min_atoms = 1) {
  std::uniform_int_distribution<int> count(min_atoms, max_atoms);
  std::uniform_real_distribution<double> loc(lo, hi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int k = count(rng);
  std::vector<double> thetas;
  while (static_cast<int>(thetas.size()) < k) {
    const double t = loc(rng);
    if (std::all_of(thetas.begin(), thetas.end(),
                    [&](double s) { return std::abs(s - t) >= std::max(min_gap, 1e-9); }))
      thetas.push_back(t);
  }
  std::vector<double> w(static_cast<std::size_t>(k));
  double total = 0.0;
  for (auto &x : w) total += (x = unit(rng) + 0.05);
  for (auto &x : w) x /= total;
  // Mix toward uniform until the floor holds.
  const double floor_w = *std::min_element(w.begin(), w.end());
  if (floor_w < min_weight) {
    const double lam = (min_weight - floor_w) / (1.0 / k - floor_w);
    for (auto &x : w) x = (1.0 - lam) * x + lam / k;
  }
  std::vector<mixrate::Atom> atoms;
  for (int j = 0; j < k; ++j) atoms.push_back({w[static_cast<std::size_t>(j)], thetas[static_cast<std::size_t>(j)]});
  return mixrate::MixingDistribution::normalized(std::move(atoms));
}

// Standard normal CDF written independently of the library.
inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

} // namespace testing
