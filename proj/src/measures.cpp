#include "mixrate/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mixrate/errors.hpp"

namespace mixrate {

namespace {

std::string describe_atom(std::size_t index, const Atom &a) {
  std::ostringstream os;
  os.precision(17);
  os << "atom " << index << " (w=" << a.weight << ", theta=" << a.theta << ")";
  return os.str();
}

std::vector<Atom> canonicalize(std::vector<Atom> atoms, const ThetaBounds &bounds) {
  if (atoms.empty()) throw ArgumentError("mixing distribution needs at least one atom");
  if (!(bounds.lo <= bounds.hi)) throw ArgumentError("theta bounds must satisfy lo <= hi");
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const auto &a = atoms[i];
    if (!std::isfinite(a.weight) || !std::isfinite(a.theta))
      throw ArgumentError(describe_atom(i, a) + " is not finite");
    if (!(a.weight > 0.0)) throw ArgumentError(describe_atom(i, a) + " has non-positive weight");
    if (!bounds.contains(a.theta))
      throw DomainError(describe_atom(i, a) + " lies outside theta bounds");
  }
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom &a, const Atom &b) { return a.theta < b.theta; });

  std::vector<Atom> out;
  out.reserve(atoms.size());
  for (const auto &a : atoms) {
    if (!out.empty() && a.theta - out.back().theta < MixingDistribution::kMergeRadius) {
      auto &b = out.back();
      const double w = b.weight + a.weight;
      b.theta = (b.weight * b.theta + a.weight * a.theta) / w;
      b.weight = w;
    } else {
      out.push_back(a);
    }
  }
  return out;
}

} // namespace

MixingDistribution::MixingDistribution(std::vector<Atom> atoms, ThetaBounds bounds)
    : atoms_(canonicalize(std::move(atoms), bounds)), bounds_(bounds) {
  double total = 0.0;
  for (const auto &a : atoms_) total += a.weight;
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "weights sum to " << total << " (residual " << total - 1.0 << ")";
    throw ArgumentError(os.str());
  }
}

MixingDistribution MixingDistribution::normalized(std::vector<Atom> atoms, ThetaBounds bounds) {
  double total = 0.0;
  for (const auto &a : atoms) total += a.weight;
  if (!(total > 0.0) || !std::isfinite(total))
    throw ArgumentError("cannot normalize atoms with non-positive total weight");
  if (std::abs(total - 1.0) > kMassTolerance)
    for (auto &a : atoms) a.weight /= total;
  return MixingDistribution(std::move(atoms), bounds);
}

MixingDistribution MixingDistribution::dirac(double theta, ThetaBounds bounds) {
  return MixingDistribution({{1.0, theta}}, bounds);
}

std::vector<double> MixingDistribution::weights() const {
  std::vector<double> w(atoms_.size());
  std::transform(atoms_.begin(), atoms_.end(), w.begin(), [](const Atom &a) { return a.weight; });
  return w;
}

std::vector<double> MixingDistribution::locations() const {
  std::vector<double> t(atoms_.size());
  std::transform(atoms_.begin(), atoms_.end(), t.begin(), [](const Atom &a) { return a.theta; });
  return t;
}

bool operator==(const MixingDistribution &a, const MixingDistribution &b) {
  if (a.atoms_.size() != b.atoms_.size()) return false;
  for (std::size_t i = 0; i < a.atoms_.size(); ++i)
    if (a.atoms_[i].weight != b.atoms_[i].weight || a.atoms_[i].theta != b.atoms_[i].theta)
      return false;
  return true;
}

SignedAtomicMeasure::SignedAtomicMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {}

SignedAtomicMeasure SignedAtomicMeasure::difference(const MixingDistribution &g1,
                                                    const MixingDistribution &g2) {
  std::vector<Atom> atoms;
  atoms.reserve(g1.size() + g2.size());
  for (const auto &a : g1.atoms()) atoms.push_back(a);
  for (const auto &a : g2.atoms()) atoms.push_back({-a.weight, a.theta});
  return SignedAtomicMeasure(std::move(atoms));
}

double SignedAtomicMeasure::total_mass() const noexcept {
  double s = 0.0;
  for (const auto &a : atoms_) s += a.weight;
  return s;
}

double SignedAtomicMeasure::mass_of(std::span<const std::size_t> indices) const {
  double s = 0.0;
  for (auto i : indices) {
    if (i >= atoms_.size()) throw ArgumentError("atom index out of range");
    s += atoms_[i].weight;
  }
  return s;
}

std::vector<Atom> SignedAtomicMeasure::merged() const {
  std::vector<Atom> sorted = atoms_;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Atom &a, const Atom &b) { return a.theta < b.theta; });
  std::vector<Atom> out;
  for (const auto &a : sorted) {
    if (!out.empty() && out.back().theta == a.theta)
      out.back().weight += a.weight;
    else
      out.push_back(a);
  }
  std::erase_if(out, [](const Atom &a) { return a.weight == 0.0; });
  return out;
}

double SignedAtomicMeasure::cdf_l1_norm() const {
  const auto m = merged();
  double cum = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    cum += m[i].weight;
    total += std::abs(cum) * (m[i + 1].theta - m[i].theta);
  }
  return total;
}

double wasserstein_w1(const MixingDistribution &g1, const MixingDistribution &g2) {
  return SignedAtomicMeasure::difference(g1, g2).cdf_l1_norm();
}

double wasserstein_dual_lb(const MixingDistribution &g1, const MixingDistribution &g2,
                           std::span<const double> test_points) {
  if (test_points.empty()) throw ArgumentError("dual bound needs at least one test point");
  std::vector<double> kinks(test_points.begin(), test_points.end());
  std::sort(kinks.begin(), kinks.end());

  const auto atoms = SignedAtomicMeasure::difference(g1, g2).merged();
  if (atoms.size() < 2) return 0.0;

  // With total mass zero, int f d(G1-G2) = -int f'(t) D(t) dt where D is the
  // cumulative signed mass. Slopes are free per segment between kinks, so the
  // best sign pattern yields sum over segments of |int_segment D|.
  double best = 0.0;
  double segment = 0.0;
  double cum = 0.0;
  auto kink = kinks.begin();
  for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
    cum += atoms[i].weight;
    double left = atoms[i].theta;
    const double right = atoms[i + 1].theta;
    for (; kink != kinks.end() && *kink <= left; ++kink) {
      best += std::abs(segment);
      segment = 0.0;
    }
    while (kink != kinks.end() && *kink < right) {
      segment += cum * (*kink - left);
      best += std::abs(segment);
      segment = 0.0;
      left = *kink;
      ++kink;
    }
    segment += cum * (right - left);
  }
  best += std::abs(segment);
  return best;
}

double moment(const MixingDistribution &g, int k, int max_order) {
  if (k < 0 || k > max_order) throw ArgumentError("moment order out of range");
  if (k == 0) return 1.0;
  double s = 0.0;
  for (const auto &a : g.atoms()) s += a.weight * std::pow(a.theta, k);
  return s;
}

MixingDistribution homothety(const MixingDistribution &g, double center, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ArgumentError("homothety scale must be > 0");
  std::vector<Atom> atoms;
  atoms.reserve(g.size());
  std::size_t index = 0;
  for (const auto &a : g.atoms()) {
    const Atom mapped{a.weight, center + scale * (a.theta - center)};
    if (!g.bounds().contains(mapped.theta))
      throw DomainError("homothety moves " + describe_atom(index, mapped) +
                        " outside theta bounds");
    atoms.push_back(mapped);
    ++index;
  }
  return MixingDistribution(std::move(atoms), g.bounds());
}

} // namespace mixrate
