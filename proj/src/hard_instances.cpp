#include "mixrate/hard_instances.hpp"

#include <cmath>
#include <sstream>

#include "mixrate/errors.hpp"
#include "mixrate/moment_problem.hpp"

namespace mixrate {

double HardInstanceSpec::shrink() const { return std::pow(n, -1.0 / (4.0 * d() - 2.0)); }

void HardInstanceSpec::validate() const {
  if (m < m0()) throw ArgumentError("hard instance needs m >= m0 (number of g0 atoms)");
  if (!(n >= 1.0)) throw ArgumentError("hard instance needs n >= 1");
  if (!std::isfinite(u)) throw ArgumentError("u must be finite");
  if (perturbed_index() >= g0.size()) throw ArgumentError("perturbed atom index out of range");
  const double centre = g0.atoms()[perturbed_index()].theta;
  if (!g0.bounds().interior(centre))
    throw ArgumentError("perturbed atom must lie strictly inside theta bounds");
  const std::size_t expected = static_cast<std::size_t>(2 * d() - 2);
  if (base_moments.size() != expected) {
    std::ostringstream os;
    os << "base_moments must hold m_1..m_" << expected << " (d=" << d() << "), got "
       << base_moments.size() << " values";
    throw ArgumentError(os.str());
  }
  if (d() >= 2) {
    std::vector<double> m_seq = {1.0};
    m_seq.insert(m_seq.end(), base_moments.begin(), base_moments.end());
    const auto report = hankel_determinants(MomentSequence(m_seq));
    for (std::size_t k = 0; k < report.dets.size() && static_cast<int>(k) < d() - 1; ++k)
      if (!(report.dets[k] > 0.0) || (report.realizable_order && *report.realizable_order <= d() - 1))
        throw InfeasibleError("base moments fail Hankel positivity at k=" + std::to_string(k + 1),
                              static_cast<int>(k + 1));
  }
}

HardInstanceSpec default_hard_instance(double u, double n) {
  HardInstanceSpec spec;
  spec.u = u;
  spec.n = n;
  return spec;
}

MixingDistribution block_shape(const HardInstanceSpec &spec) {
  spec.validate();
  std::vector<double> m_seq = {1.0};
  m_seq.insert(m_seq.end(), spec.base_moments.begin(), spec.base_moments.end());
  m_seq.push_back(spec.u);
  return solve_moment_problem(MomentSequence(std::move(m_seq)), spec.d());
}

MixingDistribution build_gn(const HardInstanceSpec &spec) {
  const auto shape = block_shape(spec);
  const double shrink = spec.shrink();
  const auto g0_atoms = spec.g0.atoms();
  const std::size_t k = spec.perturbed_index();
  const Atom centre = g0_atoms[k];

  std::vector<Atom> atoms;
  for (std::size_t j = 0; j < g0_atoms.size(); ++j)
    if (j != k) atoms.push_back(g0_atoms[j]);
  for (const auto &a : shape.atoms()) {
    const Atom placed{centre.weight * a.weight, centre.theta + shrink * a.theta};
    if (!spec.g0.bounds().contains(placed.theta)) {
      std::ostringstream os;
      os.precision(10);
      os << "hard-instance atom at theta=" << placed.theta << " escapes theta bounds ["
         << spec.g0.bounds().lo << ", " << spec.g0.bounds().hi << "] at n=" << spec.n
         << "; use a larger n";
      throw DomainError(os.str());
    }
    atoms.push_back(placed);
  }
  return MixingDistribution::normalized(std::move(atoms), spec.g0.bounds());
}

double default_u_max(double n) { return std::log1p(n); }

ConvergenceReport convergence_to_g0(const HardInstanceSpec &spec, double u,
                                    const std::vector<double> &n_grid) {
  if (n_grid.empty()) throw ArgumentError("n_grid must be nonempty");
  ConvergenceReport report;
  auto s = spec;
  s.u = u;
  double prev = 0.0;
  for (double n : n_grid) {
    if (n <= prev) throw ArgumentError("n_grid must be strictly increasing");
    prev = n;
    s.n = n;
    const double w = wasserstein_w1(build_gn(s), spec.g0);
    report.rows.emplace_back(n, w);
    report.c_u = std::max(report.c_u, w / s.shrink());
  }
  return report;
}

SeparationReport separation_rate(const HardInstanceSpec &spec, double u1, double u2,
                                 const std::vector<double> &n_grid) {
  if (u1 == u2) throw ArgumentError("separation_rate needs u1 != u2");
  auto s1 = spec;
  auto s2 = spec;
  s1.u = u1;
  s2.u = u2;
  SeparationReport report;
  const double pi_centre = spec.g0.atoms()[spec.perturbed_index()].weight;
  report.c = pi_centre * wasserstein_w1(block_shape(s1), block_shape(s2));
  for (double n : n_grid) {
    s1.n = s2.n = n;
    report.rows.emplace_back(n, wasserstein_w1(build_gn(s1), build_gn(s2)));
  }
  return report;
}

} // namespace mixrate
