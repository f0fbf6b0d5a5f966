#include "mixrate/moment_problem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "mixrate/errors.hpp"

namespace mixrate {

namespace {

Eigen::MatrixXd hankel_matrix(const std::vector<double> &m, int k) {
  Eigen::MatrixXd h(k + 1, k + 1);
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j <= k; ++j) h(i, j) = m[static_cast<std::size_t>(i + j)];
  return h;
}

double diagonal_scale(const Eigen::MatrixXd &h) {
  double s = 1.0;
  for (Eigen::Index i = 0; i < h.rows(); ++i) s *= std::abs(h(i, i));
  return s;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Moments of (theta - center) / scale.
std::vector<double> standardize(const std::vector<double> &m, double center, double scale) {
  std::vector<double> out(m.size());
  for (std::size_t k = 0; k < m.size(); ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i <= k; ++i)
      s += binomial(static_cast<int>(k), static_cast<int>(i)) * m[i] *
           std::pow(-center, static_cast<double>(k - i));
    out[k] = s / std::pow(scale, static_cast<double>(k));
  }
  return out;
}

} // namespace

MomentSequence::MomentSequence(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw ArgumentError("moment sequence needs at least m_0");
  if (values_.front() != 1.0) throw ArgumentError("moment sequence must start with m_0 = 1");
  for (double v : values_)
    if (!std::isfinite(v)) throw ArgumentError("moment sequence contains a non-finite value");
}

HankelReport hankel_determinants(const MomentSequence &ms) {
  const int K = ms.order();
  if (K < 2) throw ArgumentError("Hankel determinants need moments up to m_2 (K >= 2)");
  HankelReport report;
  bool positive_so_far = true;
  for (int k = 1; k <= K / 2; ++k) {
    const auto h = hankel_matrix(ms.values(), k);
    const double det = h.fullPivLu().determinant();
    report.dets.push_back(det);
    if (!positive_so_far || report.realizable_order) continue;
    const double tol = kHankelTolerance * diagonal_scale(h);
    if (std::abs(det) <= tol)
      report.realizable_order = k;
    else if (det < 0.0)
      positive_so_far = false;
  }
  return report;
}

MixingDistribution solve_moment_problem(const MomentSequence &ms, int d, ThetaBounds bounds) {
  if (d < 1) throw ArgumentError("number of atoms d must be >= 1");
  if (ms.order() != 2 * d - 1)
    throw ArgumentError("solve_moment_problem needs exactly 2d moments m_0..m_{2d-1}, got " +
                        std::to_string(ms.order() + 1) + " for d=" + std::to_string(d));
  if (d == 1) return MixingDistribution::dirac(ms[1], bounds);

  const auto &raw = ms.values();
  const double center = raw[1];
  const double variance = raw[2] - center * center;
  if (!(variance > kHankelTolerance * std::max(1.0, std::abs(raw[2]))))
    throw InfeasibleError("Hankel positivity violated at k=1 (variance " +
                          std::to_string(variance) + ")",
                          1);
  const double scale = std::sqrt(variance);
  const auto m = standardize(raw, center, scale);

  for (int k = 1; k <= d - 1; ++k) {
    const auto h = hankel_matrix(m, k);
    const double det = h.fullPivLu().determinant();
    if (!(det > kHankelTolerance * diagonal_scale(h)))
      throw InfeasibleError("Hankel positivity violated at k=" + std::to_string(k) +
                                " (det M_k = " + std::to_string(det) + ")",
                            k);
  }

  // Monic orthogonal polynomial y^d + c_{d-1} y^{d-1} + ... + c_0.
  const Eigen::MatrixXd h = hankel_matrix(m, d - 1);
  Eigen::VectorXd rhs(d);
  for (int i = 0; i < d; ++i) rhs(i) = -m[static_cast<std::size_t>(i + d)];
  const Eigen::VectorXd c = h.ldlt().solve(rhs);

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
  for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) companion(i, d - 1) = -c(i);
  Eigen::EigenSolver<Eigen::MatrixXd> eig(companion, false);
  if (eig.info() != Eigen::Success) throw ConditioningError("companion eigensolver failed");

  std::vector<double> roots(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const auto z = eig.eigenvalues()(i);
    if (std::abs(z.imag()) > 1e-7 * (1.0 + std::abs(z.real())))
      throw ConditioningError("orthogonal polynomial has a complex root; moments are "
                              "numerically degenerate");
    roots[static_cast<std::size_t>(i)] = z.real();
  }
  std::sort(roots.begin(), roots.end());
  for (std::size_t i = 1; i < roots.size(); ++i)
    if (roots[i] - roots[i - 1] < 1e-7)
      throw ConditioningError("nearly coincident atoms (standardized gap " +
                              std::to_string(roots[i] - roots[i - 1]) + ")");

  Eigen::MatrixXd vandermonde(d, d);
  Eigen::VectorXd mom(d);
  for (int k = 0; k < d; ++k) {
    mom(k) = m[static_cast<std::size_t>(k)];
    for (int j = 0; j < d; ++j) vandermonde(k, j) = std::pow(roots[static_cast<std::size_t>(j)], k);
  }
  const Eigen::VectorXd w = vandermonde.colPivHouseholderQr().solve(mom);

  std::vector<Atom> atoms;
  for (int j = 0; j < d; ++j) {
    double wj = w(j);
    if (wj < -1e-10)
      throw InfeasibleError("reconstructed weight " + std::to_string(j) + " is negative (" +
                            std::to_string(wj) + ")");
    wj = std::max(wj, 1e-10);
    atoms.push_back({wj, center + scale * roots[static_cast<std::size_t>(j)]});
  }
  return MixingDistribution::normalized(std::move(atoms), bounds);
}

MomentSequence phi_map(const MixingDistribution &g) {
  const int d = static_cast<int>(g.size());
  std::vector<double> m(static_cast<std::size_t>(2 * d), 0.0);
  m[0] = 1.0;
  for (int k = 1; k < 2 * d; ++k) m[static_cast<std::size_t>(k)] = moment(g, k, 2 * d);
  return MomentSequence(std::move(m));
}

double phi_jacobian_det(const MixingDistribution &g) {
  const auto atoms = g.atoms();
  const std::size_t d = atoms.size();
  double det = ((d * (d - 1) / 2) % 2 == 0) ? 1.0 : -1.0;
  for (const auto &a : atoms) det *= a.weight;
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = j + 1; k < d; ++k) {
      const double gap = atoms[j].theta - atoms[k].theta;
      const double sq = gap * gap;
      det *= sq * sq;
    }
  return det;
}

} // namespace mixrate
