#include "mixrate/identifiability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixrate/errors.hpp"

namespace mixrate {

std::vector<double> default_margin_grid(const ComponentFamily &family,
                                        const std::vector<double> &support, double step_frac) {
  if (support.empty()) throw ArgumentError("support must be nonempty");
  const auto [lo_it, hi_it] = std::minmax_element(support.begin(), support.end());
  const double s = family.scale();
  const double lo = *lo_it - 8.0 * s;
  const double hi = *hi_it + 8.0 * s;
  const double step = step_frac * s;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = lo + static_cast<double>(i) * step;
  return grid;
}

Eigen::MatrixXd margin_matrix(const ComponentFamily &family, const std::vector<double> &support,
                              int order, const std::vector<double> &x_grid) {
  if (order < 0 || order > family.max_order())
    throw ArgumentError("identifiability order exceeds the family's max_order");
  if (x_grid.empty()) throw ArgumentError("x_grid must be nonempty");
  const auto rows = static_cast<Eigen::Index>(x_grid.size());
  const auto cols = static_cast<Eigen::Index>(support.size()) * (order + 1);
  Eigen::MatrixXd a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < support.size(); ++j)
      for (int p = 0; p <= order; ++p)
        a(i, static_cast<Eigen::Index>(j) * (order + 1) + p) =
            family.cdf_theta_deriv(p, x_grid[static_cast<std::size_t>(i)], support[j]);
  return a;
}

double margin_objective(const Eigen::MatrixXd &a, const Eigen::VectorXd &alpha) {
  return (a * alpha).cwiseAbs().maxCoeff() / alpha.norm();
}

namespace {

constexpr int kEvalsPerStart = 400;
constexpr int kLawsonSteps = 60;

struct StartResult {
  double value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd alpha;
  int evaluations = 0;
};

Eigen::VectorXd random_unit(Eigen::Index dim, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = normal(rng);
  return v.normalized();
}

StartResult descend(const Eigen::MatrixXd &a, Eigen::VectorXd alpha, int cap) {
  StartResult out;
  auto consider = [&](const Eigen::VectorXd &v) {
    const double f = margin_objective(a, v);
    ++out.evaluations;
    if (f < out.value) {
      out.value = f;
      out.alpha = v.normalized();
    }
    return f;
  };
  consider(alpha);

  // Lawson-style reweighting: the smallest eigenvector of A^T W A minimizes
  // the weighted residual; weights grow where the residual peaks.
  Eigen::VectorXd residual = (a * alpha).cwiseAbs();
  Eigen::VectorXd w = residual.array() + 1e-300;
  w /= w.sum();
  for (int it = 0; it < kLawsonSteps && out.evaluations < cap; ++it) {
    const Eigen::MatrixXd gram = a.transpose() * w.asDiagonal() * a;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    Eigen::VectorXd v = eig.eigenvectors().col(0);
    if (v.dot(alpha) < 0.0) v = -v;
    consider(v);
    residual = (a * v).cwiseAbs();
    w = w.cwiseProduct(residual).array() + 1e-300;
    const double total = w.sum();
    if (!(total > 0.0) || !std::isfinite(total)) break;
    w /= total;
    alpha = v;
  }

  // Pattern search on the sphere around the incumbent.
  Eigen::VectorXd x = out.alpha;
  double fx = out.value;
  double h = 0.05;
  const Eigen::Index dim = a.cols();
  while (out.evaluations < cap && h > 1e-12) {
    bool improved = false;
    for (Eigen::Index k = 0; k < dim && out.evaluations < cap; ++k) {
      for (double sign : {1.0, -1.0}) {
        Eigen::VectorXd trial = x;
        trial(k) += sign * h;
        trial.normalize();
        const double f = consider(trial);
        if (f < fx) {
          x = trial;
          fx = f;
          improved = true;
          break;
        }
        if (out.evaluations >= cap) break;
      }
    }
    if (!improved) h *= 0.5;
  }
  return out;
}

} // namespace

MarginResult minimize_margin(const Eigen::MatrixXd &a, int budget, std::uint64_t seed,
                             Execution exec) {
  if (budget < 1) throw ArgumentError("search budget must be >= 1");
  const Eigen::Index dim = a.cols();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  const Eigen::MatrixXd v = svd.matrixV(); // columns by descending singular value

  const int starts = (budget + kEvalsPerStart - 1) / kEvalsPerStart;
  std::vector<StartResult> results(static_cast<std::size_t>(starts));
  for_each_index(
      results.size(),
      [&](std::size_t s) {
        const int cap = std::min(kEvalsPerStart, budget - static_cast<int>(s) * kEvalsPerStart);
        const auto si = static_cast<Eigen::Index>(s);
        Eigen::VectorXd start = si < dim ? Eigen::VectorXd(v.col(dim - 1 - si))
                                         : random_unit(dim, splitmix64(seed ^ splitmix64(s)));
        results[s] = descend(a, std::move(start), cap);
      },
      exec);

  MarginResult best{std::numeric_limits<double>::infinity(), Eigen::VectorXd(), 0};
  for (const auto &r : results) {
    best.evaluations += r.evaluations;
    if (r.value < best.margin) {
      best.margin = r.value;
      best.argmin_alpha = r.alpha;
    }
  }
  return best;
}

MarginResult identifiability_margin(const MarginQuery &q, Execution exec) {
  if (q.family == nullptr) throw ArgumentError("margin query needs a family");
  if (q.support.empty()) throw ArgumentError("margin query needs a nonempty support");
  for (std::size_t i = 0; i < q.support.size(); ++i)
    for (std::size_t j = i + 1; j < q.support.size(); ++j)
      if (std::abs(q.support[i] - q.support[j]) <= MixingDistribution::kMergeRadius)
        throw ArgumentError("support points must be distinct (margin is trivially 0 when two "
                            "coincide)");
  const auto grid = q.x_grid.empty() ? default_margin_grid(*q.family, q.support) : q.x_grid;
  if (!std::is_sorted(grid.begin(), grid.end())) throw ArgumentError("x_grid must be sorted");
  return minimize_margin(margin_matrix(*q.family, q.support, q.order, grid), q.search_budget,
                         q.seed, exec);
}

double sup_cdf_difference(const ComponentFamily &family, const MixingDistribution &g1,
                          const MixingDistribution &g2) {
  auto diff = [&](double x) {
    return std::abs(mixture_cdf(family, g1, x) - mixture_cdf(family, g2, x));
  };
  std::vector<double> centres = g1.locations();
  const auto l2 = g2.locations();
  centres.insert(centres.end(), l2.begin(), l2.end());
  const double s = family.scale();
  const auto [lo_it, hi_it] = std::minmax_element(centres.begin(), centres.end());
  const double lo = *lo_it - 8.0 * s;
  const double hi = *hi_it + 8.0 * s;

  std::vector<double> grid;
  for (double x = lo; x <= hi; x += 0.01 * s) grid.push_back(x);
  for (double c : centres)
    for (int i = -1000; i <= 1000; ++i) grid.push_back(c + 1e-3 * s * i);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = diff(grid[i]);

  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const bool left = i == 0 || values[i] >= values[i - 1];
    const bool right = i + 1 == grid.size() || values[i] >= values[i + 1];
    if (left && right) peaks.push_back(i);
  }
  std::sort(peaks.begin(), peaks.end(),
            [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  if (peaks.size() > 8) peaks.resize(8);

  double best = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  constexpr double kInvPhi = 0.61803398874989484820;
  for (auto i : peaks) {
    double a = grid[i == 0 ? 0 : i - 1];
    double b = grid[std::min(i + 1, grid.size() - 1)];
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = diff(c), fd = diff(d);
    for (int it = 0; it < 80 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - kInvPhi * (b - a);
        fc = diff(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + kInvPhi * (b - a);
        fd = diff(d);
      }
    }
    best = std::max({best, fc, fd});
  }
  return best;
}

SeparationRatio separation_ratio(const ComponentFamily &family, const MixingDistribution &g1,
                                 const MixingDistribution &g2, int m, int m0) {
  if (m0 < 1 || m < m0) throw ArgumentError("need 1 <= m0 <= m");
  if (g1.size() > static_cast<std::size_t>(m) || g2.size() > static_cast<std::size_t>(m))
    throw ArgumentError("both mixing distributions must have at most m atoms");
  if (g1 == g2) throw ArgumentError("ratio undefined: g1 equals g2");
  const double w = wasserstein_w1(g1, g2);
  if (!(w > 0.0)) throw ArgumentError("ratio undefined: W(g1, g2) = 0");
  const int exponent = 2 * m - 2 * m0 + 1;
  const double ks = sup_cdf_difference(family, g1, g2);
  return {ks, w, exponent, ks / std::pow(w, exponent)};
}

} // namespace mixrate
