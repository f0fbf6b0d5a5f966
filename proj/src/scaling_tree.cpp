#include "mixrate/scaling_tree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "mixrate/errors.hpp"
#include "mixrate/hard_instances.hpp"

namespace mixrate {

namespace {

constexpr double kZeroThreshold = 1e-13;
constexpr double kLevelTol = 1e-9;

double eps(double exponent, double n) {
  return exponent == kZeroScale ? 0.0 : std::pow(n, exponent);
}

} // namespace

ScaledPairFamily example_pair_family(std::vector<double> n_grid) {
  ScaledPairFamily fam;
  fam.name = "example";
  fam.n_grid = std::move(n_grid);
  fam.ladder_step = 1.0 / 6.0;
  fam.generator = [](double n) {
    return std::make_pair(build_gn(default_hard_instance(0.0, n)),
                          build_gn(default_hard_instance(12.0, n)));
  };
  return fam;
}

ScaledPairFamily three_level_family(std::vector<double> n_grid) {
  ScaledPairFamily fam;
  fam.name = "three-level";
  fam.n_grid = std::move(n_grid);
  fam.ladder_step = 0.25;
  fam.generator = [](double n) {
    const double h = std::pow(n, -0.25);
    const double eta = std::pow(n, -0.25);
    MixingDistribution g1({{0.25 * (1.0 + eta), 0.0},
                           {0.25 * (1.0 - eta), h},
                           {0.25, 1.0},
                           {0.25, 1.0 + h}});
    MixingDistribution g2({{0.25, 0.0}, {0.25, h}, {0.25, 1.0}, {0.25, 1.0 + h}});
    return std::make_pair(std::move(g1), std::move(g2));
  };
  return fam;
}

ScaledPairFamily constant_family(std::vector<double> n_grid) {
  ScaledPairFamily fam;
  fam.name = "constant";
  fam.n_grid = std::move(n_grid);
  fam.ladder_step = 1.0 / 6.0;
  fam.generator = [](double) {
    return std::make_pair(MixingDistribution({{0.5, 0.0}, {0.5, 1.0}}),
                          MixingDistribution({{0.7, 0.0}, {0.3, 1.0}}));
  };
  return fam;
}

double fit_log_slope(const std::vector<double> &n_grid, const std::vector<double> &values,
                     double ladder_step, double snap_tol) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::abs(values[i]);
    if (v > kZeroThreshold) {
      lx.push_back(std::log(n_grid[i]));
      ly.push_back(std::log(v));
    }
  }
  if (lx.empty()) return kZeroScale;
  if (lx.size() < 3) {
    std::ostringstream os;
    os << "exponent regression has only " << lx.size() << " usable point(s) out of "
       << values.size();
    throw DiagnosticError(os.str());
  }
  // Exponents are asymptotic: fit on the upper half of the grid so slowly
  // varying factors such as 1 + n^{-1/4} do not bias the slope.
  const std::size_t keep = std::max<std::size_t>(3, (lx.size() + 1) / 2);
  lx.erase(lx.begin(), lx.end() - static_cast<std::ptrdiff_t>(keep));
  ly.erase(ly.begin(), ly.end() - static_cast<std::ptrdiff_t>(keep));
  const double k = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / k;
    my += ly[i] / k;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (!(sxx > 0.0)) throw DiagnosticError("exponent regression needs distinct n values");
  const double slope = sxy / sxx;
  if (ladder_step > 0.0) {
    const double snapped = std::round(slope / ladder_step) * ladder_step;
    if (std::abs(slope - snapped) <= snap_tol) return snapped == 0.0 ? 0.0 : snapped;
  }
  return slope;
}

PairExponents fit_exponents(const ScaledPairFamily &fam, const ScwOptions &opts) {
  if (fam.n_grid.size() < 3) throw DiagnosticError("n_grid needs at least 3 points");
  PairExponents ex;
  ex.n_grid = fam.n_grid;
  ex.ladder_step = fam.ladder_step;
  for (double n : fam.n_grid) {
    const auto [g1, g2] = fam.generator(n);
    std::vector<double> w, t;
    for (const auto &a : g1.atoms()) {
      w.push_back(a.weight);
      t.push_back(a.theta);
    }
    for (const auto &a : g2.atoms()) {
      w.push_back(-a.weight);
      t.push_back(a.theta);
    }
    if (!ex.weights.empty() && w.size() != ex.atoms)
      throw DiagnosticError("atom count changes along the n grid");
    ex.atoms = w.size();
    ex.weights.push_back(std::move(w));
    ex.locations.push_back(std::move(t));
  }

  ex.a.assign(ex.atoms, std::vector<double>(ex.atoms, kZeroScale));
  std::vector<double> dist(fam.n_grid.size());
  for (std::size_t j = 0; j < ex.atoms; ++j)
    for (std::size_t k = j + 1; k < ex.atoms; ++k) {
      for (std::size_t i = 0; i < fam.n_grid.size(); ++i)
        dist[i] = ex.locations[i][j] - ex.locations[i][k];
      ex.a[j][k] = ex.a[k][j] = fit_log_slope(fam.n_grid, dist, fam.ladder_step, opts.snap_tol);
    }
  return ex;
}

double weight_exponent(const PairExponents &ex, const std::vector<std::size_t> &subset,
                       const ScwOptions &opts) {
  std::vector<double> sums(ex.n_grid.size(), 0.0);
  for (std::size_t i = 0; i < ex.n_grid.size(); ++i)
    for (auto j : subset) sums[i] += ex.weights[i].at(j);
  return fit_log_slope(ex.n_grid, sums, ex.ladder_step, opts.snap_tol);
}

std::vector<TreeNode> build_tree(const std::vector<std::vector<double>> &a, double snap_tol) {
  const std::size_t n = a.size();
  if (n == 0) throw DiagnosticError("exponent matrix is empty");
  for (const auto &row : a)
    if (row.size() != n) throw DiagnosticError("exponent matrix must be square");

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        if (i == j || j == k || i == k) continue;
        if (a[i][k] > std::max(a[i][j], a[j][k]) + snap_tol) {
          std::ostringstream os;
          os << "exponents are not ultrametric at (" << i << ", " << j << ", " << k << "): a("
             << i << "," << k << ")=" << a[i][k] << " > max(" << a[i][j] << ", " << a[j][k]
             << ")";
          throw DiagnosticError(os.str());
        }
      }

  std::vector<double> levels = {kZeroScale};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) levels.push_back(a[i][j]);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end(),
                           [](double x, double y) {
                             return x == y || (std::isfinite(x) && std::abs(x - y) <= kLevelTol);
                           }),
               levels.end());

  std::set<std::vector<std::size_t>> balls;
  for (std::size_t j = 0; j < n; ++j)
    for (double level : levels) {
      std::vector<std::size_t> ball;
      for (std::size_t k = 0; k < n; ++k)
        if (k == j || a[j][k] == kZeroScale || a[j][k] <= level + kLevelTol) ball.push_back(k);
      balls.insert(ball);
    }
  std::vector<std::size_t> everything(n);
  for (std::size_t k = 0; k < n; ++k) everything[k] = k;
  balls.insert(everything);

  std::vector<std::vector<std::size_t>> ordered(balls.begin(), balls.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto &x, const auto &y) { return x.size() > y.size(); });

  std::vector<TreeNode> nodes(ordered.size());
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    auto &node = nodes[i];
    node.members = ordered[i];
    for (auto j : node.members)
      for (auto k : node.members)
        if (j < k) node.diameter_exponent = std::max(node.diameter_exponent, a[j][k]);
    // Parent: the smallest earlier ball containing this one.
    for (std::size_t p = i; p-- > 0;) {
      if (ordered[p].size() > ordered[i].size() &&
          std::includes(ordered[p].begin(), ordered[p].end(), ordered[i].begin(),
                        ordered[i].end())) {
        node.parent = static_cast<int>(p);
        break;
      }
    }
    if (node.parent >= 0) nodes[static_cast<std::size_t>(node.parent)].children.push_back(static_cast<int>(i));
  }
  return nodes;
}

ScalingTreeReport check_scw(const ScaledPairFamily &fam, const ScwOptions &opts) {
  const auto ex = fit_exponents(fam, opts);
  ScalingTreeReport report;
  report.name = fam.name;
  report.pairwise_exponents = ex.a;
  report.tree = build_tree(ex.a, opts.snap_tol);
  for (auto &node : report.tree) node.weight_exponent = weight_exponent(ex, node.members, opts);
  report.n_grid = fam.n_grid;

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double n : fam.n_grid) {
    const auto [g1, g2] = fam.generator(n);
    const double lhs = wasserstein_w1(g1, g2);
    double rhs = 0.0;
    for (const auto &node : report.tree) {
      if (node.parent < 0) continue;
      const auto &parent = report.tree[static_cast<std::size_t>(node.parent)];
      rhs = std::max(rhs, eps(node.weight_exponent, n) * eps(parent.diameter_exponent, n));
    }
    report.lhs.push_back(lhs);
    report.rhs.push_back(rhs);
    const double ratio = rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity();
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  report.ratio_range = {lo, hi};
  report.pass = std::isfinite(hi) && lo > 0.0 && hi <= opts.bound && 1.0 / lo <= opts.bound &&
                hi / lo <= opts.bound;
  return report;
}

std::vector<double> parse_log_grid(const std::string &spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw ArgumentError("grid spec must look like a:b:k, got '" + spec + "'");
  double a = 0.0, b = 0.0;
  long k = 0;
  try {
    a = std::stod(parts[0]);
    b = std::stod(parts[1]);
    k = std::stol(parts[2]);
  } catch (const std::exception &) {
    throw ArgumentError("grid spec must look like a:b:k, got '" + spec + "'");
  }
  if (!(a > 0.0) || !(b > a) || k < 2) throw ArgumentError("grid spec needs 0 < a < b and k >= 2");
  std::vector<double> out;
  const double la = std::log10(a), lb = std::log10(b);
  for (long i = 0; i < k; ++i)
    out.push_back(std::pow(10.0, la + (lb - la) * static_cast<double>(i) / static_cast<double>(k - 1)));
  return out;
}

} // namespace mixrate
