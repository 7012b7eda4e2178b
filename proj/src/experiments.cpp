#include "sphquad/experiments.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "sphquad/special_functions.hpp"

namespace sphquad {

namespace {
constexpr double kCenterLambda = -2.0281;
constexpr double kCenterPhi = 0.76102;
constexpr int kTargetDegree = 20;
}  // namespace

UnitVector3 target_center(CenterConvention conv) {
  const double cl = std::cos(kCenterLambda), sl = std::sin(kCenterLambda);
  const double cp = std::cos(kCenterPhi), sp = std::sin(kCenterPhi);
  if (conv == CenterConvention::spherical)
    return UnitVector3(cl * cp, sl * cp, sp);
  // as printed in the reference (norm ~ 0.99524), then normalized
  return UnitVector3(cl * sp, sl * cp, sp);
}

double funk_hecke_value(const TargetKernel& g, const SphericalHarmonicIndex& idx,
                        const Vec3& x_c) {
  if (!idx.valid()) throw std::invalid_argument("funk_hecke_value: invalid index");
  const double a = target_kernel_coeff(g, idx.degree);
  return 4.0 * M_PI * a / (2.0 * idx.degree + 1.0) * real_sph_harm(idx, x_c);
}

namespace {

TargetFunction make_target(const std::string& name, const TargetKernel& g,
                           const std::string& smoothness, CenterConvention conv) {
  const UnitVector3 xc = target_center(conv);
  const Eigen::VectorXd yc = real_sph_harm_row(kTargetDegree, xc);
  Eigen::VectorXd sign(yc.size());
  for (Eigen::Index k = 0; k < yc.size(); ++k) sign(k) = yc(k) >= 0 ? 1.0 : -1.0;

  TargetFunction t;
  t.name = name;
  t.smoothness = smoothness;
  t.convention = conv;
  const Vec3 center = xc.vec();
  t.f = [g, sign, center](const Vec3& x) {
    const Eigen::VectorXd y = real_sph_harm_row(kTargetDegree, x);
    return sign.dot(y) * target_kernel_eval(g, x.dot(center));
  };
  const double a = target_kernel_coeff(g, kTargetDegree);
  t.exact_integral =
      4.0 * M_PI * a / (2.0 * kTargetDegree + 1.0) * yc.cwiseAbs().sum();
  return t;
}

}  // namespace

TargetPair make_targets(CenterConvention conv) {
  TargetPair out;
  out.f1 = make_target("f1", TargetKernel::potential_spline(), "W2^mu, mu < 5/2", conv);
  out.f2 = make_target("f2", TargetKernel::poisson(2.0 / 3.0), "analytic", conv);
  return out;
}

double sphere_integral(const std::function<double(const Vec3&)>& f, const Vec3& pole,
                       int polar_points, int azimuth_points, bool graded) {
  // orthonormal frame with e3 = pole
  const Vec3 e3 = pole.normalized();
  const Vec3 e1 = e3.unitOrthogonal();
  const Vec3 e2 = e3.cross(e1);

  auto ring = [&](double t) {  // azimuth average at polar cosine t
    const double st = std::sqrt(std::max(0.0, 1.0 - t * t));
    double s = 0;
    for (int j = 0; j < azimuth_points; ++j) {
      const double phi = 2.0 * M_PI * j / azimuth_points;
      const Vec3 x = st * std::cos(phi) * e1 + st * std::sin(phi) * e2 + t * e3;
      s += f(x);
    }
    return s * (2.0 * M_PI / azimuth_points);
  };
  return graded ? integrate_graded(ring, 30, polar_points)
                : integrate_gl(ring, -1.0, 1.0, 8, polar_points);
}

NodeSet nodes_for_family(NodeFamily family, Eigen::Index size, std::uint64_t seed) {
  switch (family) {
    case NodeFamily::fibonacci:
      return fibonacci_nodes(size % 2 == 0 ? size + 1 : size);
    case NodeFamily::icosahedral: {
      // nearest level with 10 n^2 + 2 >= size request
      const int n = std::max(1, static_cast<int>(std::lround(
                                    std::sqrt((static_cast<double>(size) - 2.0) / 10.0))));
      return icosahedral_nodes(n);
    }
    case NodeFamily::min_energy: {
      const Eigen::Index cap = size > 2000 ? 150 : 1000;  // keep large descents affordable
      return min_energy_nodes(size, seed, 3.0, cap);
    }
    default:
      throw std::invalid_argument("nodes_for_family: cannot generate custom family");
  }
}

void fit_slope(ConvergenceReport& report) {
  const auto fit = [](const std::vector<std::pair<double, double>>& pts) {
    double mx = 0, my = 0;
    for (auto& p : pts) {
      mx += p.first;
      my += p.second;
    }
    mx /= pts.size();
    my /= pts.size();
    double sxy = 0, sxx = 0;
    for (auto& p : pts) {
      sxy += (p.first - mx) * (p.second - my);
      sxx += (p.first - mx) * (p.first - mx);
    }
    return sxy / sxx;
  };
  std::vector<std::pair<double, double>> pts;
  for (const auto& c : report.cells)
    pts.emplace_back(std::log(static_cast<double>(c.N)), std::log(c.relative_error));
  double slope = fit(pts);
  report.dropped_first = false;
  if (pts.size() >= 4) {
    // Judge the first point against a fit of the remaining points (a large
    // outlier would drag a full fit enough to hide itself); drop it from the
    // final fit when it sits far off that line relative to its scatter.
    const std::vector<std::pair<double, double>> rest(pts.begin() + 1, pts.end());
    const double slope_rest = fit(rest);
    double mx = 0, my = 0;
    for (auto& p : rest) {
      mx += p.first;
      my += p.second;
    }
    mx /= rest.size();
    my /= rest.size();
    const double icpt = my - slope_rest * mx;
    double rest_max = 0;
    for (auto& p : rest)
      rest_max = std::max(rest_max, std::abs(p.second - (icpt + slope_rest * p.first)));
    const double res0 = std::abs(pts[0].second - (icpt + slope_rest * pts[0].first));
    if (res0 > 3.0 * rest_max + 0.1) {
      pts.erase(pts.begin());
      slope = slope_rest;
      report.dropped_first = true;
    }
  }
  report.slope_vs_N = slope;
  report.slope_vs_h = -2.0 * slope;
}

ConvergenceReport convergence_study(NodeFamily family, const std::vector<Eigen::Index>& sizes,
                                    const TargetFunction& target,
                                    const SurfaceSplineKernel& K, const SolverConfig& config) {
  if (sizes.size() < 3) throw std::invalid_argument("convergence_study: need >= 3 sizes");
  ConvergenceReport report;
  report.family = family;
  report.target = target.name;
  for (Eigen::Index size : sizes) {
    const NodeSet X = nodes_for_family(family, size);
    const WeightSolution sol = solve_weights(K, X, config);
    const QuadratureRule rule = make_sphere_rule(X, sol.c, K.name());
    const double q = apply(rule, target.f);
    ConvergenceCell cell;
    cell.N = X.size();
    cell.relative_error = std::abs(q - target.exact_integral) / std::abs(target.exact_integral);
    cell.iterations = sol.iterations;
    cell.weight_residual = sol.relative_residual;
    report.cells.push_back(cell);
  }
  fit_slope(report);
  return report;
}

IterationReport iteration_study(NodeFamily family, const std::vector<Eigen::Index>& sizes,
                                const SurfaceSplineKernel& K, const SolverConfig& config,
                                Eigen::Index direct_check_limit) {
  IterationReport report;
  report.family = family;
  int it_min = 1 << 30, it_max = 0;
  for (Eigen::Index size : sizes) {
    const NodeSet X = nodes_for_family(family, size);
    SolverConfig cfg = config;
    cfg.method = SolverConfig::Method::gmres;
    const WeightSolution sol = solve_iterative(K, X, cfg);
    IterationCell cell;
    cell.N = X.size();
    cell.iterations = sol.iterations;
    if (X.size() <= direct_check_limit) {
      const WeightSolution ds = solve_direct(K, X);
      cell.direct_vs_iterative =
          (sol.c - ds.c).lpNorm<Eigen::Infinity>() / ds.c.lpNorm<Eigen::Infinity>();
    }
    it_min = std::min(it_min, sol.iterations);
    it_max = std::max(it_max, sol.iterations);
    report.cells.push_back(cell);
  }
  report.max_min_ratio = it_min > 0 ? static_cast<double>(it_max) / it_min : 0.0;
  return report;
}

StabilityReport stability_study(NodeFamily family, const std::vector<Eigen::Index>& sizes,
                                const SurfaceSplineKernel& K, const SolverConfig& config,
                                int samples, std::uint64_t seed) {
  StabilityReport report;
  report.family = family;
  std::vector<std::pair<double, double>> pts;
  for (Eigen::Index size : sizes) {
    const NodeSet X = nodes_for_family(family, size);
    const WeightSolution sol = solve_weights(K, X, config);
    const QuadratureRule rule = make_sphere_rule(X, sol.c, K.name());
    const NoiseStd ns = noise_stddev(rule, 1.0, samples, seed ^ static_cast<std::uint64_t>(size));
    StabilityCell cell;
    cell.N = X.size();
    cell.sampled = ns.sampled;
    cell.exact = ns.exact;
    report.cells.push_back(cell);
    pts.emplace_back(std::log(static_cast<double>(cell.N)), std::log(cell.exact));
  }
  double mx = 0, my = 0;
  for (auto& p : pts) {
    mx += p.first;
    my += p.second;
  }
  mx /= pts.size();
  my /= pts.size();
  double sxy = 0, sxx = 0;
  for (auto& p : pts) {
    sxy += (p.first - mx) * (p.second - my);
    sxx += (p.first - mx) * (p.first - mx);
  }
  report.slope = sxy / sxx;
  return report;
}

void write_report(std::ostream& os, const ConvergenceReport& r) {
  os << "report=convergence family=" << family_name(r.family) << " target=" << r.target
     << " slope_vs_N=" << r.slope_vs_N << " slope_vs_h=" << r.slope_vs_h
     << " dropped_first=" << (r.dropped_first ? 1 : 0) << "\n";
  os.precision(12);
  for (const auto& c : r.cells)
    os << c.N << "\t" << c.relative_error << "\t" << c.iterations << "\t" << c.weight_residual
       << "\n";
}

void write_report(std::ostream& os, const IterationReport& r) {
  os << "report=iterations family=" << family_name(r.family)
     << " max_min_ratio=" << r.max_min_ratio << "\n";
  os.precision(12);
  for (const auto& c : r.cells) {
    os << c.N << "\t" << c.iterations;
    if (c.direct_vs_iterative >= 0) os << "\t" << c.direct_vs_iterative;
    os << "\n";
  }
}

void write_report(std::ostream& os, const StabilityReport& r) {
  os << "report=stability family=" << family_name(r.family) << " slope=" << r.slope << "\n";
  os.precision(12);
  for (const auto& c : r.cells) os << c.N << "\t" << c.sampled << "\t" << c.exact << "\n";
}

}  // namespace sphquad
