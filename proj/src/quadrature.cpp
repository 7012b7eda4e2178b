#include "sphquad/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "sphquad/parallel.hpp"
#include "sphquad/special_functions.hpp"
#include "sphquad/weight_solver.hpp"

namespace sphquad {

QuadratureRule make_sphere_rule(const NodeSet& X, Eigen::VectorXd weights,
                                std::string provenance) {
  if (X.size() != weights.size())
    throw std::invalid_argument("make_sphere_rule: node/weight count mismatch");
  if (!weights.allFinite()) throw std::invalid_argument("make_sphere_rule: non-finite weights");
  QuadratureRule rule;
  rule.nodes = X;
  rule.points = X.matrix();
  rule.weights = std::move(weights);
  rule.surface = SurfaceKind::sphere;
  rule.provenance = std::move(provenance);
  return rule;
}

namespace {

// Neumaier compensated sum of c_i * v_i.
double compensated_dot(const Eigen::VectorXd& c, const Eigen::VectorXd& v) {
  double sum = 0, comp = 0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double term = c(i) * v(i);
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term))
      comp += (sum - t) + term;
    else
      comp += (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace

double apply(const QuadratureRule& rule, const std::function<double(const Vec3&)>& f) {
  Eigen::VectorXd vals(rule.size());
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    vals(i) = f(rule.points.row(i).transpose());
    if (!std::isfinite(vals(i)))
      throw std::runtime_error("apply: non-finite integrand value at node " + std::to_string(i));
  }
  return compensated_dot(rule.weights, vals);
}

double apply_values(const QuadratureRule& rule, const Eigen::VectorXd& values) {
  if (values.size() != rule.size())
    throw std::invalid_argument("apply_values: length mismatch");
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (!std::isfinite(values(i)))
      throw std::runtime_error("apply_values: non-finite value at node " + std::to_string(i));
  return compensated_dot(rule.weights, values);
}

WeightDiagnostics diagnostics(const QuadratureRule& rule) {
  WeightDiagnostics d;
  const Eigen::VectorXd& c = rule.weights;
  d.mean = c.sum() / static_cast<double>(c.size());
  d.min = c.minCoeff();
  d.max = c.maxCoeff();
  d.l1 = c.lpNorm<1>();
  d.l2 = c.norm();
  d.negative_count = (c.array() < 0.0).count();
  return d;
}

namespace {

std::uint64_t splitmix64_at(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double counter_uniform(std::uint64_t key, std::uint64_t ctr) {
  // two mixing rounds over (key, counter)
  const std::uint64_t z = splitmix64_at(splitmix64_at(key) ^ (0x9e3779b97f4a7c15ULL * ctr));
  return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
}

// standard normal via Box-Muller on the counter stream
double counter_normal(std::uint64_t key, std::uint64_t ctr) {
  const double u1 = counter_uniform(key, 2 * ctr);
  const double u2 = counter_uniform(key, 2 * ctr + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

NoiseStd noise_stddev(const QuadratureRule& rule, double sigma_nu, int samples,
                      std::uint64_t seed) {
  if (samples < 100) throw std::invalid_argument("noise_stddev: samples >= 100");
  const Eigen::Index n = rule.size();
  Eigen::VectorXd q(samples);
  parallel_for(0, samples, [&](std::ptrdiff_t s) {
    const std::uint64_t key = splitmix64_at(seed) ^ static_cast<std::uint64_t>(s);
    Eigen::VectorXd noise(n);
    for (Eigen::Index i = 0; i < n; ++i)
      noise(i) = sigma_nu * counter_normal(key, static_cast<std::uint64_t>(i));
    q(s) = rule.weights.dot(noise);
  });
  const double mean = q.mean();
  const double var = (q.array() - mean).square().sum() / (samples - 1);
  NoiseStd out;
  out.sampled = std::sqrt(var);
  out.exact = sigma_nu * rule.weights.norm();
  return out;
}

QuadratureRule spheroid_rule(const QuadratureRule& rule, double a) {
  if (!(a > 0.0 && a <= 1.0)) throw std::domain_error("spheroid_rule: a must be in (0, 1]");
  if (rule.surface != SurfaceKind::sphere)
    throw std::invalid_argument("spheroid_rule: input must be a sphere rule");
  QuadratureRule out = rule;
  out.surface = SurfaceKind::spheroid;
  out.spheroid_a = a;
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    const double z = rule.points(i, 2);
    out.points(i, 2) = a * z;
    out.weights(i) = std::sqrt(a * a + (1.0 - a * a) * z * z) * rule.weights(i);
  }
  return out;
}

QuadratureRule diffeo_rule(const QuadratureRule& rule,
                           const std::function<double(const Vec3&)>& scale,
                           const std::function<Vec3(const Vec3&)>& map) {
  QuadratureRule out = rule;
  out.surface = SurfaceKind::custom_diffeo;
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    const Vec3 x = rule.points.row(i).transpose();
    const double w = scale(x);
    if (!(w > 0.0))
      throw std::runtime_error("diffeo_rule: nonpositive scale at node " + std::to_string(i));
    out.points.row(i) = map(x).transpose();
    out.weights(i) = w * rule.weights(i);
  }
  return out;
}

double oblate_spheroid_area(double a) {
  if (!(a > 0.0 && a < 1.0)) {
    if (a == 1.0) return 4.0 * M_PI;
    throw std::domain_error("oblate_spheroid_area: a in (0, 1]");
  }
  const double e = std::sqrt(1.0 - a * a);
  return 2.0 * M_PI * (1.0 + (a * a / e) * std::atanh(e));
}

LagrangeDiagnostic lagrange_diagnostic(const SurfaceSplineKernel& K, const NodeSet& X,
                                       const std::vector<Eigen::Index>& probe_nodes,
                                       Eigen::Index probe_points) {
  const Eigen::Index n = X.size();
  if (n > 5000) throw std::invalid_argument("lagrange_diagnostic: N too large for direct solves");
  const Eigen::MatrixXd A = kernel_matrix(K, X);
  const Eigen::MatrixXd Psi = pi_matrix(X);

  // product probe rule: Gauss-Legendre in cos(theta) x uniform azimuth
  const int nt = std::max(8, static_cast<int>(std::sqrt(static_cast<double>(probe_points) / 2.0)));
  const int nphi = 2 * nt;
  const GaussLegendreRule gl = gauss_legendre_rule(nt);
  Eigen::MatrixX3d probes(static_cast<Eigen::Index>(nt) * nphi, 3);
  Eigen::VectorXd pw(probes.rows());
  for (int i = 0; i < nt; ++i) {
    const double ct = gl.nodes(i), st = std::sqrt(1.0 - ct * ct);
    for (int j = 0; j < nphi; ++j) {
      const double phi = 2.0 * M_PI * j / nphi;
      probes.row(static_cast<Eigen::Index>(i) * nphi + j) << st * std::cos(phi),
          st * std::sin(phi), ct;
      pw(static_cast<Eigen::Index>(i) * nphi + j) = gl.weights(i) * (2.0 * M_PI / nphi);
    }
  }

  // weights of the full rule, for the c_xi comparison
  const WeightSolution ws = solve_direct(K, X);

  LagrangeDiagnostic out;
  out.probed = probe_nodes;
  Eigen::VectorXd lebesgue_at_probe = Eigen::VectorXd::Zero(probes.rows());

  for (Eigen::Index xi : probe_nodes) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(xi) = 1.0;
    const auto sol = solve_saddle_dense(A, Psi, e, Eigen::Vector4d::Zero());

    // cardinality at the nodes
    const Eigen::VectorXd at_nodes = A * sol.c + Psi * sol.d;
    double card_err = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      card_err = std::max(card_err, std::abs(at_nodes(j) - (j == xi ? 1.0 : 0.0)));
    out.max_cardinality_error = std::max(out.max_cardinality_error, card_err);

    // evaluate chi on the probe rule
    Eigen::VectorXd chi(probes.rows());
    parallel_for(0, probes.rows(), [&](std::ptrdiff_t q) {
      const Vec3 x = probes.row(q).transpose();
      double v = sol.d(0) + sol.d.segment(1, 3).dot(x);
      for (Eigen::Index j = 0; j < n; ++j)
        v += sol.c(j) * kernel_eval(K, x.dot(X.node(j)));
      chi(q) = v;
    });
    out.l1_norms.push_back(pw.dot(chi.cwiseAbs()));
    out.weight_vs_integral.push_back(std::abs(pw.dot(chi) - ws.c(xi)));
    lebesgue_at_probe += chi.cwiseAbs();
  }
  out.lebesgue_sum = lebesgue_at_probe.size() ? lebesgue_at_probe.maxCoeff() : 0.0;
  return out;
}

}  // namespace sphquad
