#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>

#include "sphquad/geometry.hpp"
#include "sphquad/kernels.hpp"

namespace sphquad {

enum class SurfaceKind { sphere, spheroid, custom_diffeo };

struct QuadratureRule {
  NodeSet nodes;            // on the target surface (re-normalization is skipped
                            // for non-sphere surfaces; see points below)
  Eigen::MatrixX3d points;  // raw surface points, row per node
  Eigen::VectorXd weights;
  SurfaceKind surface = SurfaceKind::sphere;
  double spheroid_a = 1.0;
  std::string provenance;

  Eigen::Index size() const { return weights.size(); }
};

QuadratureRule make_sphere_rule(const NodeSet& X, Eigen::VectorXd weights,
                                std::string provenance = {});

// sum_i c_i f(x_i) with compensated (Neumaier) summation.  Throws if f
// returns a non-finite value, naming the node index.
double apply(const QuadratureRule& rule, const std::function<double(const Vec3&)>& f);

// Same rule applied to precomputed node values.
double apply_values(const QuadratureRule& rule, const Eigen::VectorXd& values);

struct WeightDiagnostics {
  double mean = 0;
  double min = 0;
  double max = 0;
  double l1 = 0;
  double l2 = 0;
  Eigen::Index negative_count = 0;
};

WeightDiagnostics diagnostics(const QuadratureRule& rule);

struct NoiseStd {
  double sampled = 0;  // Monte-Carlo estimate of sigma_Q
  double exact = 0;    // sigma_nu * ||c||_2
};

// Quadrature of i.i.d. zero-mean noise with standard deviation sigma_nu.
// Deterministic counter-based generator (splitmix64 streams + Box-Muller)
// keyed on (seed, sample, node).
NoiseStd noise_stddev(const QuadratureRule& rule, double sigma_nu, int samples,
                      std::uint64_t seed);

// Transport to the oblate spheroid x^2 + y^2 + z^2/a^2 = 1, 0 < a <= 1:
// nodes map by (x, y, z) -> (x, y, a z) and weights scale by
// sqrt(a^2 + (1 - a^2) z^2) with z the sphere-node coordinate (equivalently
// sqrt(a^2 + (a^{-2} - 1) z_s^2) at the surface point).
QuadratureRule spheroid_rule(const QuadratureRule& rule, double a);

// General diffeomorphism transport: weights scale by `scale` at the sphere
// nodes, points map through `map`.
QuadratureRule diffeo_rule(const QuadratureRule& rule,
                           const std::function<double(const Vec3&)>& scale,
                           const std::function<Vec3(const Vec3&)>& map);

// Closed-form oblate spheroid surface area, 2 pi (1 + a^2 atanh(e)/e).
double oblate_spheroid_area(double a);

struct LagrangeDiagnostic {
  std::vector<Eigen::Index> probed;    // node indices probed
  std::vector<double> l1_norms;        // estimated Integral |chi_xi|
  std::vector<double> weight_vs_integral;  // |c_xi - Integral chi_xi|
  double lebesgue_sum = 0;             // max over probe points of sum |chi_xi|
  double max_cardinality_error = 0;    // max |chi_xi(eta) - delta| at nodes
};

// Solves the full interpolation system for cardinal data at a probed node
// subset and checks c_xi = Integral chi_xi dmu against a fine probe rule.
LagrangeDiagnostic lagrange_diagnostic(const SurfaceSplineKernel& K, const NodeSet& X,
                                       const std::vector<Eigen::Index>& probe_nodes,
                                       Eigen::Index probe_points);

}  // namespace sphquad
