#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "sphquad/geometry.hpp"
#include "sphquad/kernels.hpp"
#include "sphquad/node_generation.hpp"
#include "sphquad/quadrature.hpp"
#include "sphquad/special_functions.hpp"
#include "sphquad/weight_solver.hpp"

namespace sphquad {

// Two conventions for reading the target center from the reference angle
// pair (lambda = -2.0281, phi = 0.76102); the reference vector as printed is
// not unit length, so both are carried and checked against the reference
// integrals.
enum class CenterConvention { spherical, literal_normalized };

UnitVector3 target_center(CenterConvention conv);

struct TargetFunction {
  std::string name;
  std::function<double(const Vec3&)> f;
  double exact_integral = 0;
  std::string smoothness;
  CenterConvention convention = CenterConvention::spherical;
};

// 4 pi a_l / (2l+1) * Y_{l,k}(x_c): sphere integral of g(x . x_c) Y_{l,k}(x).
double funk_hecke_value(const TargetKernel& g, const SphericalHarmonicIndex& idx,
                        const Vec3& x_c);

// The degree-20 validation integrands built from the potential-spline and
// Poisson kernels; exact integrals computed internally via Funk-Hecke.
struct TargetPair {
  TargetFunction f1;  // rough
  TargetFunction f2;  // smooth (Poisson, eps = 2/3)
};
TargetPair make_targets(CenterConvention conv = CenterConvention::spherical);

// Reference integral values for the two targets.
constexpr double kReferenceIntegralF1 = 0.014830900415995;
constexpr double kReferenceIntegralF2 = 0.032409262543520;

// Brute-force sphere integral of f with the pole rotated to `pole`; Gauss-
// Legendre in the polar direction (graded toward the pole when `graded`),
// uniform trapezoid in azimuth.
double sphere_integral(const std::function<double(const Vec3&)>& f, const Vec3& pole,
                       int polar_points, int azimuth_points, bool graded = false);

struct ConvergenceCell {
  Eigen::Index N = 0;
  double relative_error = 0;
  int iterations = 0;
  double weight_residual = 0;
};

struct ConvergenceReport {
  NodeFamily family = NodeFamily::fibonacci;
  std::string target;
  std::vector<ConvergenceCell> cells;
  double slope_vs_N = 0;   // least-squares slope on (log N, log err)
  double slope_vs_h = 0;   // -2 x slope_vs_N under h ~ N^{-1/2}
  bool dropped_first = false;  // pre-asymptotic first point dropped from fit
};

// Least-squares slope of log(err) vs log(N); drops the first point when its
// fit residual exceeds 3x the largest of the others', and records that.
void fit_slope(ConvergenceReport& report);

ConvergenceReport convergence_study(NodeFamily family, const std::vector<Eigen::Index>& sizes,
                                    const TargetFunction& target,
                                    const SurfaceSplineKernel& K, const SolverConfig& config);

struct IterationCell {
  Eigen::Index N = 0;
  int iterations = 0;
  double direct_vs_iterative = -1;  // relative l-inf gap when the direct oracle ran
};

struct IterationReport {
  NodeFamily family = NodeFamily::fibonacci;
  std::vector<IterationCell> cells;
  double max_min_ratio = 0;
};

IterationReport iteration_study(NodeFamily family, const std::vector<Eigen::Index>& sizes,
                                const SurfaceSplineKernel& K, const SolverConfig& config,
                                Eigen::Index direct_check_limit = 3000);

struct StabilityCell {
  Eigen::Index N = 0;
  double sampled = 0;
  double exact = 0;
};

struct StabilityReport {
  NodeFamily family = NodeFamily::fibonacci;
  std::vector<StabilityCell> cells;
  double slope = 0;  // of log(exact) vs log(N)
};

StabilityReport stability_study(NodeFamily family, const std::vector<Eigen::Index>& sizes,
                                const SurfaceSplineKernel& K, const SolverConfig& config,
                                int samples = 500, std::uint64_t seed = 0);

// Node generation for a family where `size` means N (fibonacci/min-energy)
// or is resolved to the nearest icosahedral level when the family is
// icosahedral (sizes are then 10 n^2 + 2).
NodeSet nodes_for_family(NodeFamily family, Eigen::Index size, std::uint64_t seed = 0);

// key=value record serialization of reports
void write_report(std::ostream& os, const ConvergenceReport& r);
void write_report(std::ostream& os, const IterationReport& r);
void write_report(std::ostream& os, const StabilityReport& r);

}  // namespace sphquad
