#pragma once

#include <Eigen/Dense>
#include <string>

#include "sphquad/geometry.hpp"

namespace sphquad {

// Restricted surface-spline kernel on S^2 (n = 2), order m >= 2, s = m - 1.
// Two equivalent m = 2 variants are carried:
//   log1mt:  Phi(t) = (1 - t) log(1 - t)
//   r2logr:  Phi(t) = (1 - t) log(2 - 2t)   (r^2 log r with r^2 = 2 - 2t)
// Their difference (1 - t) log 2 lies in the auxiliary space, so quadrature
// weights computed from either agree.
struct SurfaceSplineKernel {
  enum class Variant { log1mt, r2logr };

  int m = 2;
  Variant variant = Variant::r2logr;

  std::string name() const;
  static SurfaceSplineKernel from_name(const std::string& name);
};

double kernel_eval(const SurfaceSplineKernel& K, double t);

// A_ij = Phi(x_i . x_j), symmetric, assembled blockwise.
Eigen::MatrixXd kernel_matrix(const SurfaceSplineKernel& K, const NodeSet& X);

// y = A v without materializing A; identical result to kernel_matrix(K,X)*v.
Eigen::VectorXd kernel_matvec(const SurfaceSplineKernel& K, const NodeSet& X,
                              const Eigen::VectorXd& v);

// N x 4 matrix with columns {1, x, y, z} at the nodes.  Throws if the columns
// are rank deficient (auxiliary space not unisolvent on X).
Eigen::MatrixXd pi_matrix(const NodeSet& X);

// Integrals of the auxiliary basis: (4 pi, 0, 0, 0).
Eigen::Vector4d pi_integrals();

// J0 = 2 pi * Integral_{-1}^{1} Phi(t) dt, closed form:
//   r2logr: 2 pi (4 log 2 - 1),   log1mt: 2 pi (2 log 2 - 1).
double kernel_integral_constant(const SurfaceSplineKernel& K);

// Eigen-expansion coefficient of the m = 2 surface spline on S^2,
// kappa_j = 8 pi / ((j-1) j (j+1) (j+2)), j >= 2.
double tps_legendre_coeff(const SurfaceSplineKernel& K, int j);

// Target kernels for the validation integrands.
struct TargetKernel {
  enum class Kind { potential_spline, poisson };

  Kind kind = Kind::poisson;
  double epsilon = 2.0 / 3.0;  // poisson only, in (0, 1)

  static TargetKernel potential_spline();
  static TargetKernel poisson(double epsilon);
};

double target_kernel_eval(const TargetKernel& g, double t);

// Legendre coefficient a_l: Gamma-ratio formula for the potential spline,
// (2l+1) eps^l for the Poisson kernel.
double target_kernel_coeff(const TargetKernel& g, int l);

}  // namespace sphquad
