#pragma once

#include <Eigen/Dense>
#include <functional>

#include "sphquad/geometry.hpp"

namespace sphquad {

// Legendre polynomial P_l(t) on [-1, 1], P_l(1) = 1.
double legendre_P(int degree, double t);

// Index (l, k) with k = 1 ... 2l+1 mapping to signed order m = k - l - 1.
struct SphericalHarmonicIndex {
  int degree = 0;
  int k = 1;

  int order() const { return k - degree - 1; }
  bool valid() const { return degree >= 0 && k >= 1 && k <= 2 * degree + 1; }
};

// Real spherical harmonic, orthonormal in L^2(S^2):
//   Y_{0,0} = 1/sqrt(4 pi), degree-one harmonics are sqrt(3/(4 pi)) {y, z, x}
//   for k = 1, 2, 3.  m < 0 carries sin(|m| phi), m > 0 carries cos(m phi).
double real_sph_harm(const SphericalHarmonicIndex& idx, const Vec3& x);

// All 2l+1 values of degree l at x, ordered by k.
Eigen::VectorXd real_sph_harm_row(int degree, const Vec3& x);

struct GaussLegendreRule {
  Eigen::VectorXd nodes;    // on [-1, 1]
  Eigen::VectorXd weights;  // sum to 2
};

GaussLegendreRule gauss_legendre_rule(int n);

// Integral of f over [a, b] by composite Gauss-Legendre on equal panels.
double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int panels, int points_per_panel);

// Integral of f over [-1, 1] with panels geometrically graded toward t = 1,
// for integrands whose derivatives blow up at that endpoint.
double integrate_graded(const std::function<double(double)>& f, int levels,
                        int points_per_panel);

// Legendre coefficient a_j = (2j+1)/2 * Integral f(t) P_j(t) dt, refined until
// two successive refinements agree to `tol` absolute.  `graded` switches the
// endpoint-graded panels on.
double legendre_coefficient(const std::function<double(double)>& f, int j,
                            bool graded = false, double tol = 1e-11);

// log |Gamma(x)| with the sign of Gamma(x), valid for negative non-integer x.
struct SignedLogGamma {
  double log_abs;
  int sign;
};
SignedLogGamma signed_log_gamma(double x);

}  // namespace sphquad
