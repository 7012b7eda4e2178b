#include "sphquad/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "sphquad/parallel.hpp"
#include "sphquad/special_functions.hpp"

namespace sphquad {

std::string SurfaceSplineKernel::name() const {
  return variant == Variant::r2logr ? "tps-m2" : "tps-m2-log1mt";
}

SurfaceSplineKernel SurfaceSplineKernel::from_name(const std::string& name) {
  if (name == "tps-m2") return {2, Variant::r2logr};
  if (name == "tps-m2-log1mt") return {2, Variant::log1mt};
  throw std::invalid_argument("unknown kernel: " + name);
}

double kernel_eval(const SurfaceSplineKernel& K, double t) {
  if (K.m != 2) throw std::invalid_argument("kernel_eval: only m = 2 is implemented");
  if (std::abs(t) > 1.0 + 1e-12) throw std::domain_error("kernel_eval: |t| > 1");
  t = std::clamp(t, -1.0, 1.0);
  const double u = 1.0 - t;
  if (u < 1e-15) return 0.0;  // u log u -> 0
  return K.variant == SurfaceSplineKernel::Variant::log1mt ? u * std::log(u)
                                                           : u * std::log(2.0 * u);
}

Eigen::MatrixXd kernel_matrix(const SurfaceSplineKernel& K, const NodeSet& X) {
  const Eigen::Index n = X.size();
  const Eigen::MatrixX3d& P = X.matrix();
  const bool plain = K.variant == SurfaceSplineKernel::Variant::log1mt;
  Eigen::MatrixXd A(n, n);
  const Eigen::Index block = 256;
  parallel_for(0, (n + block - 1) / block, [&](std::ptrdiff_t bi) {
    const Eigen::Index r0 = bi * block;
    const Eigen::Index rows = std::min(block, n - r0);
    Eigen::ArrayXXd U = 1.0 - (P.middleRows(r0, rows) * P.transpose()).array();
    U = U.max(0.0);
    Eigen::ArrayXXd L = (plain ? U : 2.0 * U).max(1e-300).log();
    A.middleRows(r0, rows) = (U * L).matrix();
    for (Eigen::Index i = 0; i < rows; ++i) A(r0 + i, r0 + i) = 0.0;
  });
  // exact zero where u underflows to 0 (duplicate directions)
  return A;
}

Eigen::VectorXd kernel_matvec(const SurfaceSplineKernel& K, const NodeSet& X,
                              const Eigen::VectorXd& v) {
  const Eigen::Index n = X.size();
  const Eigen::MatrixX3d& P = X.matrix();
  const bool plain = K.variant == SurfaceSplineKernel::Variant::log1mt;
  Eigen::VectorXd y(n);
  const Eigen::Index block = 256;
  parallel_for(0, (n + block - 1) / block, [&](std::ptrdiff_t bi) {
    const Eigen::Index r0 = bi * block;
    const Eigen::Index rows = std::min(block, n - r0);
    Eigen::ArrayXXd U = 1.0 - (P.middleRows(r0, rows) * P.transpose()).array();
    U = U.max(0.0);
    Eigen::ArrayXXd L = (plain ? U : 2.0 * U).max(1e-300).log();
    U *= L;
    for (Eigen::Index i = 0; i < rows; ++i) U(i, r0 + i) = 0.0;
    y.segment(r0, rows) = U.matrix() * v;
  });
  return y;
}

Eigen::MatrixXd pi_matrix(const NodeSet& X) {
  const Eigen::Index n = X.size();
  Eigen::MatrixXd Psi(n, 4);
  Psi.col(0).setOnes();
  Psi.rightCols<3>() = X.matrix();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Psi);
  qr.setThreshold(1e-10);
  if (qr.rank() < 4)
    throw std::runtime_error("pi_matrix: auxiliary space not unisolvent on X");
  return Psi;
}

Eigen::Vector4d pi_integrals() { return Eigen::Vector4d(4.0 * M_PI, 0.0, 0.0, 0.0); }

double kernel_integral_constant(const SurfaceSplineKernel& K) {
  if (K.m != 2) throw std::invalid_argument("kernel_integral_constant: only m = 2");
  const double l2 = std::log(2.0);
  return K.variant == SurfaceSplineKernel::Variant::r2logr ? 2.0 * M_PI * (4.0 * l2 - 1.0)
                                                           : 2.0 * M_PI * (2.0 * l2 - 1.0);
}

double tps_legendre_coeff(const SurfaceSplineKernel& K, int j) {
  if (K.m != 2) throw std::invalid_argument("tps_legendre_coeff: only m = 2");
  if (j < 2) throw std::invalid_argument("tps_legendre_coeff: j >= 2 required (j <= s arbitrary)");
  const double jj = j;
  return 8.0 * M_PI / ((jj - 1.0) * jj * (jj + 1.0) * (jj + 2.0));
}

TargetKernel TargetKernel::potential_spline() { return {Kind::potential_spline, 0.0}; }

TargetKernel TargetKernel::poisson(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::domain_error("poisson kernel: epsilon must be in (0, 1)");
  return {Kind::poisson, epsilon};
}

double target_kernel_eval(const TargetKernel& g, double t) {
  if (std::abs(t) > 1.0 + 1e-12) throw std::domain_error("target_kernel_eval: |t| > 1");
  t = std::clamp(t, -1.0, 1.0);
  if (g.kind == TargetKernel::Kind::potential_spline)
    return -std::pow(2.0 - 2.0 * t, 0.25);
  const double e = g.epsilon;
  if (!(e > 0.0 && e < 1.0)) throw std::domain_error("poisson kernel: epsilon must be in (0, 1)");
  return (1.0 - e * e) / std::pow(1.0 + e * e - 2.0 * e * t, 1.5);
}

double target_kernel_coeff(const TargetKernel& g, int l) {
  if (l < 0) throw std::invalid_argument("target_kernel_coeff: l >= 0");
  if (g.kind == TargetKernel::Kind::poisson) {
    const double e = g.epsilon;
    if (!(e > 0.0 && e < 1.0)) throw std::domain_error("poisson kernel: epsilon must be in (0, 1)");
    return (2.0 * l + 1.0) * std::pow(e, l);
  }
  // a_l = (-1)^{l+1} sqrt(2) Gamma(5/4)^2 (2l+1) / (Gamma(5/4 - l) Gamma(9/4 + l))
  const SignedLogGamma g54 = signed_log_gamma(1.25);
  const SignedLogGamma num_extra{std::log(std::sqrt(2.0) * (2.0 * l + 1.0)), 1};
  const SignedLogGamma d1 = signed_log_gamma(1.25 - l);
  const SignedLogGamma d2 = signed_log_gamma(2.25 + l);
  const double log_abs = 2.0 * g54.log_abs + num_extra.log_abs - d1.log_abs - d2.log_abs;
  const int sign = ((l % 2 == 0) ? -1 : 1) * d1.sign * d2.sign;
  return sign * std::exp(log_abs);
}

}  // namespace sphquad
