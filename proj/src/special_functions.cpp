#include "sphquad/special_functions.hpp"

#include <cmath>
#include <stdexcept>

namespace sphquad {

double legendre_P(int degree, double t) {
  if (degree < 0) throw std::invalid_argument("legendre_P: negative degree");
  if (std::abs(t) > 1.0 + 1e-12) throw std::domain_error("legendre_P: |t| > 1");
  t = std::clamp(t, -1.0, 1.0);
  if (degree == 0) return 1.0;
  double pm1 = 1.0, p = t;
  for (int l = 2; l <= degree; ++l) {
    const double pn = ((2 * l - 1) * t * p - (l - 1) * pm1) / l;
    pm1 = p;
    p = pn;
  }
  return p;
}

namespace {

// Associated Legendre P_l^m(x) without the Condon-Shortley phase, upward
// recurrence in l at fixed m.  Factorials stay in range for the degrees used
// here (l <= 64); normalization below goes through lgamma anyway.
double assoc_legendre(int l, int m, double x) {
  // P_m^m = (2m-1)!! (1 - x^2)^{m/2}
  double pmm = 1.0;
  if (m > 0) {
    const double somx2 = std::sqrt(std::max(0.0, (1.0 - x) * (1.0 + x)));
    double fact = 1.0;
    for (int i = 0; i < m; ++i) {
      pmm *= fact * somx2;
      fact += 2.0;
    }
  }
  if (l == m) return pmm;
  double pmmp1 = x * (2 * m + 1) * pmm;
  if (l == m + 1) return pmmp1;
  double pll = 0;
  for (int ll = m + 2; ll <= l; ++ll) {
    pll = (x * (2 * ll - 1) * pmmp1 - (ll + m - 1) * pmm) / (ll - m);
    pmm = pmmp1;
    pmmp1 = pll;
  }
  return pll;
}

double sph_norm(int l, int m) {
  // sqrt((2l+1)/(4 pi) * (l-m)!/(l+m)!)
  const double lg = std::lgamma(static_cast<double>(l - m + 1)) -
                    std::lgamma(static_cast<double>(l + m + 1));
  return std::sqrt((2.0 * l + 1.0) / (4.0 * M_PI) * std::exp(lg));
}

}  // namespace

double real_sph_harm(const SphericalHarmonicIndex& idx, const Vec3& x) {
  if (!idx.valid()) throw std::invalid_argument("real_sph_harm: invalid index");
  const int l = idx.degree;
  const int m = idx.order();
  const double ct = std::clamp(x.z(), -1.0, 1.0);
  const double phi = std::atan2(x.y(), x.x());
  const int am = std::abs(m);
  const double plm = assoc_legendre(l, am, ct) * sph_norm(l, am);
  if (m == 0) return plm;
  const double az = (m > 0) ? std::cos(am * phi) : std::sin(am * phi);
  return std::sqrt(2.0) * plm * az;
}

Eigen::VectorXd real_sph_harm_row(int degree, const Vec3& x) {
  Eigen::VectorXd out(2 * degree + 1);
  const double ct = std::clamp(x.z(), -1.0, 1.0);
  const double phi = std::atan2(x.y(), x.x());
  for (int m = 0; m <= degree; ++m) {
    const double plm = assoc_legendre(degree, m, ct) * sph_norm(degree, m);
    if (m == 0) {
      out(degree) = plm;
    } else {
      out(degree - m) = std::sqrt(2.0) * plm * std::sin(m * phi);
      out(degree + m) = std::sqrt(2.0) * plm * std::cos(m * phi);
    }
  }
  return out;
}

GaussLegendreRule gauss_legendre_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_rule: n >= 1");
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration from the Chebyshev-like initial guess
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p = legendre_P(n, x);
      double pm1 = legendre_P(n - 1, x);
      double dp = n * (x * p - pm1) / (x * x - 1.0);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double p1 = legendre_P(n - 1, x);
    const double dp = n * (x * legendre_P(n, x) - p1) / (x * x - 1.0);
    rule.nodes(n - 1 - i) = x;
    rule.weights(n - 1 - i) = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int panels, int points_per_panel) {
  const GaussLegendreRule rule = gauss_legendre_rule(points_per_panel);
  const double w = (b - a) / panels;
  double total = 0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * w;
    double s = 0;
    for (int i = 0; i < rule.nodes.size(); ++i)
      s += rule.weights(i) * f(lo + 0.5 * w * (rule.nodes(i) + 1.0));
    total += 0.5 * w * s;
  }
  return total;
}

double integrate_graded(const std::function<double(double)>& f, int levels,
                        int points_per_panel) {
  const GaussLegendreRule rule = gauss_legendre_rule(points_per_panel);
  auto panel = [&](double lo, double hi) {
    double s = 0;
    for (int i = 0; i < rule.nodes.size(); ++i)
      s += rule.weights(i) * f(lo + 0.5 * (hi - lo) * (rule.nodes(i) + 1.0));
    return 0.5 * (hi - lo) * s;
  };
  // panels [-1, 0], [0, 1/2], ..., [1 - 2^{1-levels}, 1]
  double total = panel(-1.0, 0.0);
  double lo = 0.0;
  for (int k = 1; k < levels; ++k) {
    const double hi = 1.0 - std::ldexp(1.0, -k);
    total += panel(lo, hi);
    lo = hi;
  }
  total += panel(lo, 1.0);
  return total;
}

double legendre_coefficient(const std::function<double(double)>& f, int j,
                            bool graded, double tol) {
  auto fp = [&](double t) { return f(t) * legendre_P(j, t); };
  double prev = 0;
  bool have_prev = false;
  for (int k = 0; k < 8; ++k) {
    const int pts = 16 << k;
    const double integral =
        graded ? integrate_graded(fp, 12 + 6 * k, pts)
               : integrate_gl(fp, -1.0, 1.0, 4 + 2 * k, pts);
    const double a = 0.5 * (2 * j + 1) * integral;
    if (have_prev && std::abs(a - prev) <= tol) return a;
    prev = a;
    have_prev = true;
  }
  throw std::runtime_error("legendre_coefficient: refinement did not converge; last = " +
                           std::to_string(prev));
}

SignedLogGamma signed_log_gamma(double x) {
  if (x > 0) return {std::lgamma(x), 1};
  if (x == std::floor(x)) throw std::domain_error("signed_log_gamma: pole at non-positive integer");
  // reflection: Gamma(x) = pi / (sin(pi x) Gamma(1 - x))
  const double s = std::sin(M_PI * x);
  const double log_abs = std::log(M_PI) - std::log(std::abs(s)) - std::lgamma(1.0 - x);
  return {log_abs, s > 0 ? 1 : -1};
}

}  // namespace sphquad
