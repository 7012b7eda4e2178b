#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sphquad/special_functions.hpp"

using namespace sphquad;

namespace {

Vec3 random_unit(std::mt19937& rng) {
  std::normal_distribution<double> g;
  Vec3 v(g(rng), g(rng), g(rng));
  return v.normalized();
}

}  // namespace

TEST_CASE("legendre_P low-degree values") {
  CHECK(legendre_P(0, 0.7) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(legendre_P(1, 0.3) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(legendre_P(2, 0.5) == doctest::Approx(-0.125).epsilon(1e-15));
  CHECK(legendre_P(20, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(legendre_P(2, 1.5), std::domain_error);
}

TEST_CASE("Y_00 is constant") {
  std::mt19937 rng(1);
  for (int i = 0; i < 5; ++i)
    CHECK(real_sph_harm({0, 1}, random_unit(rng)) ==
          doctest::Approx(0.2820947917738781).epsilon(1e-15));
}

TEST_CASE("degree-one harmonics") {
  const double c = std::sqrt(3.0 / (4.0 * M_PI));
  std::mt19937 rng(2);
  const Vec3 x = random_unit(rng);
  CHECK(real_sph_harm({1, 1}, x) == doctest::Approx(c * x.y()).epsilon(1e-14));
  CHECK(real_sph_harm({1, 2}, x) == doctest::Approx(c * x.z()).epsilon(1e-14));
  CHECK(real_sph_harm({1, 3}, x) == doctest::Approx(c * x.x()).epsilon(1e-14));
}

TEST_CASE("addition theorem") {
  std::mt19937 rng(3);
  for (int l : {1, 5, 20}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Vec3 x = random_unit(rng), y = random_unit(rng);
      const Eigen::VectorXd yx = real_sph_harm_row(l, x);
      const Eigen::VectorXd yy = real_sph_harm_row(l, y);
      const double lhs = yx.dot(yy);
      const double rhs = (2 * l + 1) / (4.0 * M_PI) * legendre_P(l, x.dot(y));
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
      // x = y case to tighter tolerance
      CHECK(yx.squaredNorm() ==
            doctest::Approx((2 * l + 1) / (4.0 * M_PI)).epsilon(1e-12));
    }
  }
}

TEST_CASE("orthonormality over a product grid, degrees <= 20") {
  // Gauss-Legendre in z, trapezoid in azimuth: exact for this degree range
  const int nz = 64, nphi = 96;
  const GaussLegendreRule gl = gauss_legendre_rule(nz);
  std::vector<SphericalHarmonicIndex> idx;
  for (int l : {0, 1, 2, 7, 20})
    for (int k = 1; k <= 2 * l + 1; ++k) idx.push_back({l, k});
  const int M = static_cast<int>(idx.size());
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(M, M);
  for (int iz = 0; iz < nz; ++iz) {
    const double z = gl.nodes(iz), r = std::sqrt(1.0 - z * z);
    for (int ip = 0; ip < nphi; ++ip) {
      const double phi = 2.0 * M_PI * ip / nphi;
      const Vec3 x(r * std::cos(phi), r * std::sin(phi), z);
      Eigen::VectorXd v(M);
      for (int a = 0; a < M; ++a) v(a) = real_sph_harm(idx[a], x);
      G += (gl.weights(iz) * 2.0 * M_PI / nphi) * v * v.transpose();
    }
  }
  CHECK((G - Eigen::MatrixXd::Identity(M, M)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("gauss_legendre_rule closed forms") {
  const GaussLegendreRule r1 = gauss_legendre_rule(1);
  CHECK(r1.nodes(0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r1.weights(0) == doctest::Approx(2.0).epsilon(1e-15));

  const GaussLegendreRule r2 = gauss_legendre_rule(2);
  CHECK(r2.nodes(0) == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(r2.nodes(1) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(r2.weights(0) == doctest::Approx(1.0).epsilon(1e-15));

  // degree-5 exactness at n = 3
  const GaussLegendreRule r3 = gauss_legendre_rule(3);
  double q = 0;
  for (int i = 0; i < 3; ++i) q += r3.weights(i) * std::pow(r3.nodes(i), 4);
  CHECK(q == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("integrate_gl and integrate_graded on a logarithmic endpoint") {
  // Integral of (1-t) log(1-t) over [-1,1] = 2 log 2 - 1 after u = 1 - t
  auto f = [](double t) {
    const double u = 1.0 - t;
    return u < 1e-300 ? 0.0 : u * std::log(u);
  };
  const double exact = 2.0 * std::log(2.0) - 1.0;
  CHECK(integrate_graded(f, 40, 24) == doctest::Approx(exact).epsilon(1e-13));
  CHECK(integrate_gl(f, -1.0, 1.0, 64, 24) == doctest::Approx(exact).epsilon(1e-9));
}

TEST_CASE("legendre_coefficient oracles") {
  CHECK(legendre_coefficient([](double t) { return legendre_P(2, t); }, 2) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // (1-t)log(1-t): a_2 = (5/2) * (1/6) * ... => 5/12
  auto phi = [](double t) {
    const double u = 1.0 - t;
    return u < 1e-300 ? 0.0 : u * std::log(u);
  };
  CHECK(legendre_coefficient(phi, 2, true) == doctest::Approx(5.0 / 12.0).epsilon(1e-10));
}

TEST_CASE("signed_log_gamma against known values") {
  // Gamma(-1.5) = 4 sqrt(pi) / 3
  const SignedLogGamma g = signed_log_gamma(-1.5);
  CHECK(g.sign == 1);
  CHECK(std::exp(g.log_abs) == doctest::Approx(4.0 * std::sqrt(M_PI) / 3.0).epsilon(1e-13));
  // Gamma(-0.5) = -2 sqrt(pi)
  const SignedLogGamma h = signed_log_gamma(-0.5);
  CHECK(h.sign == -1);
  CHECK(std::exp(h.log_abs) == doctest::Approx(2.0 * std::sqrt(M_PI)).epsilon(1e-13));
  // positive arguments reduce to lgamma
  const SignedLogGamma p = signed_log_gamma(4.0);
  CHECK(p.sign == 1);
  CHECK(std::exp(p.log_abs) == doctest::Approx(6.0).epsilon(1e-13));
}

TEST_CASE("harmonic index mapping") {
  CHECK(SphericalHarmonicIndex{20, 1}.order() == -20);
  CHECK(SphericalHarmonicIndex{20, 21}.order() == 0);
  CHECK(SphericalHarmonicIndex{20, 41}.order() == 20);
  CHECK_FALSE(SphericalHarmonicIndex{2, 6}.valid());
}
