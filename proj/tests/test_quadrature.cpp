#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sphquad/node_generation.hpp"
#include "sphquad/quadrature.hpp"
#include "sphquad/weight_solver.hpp"

using namespace sphquad;

namespace {

const SurfaceSplineKernel kR2 = SurfaceSplineKernel::from_name("tps-m2");

QuadratureRule tetra_rule() {
  const NodeSet T = min_energy_nodes(4, 0, 3, 5000);
  return make_sphere_rule(T, solve_direct(kR2, T).c);
}

QuadratureRule fib_rule(Eigen::Index n) {
  const NodeSet X = fibonacci_nodes(n);
  SolverConfig cfg;
  return make_sphere_rule(X, solve_weights(kR2, X, cfg).c);
}

}  // namespace

TEST_CASE("apply: exactness on the auxiliary space") {
  const QuadratureRule rule = fib_rule(501);
  CHECK(apply(rule, [](const Vec3&) { return 1.0; }) ==
        doctest::Approx(4.0 * M_PI).epsilon(1e-9));
  CHECK(std::abs(apply(rule, [](const Vec3& x) { return x.z(); })) < 1e-9);
  CHECK(std::abs(apply(rule, [](const Vec3& x) { return x.x() - 2.0 * x.y(); })) < 1e-9);
}

TEST_CASE("apply rejects non-finite integrand values") {
  const QuadratureRule rule = tetra_rule();
  CHECK_THROWS(apply(rule, [](const Vec3& x) { return 1.0 / (x.z() - x.z()); }));
}

TEST_CASE("apply_values matches apply") {
  const QuadratureRule rule = fib_rule(101);
  Eigen::VectorXd vals(rule.size());
  for (Eigen::Index i = 0; i < rule.size(); ++i)
    vals(i) = std::sin(3.0 * rule.nodes.node(i).z());
  const double a = apply(rule, [](const Vec3& x) { return std::sin(3.0 * x.z()); });
  CHECK(apply_values(rule, vals) == doctest::Approx(a).epsilon(1e-15));
}

TEST_CASE("diagnostics invariants") {
  const QuadratureRule t = tetra_rule();
  const WeightDiagnostics dt = diagnostics(t);
  CHECK(dt.min == doctest::Approx(M_PI).epsilon(1e-6));
  CHECK(dt.max == doctest::Approx(M_PI).epsilon(1e-6));
  CHECK(dt.negative_count == 0);

  const QuadratureRule f = fib_rule(501);
  const WeightDiagnostics df = diagnostics(f);
  CHECK(df.mean == doctest::Approx(4.0 * M_PI / 501.0).epsilon(1e-12));
  if (df.negative_count == 0)
    CHECK(df.l1 == doctest::Approx(f.weights.sum()).epsilon(1e-14));
  CHECK(df.l2 == doctest::Approx(f.weights.norm()).epsilon(1e-14));
}

TEST_CASE("noise_stddev exact channel and sampling concentration") {
  const QuadratureRule t = tetra_rule();
  const NoiseStd ns = noise_stddev(t, 1.0, 500, 42);
  CHECK(ns.exact == doctest::Approx(2.0 * M_PI).epsilon(1e-6));  // sqrt(4 pi^2)
  CHECK(ns.sampled / ns.exact > 0.85);
  CHECK(ns.sampled / ns.exact < 1.15);
  CHECK_THROWS_AS(noise_stddev(t, 1.0, 50, 0), std::invalid_argument);

  // deterministic in the seed
  const NoiseStd again = noise_stddev(t, 1.0, 500, 42);
  CHECK(again.sampled == ns.sampled);
  const NoiseStd other = noise_stddev(t, 1.0, 500, 43);
  CHECK(other.sampled != ns.sampled);

  // scales linearly in sigma_nu
  const NoiseStd scaled = noise_stddev(t, 2.5, 500, 42);
  CHECK(scaled.exact == doctest::Approx(2.5 * ns.exact).epsilon(1e-14));
}

TEST_CASE("spheroid transport: identity at a = 1") {
  const QuadratureRule f = fib_rule(101);
  const QuadratureRule s = spheroid_rule(f, 1.0);
  CHECK((s.weights - f.weights).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s.points - f.points).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spheroid transport: scale factor range at a = 299/300") {
  const QuadratureRule f = fib_rule(501);
  const QuadratureRule s = spheroid_rule(f, 299.0 / 300.0);
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double scale = s.weights(i) / f.weights(i);
    CHECK(scale >= 0.99666);
    CHECK(scale <= 1.0 + 1e-15);
  }
  CHECK(s.surface == SurfaceKind::spheroid);
  CHECK(s.spheroid_a == doctest::Approx(299.0 / 300.0));
  // points land on the spheroid
  for (Eigen::Index i = 0; i < s.size(); i += 50) {
    const double x = s.points(i, 0), y = s.points(i, 1), z = s.points(i, 2);
    const double aa = 299.0 / 300.0;
    CHECK(x * x + y * y + z * z / (aa * aa) == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("spheroid area, a = 0.5, N = 10242 icosahedral") {
  const NodeSet X = icosahedral_nodes(32);
  SolverConfig cfg;
  const QuadratureRule sphere = make_sphere_rule(X, solve_weights(kR2, X, cfg).c);
  const QuadratureRule sph = spheroid_rule(sphere, 0.5);
  const double area = sph.weights.sum();
  const double exact = oblate_spheroid_area(0.5);
  CHECK(std::abs(area - exact) / exact < 1e-6);
}

TEST_CASE("oblate_spheroid_area closed form") {
  CHECK(oblate_spheroid_area(1.0) == doctest::Approx(4.0 * M_PI).epsilon(1e-14));
  const double a = 0.5, e = std::sqrt(1.0 - a * a);
  CHECK(oblate_spheroid_area(a) ==
        doctest::Approx(2.0 * M_PI * (1.0 + a * a * std::atanh(e) / e)).epsilon(1e-14));
}

TEST_CASE("diffeo transport consistency") {
  const QuadratureRule f = fib_rule(101);
  // identity transport
  const QuadratureRule id = diffeo_rule(
      f, [](const Vec3&) { return 1.0; }, [](const Vec3& x) { return x; });
  CHECK((id.weights - f.weights).cwiseAbs().maxCoeff() == 0.0);

  // matches spheroid_rule
  const double a = 0.8;
  const QuadratureRule d = diffeo_rule(
      f,
      [a](const Vec3& x) { return std::sqrt(a * a + (1.0 - a * a) * x.z() * x.z()); },
      [a](const Vec3& x) { return Vec3(x.x(), x.y(), a * x.z()); });
  const QuadratureRule s = spheroid_rule(f, a);
  CHECK((d.weights - s.weights).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((d.points - s.points).cwiseAbs().maxCoeff() < 1e-15);

  // doubling the scale doubles the total weight
  const QuadratureRule twice = diffeo_rule(
      f, [](const Vec3&) { return 2.0; }, [](const Vec3& x) { return x; });
  CHECK(twice.weights.sum() == doctest::Approx(8.0 * M_PI).epsilon(1e-9));
}

TEST_CASE("Lagrange diagnostics at N=500 fibonacci") {
  const NodeSet X = fibonacci_nodes(501);
  std::vector<Eigen::Index> probed;
  for (int i = 0; i < 10; ++i) probed.push_back(i * 50);
  const LagrangeDiagnostic diag = lagrange_diagnostic(kR2, X, probed, 40000);
  CHECK(diag.max_cardinality_error < 1e-9);
  for (size_t i = 0; i < probed.size(); ++i) {
    CHECK(diag.weight_vs_integral[i] < 1e-5);  // probe-rule accuracy, not solver's
    CHECK(diag.l1_norms[i] < 10.0 * 4.0 * M_PI / 501.0);
  }
}

TEST_CASE("Lebesgue-sum estimate stays bounded as N grows") {
  double prev = 0;
  std::vector<double> lambdas;
  for (Eigen::Index n : {501, 1001, 2001}) {
    const NodeSet X = fibonacci_nodes(n);
    std::vector<Eigen::Index> probed;
    for (int i = 0; i < 5; ++i) probed.push_back(i * (n / 5));
    const LagrangeDiagnostic diag = lagrange_diagnostic(kR2, X, probed, 5000);
    lambdas.push_back(diag.lebesgue_sum);
    (void)prev;
  }
  // bounded-Lebesgue spot check: no growth beyond a modest constant
  CHECK(lambdas[2] < 2.0 * lambdas[0] + 1.0);
  for (double l : lambdas) CHECK(l < 20.0);
}
