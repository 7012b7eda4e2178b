#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sphquad/experiments.hpp"
#include "sphquad/special_functions.hpp"

using namespace sphquad;

namespace {
const SurfaceSplineKernel kR2 = SurfaceSplineKernel::from_name("tps-m2");
}

TEST_CASE("funk_hecke_value trivial cases") {
  const Vec3 xc = target_center(CenterConvention::spherical).vec();
  // g2, l = 0: 4 pi * 1 * Y_00 = sqrt(4 pi)
  CHECK(funk_hecke_value(TargetKernel::poisson(2.0 / 3.0), {0, 1}, xc) ==
        doctest::Approx(std::sqrt(4.0 * M_PI)).epsilon(1e-13));
  // any harmonic vanishing at the center gives 0
  const Vec3 ez(0, 0, 1);
  // Y_{1,1} ~ y, zero at e_z
  CHECK(funk_hecke_value(TargetKernel::poisson(0.5), {1, 1}, ez) == 0.0);
}

TEST_CASE("funk_hecke matches brute-force integration, degree 20") {
  const Vec3 xc = target_center(CenterConvention::spherical).vec();
  const SphericalHarmonicIndex idx{20, 27};
  const TargetKernel g1 = TargetKernel::potential_spline();
  const TargetKernel g2 = TargetKernel::poisson(2.0 / 3.0);
  auto integrand = [&](const TargetKernel& g) {
    return [&g, &idx, &xc](const Vec3& x) {
      return target_kernel_eval(g, std::clamp(x.dot(xc), -1.0, 1.0)) *
             real_sph_harm(idx, x);
    };
  };
  const double brute1 = sphere_integral(integrand(g1), xc, 400, 420, true);
  CHECK(funk_hecke_value(g1, idx, xc) == doctest::Approx(brute1).epsilon(1e-7));
  const double brute2 = sphere_integral(integrand(g2), xc, 200, 420, false);
  CHECK(funk_hecke_value(g2, idx, xc) == doctest::Approx(brute2).epsilon(1e-9));
}

TEST_CASE("target integrals: internal consistency of the two conventions") {
  // the f2/f1 ratio depends only on the Funk-Hecke constants, not on the
  // center, and must match the reference values' ratio
  const double ratio_ref = kReferenceIntegralF2 / kReferenceIntegralF1;
  const double ratio_formula = target_kernel_coeff(TargetKernel::poisson(2.0 / 3.0), 20) /
                               target_kernel_coeff(TargetKernel::potential_spline(), 20);
  CHECK(ratio_formula == doctest::Approx(ratio_ref).epsilon(1e-12));
  for (auto conv : {CenterConvention::spherical, CenterConvention::literal_normalized}) {
    const TargetPair t = make_targets(conv);
    CHECK(t.f2.exact_integral / t.f1.exact_integral ==
          doctest::Approx(ratio_ref).epsilon(1e-12));
  }
}

TEST_CASE("target exact integrals match brute-force quadrature") {
  for (auto conv : {CenterConvention::spherical, CenterConvention::literal_normalized}) {
    const TargetPair t = make_targets(conv);
    const Vec3 xc = target_center(conv).vec();
    const double b2 = sphere_integral(t.f2.f, xc, 220, 460, false);
    CHECK(t.f2.exact_integral == doctest::Approx(b2).epsilon(1e-9));
    const double b1 = sphere_integral(t.f1.f, xc, 420, 460, true);
    CHECK(t.f1.exact_integral == doctest::Approx(b1).epsilon(1e-6));
  }
}

TEST_CASE("targets are zonal-harmonic products with the declared signs") {
  const TargetPair t = make_targets();
  const Vec3 xc = target_center(CenterConvention::spherical).vec();
  // f(x_c) = g(1) * sum_k |Y_k(x_c)|
  const double sum_abs = real_sph_harm_row(20, xc).cwiseAbs().sum();
  CHECK(t.f2.f(xc) == doctest::Approx(15.0 * sum_abs).epsilon(1e-12));
  CHECK(t.f1.f(xc) == doctest::Approx(0.0).epsilon(1e-12));  // g1(1) = 0
}

TEST_CASE("sphere_integral sanity") {
  const Vec3 pole(0.3, -0.5, 0.9);
  const Vec3 p = pole.normalized();
  CHECK(sphere_integral([](const Vec3&) { return 1.0; }, p, 40, 40) ==
        doctest::Approx(4.0 * M_PI).epsilon(1e-12));
  CHECK(sphere_integral([](const Vec3& x) { return x.z() * x.z(); }, p, 40, 40) ==
        doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-12));
}

TEST_CASE("nodes_for_family resolves icosahedral sizes") {
  CHECK(nodes_for_family(NodeFamily::icosahedral, 2562).size() == 2562);
  CHECK(nodes_for_family(NodeFamily::icosahedral, 10242).size() == 10242);
  CHECK(nodes_for_family(NodeFamily::fibonacci, 2501).size() == 2501);
}

TEST_CASE("fit_slope recovers a clean power law and drops a bad first point") {
  ConvergenceReport r;
  for (Eigen::Index n : {1000, 2000, 4000, 8000}) {
    ConvergenceCell cell;
    cell.N = n;
    cell.relative_error = 5.0 * std::pow(static_cast<double>(n), -1.25);
    r.cells.push_back(cell);
  }
  fit_slope(r);
  CHECK_FALSE(r.dropped_first);
  CHECK(r.slope_vs_N == doctest::Approx(-1.25).epsilon(1e-10));
  CHECK(r.slope_vs_h == doctest::Approx(2.5).epsilon(1e-10));

  r.cells[0].relative_error = 2.0;  // pre-asymptotic outlier
  fit_slope(r);
  CHECK(r.dropped_first);
  CHECK(r.slope_vs_N == doctest::Approx(-1.25).epsilon(1e-10));
}

TEST_CASE("small convergence study runs end to end") {
  SolverConfig cfg;
  const TargetPair targets = make_targets();
  const ConvergenceReport r = convergence_study(
      NodeFamily::fibonacci, {501, 1001, 2001}, targets.f2, kR2, cfg);
  REQUIRE(r.cells.size() == 3);
  for (const auto& cell : r.cells) {
    CHECK(cell.relative_error > 0);
    CHECK(cell.weight_residual < 1e-10);
  }
  // errors decrease with N for the smooth target
  CHECK(r.cells[2].relative_error < r.cells[0].relative_error);
}

TEST_CASE("stability study slope near -1/2") {
  SolverConfig cfg;
  const StabilityReport r =
      stability_study(NodeFamily::fibonacci, {501, 1001, 2001, 4001}, kR2, cfg, 500, 7);
  REQUIRE(r.cells.size() == 4);
  for (const auto& cell : r.cells) {
    CHECK(cell.sampled / cell.exact > 0.85);
    CHECK(cell.sampled / cell.exact < 1.15);
  }
  CHECK(r.slope == doctest::Approx(-0.5).epsilon(0.12));
}

TEST_CASE("report serialization includes the key fields") {
  ConvergenceReport r;
  r.family = NodeFamily::fibonacci;
  r.target = "f2";
  ConvergenceCell cell;
  cell.N = 501;
  cell.relative_error = 1e-3;
  cell.iterations = 7;
  r.cells.push_back(cell);
  cell.N = 1001;
  cell.relative_error = 5e-4;
  r.cells.push_back(cell);
  fit_slope(r);
  std::stringstream ss;
  write_report(ss, r);
  const std::string s = ss.str();
  CHECK(s.find("family=fibonacci") != std::string::npos);
  CHECK(s.find("target=f2") != std::string::npos);
  CHECK(s.find("501") != std::string::npos);
}
