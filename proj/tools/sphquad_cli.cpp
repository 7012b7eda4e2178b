// sphquad: kernel quadrature on the unit sphere.
//
// Exit codes: 0 success, 1 usage error, 2 numerical failure.

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "sphquad/experiments.hpp"
#include "sphquad/kernels.hpp"
#include "sphquad/node_generation.hpp"
#include "sphquad/parallel.hpp"
#include "sphquad/quadrature.hpp"
#include "sphquad/weight_solver.hpp"

using namespace sphquad;

namespace {

bool g_quiet = false;
bool g_timestamp = false;

std::ostream& info() {
  static std::ofstream null_stream;
  if (g_quiet) {
    null_stream.setstate(std::ios_base::badbit);
    return null_stream;
  }
  return std::cout;
}

std::vector<std::string> file_header() {
  std::vector<std::string> h;
  if (g_timestamp) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[64];
    std::strftime(buf, sizeof buf, "%F %T", std::gmtime(&now));
    h.push_back(std::string("written ") + buf);
  }
  return h;
}

std::vector<Eigen::Index> parse_sizes(const std::string& csv) {
  std::vector<Eigen::Index> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoll(item));
  if (out.empty()) throw CLI::ValidationError("sizes", "empty size list");
  return out;
}

NodeSet load_or_generate(const std::string& nodes_path) {
  return read_nodes_file(nodes_path);
}

void print_weight_summary(const NodeSet& X, const WeightSolution& sol) {
  const QuadratureRule rule = make_sphere_rule(X, sol.c);
  const WeightDiagnostics d = diagnostics(rule);
  const double target_mean = 4.0 * M_PI / static_cast<double>(X.size());
  info() << std::setprecision(4) << "N=" << X.size() << " method=" << sol.method
         << " iterations=" << sol.iterations << " residual=" << sol.relative_residual << "\n"
         << "weights: mean=" << d.mean << " (4pi/N=" << target_mean << ") min=" << d.min
         << " max=" << d.max << " negative=" << d.negative_count << "\n";
  if (d.negative_count > 0)
    std::cerr << "warning: " << d.negative_count << " negative weights\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel quadrature on the unit sphere"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  std::uint64_t seed = 0;
  app.add_option("--threads", threads, "worker threads (0 = all cores)");
  app.add_option("--seed", seed, "RNG seed");
  app.add_flag("--quiet", g_quiet, "suppress informational output");
  app.add_flag("--timestamp", g_timestamp, "add a timestamp header to output files");

  // nodes
  auto* cmd_nodes = app.add_subcommand("nodes", "generate a node family");
  std::string family_str = "fibonacci", out_path = "nodes.txt";
  Eigen::Index n_opt = 0, level_opt = 0;
  cmd_nodes->add_option("--family", family_str, "icosahedral|fibonacci|min-energy")->required();
  cmd_nodes->add_option("--n", n_opt, "node count (fibonacci/min-energy)");
  cmd_nodes->add_option("--level", level_opt, "subdivision level (icosahedral)");
  cmd_nodes->add_option("--out", out_path, "output node file");

  // weights
  auto* cmd_weights = app.add_subcommand("weights", "compute quadrature weights");
  std::string nodes_path, kernel_str = "tps-m2", solver_str = "gmres",
              wout_path = "weights.txt";
  double tol = 1e-12;
  Eigen::Index neighbors = 0;
  cmd_weights->add_option("--nodes", nodes_path, "input node file")->required();
  cmd_weights->add_option("--kernel", kernel_str, "tps-m2|tps-m2-log1mt");
  cmd_weights->add_option("--solver", solver_str, "direct|gmres");
  cmd_weights->add_option("--tol", tol, "GMRES relative tolerance");
  cmd_weights->add_option("--neighbors", neighbors, "preconditioner stencil size");
  cmd_weights->add_option("--out", wout_path, "output weight file");

  // integrate
  auto* cmd_integrate = app.add_subcommand("integrate", "apply a weight file to a target");
  std::string weights_path, target_str = "one", values_path;
  cmd_integrate->add_option("--weights", weights_path, "weight file")->required();
  cmd_integrate->add_option("--target", target_str, "one|z|f1|f2");
  cmd_integrate->add_option("--values", values_path, "file of per-node values");

  // converge
  auto* cmd_converge = app.add_subcommand("converge", "convergence study");
  std::string cfamily = "fibonacci", ctarget = "f1", csizes, creport = "";
  cmd_converge->add_option("--family", cfamily)->required();
  cmd_converge->add_option("--target", ctarget, "f1|f2");
  cmd_converge->add_option("--sizes", csizes, "comma-separated N list")->required();
  cmd_converge->add_option("--report", creport, "report output file");

  // stability
  auto* cmd_stability = app.add_subcommand("stability", "noise stability study");
  std::string sfamily = "icosahedral", ssizes, sreport = "";
  int samples = 500;
  cmd_stability->add_option("--family", sfamily)->required();
  cmd_stability->add_option("--sizes", ssizes, "comma-separated N list");
  cmd_stability->add_option("--levels", ssizes, "alias for --sizes (icosahedral N=10n^2+2)");
  cmd_stability->add_option("--samples", samples);
  cmd_stability->add_option("--report", sreport, "report output file");

  // iterations
  auto* cmd_iterations = app.add_subcommand("iterations", "GMRES iteration study");
  std::string ifamily = "icosahedral", isizes, ireport = "";
  cmd_iterations->add_option("--family", ifamily)->required();
  cmd_iterations->add_option("--sizes", isizes, "comma-separated N list")->required();
  cmd_iterations->add_option("--report", ireport, "report output file");

  // spheroid
  auto* cmd_spheroid = app.add_subcommand("spheroid", "transport a rule to an oblate spheroid");
  std::string sp_weights, sp_out = "spheroid_weights.txt";
  double sp_a = 299.0 / 300.0;
  cmd_spheroid->add_option("--a", sp_a, "polar-to-equatorial ratio in (0,1]")->required();
  cmd_spheroid->add_option("--weights", sp_weights, "sphere weight file")->required();
  cmd_spheroid->add_option("--out", sp_out, "output weight file");

  // lagrange-diag
  auto* cmd_ldiag = app.add_subcommand("lagrange-diag", "Lagrange-function diagnostics");
  std::string ld_nodes, ld_kernel = "tps-m2";
  Eigen::Index ld_probes = 10, ld_points = 20000;
  cmd_ldiag->add_option("--nodes", ld_nodes, "node file")->required();
  cmd_ldiag->add_option("--kernel", ld_kernel);
  cmd_ldiag->add_option("--probe-nodes", ld_probes, "number of probed nodes");
  cmd_ldiag->add_option("--probe-points", ld_points, "probe rule size");

  CLI11_PARSE(app, argc, argv);
  set_num_threads(threads);

  try {
    if (cmd_nodes->parsed()) {
      FamilySpec spec;
      spec.family = family_from_name(family_str);
      spec.size = spec.family == NodeFamily::icosahedral ? level_opt : n_opt;
      spec.seed = seed;
      spec.validate();
      const NodeSet X = generate_nodes(spec);
      write_nodes_file(out_path, X, file_header());
      const GeodesicStats st = geodesic_stats(X);
      info() << std::setprecision(4) << "N=" << X.size() << " h=" << st.h << " q=" << st.q
             << " rho=" << st.rho << " -> " << out_path << "\n";
      return 0;
    }
    if (cmd_weights->parsed()) {
      const NodeSet X = load_or_generate(nodes_path);
      const SurfaceSplineKernel K = SurfaceSplineKernel::from_name(kernel_str);
      SolverConfig cfg;
      cfg.tol = tol;
      cfg.neighbors = neighbors;
      if (solver_str == "direct")
        cfg.method = SolverConfig::Method::direct;
      else if (solver_str == "gmres")
        cfg.method = SolverConfig::Method::gmres;
      else
        throw CLI::ValidationError("--solver", "must be direct or gmres");
      const WeightSolution sol = solve_weights(K, X, cfg);
      if (!sol.converged) {
        std::cerr << "error: solver did not converge (residual " << sol.relative_residual
                  << ")\n";
        return 2;
      }
      write_weights_file(wout_path, X, sol, K.name(), tol);
      print_weight_summary(X, sol);
      return 0;
    }
    if (cmd_integrate->parsed()) {
      const WeightFile wf = read_weights_file(weights_path);
      const QuadratureRule rule = make_sphere_rule(wf.nodes, wf.weights);
      double q = 0, exact = std::nan("");
      if (!values_path.empty()) {
        std::ifstream vs(values_path);
        if (!vs) throw std::runtime_error("cannot open: " + values_path);
        std::vector<double> vals;
        double v;
        while (vs >> v) vals.push_back(v);
        if (static_cast<Eigen::Index>(vals.size()) != rule.size())
          throw std::runtime_error("values file length mismatch");
        q = apply_values(rule, Eigen::Map<Eigen::VectorXd>(
                                   vals.data(), static_cast<Eigen::Index>(vals.size())));
      } else if (target_str == "one") {
        q = apply(rule, [](const Vec3&) { return 1.0; });
        exact = 4.0 * M_PI;
      } else if (target_str == "z") {
        q = apply(rule, [](const Vec3& x) { return x.z(); });
        exact = 0.0;
      } else if (target_str == "f1" || target_str == "f2") {
        const TargetPair targets = make_targets();
        const TargetFunction& t = target_str == "f1" ? targets.f1 : targets.f2;
        q = apply(rule, t.f);
        exact = t.exact_integral;
      } else {
        throw CLI::ValidationError("--target", "unknown target " + target_str);
      }
      std::cout.precision(15);
      std::cout << "Q = " << q << "\n";
      if (std::isfinite(exact)) {
        std::cout << "exact = " << exact << "\n";
        const double denom = exact == 0.0 ? 1.0 : std::abs(exact);
        std::cout << "relative_error = " << std::abs(q - exact) / denom << "\n";
      }
      return 0;
    }
    const SurfaceSplineKernel K = SurfaceSplineKernel::from_name("tps-m2");
    SolverConfig cfg;
    if (cmd_converge->parsed()) {
      const TargetPair targets = make_targets();
      const TargetFunction& t = ctarget == "f2" ? targets.f2 : targets.f1;
      const auto report =
          convergence_study(family_from_name(cfamily), parse_sizes(csizes), t, K, cfg);
      write_report(std::cout, report);
      if (!creport.empty()) {
        std::ofstream os(creport);
        write_report(os, report);
      }
      return 0;
    }
    if (cmd_stability->parsed()) {
      const auto report = stability_study(family_from_name(sfamily), parse_sizes(ssizes), K,
                                          cfg, samples, seed);
      write_report(std::cout, report);
      if (!sreport.empty()) {
        std::ofstream os(sreport);
        write_report(os, report);
      }
      return 0;
    }
    if (cmd_iterations->parsed()) {
      const auto report =
          iteration_study(family_from_name(ifamily), parse_sizes(isizes), K, cfg);
      write_report(std::cout, report);
      if (!ireport.empty()) {
        std::ofstream os(ireport);
        write_report(os, report);
      }
      return 0;
    }
    if (cmd_spheroid->parsed()) {
      const WeightFile wf = read_weights_file(sp_weights);
      const QuadratureRule sphere = make_sphere_rule(wf.nodes, wf.weights);
      const QuadratureRule sph = spheroid_rule(sphere, sp_a);
      std::ofstream os(sp_out);
      if (!os) throw std::runtime_error("cannot open for writing: " + sp_out);
      os << "# sphquad spheroid weights a=" << std::setprecision(17) << sp_a << "\n";
      os.precision(17);
      for (Eigen::Index i = 0; i < sph.size(); ++i)
        os << sph.points(i, 0) << " " << sph.points(i, 1) << " " << sph.points(i, 2) << " "
           << sph.weights(i) << "\n";
      const double area = sph.weights.sum();
      const double exact = oblate_spheroid_area(sp_a);
      info() << std::setprecision(6) << "spheroid area: quadrature=" << area
             << " closed-form=" << exact
             << " relative_error=" << std::abs(area - exact) / exact << "\n";
      return 0;
    }
    if (cmd_ldiag->parsed()) {
      const NodeSet X = read_nodes_file(ld_nodes);
      std::vector<Eigen::Index> probed;
      for (Eigen::Index i = 0; i < std::min<Eigen::Index>(ld_probes, X.size()); ++i)
        probed.push_back(i * X.size() / std::min<Eigen::Index>(ld_probes, X.size()));
      const auto diag = lagrange_diagnostic(SurfaceSplineKernel::from_name(ld_kernel), X,
                                            probed, ld_points);
      std::cout.precision(6);
      std::cout << "cardinality_error=" << diag.max_cardinality_error
                << " lebesgue_sum=" << diag.lebesgue_sum << "\n";
      for (size_t i = 0; i < diag.probed.size(); ++i)
        std::cout << "node " << diag.probed[i] << " l1=" << diag.l1_norms[i]
                  << " |c - integral|=" << diag.weight_vs_integral[i] << "\n";
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
