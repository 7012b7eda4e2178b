#include "sphquad/weight_solver.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sphquad/parallel.hpp"

namespace sphquad {

Eigen::Index default_neighbor_count(Eigen::Index N) {
  const double ln = std::log(static_cast<double>(N));
  return 2 * static_cast<Eigen::Index>(std::ceil(ln * ln));
}

ComplementProjector::ComplementProjector(const Eigen::MatrixXd& Psi) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Psi);
  Q_ = qr.householderQ() * Eigen::MatrixXd::Identity(Psi.rows(), 4);
  R_ = qr.matrixQR().topRows<4>().triangularView<Eigen::Upper>();
  for (int k = 0; k < 4; ++k)
    if (std::abs(R_(k, k)) < 1e-12 * std::sqrt(static_cast<double>(Psi.rows())))
      throw std::runtime_error("ComplementProjector: Psi rank deficient");
}

Eigen::VectorXd ComplementProjector::apply(const Eigen::VectorXd& v) const {
  return v - Q_ * (Q_.transpose() * v);
}

Eigen::VectorXd ComplementProjector::range_solution(const Eigen::Vector4d& j) const {
  // Psi = Q R  =>  Psi (Psi^T Psi)^{-1} j = Q R^{-T} j
  const Eigen::Vector4d w = R_.transpose().triangularView<Eigen::Lower>().solve(j);
  return Q_ * w;
}

GeneralSaddleSolution solve_saddle_dense(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Psi,
                                         const Eigen::VectorXd& rhs_top,
                                         const Eigen::VectorXd& rhs_bottom) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = Psi.cols();
  Eigen::MatrixXd M(n + m, n + m);
  M.topLeftCorner(n, n) = A;
  M.topRightCorner(n, m) = Psi;
  M.bottomLeftCorner(m, n) = Psi.transpose();
  M.bottomRightCorner(m, m).setZero();
  Eigen::VectorXd rhs(n + m);
  rhs.head(n) = rhs_top;
  rhs.tail(m) = rhs_bottom;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  Eigen::VectorXd sol = lu.solve(rhs);
  // One round of iterative refinement with an extended-precision residual:
  // the saddle matrix is ill-conditioned enough that the raw LU forward error
  // can reach ~1e-7 relative, while refinement brings it to ~1e-12.
  const Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> Ml =
      M.cast<long double>();
  const Eigen::Matrix<long double, Eigen::Dynamic, 1> rhsl = rhs.cast<long double>();
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::Matrix<long double, Eigen::Dynamic, 1> r =
        rhsl - Ml * sol.cast<long double>();
    sol += lu.solve(r.cast<double>().eval());
  }
  const double err = (M * sol - rhs).norm();
  const double scale = rhs.norm() + M.cwiseAbs().rowwise().sum().maxCoeff() * sol.norm();
  if (!sol.allFinite() || err > 1e-6 * std::max(scale, 1.0))
    throw std::runtime_error("system singular (duplicate nodes or non-unisolvent Pi basis)");
  GeneralSaddleSolution out;
  out.c = sol.head(n);
  out.d = sol.tail(m);
  return out;
}

namespace {

void fill_split_and_residual(const SurfaceSplineKernel& K, const NodeSet& X,
                             const Eigen::MatrixXd& Psi, WeightSolution& sol) {
  const ComplementProjector proj(Psi);
  sol.c_par = proj.range_solution(pi_integrals());
  sol.c_perp = sol.c - sol.c_par;
  const double J0 = kernel_integral_constant(K);
  const Eigen::VectorXd rhs = J0 * Eigen::VectorXd::Ones(X.size());
  const Eigen::VectorXd res = kernel_matvec(K, X, sol.c) + Psi * sol.d - rhs;
  sol.relative_residual = res.norm() / rhs.norm();
}

}  // namespace

WeightSolution solve_direct(const SurfaceSplineKernel& K, const NodeSet& X,
                            const SolverConfig& config) {
  const Eigen::Index n = X.size();
  if (n < 4) throw std::invalid_argument("solve_direct: N >= 4 required");
  if (n > config.dense_limit)
    throw std::invalid_argument("solve_direct: N exceeds the dense limit");
  const Eigen::MatrixXd Psi = pi_matrix(X);
  const Eigen::MatrixXd A = kernel_matrix(K, X);
  const double J0 = kernel_integral_constant(K);
  const auto saddle =
      solve_saddle_dense(A, Psi, J0 * Eigen::VectorXd::Ones(n), pi_integrals());

  WeightSolution sol;
  sol.c = saddle.c;
  sol.d = saddle.d;
  sol.method = "direct";
  sol.iterations = 0;
  sol.converged = true;
  fill_split_and_residual(K, X, Psi, sol);
  return sol;
}

LocalLagrangePreconditioner build_preconditioner(const SurfaceSplineKernel& K, const NodeSet& X,
                                                 Eigen::Index p) {
  const Eigen::Index n = X.size();
  if (p <= 4 || p > n) throw std::invalid_argument("build_preconditioner: need 4 < p <= N");
  const SphereGrid grid(X);
  const Eigen::MatrixX3d& P = X.matrix();

  std::vector<Eigen::Triplet<double>> trips(static_cast<size_t>(n * p));
  std::atomic<Eigen::Index> bad_node{-1};

  parallel_for_chunks(0, n, [&](std::ptrdiff_t b, std::ptrdiff_t e) {
    Eigen::MatrixXd Aloc(p + 4, p + 4);
    Eigen::VectorXd rhs(p + 4);
    Eigen::MatrixX3d nb(p, 3);
    for (std::ptrdiff_t i = b; i < e; ++i) {
      const auto idx = grid.nearest(X.node(i), p);
      for (Eigen::Index a = 0; a < p; ++a) nb.row(a) = P.row(idx[a]);
      Aloc.setZero();
      {
        Eigen::ArrayXXd U = (1.0 - (nb * nb.transpose()).array()).max(0.0);
        const bool plain = K.variant == SurfaceSplineKernel::Variant::log1mt;
        Eigen::ArrayXXd L = (plain ? U : 2.0 * U).max(1e-300).log();
        Aloc.topLeftCorner(p, p) = (U * L).matrix();
        Aloc.topLeftCorner(p, p).diagonal().setZero();
      }
      Aloc.block(0, p, p, 1).setOnes();
      Aloc.block(0, p + 1, p, 3) = nb;
      Aloc.block(p, 0, 1, p).setOnes();
      Aloc.block(p + 1, 0, 3, p) = nb.transpose();
      rhs.setZero();
      for (Eigen::Index a = 0; a < p; ++a)
        if (idx[a] == i) rhs(a) = 1.0;  // cardinal data about node i
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(Aloc);
      const Eigen::VectorXd sol = lu.solve(rhs);
      if (!sol.allFinite() || (Aloc * sol - rhs).norm() > 1e-6) {
        bad_node.store(i);
        return;
      }
      for (Eigen::Index a = 0; a < p; ++a)
        trips[static_cast<size_t>(i * p + a)] = {static_cast<int>(idx[a]), static_cast<int>(i),
                                                 sol(a)};
    }
  });
  if (bad_node.load() >= 0)
    throw std::runtime_error("build_preconditioner: singular local system at node " +
                             std::to_string(bad_node.load()));

  LocalLagrangePreconditioner pre;
  pre.stencil_size = p;
  pre.C.resize(n, n);
  pre.C.setFromTriplets(trips.begin(), trips.end());
  return pre;
}

GmresResult gmres(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply_op,
                  const Eigen::VectorXd& b,
                  const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& precond,
                  double tol, int max_iter) {
  const Eigen::Index n = b.size();
  GmresResult out;
  const double beta = b.norm();
  if (beta == 0.0) {
    out.x = Eigen::VectorXd::Zero(n);
    out.converged = true;
    return out;
  }
  max_iter = std::min<int>(max_iter, static_cast<int>(n));

  std::vector<Eigen::VectorXd> V;
  V.push_back(b / beta);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(max_iter + 1, max_iter);
  Eigen::VectorXd cs(max_iter), sn(max_iter);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(max_iter + 1);
  g(0) = beta;

  int m = 0;
  for (int j = 0; j < max_iter; ++j) {
    Eigen::VectorXd w = precond ? apply_op(precond(V[j])) : apply_op(V[j]);
    for (int i = 0; i <= j; ++i) {  // modified Gram-Schmidt
      H(i, j) = w.dot(V[i]);
      w -= H(i, j) * V[i];
    }
    H(j + 1, j) = w.norm();
    if (H(j + 1, j) > 0) V.push_back(w / H(j + 1, j));

    for (int i = 0; i < j; ++i) {  // apply existing Givens rotations
      const double t = cs(i) * H(i, j) + sn(i) * H(i + 1, j);
      H(i + 1, j) = -sn(i) * H(i, j) + cs(i) * H(i + 1, j);
      H(i, j) = t;
    }
    const double denom = std::hypot(H(j, j), H(j + 1, j));
    cs(j) = H(j, j) / denom;
    sn(j) = H(j + 1, j) / denom;
    H(j, j) = denom;
    H(j + 1, j) = 0.0;
    g(j + 1) = -sn(j) * g(j);
    g(j) = cs(j) * g(j);

    m = j + 1;
    const double rel = std::abs(g(j + 1)) / beta;
    out.residual_history.push_back(rel);
    if (rel <= tol) {
      out.converged = true;
      break;
    }
    // stop at the round-off floor: no meaningful progress two iterations
    // in a row (the caller re-verifies against the true residual)
    const size_t h = out.residual_history.size();
    if (h >= 3 && out.residual_history[h - 1] > 0.5 * out.residual_history[h - 3]) break;
    if (H(j + 1, j) == 0.0 && V.size() == static_cast<size_t>(j + 1)) break;  // breakdown: exact
  }

  const Eigen::VectorXd y =
      H.topLeftCorner(m, m).triangularView<Eigen::Upper>().solve(g.head(m));
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) z += y(i) * V[i];
  out.x = precond ? precond(z) : z;
  out.iterations = m;
  return out;
}

WeightSolution solve_iterative(const SurfaceSplineKernel& K, const NodeSet& X,
                               const SolverConfig& config) {
  const Eigen::Index n = X.size();
  if (n < 4) throw std::invalid_argument("solve_iterative: N >= 4 required");
  const Eigen::MatrixXd Psi = pi_matrix(X);
  const ComplementProjector proj(Psi);

  Eigen::Index p = config.neighbors > 0 ? config.neighbors : default_neighbor_count(n);
  p = std::min(p, n);
  const LocalLagrangePreconditioner pre = build_preconditioner(K, X, p);

  auto op = [&](const Eigen::VectorXd& v) {
    return proj.apply(kernel_matvec(K, X, proj.apply(v)));
  };
  auto prec = [&](const Eigen::VectorXd& v) { return proj.apply(pre.apply(proj.apply(v))); };

  const Eigen::VectorXd c_par = proj.range_solution(pi_integrals());
  // 1 is in the auxiliary space, so the J0 term projects away and the
  // right-hand side is homogeneous in A.
  const Eigen::VectorXd b = -proj.apply(kernel_matvec(K, X, c_par));

  const double J0 = kernel_integral_constant(K);
  const GmresResult res = gmres(op, b, prec, config.tol, config.max_iter);

  WeightSolution sol;
  sol.c_par = c_par;
  sol.c_perp = proj.apply(res.x);  // enforce the constraint exactly
  sol.c = sol.c_par + sol.c_perp;
  sol.method = "gmres";
  sol.iterations = res.iterations;

  // recover d by least squares from Psi d = J0 1 - A c
  const Eigen::VectorXd rhs = J0 * Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd r = rhs - kernel_matvec(K, X, sol.c);
  sol.d = Psi.householderQr().solve(r);
  sol.relative_residual = (kernel_matvec(K, X, sol.c) + Psi * sol.d - rhs).norm() / rhs.norm();
  // the inner iteration may stop at its round-off floor; what matters is the
  // residual of the full saddle system
  sol.converged = sol.relative_residual <= config.tol;
  return sol;
}

WeightSolution solve_weights(const SurfaceSplineKernel& K, const NodeSet& X,
                             const SolverConfig& config) {
  return config.method == SolverConfig::Method::direct ? solve_direct(K, X, config)
                                                       : solve_iterative(K, X, config);
}

// ---------------------------------------------------------------------------
// Weight file I/O

void write_weights(std::ostream& os, const NodeSet& X, const WeightSolution& sol,
                   const std::string& kernel_name, double tol) {
  os << "# sphquad weights\n";
  os << "# kernel=" << kernel_name << " solver=" << sol.method << " tol=" << tol
     << " iterations=" << sol.iterations << " residual=" << sol.relative_residual
     << " N=" << X.size() << "\n";
  os.precision(17);
  for (Eigen::Index i = 0; i < X.size(); ++i) {
    const Vec3 x = X.node(i);
    os << x.x() << " " << x.y() << " " << x.z() << " " << sol.c(i) << "\n";
  }
}

void write_weights_file(const std::string& path, const NodeSet& X, const WeightSolution& sol,
                        const std::string& kernel_name, double tol) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_weights(os, X, sol, kernel_name, tol);
}

WeightFile read_weights(std::istream& is) {
  WeightFile out;
  std::vector<Vec3> pts;
  std::vector<double> w;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      out.header.push_back(line);
      continue;
    }
    std::istringstream ls(line);
    double x, y, z, c;
    if (!(ls >> x >> y >> z >> c)) throw std::runtime_error("weight file: malformed line: " + line);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z) || !std::isfinite(c))
      throw std::runtime_error("weight file: non-finite entry");
    pts.emplace_back(x, y, z);
    w.push_back(c);
  }
  Eigen::MatrixX3d M(static_cast<Eigen::Index>(pts.size()), 3);
  for (Eigen::Index i = 0; i < M.rows(); ++i) M.row(i) = pts[static_cast<size_t>(i)].transpose();
  out.nodes = NodeSet(std::move(M));
  out.weights = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  return out;
}

WeightFile read_weights_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_weights(is);
}

}  // namespace sphquad
