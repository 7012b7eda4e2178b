#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "sphquad/geometry.hpp"
#include "sphquad/kernels.hpp"

namespace sphquad {

struct SolverConfig {
  enum class Method { direct, gmres };

  Method method = Method::gmres;
  double tol = 1e-12;          // relative residual target
  int max_iter = 200;
  Eigen::Index neighbors = 0;  // preconditioner stencil size; 0 -> 2 ceil((ln N)^2)
  Eigen::Index dense_limit = 20000;  // cap for the direct factorization
};

Eigen::Index default_neighbor_count(Eigen::Index N);

struct WeightSolution {
  Eigen::VectorXd c;       // quadrature weights
  Eigen::Vector4d d;       // auxiliary coefficients
  Eigen::VectorXd c_par;   // projection of c onto range(Psi)
  Eigen::VectorXd c_perp;  // c - c_par
  std::string method;
  int iterations = 0;
  double relative_residual = 0;  // of A c + Psi d = J0 1, relative to ||J0 1||
  bool converged = true;
};

// Orthogonal projector onto range(Psi)^perp via a thin QR factor.
class ComplementProjector {
 public:
  explicit ComplementProjector(const Eigen::MatrixXd& Psi);

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;  // P^perp v
  // Psi (Psi^T Psi)^{-1} j  for a 4-vector j
  Eigen::VectorXd range_solution(const Eigen::Vector4d& j) const;

 private:
  Eigen::MatrixXd Q_;  // N x 4 orthonormal basis of range(Psi)
  Eigen::Matrix4d R_;
};

// Dense factorization of the (N+4) x (N+4) augmented system.
WeightSolution solve_direct(const SurfaceSplineKernel& K, const NodeSet& X,
                            const SolverConfig& config = {.method = SolverConfig::Method::direct});

// Same solve with caller-supplied kernel matrix, auxiliary matrix, and
// constraint integrals; used by basis-invariance checks and local problems.
struct GeneralSaddleSolution {
  Eigen::VectorXd c;
  Eigen::VectorXd d;
};
GeneralSaddleSolution solve_saddle_dense(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Psi,
                                         const Eigen::VectorXd& rhs_top,
                                         const Eigen::VectorXd& rhs_bottom);

// Column i holds the kernel-coefficient part of the local Lagrange function
// cardinal at node i, supported on its p nearest neighbors.
struct LocalLagrangePreconditioner {
  Eigen::SparseMatrix<double> C;
  Eigen::Index stencil_size = 0;

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return C * v; }
};

LocalLagrangePreconditioner build_preconditioner(const SurfaceSplineKernel& K, const NodeSet& X,
                                                 Eigen::Index p);

struct GmresResult {
  Eigen::VectorXd x;
  int iterations = 0;
  std::vector<double> residual_history;  // relative
  bool converged = false;
};

// Full (non-restarted) right-preconditioned GMRES, modified Gram-Schmidt
// Arnoldi with Givens rotations.  precond may be empty for no preconditioning.
GmresResult gmres(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply_op,
                  const Eigen::VectorXd& b,
                  const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& precond,
                  double tol, int max_iter);

// Projected-system solve: c_par from the constraint, c_perp by GMRES on
// P^perp A P^perp with the local-Lagrange preconditioner, then d by least
// squares.
WeightSolution solve_iterative(const SurfaceSplineKernel& K, const NodeSet& X,
                               const SolverConfig& config = {});

WeightSolution solve_weights(const SurfaceSplineKernel& K, const NodeSet& X,
                             const SolverConfig& config);

// Weight file: header comments (kernel, solver, tol, iterations, residual),
// then one `x y z c` line per node at 17 significant digits.
void write_weights(std::ostream& os, const NodeSet& X, const WeightSolution& sol,
                   const std::string& kernel_name, double tol);
void write_weights_file(const std::string& path, const NodeSet& X, const WeightSolution& sol,
                        const std::string& kernel_name, double tol);

struct WeightFile {
  NodeSet nodes;
  Eigen::VectorXd weights;
  std::vector<std::string> header;
};
WeightFile read_weights(std::istream& is);
WeightFile read_weights_file(const std::string& path);

}  // namespace sphquad
