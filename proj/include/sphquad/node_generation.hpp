#pragma once

#include <cstdint>

#include "sphquad/geometry.hpp"

namespace sphquad {

struct FamilySpec {
  NodeFamily family = NodeFamily::fibonacci;
  Eigen::Index size = 0;       // N for fibonacci / min-energy, level n for icosahedral
  std::uint64_t seed = 0;      // min-energy only
  double energy_exponent = 3;  // Riesz exponent s_R (min-energy)
  Eigen::Index max_iterations = 1000;

  void validate() const;
};

NodeSet generate_nodes(const FamilySpec& spec);

// Symmetric spherical Fibonacci lattice:
//   i = -(N-1)/2 ... (N-1)/2,  lat = asin(2i/N),  lon = 2*pi*i/phi (mod 2*pi)
// with phi the golden ratio.  N must be odd, N >= 3.
NodeSet fibonacci_nodes(Eigen::Index N);

// n-fold edge subdivision of the 20 icosahedron faces in barycentric
// coordinates, vertices projected radially; N = 10 n^2 + 2.  The base
// icosahedron has vertices at +/- e_z.
NodeSet icosahedral_nodes(int level);

struct MinEnergyInfo {
  bool converged = false;
  Eigen::Index iterations = 0;
  double final_energy = 0;
  double final_grad_max = 0;
  std::vector<double> energy_trace;  // energy after each accepted step
};

// Projected gradient descent with backtracking on the Riesz energy
//   E(X) = sum_{i != j} |x_i - x_j|^{-s_R},
// initialized from the nearest odd-size Fibonacci lattice.  Terminates when
// the tangential gradient max-norm drops below 1e-8 * N or at the iteration
// cap; the node set carries converged() = false in the latter case.
NodeSet min_energy_nodes(Eigen::Index N, std::uint64_t seed = 0,
                         double energy_exponent = 3, Eigen::Index max_iterations = 1000,
                         MinEnergyInfo* info = nullptr);

// Riesz energy of a configuration (pairwise, both orientations counted).
double riesz_energy(const Eigen::MatrixX3d& P, double exponent);

}  // namespace sphquad
