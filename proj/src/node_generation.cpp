#include "sphquad/node_generation.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <tuple>

#include "sphquad/parallel.hpp"

namespace sphquad {

void FamilySpec::validate() const {
  switch (family) {
    case NodeFamily::fibonacci:
      if (size < 3 || size % 2 == 0)
        throw std::invalid_argument("fibonacci family requires odd N >= 3");
      break;
    case NodeFamily::icosahedral:
      if (size < 1) throw std::invalid_argument("icosahedral family requires level n >= 1");
      break;
    case NodeFamily::min_energy:
      if (size < 4) throw std::invalid_argument("min-energy family requires N >= 4");
      break;
    case NodeFamily::custom:
      throw std::invalid_argument("custom family cannot be generated");
  }
}

NodeSet generate_nodes(const FamilySpec& spec) {
  spec.validate();
  switch (spec.family) {
    case NodeFamily::fibonacci:
      return fibonacci_nodes(spec.size);
    case NodeFamily::icosahedral:
      return icosahedral_nodes(static_cast<int>(spec.size));
    case NodeFamily::min_energy:
      return min_energy_nodes(spec.size, spec.seed, spec.energy_exponent,
                              spec.max_iterations);
    default:
      throw std::invalid_argument("cannot generate custom family");
  }
}

NodeSet fibonacci_nodes(Eigen::Index N) {
  if (N < 3 || N % 2 == 0)
    throw std::invalid_argument("fibonacci_nodes: N must be odd and >= 3");
  const double inv_phi = 2.0 / (1.0 + std::sqrt(5.0));
  const Eigen::Index half = (N - 1) / 2;
  Eigen::MatrixX3d P(N, 3);
  for (Eigen::Index i = -half; i <= half; ++i) {
    const double lat = std::asin(2.0 * static_cast<double>(i) / static_cast<double>(N));
    const double lon = 2.0 * M_PI * static_cast<double>(i) * inv_phi;
    const double cl = std::cos(lat);
    P.row(i + half) << std::cos(lon) * cl, std::sin(lon) * cl, std::sin(lat);
  }
  return NodeSet(std::move(P), NodeFamily::fibonacci);
}

namespace {

std::array<Vec3, 12> icosahedron_vertices() {
  // Poles at +/- e_z, two rings of five at latitude +/- atan(1/2).
  std::array<Vec3, 12> v;
  v[0] = Vec3(0, 0, 1);
  v[11] = Vec3(0, 0, -1);
  const double lat = std::atan(0.5);
  const double c = std::cos(lat), s = std::sin(lat);
  for (int j = 0; j < 5; ++j) {
    const double lon_u = 2.0 * M_PI * j / 5.0;
    const double lon_l = lon_u + M_PI / 5.0;
    v[1 + j] = Vec3(c * std::cos(lon_u), c * std::sin(lon_u), s);
    v[6 + j] = Vec3(c * std::cos(lon_l), c * std::sin(lon_l), -s);
  }
  return v;
}

const std::array<std::array<int, 3>, 20> kIcoFaces = {{
    // cap around the north pole
    {{0, 1, 2}}, {{0, 2, 3}}, {{0, 3, 4}}, {{0, 4, 5}}, {{0, 5, 1}},
    // upper band
    {{1, 6, 2}}, {{2, 7, 3}}, {{3, 8, 4}}, {{4, 9, 5}}, {{5, 10, 1}},
    // lower band
    {{6, 7, 2}}, {{7, 8, 3}}, {{8, 9, 4}}, {{9, 10, 5}}, {{10, 6, 1}},
    // cap around the south pole
    {{11, 7, 6}}, {{11, 8, 7}}, {{11, 9, 8}}, {{11, 10, 9}}, {{11, 6, 10}},
}};

}  // namespace

NodeSet icosahedral_nodes(int level) {
  if (level < 1) throw std::invalid_argument("icosahedral_nodes: level must be >= 1");
  const int n = level;
  const auto verts = icosahedron_vertices();

  // Combinatorial keys so shared edge/corner points merge exactly once.
  // Tag 0: base vertex (id, 0, 0); tag 1: edge (lo, hi, steps from lo);
  // tag 2: face interior (face, i, j).
  using Key = std::tuple<int, int, int, int>;
  auto VertKey = [](int v) { return Key{0, v, 0, 0}; };
  auto EdgeKey = [](int a, int b, int s) { return Key{1, a, b, s}; };
  auto FaceKey = [](int f, int i, int j) { return Key{2, f, i, j}; };
  std::map<Key, Eigen::Index> index_of;
  std::vector<Vec3> points;

  auto intern = [&](const Key& key, const Vec3& pos) {
    auto [it, inserted] = index_of.try_emplace(key, static_cast<Eigen::Index>(points.size()));
    if (inserted) points.push_back(pos.normalized());
    return it->second;
  };

  for (int f = 0; f < 20; ++f) {
    const auto& face = kIcoFaces[f];
    const Vec3 &A = verts[face[0]], &B = verts[face[1]], &C = verts[face[2]];
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n - i; ++j) {
        const int k = n - i - j;
        const Vec3 pos = (static_cast<double>(i) * A + static_cast<double>(j) * B +
                          static_cast<double>(k) * C) /
                         static_cast<double>(n);
        Key key;
        if (i == n) key = VertKey(face[0]);
        else if (j == n) key = VertKey(face[1]);
        else if (k == n) key = VertKey(face[2]);
        else if (k == 0) {  // edge A-B, j steps from A
          const int a = face[0], b = face[1];
          key = a < b ? EdgeKey(a, b, j) : EdgeKey(b, a, n - j);
        } else if (j == 0) {  // edge A-C, k steps from A
          const int a = face[0], b = face[2];
          key = a < b ? EdgeKey(a, b, k) : EdgeKey(b, a, n - k);
        } else if (i == 0) {  // edge B-C, k steps from B
          const int a = face[1], b = face[2];
          key = a < b ? EdgeKey(a, b, k) : EdgeKey(b, a, n - k);
        } else {
          key = FaceKey(f, i, j);
        }
        intern(key, pos);
      }
    }
  }

  Eigen::MatrixX3d P(static_cast<Eigen::Index>(points.size()), 3);
  for (Eigen::Index i = 0; i < P.rows(); ++i) P.row(i) = points[static_cast<size_t>(i)].transpose();
  return NodeSet(std::move(P), NodeFamily::icosahedral);
}

// ---------------------------------------------------------------------------
// Riesz energy minimization

namespace {

// splitmix64, used for the deterministic symmetry-breaking jitter
std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

// Energy and (optionally) the Euclidean gradient, blocked so the N x N pair
// matrix never materializes.  Accumulation order is fixed by the block
// layout, independent of thread count.
double energy_and_gradient(const Eigen::MatrixX3d& P, double s, Eigen::MatrixX3d* grad) {
  const Eigen::Index n = P.rows();
  const Eigen::Index block = 512;
  if (grad) grad->setZero(n, 3);
  std::vector<double> block_energy((n + block - 1) / block, 0.0);
  parallel_for(0, static_cast<std::ptrdiff_t>(block_energy.size()), [&](std::ptrdiff_t bi) {
    const Eigen::Index r0 = bi * block;
    const Eigen::Index rows = std::min(block, n - r0);
    // squared distances r^2 = 2 - 2 x_i . x_j
    Eigen::MatrixXd R2 = (2.0 - 2.0 * (P.middleRows(r0, rows) * P.transpose()).array()).matrix();
    const Eigen::ArrayXXd inv = R2.array().max(1e-300).inverse();
    // s = 3 is the common case; sqrt-based powers beat elementwise pow
    Eigen::ArrayXXd W =
        s == 3.0 ? (inv * inv.sqrt()).eval() : R2.array().max(1e-300).pow(-s / 2.0).eval();
    for (Eigen::Index i = 0; i < rows; ++i) W(i, r0 + i) = 0.0;
    block_energy[bi] = W.sum();
    if (grad) {
      // dE/dx_i = -2 s sum_j r^{-s-2} (x_i - x_j)
      Eigen::ArrayXXd V = W * inv;
      Eigen::VectorXd rowsum = V.rowwise().sum();
      grad->middleRows(r0, rows) =
          -2.0 * s * (rowsum.asDiagonal() * P.middleRows(r0, rows) - V.matrix() * P);
    }
  });
  double e = 0;
  for (double b : block_energy) e += b;
  return e;
}

}  // namespace

double riesz_energy(const Eigen::MatrixX3d& P, double exponent) {
  return energy_and_gradient(P, exponent, nullptr);
}

NodeSet min_energy_nodes(Eigen::Index N, std::uint64_t seed, double energy_exponent,
                         Eigen::Index max_iterations, MinEnergyInfo* info) {
  if (N < 2) throw std::invalid_argument("min_energy_nodes: N >= 2 required");

  // Nearest odd Fibonacci size, then drop the surplus node nearest the seed
  // pole; a small tangential jitter breaks lattice symmetries.
  const Eigen::Index M = std::max<Eigen::Index>(3, (N % 2 == 1) ? N : N + 1);
  Eigen::MatrixX3d P = fibonacci_nodes(M).matrix();
  if (M > N) P.conservativeResize(N, 3);

  std::uint64_t rng = seed ^ 0xa5a5a5a55a5a5a5aULL;
  for (Eigen::Index i = 0; i < N; ++i) {
    Vec3 x = P.row(i).transpose();
    Vec3 t1 = x.unitOrthogonal();
    Vec3 t2 = x.cross(t1);
    const double amp = 1e-3 / std::sqrt(static_cast<double>(N));
    x += amp * ((2.0 * uniform01(rng) - 1.0) * t1 + (2.0 * uniform01(rng) - 1.0) * t2);
    P.row(i) = x.normalized().transpose();
  }

  MinEnergyInfo local;
  MinEnergyInfo& mi = info ? *info : local;
  mi = MinEnergyInfo{};

  Eigen::MatrixX3d G(N, 3);
  double E = energy_and_gradient(P, energy_exponent, &G);
  const double grad_tol = 1e-8 * static_cast<double>(N);
  double alpha = 1.0 / static_cast<double>(N * N);

  for (Eigen::Index it = 0; it < max_iterations; ++it) {
    // tangential gradient
    Eigen::MatrixX3d T = G;
    for (Eigen::Index i = 0; i < N; ++i) {
      const Vec3 x = P.row(i).transpose();
      T.row(i) -= (T.row(i).dot(x.transpose())) * x.transpose();
    }
    const double gmax = T.rowwise().norm().maxCoeff();
    mi.final_grad_max = gmax;
    mi.iterations = it;
    if (gmax < grad_tol) {
      mi.converged = true;
      break;
    }
    // backtracking line search on the projected step
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      Eigen::MatrixX3d Q = P - alpha * T;
      Q.rowwise().normalize();
      const double Eq = riesz_energy(Q, energy_exponent);
      if (Eq < E) {
        P = std::move(Q);
        E = Eq;
        mi.energy_trace.push_back(E);
        alpha *= 1.5;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // step underflow: stationary to working precision
    E = energy_and_gradient(P, energy_exponent, &G);
  }
  mi.final_energy = E;

  NodeSet out(std::move(P), NodeFamily::min_energy);
  out.set_converged(mi.converged);
  return out;
}

}  // namespace sphquad
