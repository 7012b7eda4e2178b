#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace sphquad {

using Vec3 = Eigen::Vector3d;

// A point on the unit sphere.  Construction normalizes and rejects
// non-finite or (near-)zero input.
class UnitVector3 {
 public:
  UnitVector3() : v_(0, 0, 1) {}
  UnitVector3(double x, double y, double z) : UnitVector3(Vec3(x, y, z)) {}
  explicit UnitVector3(const Vec3& v) {
    const double n = v.norm();
    if (!std::isfinite(n) || n < 1e-300)
      throw std::invalid_argument("UnitVector3: non-finite or zero vector");
    v_ = v / n;
  }

  const Vec3& vec() const { return v_; }
  operator const Vec3&() const { return v_; }
  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }

 private:
  Vec3 v_;
};

enum class NodeFamily { icosahedral, fibonacci, min_energy, custom };

std::string family_name(NodeFamily f);
NodeFamily family_from_name(const std::string& name);

// An ordered node set on S^2, stored row-wise as an N x 3 matrix of unit
// vectors.  Immutable after construction.
class NodeSet {
 public:
  NodeSet() = default;
  NodeSet(Eigen::MatrixX3d nodes, NodeFamily family = NodeFamily::custom);

  Eigen::Index size() const { return nodes_.rows(); }
  const Eigen::MatrixX3d& matrix() const { return nodes_; }
  Vec3 node(Eigen::Index i) const { return nodes_.row(i).transpose(); }
  NodeFamily family() const { return family_; }

  // Set by min-energy generation when the descent hit its iteration cap.
  bool converged() const { return converged_; }
  void set_converged(bool c) { converged_ = c; }

 private:
  Eigen::MatrixX3d nodes_;
  NodeFamily family_ = NodeFamily::custom;
  bool converged_ = true;
};

struct GeodesicStats {
  double h = 0;    // mesh norm estimate (radians), a lower bound from probing
  double q = 0;    // separation radius (radians)
  double rho = 0;  // mesh ratio h/q
  Eigen::Index probe_resolution = 0;
};

// Geodesic distance in radians, atan2(|p x q|, p . q), in [0, pi].
double geodesic_distance(const Vec3& p, const Vec3& q);

// Half the minimum pairwise geodesic distance.  Throws on duplicates
// (pairs closer than 1e-10 rad).
double separation_radius(const NodeSet& X);

// Sup over a Fibonacci probe lattice of `resolution` points of the distance
// to the nearest node.  A lower bound on the true mesh norm, converging from
// below as the resolution grows.  resolution 0 picks the default 100 N.
double mesh_norm_estimate(const NodeSet& X, Eigen::Index resolution = 0);

GeodesicStats geodesic_stats(const NodeSet& X, Eigen::Index resolution = 0);

// Longitude-latitude cell grid for nearest-neighbor queries on the sphere.
// Results are exact: a conservative sweep bounds the search rings.
class SphereGrid {
 public:
  explicit SphereGrid(const NodeSet& X);

  // Indices of the k nodes nearest to q, ordered by (distance, index).
  std::vector<Eigen::Index> nearest(const Vec3& q, Eigen::Index k) const;

  // Distance from q to the nearest node.
  double nearest_distance(const Vec3& q) const;

 private:
  struct Hit {
    double dist;
    Eigen::Index index;
  };
  void collect(const Vec3& q, Eigen::Index k, std::vector<Hit>& out) const;

  const NodeSet* X_;
  int nrows_;
  std::vector<int> ncols_;            // per row
  std::vector<int> row_offset_;       // prefix sum of ncols_
  std::vector<std::vector<Eigen::Index>> cells_;
  int cell_of(const Vec3& p) const;
};

// The p nearest nodes to node i (including i), ties broken by smaller index.
std::vector<Eigen::Index> nearest_neighbors(const NodeSet& X, Eigen::Index i,
                                            Eigen::Index p);
std::vector<Eigen::Index> nearest_neighbors(const NodeSet& X, const SphereGrid& grid,
                                            Eigen::Index i, Eigen::Index p);

// Node file I/O: one `x y z` line per node, 17 significant digits,
// '#'-prefixed comments allowed.  Readers re-normalize and reject
// non-finite values.
void write_nodes(std::ostream& os, const NodeSet& X,
                 const std::vector<std::string>& header_comments = {});
void write_nodes_file(const std::string& path, const NodeSet& X,
                      const std::vector<std::string>& header_comments = {});
NodeSet read_nodes(std::istream& is);
NodeSet read_nodes_file(const std::string& path);

}  // namespace sphquad
