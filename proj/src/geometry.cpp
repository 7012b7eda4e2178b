#include "sphquad/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>

#include "sphquad/node_generation.hpp"
#include "sphquad/parallel.hpp"

namespace sphquad {

std::string family_name(NodeFamily f) {
  switch (f) {
    case NodeFamily::icosahedral: return "icosahedral";
    case NodeFamily::fibonacci: return "fibonacci";
    case NodeFamily::min_energy: return "min-energy";
    case NodeFamily::custom: return "custom";
  }
  return "custom";
}

NodeFamily family_from_name(const std::string& name) {
  if (name == "icosahedral") return NodeFamily::icosahedral;
  if (name == "fibonacci") return NodeFamily::fibonacci;
  if (name == "min-energy" || name == "min_energy") return NodeFamily::min_energy;
  if (name == "custom") return NodeFamily::custom;
  throw std::invalid_argument("unknown node family: " + name);
}

NodeSet::NodeSet(Eigen::MatrixX3d nodes, NodeFamily family)
    : nodes_(std::move(nodes)), family_(family) {
  for (Eigen::Index i = 0; i < nodes_.rows(); ++i) {
    const double n = nodes_.row(i).norm();
    if (!std::isfinite(n) || n < 1e-300)
      throw std::invalid_argument("NodeSet: non-finite or zero node");
    if (std::abs(n - 1.0) > 1e-12) nodes_.row(i) /= n;
  }
}

double geodesic_distance(const Vec3& p, const Vec3& q) {
  return std::atan2(p.cross(q).norm(), p.dot(q));
}

double separation_radius(const NodeSet& X) {
  const Eigen::Index n = X.size();
  if (n < 2) throw std::invalid_argument("separation_radius: need N >= 2");
  const Eigen::MatrixX3d& P = X.matrix();
  // max off-diagonal dot product <-> min geodesic distance
  double best = -1.0;
  Eigen::Index bi = 0, bj = 1;
  const Eigen::Index block = 512;
  std::mutex mu;
  parallel_for_chunks(0, n, [&](std::ptrdiff_t b, std::ptrdiff_t e) {
    double lbest = -1.0;
    Eigen::Index li = 0, lj = 1;
    for (std::ptrdiff_t r0 = b; r0 < e; r0 += block) {
      const Eigen::Index rows = std::min<std::ptrdiff_t>(block, e - r0);
      Eigen::MatrixXd T = P.middleRows(r0, rows) * P.transpose();
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
          if (r0 + i == j) continue;
          if (T(i, j) > lbest) {
            lbest = T(i, j);
            li = r0 + i;
            lj = j;
          }
        }
    }
    std::lock_guard<std::mutex> lk(mu);
    if (lbest > best) {
      best = lbest;
      bi = li;
      bj = lj;
    }
  });
  const double dmin = geodesic_distance(X.node(bi), X.node(bj));
  if (dmin <= 1e-10) throw std::runtime_error("degenerate node set: duplicate nodes");
  return 0.5 * dmin;
}

double mesh_norm_estimate(const NodeSet& X, Eigen::Index resolution) {
  const Eigen::Index n = X.size();
  if (n < 1) throw std::invalid_argument("mesh_norm_estimate: empty node set");
  if (resolution == 0) resolution = 100 * n;
  if (resolution < 10 * n) resolution = 10 * n;
  if (resolution % 2 == 0) ++resolution;  // Fibonacci probe lattice wants odd size
  const NodeSet probes = fibonacci_nodes(resolution);
  const SphereGrid grid(X);
  const Eigen::Index m = probes.size();
  std::mutex mu;
  double h = 0;
  parallel_for_chunks(0, m, [&](std::ptrdiff_t b, std::ptrdiff_t e) {
    double local = 0;
    for (std::ptrdiff_t i = b; i < e; ++i)
      local = std::max(local, grid.nearest_distance(probes.node(i)));
    std::lock_guard<std::mutex> lk(mu);
    h = std::max(h, local);
  });
  return h;
}

GeodesicStats geodesic_stats(const NodeSet& X, Eigen::Index resolution) {
  GeodesicStats s;
  s.q = separation_radius(X);
  if (resolution == 0) resolution = 100 * X.size();
  s.h = mesh_norm_estimate(X, resolution);
  s.rho = s.h / s.q;
  s.probe_resolution = resolution;
  return s;
}

// ---------------------------------------------------------------------------
// SphereGrid

SphereGrid::SphereGrid(const NodeSet& X) : X_(&X) {
  const Eigen::Index n = std::max<Eigen::Index>(X.size(), 1);
  // Aim for a few nodes per cell.
  const double cell = std::sqrt(8.0 * M_PI / static_cast<double>(n));
  nrows_ = std::max(1, static_cast<int>(std::floor(M_PI / cell)));
  ncols_.resize(nrows_);
  row_offset_.resize(nrows_ + 1, 0);
  const double dtheta = M_PI / nrows_;
  for (int r = 0; r < nrows_; ++r) {
    const double mid = (r + 0.5) * dtheta;
    ncols_[r] = std::max(1, static_cast<int>(std::floor(2.0 * M_PI * std::sin(mid) / dtheta)));
    row_offset_[r + 1] = row_offset_[r] + ncols_[r];
  }
  cells_.resize(row_offset_[nrows_]);
  for (Eigen::Index i = 0; i < X.size(); ++i) cells_[cell_of(X.node(i))].push_back(i);
}

int SphereGrid::cell_of(const Vec3& p) const {
  const double theta = std::acos(std::clamp(p.z(), -1.0, 1.0));
  int r = std::min(nrows_ - 1, static_cast<int>(theta / (M_PI / nrows_)));
  double lam = std::atan2(p.y(), p.x());
  if (lam < 0) lam += 2.0 * M_PI;
  int c = std::min(ncols_[r] - 1, static_cast<int>(lam / (2.0 * M_PI / ncols_[r])));
  return row_offset_[r] + c;
}

void SphereGrid::collect(const Vec3& q, Eigen::Index k, std::vector<Hit>& out) const {
  const Eigen::Index n = X_->size();
  k = std::min(k, n);
  out.clear();
  const double dtheta = M_PI / nrows_;
  const double thetaq = std::acos(std::clamp(q.z(), -1.0, 1.0));
  double lamq = std::atan2(q.y(), q.x());
  if (lamq < 0) lamq += 2.0 * M_PI;
  const int rowq = std::min(nrows_ - 1, static_cast<int>(thetaq / dtheta));

  std::vector<char> seen(cells_.size(), 0);
  std::vector<Hit> hits;
  hits.reserve(8 * static_cast<size_t>(k));

  auto scan_cell = [&](int r, int c) {
    c = ((c % ncols_[r]) + ncols_[r]) % ncols_[r];
    const int id = row_offset_[r] + c;
    if (seen[id]) return;
    seen[id] = 1;
    for (Eigen::Index idx : cells_[id])
      hits.push_back({geodesic_distance(q, X_->node(idx)), idx});
  };

  // Phase 1: expand row rings until at least k candidates are seen.
  for (int ring = 0; ring < nrows_ && static_cast<Eigen::Index>(hits.size()) < k; ++ring) {
    for (int r : {rowq - ring, rowq + ring}) {
      if (r < 0 || r >= nrows_) continue;
      if (ring > 0 && r == rowq) continue;
      // Whole row; rows are short near the poles and this phase only needs
      // some k candidates to bound the exact sweep below.
      for (int c = 0; c < ncols_[r]; ++c) scan_cell(r, c);
    }
  }
  if (static_cast<Eigen::Index>(hits.size()) < k) {
    for (int r = 0; r < nrows_; ++r)
      for (int c = 0; c < ncols_[r]; ++c) scan_cell(r, c);
  }

  auto kth_bound = [&]() {
    std::nth_element(hits.begin(), hits.begin() + (k - 1), hits.end(),
                     [](const Hit& a, const Hit& b) {
                       return a.dist < b.dist || (a.dist == b.dist && a.index < b.index);
                     });
    return hits[k - 1].dist;
  };

  // Phase 2: conservative sweep of every cell that could hold a point within
  // the current k-th distance.
  const double r_bound = kth_bound() + 1e-12;
  const int rlo = std::max(0, static_cast<int>((thetaq - r_bound) / dtheta));
  const int rhi = std::min(nrows_ - 1, static_cast<int>((thetaq + r_bound) / dtheta));
  // Longitude extent of the cap of radius r_bound about q; if the cap reaches
  // a pole the extent is the whole circle.
  bool full_sweep = (thetaq - r_bound <= 0.0) || (thetaq + r_bound >= M_PI);
  double dlam = M_PI;
  if (!full_sweep) {
    const double s = std::sin(r_bound) / std::sin(thetaq);
    if (s >= 1.0)
      full_sweep = true;
    else
      dlam = std::asin(s);
  }
  for (int r = rlo; r <= rhi; ++r) {
    const bool full_row = full_sweep || dlam + 2.0 * M_PI / ncols_[r] >= M_PI;
    if (full_row) {
      for (int c = 0; c < ncols_[r]; ++c) scan_cell(r, c);
    } else {
      const double dcol = 2.0 * M_PI / ncols_[r];
      const int c0 = static_cast<int>(std::floor((lamq - dlam) / dcol)) - 1;
      const int c1 = static_cast<int>(std::floor((lamq + dlam) / dcol)) + 1;
      for (int c = c0; c <= c1; ++c) scan_cell(r, c);
    }
  }

  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.dist < b.dist || (a.dist == b.dist && a.index < b.index);
  });
  hits.resize(k);
  out = std::move(hits);
}

std::vector<Eigen::Index> SphereGrid::nearest(const Vec3& q, Eigen::Index k) const {
  if (k < 1 || k > X_->size()) throw std::invalid_argument("SphereGrid::nearest: bad k");
  std::vector<Hit> hits;
  collect(q, k, hits);
  std::vector<Eigen::Index> out(hits.size());
  for (size_t i = 0; i < hits.size(); ++i) out[i] = hits[i].index;
  return out;
}

double SphereGrid::nearest_distance(const Vec3& q) const {
  std::vector<Hit> hits;
  collect(q, 1, hits);
  return hits[0].dist;
}

std::vector<Eigen::Index> nearest_neighbors(const NodeSet& X, const SphereGrid& grid,
                                            Eigen::Index i, Eigen::Index p) {
  if (i < 0 || i >= X.size()) throw std::invalid_argument("nearest_neighbors: bad index");
  if (p < 1 || p > X.size()) throw std::invalid_argument("nearest_neighbors: bad p");
  return grid.nearest(X.node(i), p);
}

std::vector<Eigen::Index> nearest_neighbors(const NodeSet& X, Eigen::Index i, Eigen::Index p) {
  SphereGrid grid(X);
  return nearest_neighbors(X, grid, i, p);
}

// ---------------------------------------------------------------------------
// Node file I/O

void write_nodes(std::ostream& os, const NodeSet& X,
                 const std::vector<std::string>& header_comments) {
  os << "# sphquad nodes\n";
  os << "# family=" << family_name(X.family()) << " N=" << X.size() << "\n";
  for (const auto& c : header_comments) os << "# " << c << "\n";
  os.precision(17);
  for (Eigen::Index i = 0; i < X.size(); ++i) {
    const Vec3 p = X.node(i);
    os << p.x() << " " << p.y() << " " << p.z() << "\n";
  }
}

void write_nodes_file(const std::string& path, const NodeSet& X,
                      const std::vector<std::string>& header_comments) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_nodes(os, X, header_comments);
}

NodeSet read_nodes(std::istream& is) {
  std::vector<Vec3> pts;
  std::string line;
  NodeFamily fam = NodeFamily::custom;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("family=");
      if (pos != std::string::npos) {
        std::string name = line.substr(pos + 7);
        name = name.substr(0, name.find_first_of(" \t"));
        try {
          fam = family_from_name(name);
        } catch (const std::invalid_argument&) {
        }
      }
      continue;
    }
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x >> y >> z)) throw std::runtime_error("node file: malformed line: " + line);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
      throw std::runtime_error("node file: non-finite node");
    pts.emplace_back(x, y, z);
  }
  Eigen::MatrixX3d M(static_cast<Eigen::Index>(pts.size()), 3);
  for (Eigen::Index i = 0; i < M.rows(); ++i) M.row(i) = pts[static_cast<size_t>(i)].transpose();
  return NodeSet(std::move(M), fam);
}

NodeSet read_nodes_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_nodes(is);
}

}  // namespace sphquad
