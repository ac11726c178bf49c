#ifndef KSGFLOW_MESH_HPP
#define KSGFLOW_MESH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksgflow/geometry.hpp"

namespace ksgflow {

// Target local mesh size as a function of position. h(p) >= h_min > 0 must
// hold everywhere in the box; the builder verifies this along the lines it
// samples and fails loudly otherwise.
struct GradingFunction {
  std::string name;
  double h_min = 0.0;
  std::function<double(Vec3)> h;
};

inline GradingFunction uniform_grading(double h) {
  if (!(h > 0.0)) throw std::invalid_argument("uniform_grading: h must be > 0");
  return {"uniform", h, [h](Vec3) { return h; }};
}

struct TetLocation {
  int tet = -1;
  std::array<double, 4> bary{};  // barycentric weights of the query point
};

// Conforming tetrahedral mesh of an axis-aligned box. Nodes form a graded
// tensor-product lattice; every hexahedral cell is split into the same six
// tetrahedra (all containing the cell's main diagonal), which keeps shared
// faces consistent between neighbouring cells.
struct Mesh {
  Box box;
  std::string grading_name;
  std::vector<Vec3> nodes;
  std::vector<std::array<int, 4>> tets;   // positively oriented
  std::vector<std::uint8_t> is_boundary;  // per node
  std::vector<int> node_to_dof;           // -1 on boundary nodes
  std::vector<int> dof_to_node;           // interior dofs in node order
  std::array<std::vector<double>, 3> axis;  // lattice coordinates per axis

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_tets() const { return static_cast<int>(tets.size()); }
  int interior_dof_count() const { return static_cast<int>(dof_to_node.size()); }

  double tet_volume(int t) const {
    const auto& e = tets[t];
    Vec3 a = nodes[e[0]];
    return dot(nodes[e[1]] - a, cross(nodes[e[2]] - a, nodes[e[3]] - a)) / 6.0;
  }

  // Constant P1 basis gradients on tet t, one per vertex.
  std::array<Vec3, 4> p1_gradients(int t) const {
    const auto& e = tets[t];
    Vec3 a = nodes[e[0]], b = nodes[e[1]], c = nodes[e[2]], d = nodes[e[3]];
    double v6 = dot(b - a, cross(c - a, d - a));
    std::array<Vec3, 4> g;
    g[1] = (1.0 / v6) * cross(c - a, d - a);
    g[2] = (1.0 / v6) * cross(d - a, b - a);
    g[3] = (1.0 / v6) * cross(b - a, c - a);
    g[0] = {-g[1].x - g[2].x - g[3].x, -g[1].y - g[2].y - g[3].y,
            -g[1].z - g[2].z - g[3].z};
    return g;
  }

  // Locates the containing tetrahedron through the lattice structure.
  // Points outside the box are a caller error.
  TetLocation locate(Vec3 p) const;

  std::pair<double, double> edge_length_range() const;
};

namespace detail {

// Number of lattice cells along each axis: equidistributes 1/h sampled on the
// axis-parallel line through the box center, then trims/fills to the node
// budget. Deterministic.
struct AxisTable {
  std::vector<double> s;  // sample coordinates
  std::vector<double> F;  // cumulative integral of 1/h
};

inline AxisTable sample_axis(const Box& box, const GradingFunction& g, int axis) {
  constexpr int kSamples = 4096;
  AxisTable t;
  t.s.resize(kSamples + 1);
  t.F.resize(kSamples + 1);
  Vec3 c = box.center();
  double lo = box.lo[axis], hi = box.hi[axis];
  double prev_w = 0.0;
  for (int i = 0; i <= kSamples; ++i) {
    double s = lo + (hi - lo) * i / kSamples;
    Vec3 p = c;
    p[axis] = s;
    double h = g.h(p);
    if (!std::isfinite(h) || h <= 0.0)
      throw std::runtime_error("build_graded_box_mesh: grading '" + g.name +
                               "' is not finite and positive on the axis line");
    if (h < g.h_min * (1.0 - 1e-12))
      throw std::runtime_error("build_graded_box_mesh: grading '" + g.name +
                               "' drops below its declared h_min");
    double w = 1.0 / h;
    t.s[i] = s;
    t.F[i] = (i == 0) ? 0.0 : t.F[i - 1] + 0.5 * (w + prev_w) * (hi - lo) / kSamples;
    prev_w = w;
  }
  return t;
}

inline std::vector<double> invert_equidistribution(const AxisTable& t, int cells) {
  std::vector<double> x(cells + 1);
  x.front() = t.s.front();
  x.back() = t.s.back();
  double total = t.F.back();
  std::size_t j = 0;
  for (int i = 1; i < cells; ++i) {
    double target = total * i / cells;
    while (j + 1 < t.F.size() && t.F[j + 1] < target) ++j;
    double f0 = t.F[j], f1 = t.F[j + 1];
    double w = (f1 > f0) ? (target - f0) / (f1 - f0) : 0.5;
    x[i] = t.s[j] + w * (t.s[j + 1] - t.s[j]);
  }
  for (int i = 0; i < cells; ++i)
    if (!(x[i + 1] > x[i]))
      throw std::runtime_error("build_graded_box_mesh: axis grid not strictly increasing");
  return x;
}

}  // namespace detail

// Builds the graded lattice mesh. budget caps the total node count; at least
// a 3x3x3 lattice (27 nodes) is always produced, so budget < 27 is an error.
inline Mesh build_graded_box_mesh(const Box& box, const GradingFunction& grading,
                                  int budget) {
  if (budget < 27)
    throw std::invalid_argument(
        "build_graded_box_mesh: node budget " + std::to_string(budget) +
        " too small; the minimal 3x3x3 lattice needs 27 nodes");
  for (int d = 0; d < 3; ++d)
    if (!(box.hi[d] > box.lo[d]))
      throw std::invalid_argument("build_graded_box_mesh: degenerate box");

  std::array<detail::AxisTable, 3> table;
  std::array<int, 3> natural{}, n{};
  for (int d = 0; d < 3; ++d) {
    table[d] = detail::sample_axis(box, grading, d);
    natural[d] = std::max(2, static_cast<int>(std::ceil(table[d].F.back() - 1e-9)));
    n[d] = natural[d];
  }

  auto nodes_of = [](const std::array<int, 3>& m) {
    return static_cast<long long>(m[0] + 1) * (m[1] + 1) * (m[2] + 1);
  };

  if (nodes_of(n) > budget) {
    double t = std::cbrt(static_cast<double>(budget) / static_cast<double>(nodes_of(n)));
    for (int d = 0; d < 3; ++d)
      n[d] = std::clamp(static_cast<int>(std::floor(n[d] * t)), 2, natural[d]);
  }
  while (nodes_of(n) > budget) {
    int d = 0;
    for (int k = 1; k < 3; ++k)
      if (n[k] > n[d]) d = k;
    if (n[d] <= 2) break;  // cannot happen with budget >= 27
    --n[d];
  }
  // Fill remaining budget toward the natural counts, most-starved axis first.
  for (;;) {
    int best = -1;
    double best_deficit = 1.0;
    for (int d = 0; d < 3; ++d) {
      if (n[d] >= natural[d]) continue;
      auto trial = n;
      ++trial[d];
      if (nodes_of(trial) > budget) continue;
      double deficit = static_cast<double>(natural[d]) / n[d];
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = d;
      }
    }
    if (best < 0) break;
    ++n[best];
  }

  Mesh mesh;
  mesh.box = box;
  mesh.grading_name = grading.name;
  for (int d = 0; d < 3; ++d)
    mesh.axis[d] = detail::invert_equidistribution(table[d], n[d]);

  const int nx = n[0], ny = n[1], nz = n[2];
  auto node_id = [&](int i, int j, int k) { return i + (nx + 1) * (j + (ny + 1) * k); };

  mesh.nodes.resize(static_cast<std::size_t>(nodes_of(n)));
  mesh.is_boundary.assign(mesh.nodes.size(), 0);
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) {
        int id = node_id(i, j, k);
        mesh.nodes[id] = {mesh.axis[0][i], mesh.axis[1][j], mesh.axis[2][k]};
        if (i == 0 || i == nx || j == 0 || j == ny || k == 0 || k == nz)
          mesh.is_boundary[id] = 1;
      }

  mesh.node_to_dof.assign(mesh.nodes.size(), -1);
  for (std::size_t v = 0; v < mesh.nodes.size(); ++v)
    if (!mesh.is_boundary[v]) {
      mesh.node_to_dof[v] = static_cast<int>(mesh.dof_to_node.size());
      mesh.dof_to_node.push_back(static_cast<int>(v));
    }

  // Six-tetrahedra split of each cell: one tet per permutation of the axis
  // step order along the main diagonal (0,0,0) -> (1,1,1).
  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                  {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  mesh.tets.reserve(static_cast<std::size_t>(nx) * ny * nz * 6);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        for (const auto& p : perms) {
          std::array<int, 3> at = {i, j, k};
          std::array<int, 4> tet;
          tet[0] = node_id(at[0], at[1], at[2]);
          for (int step = 0; step < 3; ++step) {
            ++at[p[step]];
            tet[step + 1] = node_id(at[0], at[1], at[2]);
          }
          Vec3 a = mesh.nodes[tet[0]];
          double v6 = dot(mesh.nodes[tet[1]] - a,
                          cross(mesh.nodes[tet[2]] - a, mesh.nodes[tet[3]] - a));
          if (v6 < 0.0) std::swap(tet[2], tet[3]);
          mesh.tets.push_back(tet);
        }
  return mesh;
}

inline TetLocation Mesh::locate(Vec3 p) const {
  if (!box.contains(p))
    throw std::invalid_argument("Mesh::locate: point outside the box");
  std::array<int, 3> cell;
  for (int d = 0; d < 3; ++d) {
    const auto& g = axis[d];
    auto it = std::upper_bound(g.begin(), g.end(), p[d]);
    int i = static_cast<int>(it - g.begin()) - 1;
    cell[d] = std::clamp(i, 0, static_cast<int>(g.size()) - 2);
  }
  int nx = static_cast<int>(axis[0].size()) - 1;
  int ny = static_cast<int>(axis[1].size()) - 1;
  long long cell_id = cell[0] + static_cast<long long>(nx) * (cell[1] + static_cast<long long>(ny) * cell[2]);

  TetLocation best;
  double best_min = -1e300;
  for (int s = 0; s < 6; ++s) {
    int t = static_cast<int>(cell_id * 6 + s);
    const auto& e = tets[t];
    Vec3 a = nodes[e[0]], b = nodes[e[1]], c = nodes[e[2]], d = nodes[e[3]];
    double v6 = dot(b - a, cross(c - a, d - a));
    std::array<double, 4> lam;
    lam[1] = dot(p - a, cross(c - a, d - a)) / v6;
    lam[2] = dot(b - a, cross(p - a, d - a)) / v6;
    lam[3] = dot(b - a, cross(c - a, p - a)) / v6;
    lam[0] = 1.0 - lam[1] - lam[2] - lam[3];
    double mn = std::min({lam[0], lam[1], lam[2], lam[3]});
    if (mn > best_min) {
      best_min = mn;
      best = {t, lam};
    }
    if (mn >= 0.0) break;
  }
  for (double& l : best.bary) l = std::max(l, 0.0);
  return best;
}

inline std::pair<double, double> Mesh::edge_length_range() const {
  double lo = 1e300, hi = 0.0;
  for (const auto& e : tets)
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        double len = norm(nodes[e[a]] - nodes[e[b]]);
        lo = std::min(lo, len);
        hi = std::max(hi, len);
      }
  return {lo, hi};
}

// Plain-text mesh dump for debugging: node coordinates, then tet connectivity.
inline void write_mesh_text(const Mesh& mesh, std::ostream& out) {
  out << "nodes " << mesh.n_nodes() << "\n";
  char line[128];
  for (const auto& p : mesh.nodes) {
    std::snprintf(line, sizeof line, "%.17g %.17g %.17g\n", p.x, p.y, p.z);
    out << line;
  }
  out << "tets " << mesh.n_tets() << "\n";
  for (const auto& t : mesh.tets)
    out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << "\n";
}

}  // namespace ksgflow

#endif
