#ifndef KSGFLOW_ASSEMBLY_HPP
#define KSGFLOW_ASSEMBLY_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksgflow/mesh.hpp"
#include "ksgflow/sparse.hpp"

namespace ksgflow {

// Nodal coefficients of a P1 function. Interior-dof length unless a function
// explicitly works on all nodes.
using NodalField = std::vector<double>;

struct Nucleus {
  double charge = 0.0;
  Vec3 position;
};
using NuclearConfig = std::vector<Nucleus>;

inline void validate_nuclei(const Box& box, const NuclearConfig& nuclei) {
  for (const auto& n : nuclei) {
    if (!(n.charge > 0.0))
      throw std::invalid_argument("nuclear config: charges must be positive");
    if (!box.strictly_inside(n.position))
      throw std::invalid_argument("nuclear config: nucleus not strictly inside the box");
  }
}

// -sum_j Z_j / |p - R_j|. Refuses to evaluate on top of a nucleus: that is
// always an assembly bug (quadrature points are interior to the elements).
inline double eval_external_potential(const NuclearConfig& nuclei, Vec3 p) {
  double v = 0.0;
  for (std::size_t j = 0; j < nuclei.size(); ++j) {
    double r = norm(p - nuclei[j].position);
    if (r < 1e-12) {
      char msg[160];
      std::snprintf(msg, sizeof msg,
                    "external potential singular: point (%g, %g, %g) hits nucleus %zu at"
                    " (%g, %g, %g)",
                    p.x, p.y, p.z, j, nuclei[j].position.x, nuclei[j].position.y,
                    nuclei[j].position.z);
      throw std::runtime_error(msg);
    }
    v -= nuclei[j].charge / r;
  }
  return v;
}

namespace detail {

// Interior 4-point rule on the reference tet, exact for quadratics. The
// points avoid vertices, so nodal nuclei never coincide with them.
constexpr double kGaussA = 0.5854101966249685;
constexpr double kGaussB = 0.1381966011250105;

inline SparseSymMatrix assemble(const Mesh& mesh, bool interior_only,
                                const std::function<void(int, double[4][4])>& element) {
  const int n = interior_only ? mesh.interior_dof_count() : mesh.n_nodes();
  TripletAccumulator acc(n);
  double el[4][4];
  for (int t = 0; t < mesh.n_tets(); ++t) {
    element(t, el);
    const auto& e = mesh.tets[t];
    for (int a = 0; a < 4; ++a) {
      int i = interior_only ? mesh.node_to_dof[e[a]] : e[a];
      if (i < 0) continue;
      for (int b = 0; b < 4; ++b) {
        int j = interior_only ? mesh.node_to_dof[e[b]] : e[b];
        if (j < 0) continue;
        acc.add(i, j, el[a][b]);
      }
    }
  }
  return acc.compress();
}

}  // namespace detail

// Mass matrix; the P1 element block is (vol/20) * (2 on the diagonal, 1 off).
inline SparseSymMatrix assemble_mass(const Mesh& mesh, bool interior_only = true) {
  return detail::assemble(mesh, interior_only, [&](int t, double el[4][4]) {
    double s = mesh.tet_volume(t) / 20.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) el[a][b] = (a == b) ? 2.0 * s : s;
  });
}

// Stiffness matrix of the full Laplacian (no 1/2 factor; the Hamiltonian
// applies its own kinetic prefactor).
inline SparseSymMatrix assemble_stiffness(const Mesh& mesh, bool interior_only = true) {
  return detail::assemble(mesh, interior_only, [&](int t, double el[4][4]) {
    auto g = mesh.p1_gradients(t);
    double vol = mesh.tet_volume(t);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) el[a][b] = vol * dot(g[a], g[b]);
  });
}

// Weighted mass matrix int V phi_i phi_j via the fixed 4-point rule.
inline SparseSymMatrix assemble_potential_matrix(
    const Mesh& mesh, const std::function<double(Vec3)>& potential,
    bool interior_only = true) {
  using detail::kGaussA;
  using detail::kGaussB;
  return detail::assemble(mesh, interior_only, [&](int t, double el[4][4]) {
    const auto& e = mesh.tets[t];
    double w = mesh.tet_volume(t) / 4.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) el[a][b] = 0.0;
    for (int q = 0; q < 4; ++q) {
      double lam[4];
      Vec3 xq{0.0, 0.0, 0.0};
      for (int v = 0; v < 4; ++v) {
        lam[v] = (v == q) ? kGaussA : kGaussB;
        xq = xq + lam[v] * mesh.nodes[e[v]];
      }
      double vq = potential(xq);
      if (!std::isfinite(vq)) {
        char msg[120];
        std::snprintf(msg, sizeof msg,
                      "assemble_potential_matrix: potential not finite at (%g, %g, %g)",
                      xq.x, xq.y, xq.z);
        throw std::runtime_error(msg);
      }
      // group the barycentric product first so (a,b) and (b,a) round the
      // same way and the assembled matrix is symmetric to the bit
      double wv = w * vq;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) el[a][b] += wv * (lam[a] * lam[b]);
    }
  });
}

inline SparseSymMatrix assemble_external_potential_matrix(const Mesh& mesh,
                                                          const NuclearConfig& nuclei) {
  return assemble_potential_matrix(
      mesh, [&](Vec3 p) { return eval_external_potential(nuclei, p); });
}

// P1 interpolant of an interior-dof field at an arbitrary point of the box;
// boundary nodes contribute their Dirichlet zero.
inline double interpolate_interior_field(const Mesh& mesh, const NodalField& f,
                                         Vec3 p) {
  if ((int)f.size() != mesh.interior_dof_count())
    throw std::invalid_argument(
        "interpolate_interior_field: field size does not match the mesh");
  TetLocation loc = mesh.locate(p);
  double v = 0.0;
  for (int k = 0; k < 4; ++k) {
    int dof = mesh.node_to_dof[mesh.tets[loc.tet][k]];
    if (dof >= 0) v += loc.bary[k] * f[dof];
  }
  return v;
}

}  // namespace ksgflow

#endif
