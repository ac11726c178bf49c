#pragma once

// Discrete Hamiltonian assembly and the energy bookkeeping around it. The
// operator splits into a configuration-independent part, half the stiffness
// plus the external potential matrix, and a Hartree part that depends on the
// orbitals the caller hands in. The Hartree part is applied as a diagonal in
// the mass-weighted nodal basis (see hartree.hpp); that choice makes the
// operator-form energy and the breakdown energy agree to solver tolerance
// instead of quadrature error, which the descent monitors rely on.

#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ksgflow/assembly.hpp"
#include "ksgflow/hartree.hpp"
#include "ksgflow/linalg.hpp"
#include "ksgflow/mesh.hpp"
#include "ksgflow/sparse.hpp"

namespace ksgflow {

inline double l2_inner(const NodalField& a, const NodalField& b,
                       const SparseSymMatrix& mass) {
  if ((int)a.size() != mass.rows() || (int)b.size() != mass.rows()) {
    char msg[128];
    std::snprintf(msg, sizeof msg,
                  "l2_inner: sizes %zu and %zu against a %d-row mass matrix",
                  a.size(), b.size(), mass.rows());
    throw std::runtime_error(msg);
  }
  std::vector<double> mb(b.size());
  mass.apply(b, mb);
  return vdot(a, mb);
}

// Orbitals plus the mass matrix they are measured against.
struct WaveFunctionSet {
  std::vector<NodalField> waves;
  const SparseSymMatrix* mass = nullptr;
};

// Largest deviation of the Gram matrix from the identity.
inline double orthonormality_error(const WaveFunctionSet& set) {
  const int n = (int)set.waves.size();
  double worst = 0.0;
  std::vector<double> mw(set.mass->rows());
  for (int j = 0; j < n; ++j) {
    set.mass->apply(set.waves[j], mw);
    for (int i = 0; i <= j; ++i) {
      double g = vdot(set.waves[i], mw);
      worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

// Modified Gram-Schmidt in the mass inner product, in place.
inline void gram_schmidt(WaveFunctionSet& set) {
  const int n = (int)set.waves.size();
  std::vector<double> mw(set.mass->rows());
  for (int j = 0; j < n; ++j) {
    set.mass->apply(set.waves[j], mw);
    double nrm0 = std::sqrt(vdot(set.waves[j], mw));
    for (int i = 0; i < j; ++i) {
      set.mass->apply(set.waves[i], mw);
      double g = vdot(set.waves[j], mw);
      axpy(-g, set.waves[i], set.waves[j]);
    }
    set.mass->apply(set.waves[j], mw);
    double nrm = std::sqrt(vdot(set.waves[j], mw));
    if (!(nrm > 1e-12 * nrm0)) {
      char msg[96];
      std::snprintf(msg, sizeof msg,
                    "gram_schmidt: orbital %d is dependent on its predecessors", j);
      throw std::runtime_error(msg);
    }
    for (double& v : set.waves[j]) v /= nrm;
  }
}

struct HamiltonianMatrix {
  SparseSymMatrix matrix;
  std::string built_from;  // which orbital configuration sourced the density
};

struct EnergyBreakdown {
  double kinetic = 0.0;
  double external = 0.0;
  double hartree = 0.0;
  double total = 0.0;
};

// Owns the mesh-level matrices so the per-iteration rebuild only costs one
// Poisson solve and a diagonal update.
class HamiltonianBuilder {
 public:
  HamiltonianBuilder(const Mesh& mesh, const NuclearConfig& nuclei,
                     bool with_hartree = true,
                     HartreeClosure closure = HartreeClosure::monopole)
      : mesh_(&mesh),
        mass_(assemble_mass(mesh, true)),
        stiffness_(assemble_stiffness(mesh, true)),
        external_(assemble_external_potential_matrix(mesh, nuclei)),
        linear_(linear_combination(0.5, stiffness_, 1.0, external_)) {
    if (with_hartree) hartree_.emplace(mesh, closure);
  }

  const Mesh& mesh() const { return *mesh_; }
  const SparseSymMatrix& mass() const { return mass_; }
  const SparseSymMatrix& stiffness() const { return stiffness_; }
  const SparseSymMatrix& external() const { return external_; }
  const SparseSymMatrix& linear_part() const { return linear_; }
  const HartreeContext* hartree() const {
    return hartree_ ? &*hartree_ : nullptr;
  }

  HamiltonianMatrix build(const std::vector<NodalField>& orbitals,
                          std::string built_from) const {
    HamiltonianMatrix h{linear_, std::move(built_from)};
    if (hartree_ && !orbitals.empty()) {
      DensityField rho = compute_density(*hartree_, orbitals);
      add_to_diagonal(h.matrix, hartree_->hartree_diagonal(rho.values));
    }
    return h;
  }

  EnergyBreakdown total_energy(const WaveFunctionSet& set) const {
    EnergyBreakdown e;
    std::vector<double> tmp(mass_.rows());
    for (const NodalField& w : set.waves) {
      stiffness_.apply(w, tmp);
      e.kinetic += 0.5 * vdot(w, tmp);
      external_.apply(w, tmp);
      e.external += vdot(w, tmp);
    }
    if (hartree_ && !set.waves.empty()) {
      DensityField rho = compute_density(*hartree_, set.waves);
      e.hartree = 0.5 * hartree_bilinear(*hartree_, rho, rho);
    }
    e.total = e.kinetic + e.external + e.hartree;
    return e;
  }

 private:
  const Mesh* mesh_;
  SparseSymMatrix mass_;
  SparseSymMatrix stiffness_;
  SparseSymMatrix external_;
  SparseSymMatrix linear_;
  std::optional<HartreeContext> hartree_;
};

inline HamiltonianMatrix build_hamiltonian(const Mesh& mesh,
                                           const NuclearConfig& nuclei,
                                           const std::vector<NodalField>& orbitals,
                                           std::string built_from,
                                           bool with_hartree = true) {
  return HamiltonianBuilder(mesh, nuclei, with_hartree)
      .build(orbitals, std::move(built_from));
}

inline EnergyBreakdown total_energy(const Mesh& mesh, const NuclearConfig& nuclei,
                                    const WaveFunctionSet& set,
                                    bool with_hartree = true) {
  return HamiltonianBuilder(mesh, nuclei, with_hartree).total_energy(set);
}

}  // namespace ksgflow
