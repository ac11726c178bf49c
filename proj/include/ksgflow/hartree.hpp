#pragma once

// Electron density, the boxed Poisson solve for the Hartree potential, and
// the bilinear form the two induce. The potential solve closes the box with
// monopole Dirichlet data Q/|r - c|, c the box centre, lifted through a
// cached discrete harmonic extension so the density-to-potential map is
// linear. The bilinear form pairs the potential of one density against the
// other through the boundary-included mass matrix, with the closure term
// split evenly between the two arguments: that keeps the form symmetric to
// solver tolerance while leaving its diagonal equal to <V(rho), rho>
// exactly. Both properties are load-bearing for the energy-descent
// guarantees of the flow scheme, so they get their own test battery.

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksgflow/assembly.hpp"
#include "ksgflow/linalg.hpp"
#include "ksgflow/mesh.hpp"
#include "ksgflow/sparse.hpp"

namespace ksgflow {

enum class HartreeClosure { monopole, zero_dirichlet };

// Nodal density at interior dofs. values is a sum of nodal squares, so it is
// nonnegative by construction; total_charge integrates the P1 interpolant of
// those nodal values over the box.
struct DensityField {
  NodalField values;
  double total_charge = 0.0;
};

// Potential on every node, boundary included: the Dirichlet closure makes the
// boundary values nonzero whenever the source carries net charge.
struct HartreePotential {
  NodalField values;
  double source_charge = 0.0;
};

class HartreeContext {
 public:
  explicit HartreeContext(const Mesh& mesh,
                          HartreeClosure closure = HartreeClosure::monopole)
      : mesh_(&mesh),
        closure_(closure),
        mass_full_(assemble_mass(mesh, false)),
        stiffness_int_(assemble_stiffness(mesh, true)) {
    const int nn = mesh.n_nodes();
    const int ni = mesh.interior_dof_count();

    // Integrals of the interior hat functions: Q(rho) = mass_one_ . rho.
    std::vector<double> one(nn, 1.0), mone(nn);
    mass_full_.apply(one, mone);
    mass_one_.resize(ni);
    for (int i = 0; i < ni; ++i) mass_one_[i] = mone[mesh.dof_to_node[i]];

    // Discrete harmonic extension of the unit-charge boundary profile
    // 1/|r - c|. Interior values solve K h = -(K g0) restricted to interior
    // rows, so K_full * harm vanishes on every interior row and the lift
    // carries no volume source of its own.
    harm_.assign(nn, 0.0);
    if (closure_ == HartreeClosure::monopole) {
      SparseSymMatrix stiffness_full = assemble_stiffness(mesh, false);
      Vec3 c = mesh.box.center();
      std::vector<double> g0(nn, 0.0);
      for (int v = 0; v < nn; ++v)
        if (mesh.is_boundary[v]) g0[v] = 1.0 / norm(mesh.nodes[v] - c);
      std::vector<double> kg0(nn);
      stiffness_full.apply(g0, kg0);
      std::vector<double> rhs(ni), hint(ni);
      for (int i = 0; i < ni; ++i) rhs[i] = -kg0[mesh.dof_to_node[i]];
      SolveReport rep = solve_sparse_symmetric(stiffness_int_, rhs, hint, kSolveTol);
      require_converged(rep, "harmonic closure");
      harm_ = g0;
      for (int i = 0; i < ni; ++i) harm_[mesh.dof_to_node[i]] = hint[i];
    }
    std::vector<double> mh(nn);
    mass_full_.apply(harm_, mh);
    mass_harm_.resize(ni);
    for (int i = 0; i < ni; ++i) mass_harm_[i] = mh[mesh.dof_to_node[i]];
  }

  const Mesh& mesh() const { return *mesh_; }
  HartreeClosure closure() const { return closure_; }
  const NodalField& harmonic_closure() const { return harm_; }

  // Integral of the P1 interpolant of nodal values rho (interior dofs).
  double charge(const NodalField& rho) const {
    check_interior(rho, "charge");
    return vdot(mass_one_, rho);
  }

  // Zero-boundary part of the potential: K v0 = 4 pi M rho on interior rows.
  // Returned on all nodes with zeros on the boundary.
  NodalField zero_boundary_potential(const NodalField& rho) const {
    check_interior(rho, "zero_boundary_potential");
    const int nn = mesh_->n_nodes();
    const int ni = mesh_->interior_dof_count();
    std::vector<double> rho_ext(nn, 0.0);
    for (int i = 0; i < ni; ++i) rho_ext[mesh_->dof_to_node[i]] = rho[i];
    std::vector<double> mrho(nn);
    mass_full_.apply(rho_ext, mrho);
    std::vector<double> rhs(ni), v0(ni);
    for (int i = 0; i < ni; ++i)
      rhs[i] = 4.0 * kPi * mrho[mesh_->dof_to_node[i]];
    SolveReport rep = solve_sparse_symmetric(stiffness_int_, rhs, v0, kSolveTol);
    require_converged(rep, "potential");
    NodalField full(nn, 0.0);
    for (int i = 0; i < ni; ++i) full[mesh_->dof_to_node[i]] = v0[i];
    return full;
  }

  // Symmetrised pairing of two raw interior fields. Accepts signed inputs so
  // differences of densities can be probed directly.
  double coulomb_form(const NodalField& u, const NodalField& v) const {
    check_interior(u, "coulomb_form");
    check_interior(v, "coulomb_form");
    NodalField v0 = zero_boundary_potential(u);
    double core = mass_pair_interior(v0, v);
    double qu = vdot(mass_one_, u), qv = vdot(mass_one_, v);
    double hu = vdot(mass_harm_, u), hv = vdot(mass_harm_, v);
    return core + 0.5 * (qu * hv + qv * hu);
  }

  // Mass-weighted nodal coefficients of the Hartree term: with w from here,
  // u^T diag(w) v equals coulomb_form(rho, u*v) for the nodal product u*v.
  // That identity is what lets the discrete energy bookkeeping track the
  // scheme without quadrature slippage, so the Hamiltonian applies the
  // Hartree potential through this diagonal rather than a reassembled matrix.
  NodalField hartree_diagonal(const NodalField& rho) const {
    check_interior(rho, "hartree_diagonal");
    const int nn = mesh_->n_nodes();
    const int ni = mesh_->interior_dof_count();
    NodalField vt = zero_boundary_potential(rho);
    double q = vdot(mass_one_, rho);
    double h = vdot(mass_harm_, rho);
    for (int v = 0; v < nn; ++v) vt[v] += 0.5 * q * harm_[v] + 0.5 * h;
    std::vector<double> mv(nn);
    mass_full_.apply(vt, mv);
    NodalField w(ni);
    for (int i = 0; i < ni; ++i) w[i] = mv[mesh_->dof_to_node[i]];
    return w;
  }

  double mass_pair_interior(const NodalField& full, const NodalField& interior) const {
    std::vector<double> mf(mesh_->n_nodes());
    mass_full_.apply(full, mf);
    double s = 0.0;
    for (int i = 0; i < mesh_->interior_dof_count(); ++i)
      s += mf[mesh_->dof_to_node[i]] * interior[i];
    return s;
  }

  const SparseSymMatrix& mass_full() const { return mass_full_; }

  static constexpr double kPi = 3.141592653589793238462643383279502884;
  static constexpr double kSolveTol = 1e-12;

 private:
  void check_interior(const NodalField& f, const char* who) const {
    if ((int)f.size() != mesh_->interior_dof_count()) {
      char msg[128];
      std::snprintf(msg, sizeof msg, "%s: field has %zu entries, expected %d",
                    who, f.size(), mesh_->interior_dof_count());
      throw std::runtime_error(msg);
    }
  }

  static void require_converged(const SolveReport& rep, const char* stage) {
    if (!rep.converged) {
      char msg[160];
      std::snprintf(msg, sizeof msg,
                    "hartree %s solve did not converge: residual %.3e after %d iterations",
                    stage, rep.residual, rep.iterations);
      throw std::runtime_error(msg);
    }
  }

  const Mesh* mesh_;
  HartreeClosure closure_;
  SparseSymMatrix mass_full_;
  SparseSymMatrix stiffness_int_;
  NodalField harm_;        // all nodes: closure profile, harmonic inside
  NodalField mass_one_;    // interior rows of M_full * 1
  NodalField mass_harm_;   // interior rows of M_full * harm
};

// Nodal squares summed over the orbital set. The squared interpolant lies
// under the interpolated squares on every element, so total_charge sits at or
// above the squared-interpolant integral (which is 1 per normalised orbital)
// and approaches it from above under refinement.
inline DensityField compute_density(const HartreeContext& ctx,
                                    const std::vector<NodalField>& waves) {
  if (waves.empty())
    throw std::runtime_error("compute_density: empty orbital set");
  const int ni = ctx.mesh().interior_dof_count();
  DensityField rho;
  rho.values.assign(ni, 0.0);
  for (const NodalField& w : waves) {
    if ((int)w.size() != ni)
      throw std::runtime_error("compute_density: orbital size mismatch");
    for (int i = 0; i < ni; ++i) rho.values[i] += w[i] * w[i];
  }
  rho.total_charge = ctx.charge(rho.values);
  return rho;
}

// Potential of a density: zero-boundary solve plus the monopole closure
// scaled by the total charge. Boundary values equal Q/|r - c| by construction.
inline HartreePotential solve_hartree(const HartreeContext& ctx,
                                      const DensityField& rho) {
  HartreePotential pot;
  pot.values = ctx.zero_boundary_potential(rho.values);
  pot.source_charge = ctx.charge(rho.values);
  const NodalField& harm = ctx.harmonic_closure();
  for (size_t v = 0; v < pot.values.size(); ++v)
    pot.values[v] += pot.source_charge * harm[v];
  return pot;
}

// Pairing <V(a), b> in its symmetrised form; agrees with the literal
// mass-pairing of solve_hartree's potential whenever a == b.
inline double hartree_bilinear(const HartreeContext& ctx, const DensityField& a,
                               const DensityField& b) {
  return ctx.coulomb_form(a.values, b.values);
}

}  // namespace ksgflow
