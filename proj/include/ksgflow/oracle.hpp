#ifndef KSGFLOW_ORACLE_HPP
#define KSGFLOW_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ksgflow/assembly.hpp"
#include "ksgflow/flow.hpp"
#include "ksgflow/hamiltonian.hpp"
#include "ksgflow/linalg.hpp"
#include "ksgflow/mesh.hpp"

namespace ksgflow {

// Brute-force references the iterative solver is judged against. Everything
// here goes through dense factorizations or direct quadrature and shares
// nothing with the flow path beyond the raw element assembly.

// Interior-dof dense matrices of the orbital operator without the density
// term (half stiffness plus external potential) and of the mass form.
struct DenseLinearSystem {
  Eigen::MatrixXd h;
  Eigen::MatrixXd m;
};

inline DenseLinearSystem densify_linear_system(const Mesh& mesh,
                                               const NuclearConfig& nuclei) {
  const int n = mesh.interior_dof_count();
  if (n > 5000)
    throw std::invalid_argument("densify_linear_system: " + std::to_string(n) +
                                " dofs exceed the dense guard of 5000");
  DenseLinearSystem sys;
  sys.h = 0.5 * to_dense(assemble_stiffness(mesh)) +
          to_dense(assemble_external_potential_matrix(mesh, nuclei));
  sys.m = to_dense(assemble_mass(mesh));
  return sys;
}

inline GeneralizedEig linear_spectrum(const Mesh& mesh,
                                      const NuclearConfig& nuclei) {
  DenseLinearSystem sys = densify_linear_system(mesh, nuclei);
  return dense_generalized_eig(sys.h, sys.m);
}

// Exact minimum of the orbital energy sum over mass-orthonormal sets when
// the density term is off: the sum of the lowest eigenvalues.
inline double linear_ground_energy(const Mesh& mesh,
                                   const NuclearConfig& nuclei,
                                   int n_orbitals) {
  GeneralizedEig eig = linear_spectrum(mesh, nuclei);
  if (n_orbitals < 1 || n_orbitals > (int)eig.eigenvalues.size())
    throw std::invalid_argument(
        "linear_ground_energy: orbital count " + std::to_string(n_orbitals) +
        " outside 1.." + std::to_string(eig.eigenvalues.size()));
  double sum = 0.0;
  for (int i = 0; i < n_orbitals; ++i) sum += eig.eigenvalues[i];
  return sum;
}

// Orbital energy sum of an arbitrary mass-orthonormal set against the dense
// operator; the variational bound says this never drops below the ground
// energy.
inline double linear_rayleigh_sum(const DenseLinearSystem& sys,
                                  const WaveFunctionSet& set) {
  double sum = 0.0;
  for (const NodalField& w : set.waves) {
    Eigen::Map<const Eigen::VectorXd> v(w.data(), (int)w.size());
    sum += v.dot(sys.h * v);
  }
  return sum;
}

// Sizing of a linear validation run. The drive is a fixed number of sweeps
// rather than a residual-based stop: with the density term off, every
// orthonormal basis of an invariant subspace is a fixed point of the sweep
// map, and near that family the Gram error carries a slowly amplified mode
// fed by solver noise. Energy drops therefore stagnate and then creep long
// before anything diverges, so "iterate until drops vanish" either stops
// early or runs into the creep. A sweep count placed after span alignment
// has contracted and before the noise amplification leaves the floor is
// reliable across seeds; the presets carry counts chosen that way.
struct LinearValidationConfig {
  double dt = 0.2;
  int sweeps = 300;
  double inner_tol = 1e-10;
  int inner_max = 4000;
  unsigned seed = 1;
};

struct LinearValidation {
  int n_orbitals = 0;
  int dofs = 0;
  int steps = 0;
  bool completed = false;
  double flow_energy = 0.0;
  double oracle_energy = 0.0;
  double energy_error = 0.0;
  double energy_tol = 0.0;
  bool energy_ok = false;
  double spectral_gap = 0.0;
  bool span_tested = false;
  double max_principal_angle = 0.0;
  bool span_ok = false;
  bool passed = false;
  std::string text;  // one line per check, human readable
};

namespace detail {

inline void report_line(std::string& text, const char* fmt, ...) {
  char line[256];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(line, sizeof line, fmt, ap);
  va_end(ap);
  text += line;
  text += '\n';
}

}  // namespace detail

// Drives the flow with the density term disabled from a random orthonormal
// start and measures it against the dense eigensolve: the energies must
// agree, and the final span must match the lowest eigenspace. The span is
// compared through principal angles, never orbital by orbital, because the
// limit is unique only up to an orthonormal transform. Failures come back
// in the report, not as exceptions.
inline LinearValidation validate_linear_flow(const Mesh& mesh,
                                             const NuclearConfig& nuclei,
                                             int n_orbitals,
                                             const LinearValidationConfig& vc) {
  LinearValidation rep;
  rep.n_orbitals = n_orbitals;
  rep.dofs = mesh.interior_dof_count();

  GeneralizedEig eig = linear_spectrum(mesh, nuclei);
  for (int i = 0; i < n_orbitals; ++i) rep.oracle_energy += eig.eigenvalues[i];

  FlowConfig cfg;
  cfg.dt = vc.dt;
  cfg.inner_tol = vc.inner_tol;
  cfg.inner_max = vc.inner_max;
  cfg.hartree_enabled = false;
  cfg.n_orbitals = n_orbitals;
  HamiltonianBuilder builder(mesh, nuclei, false);
  WaveFunctionSet start = make_initial_waves(
      mesh, builder.mass(), InitialPreset::random, n_orbitals, nuclei, vc.seed);

  FlowState state = make_flow_state(builder, std::move(start));
  try {
    for (int s = 0; s < vc.sweeps; ++s) sweep(builder, state, vc.dt, cfg);
  } catch (const std::exception& e) {
    rep.steps = state.step;
    detail::report_line(rep.text, "flow drive failed at sweep %d: %s",
                        state.step + 1, e.what());
    return rep;
  }
  rep.steps = state.step;
  rep.completed = true;
  rep.flow_energy = state.energy;
  rep.energy_error = std::abs(rep.flow_energy - rep.oracle_energy);
  rep.energy_tol = 1e-6 * (1.0 + std::abs(rep.oracle_energy));
  rep.energy_ok = rep.energy_error <= rep.energy_tol;
  detail::report_line(rep.text,
                      "energy: flow %.12g vs oracle %.12g, error %.3e (tol %.3e) %s",
                      rep.flow_energy, rep.oracle_energy, rep.energy_error,
                      rep.energy_tol, rep.energy_ok ? "ok" : "FAIL");

  rep.spectral_gap = rep.dofs > n_orbitals
                         ? eig.eigenvalues[n_orbitals] -
                               eig.eigenvalues[n_orbitals - 1]
                         : std::numeric_limits<double>::infinity();
  if (rep.spectral_gap < 1e-8) {
    detail::report_line(rep.text,
                        "spectral gap %.3e < 1e-8: eigenspace ill defined, "
                        "span test skipped",
                        rep.spectral_gap);
  } else {
    // Cross Gram in the mass inner product between the two bases; its
    // singular values are the cosines of the principal angles. The flow
    // orbitals are normalized individually first: their norms drift at
    // roundoff scale over a long drive, and an inflated norm can push a
    // cosine above one, where the clamp would hide genuine span error.
    rep.span_tested = true;
    std::vector<double> mv(rep.dofs);
    std::vector<double> inv_norm(n_orbitals);
    for (int i = 0; i < n_orbitals; ++i) {
      builder.mass().apply(state.waves.waves[i], mv);
      inv_norm[i] = 1.0 / std::sqrt(vdot(state.waves.waves[i], mv));
    }
    Eigen::MatrixXd cross(n_orbitals, n_orbitals);
    for (int j = 0; j < n_orbitals; ++j) {
      NodalField col(rep.dofs);
      for (int i = 0; i < rep.dofs; ++i) col[i] = eig.eigenvectors(i, j);
      builder.mass().apply(col, mv);
      for (int i = 0; i < n_orbitals; ++i)
        cross(i, j) = vdot(state.waves.waves[i], mv) * inv_norm[i];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross);
    double cos_min =
        std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
    rep.max_principal_angle = std::acos(cos_min);
    rep.span_ok = rep.max_principal_angle <= 1e-4;
    detail::report_line(rep.text,
                        "span: gap %.3e, max principal angle %.3e (tol 1e-4) %s",
                        rep.spectral_gap, rep.max_principal_angle,
                        rep.span_ok ? "ok" : "FAIL");
  }

  rep.passed =
      rep.completed && rep.energy_ok && (!rep.span_tested || rep.span_ok);
  detail::report_line(rep.text, "verdict: %s after %d sweeps",
                      rep.passed ? "pass" : "FAIL", rep.steps);
  return rep;
}

// Cell-centred density samples on a uniform lattice over the box; the
// direct-quadrature reference below consumes nothing else.
struct GridDensity {
  Box box;
  int cells_per_axis = 0;
  std::vector<double> values;  // x fastest, then y, then z

  double cell_volume() const {
    double v = 1.0;
    for (int d = 0; d < 3; ++d)
      v *= (box.hi[d] - box.lo[d]) / cells_per_axis;
    return v;
  }
  Vec3 cell_center(int i, int j, int k) const {
    Vec3 p;
    int idx[3] = {i, j, k};
    for (int d = 0; d < 3; ++d) {
      double h = (box.hi[d] - box.lo[d]) / cells_per_axis;
      p[d] = box.lo[d] + (idx[d] + 0.5) * h;
    }
    return p;
  }
};

inline GridDensity sample_density_on_grid(const Mesh& mesh,
                                          const NodalField& density,
                                          int cells_per_axis) {
  GridDensity g;
  g.box = mesh.box;
  g.cells_per_axis = cells_per_axis;
  g.values.resize((std::size_t)cells_per_axis * cells_per_axis *
                  cells_per_axis);
  std::size_t idx = 0;
  for (int k = 0; k < cells_per_axis; ++k)
    for (int j = 0; j < cells_per_axis; ++j)
      for (int i = 0; i < cells_per_axis; ++i)
        g.values[idx++] =
            interpolate_interior_field(mesh, density, g.cell_center(i, j, k));
  return g;
}

// Direct double-sum quadrature of the Coulomb double integral of a density
// against itself. Quadratic in the cell count, hence the hard size guard.
// The singular diagonal is handled by skipping the self cell, which under-
// counts the true integral by an O(h^2) self-interaction slice; the users
// of this reference compare at the 10 percent level.
inline double hartree_brute_force(const GridDensity& rho) {
  const int n = rho.cells_per_axis;
  if (n < 1 || n > 20)
    throw std::invalid_argument("hartree_brute_force: grid must be 1..20 cells per axis");
  const std::size_t total = (std::size_t)n * n * n;
  if (rho.values.size() != total)
    throw std::invalid_argument("hartree_brute_force: sample count does not match the grid");

  std::vector<Vec3> centers(total);
  std::size_t idx = 0;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) centers[idx++] = rho.cell_center(i, j, k);

  const double w = rho.cell_volume();
  double sum = 0.0;
  for (std::size_t a = 0; a < total; ++a) {
    if (rho.values[a] == 0.0) continue;
    double row = 0.0;
    for (std::size_t b = 0; b < total; ++b) {
      if (b == a || rho.values[b] == 0.0) continue;
      row += rho.values[b] / norm(centers[a] - centers[b]);
    }
    sum += rho.values[a] * row;
  }
  return sum * w * w;
}

}  // namespace ksgflow

#endif
