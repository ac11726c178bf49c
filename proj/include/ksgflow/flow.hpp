#pragma once

// The gradient-flow time stepper. Each time step sweeps the orbitals in
// ascending order, Gauss-Seidel style; each orbital update solves a modified
// midpoint relation whose projection coefficients are frozen at the previous
// inner iterate, so every inner pass is one sparse symmetric solve. The
// midpoint coupling is what preserves the orthonormality of the orbital set
// exactly at inner-loop convergence and forces the total energy downhill
// regardless of step size; both properties are monitored per sweep and
// checked again by the test batteries.

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ksgflow/hamiltonian.hpp"
#include "ksgflow/hartree.hpp"
#include "ksgflow/linalg.hpp"
#include "ksgflow/mesh.hpp"
#include "ksgflow/sparse.hpp"

namespace ksgflow {

struct FlowConfig {
  double dt = 1e-1;       // fixed step size, ignored when adaptive is set
  bool adaptive = false;  // two-level rule keyed on the last energy drop
  double outer_tol = 1e-6;
  double inner_tol = 1e-8;
  int inner_max = 200;
  int max_steps = 2000;
  bool hartree_enabled = true;
  int n_orbitals = 1;
  bool monitor_descent = false;  // per-component energy bookkeeping (costly)
};

inline void validate(const FlowConfig& c) {
  if (!c.adaptive && !(c.dt > 0.0))
    throw std::invalid_argument("flow config: dt must be > 0");
  if (!(c.outer_tol > 0.0))
    throw std::invalid_argument("flow config: outer_tol must be > 0");
  if (!(c.inner_tol > 0.0))
    throw std::invalid_argument("flow config: inner_tol must be > 0");
  if (c.inner_max < 1)
    throw std::invalid_argument("flow config: inner_max must be >= 1");
  if (c.max_steps < 1)
    throw std::invalid_argument("flow config: max_steps must be >= 1");
  if (c.n_orbitals < 1)
    throw std::invalid_argument("flow config: n_orbitals must be >= 1");
}

// The paper-exact two-level step size switch: a large step while the energy
// still moves, a small one for the endgame. Boundary inclusive.
inline double adaptive_dt(double last_energy_drop) {
  return std::abs(last_energy_drop) >= 1e-2 ? 5e-2 : 5e-4;
}

// One accepted sweep. inner_iterations counts linear solves per orbital;
// scheme_residuals holds the mass-weighted residual of the converged update
// relation per orbital. The descent fields are filled only when the config
// asks for them: mixed_energies has one entry per partially updated
// configuration (n_orbitals + 1 values), midpoint_pairings the directional
// derivative each orbital's update is tested against.
struct StepRecord {
  int step = 0;
  double time = 0.0;
  double dt = 0.0;
  double energy = 0.0;
  double energy_drop = 0.0;  // energy before the sweep minus energy after
  double orthonormality = 0.0;
  std::vector<int> inner_iterations;
  std::vector<double> scheme_residuals;
  std::vector<double> mixed_energies;
  std::vector<double> midpoint_pairings;
};

struct FlowState {
  int step = 0;
  double time = 0.0;
  double energy = 0.0;
  double initial_energy = 0.0;
  WaveFunctionSet waves;
  std::vector<StepRecord> history;
  bool unconverged = false;
};

// Thrown when the per-orbital system matrix defeats the sparse solver. The
// shift is the mass coefficient 1/dt - c1/2 of that matrix; it crosses zero
// exactly at the resonant step size, which is the one way the update relation
// can lose solvability, so the value is the first thing worth reading.
struct ComponentSolveFailure : std::runtime_error {
  double shift;
  ComponentSolveFailure(const std::string& what, double shift_value)
      : std::runtime_error(what), shift(shift_value) {}
};

// Relative residual every per-orbital linear solve is driven to.
inline constexpr double kComponentSolveTol = 1e-12;

namespace detail {

// Coefficients of the linearized update relation for one orbital, taken at
// the midpoint of the previous iterate: c0sq the midpoint mass norm, c1 the
// midpoint energy pairing, and one projection weight per other orbital.
struct ComponentSystem {
  SparseSymMatrix matrix;
  NodalField rhs;
  double shift = 0.0;  // 1/dt - c1/2, the matrix's mass coefficient
  double c0sq = 0.0;
  double c1 = 0.0;
};

// Isolates the unknown endpoint x from the update relation
//   M (x - old) / dt = -c0sq H mid + c1 M mid + c0sq sum_l g_l M psi_l,
// mid = (old + x)/2, where the coefficients are evaluated at the midpoint of
// the iterate stored in mixed[k] and the l-sum runs over the other orbitals
// of the mixed configuration (already updated below k, previous above).
inline ComponentSystem build_component_system(const SparseSymMatrix& mass,
                                              const HamiltonianMatrix& ham,
                                              const std::vector<NodalField>& mixed,
                                              const NodalField& old_wave, int k,
                                              double dt) {
  const int n = mass.rows();
  NodalField mid(n);
  for (int i = 0; i < n; ++i) mid[i] = 0.5 * (old_wave[i] + mixed[k][i]);

  std::vector<double> h_mid = ham.matrix.apply(mid);
  std::vector<double> m_mid = mass.apply(mid);

  ComponentSystem sys;
  sys.c0sq = vdot(mid, m_mid);
  sys.c1 = vdot(mid, h_mid);
  sys.shift = 1.0 / dt - 0.5 * sys.c1;
  sys.matrix = linear_combination(sys.shift, mass, 0.5 * sys.c0sq, ham.matrix);

  // Right side: the old-endpoint half of the midpoint terms plus the
  // projections onto the other orbitals, accumulated nodally so the mass
  // matrix is applied once.
  NodalField span(n, 0.0);
  for (int l = 0; l < static_cast<int>(mixed.size()); ++l) {
    if (l == k) continue;
    double g = vdot(h_mid, mixed[l]);
    axpy(sys.c0sq * g, mixed[l], span);
  }
  sys.rhs = mass.apply(old_wave);
  std::vector<double> h_old = ham.matrix.apply(old_wave);
  std::vector<double> m_span = mass.apply(span);
  const double a = 1.0 / dt + 0.5 * sys.c1;
  for (int i = 0; i < n; ++i)
    sys.rhs[i] = a * sys.rhs[i] - 0.5 * sys.c0sq * h_old[i] + m_span[i];
  return sys;
}

// Mass-weighted norm of a weak-form residual: the residual vector lives in
// the dual space, so its natural size is through one mass solve.
inline double dual_mass_norm(const SparseSymMatrix& mass,
                             const std::vector<double>& r) {
  if (vnorm(r) == 0.0) return 0.0;
  std::vector<double> y;
  SolveReport rep = solve_sparse_symmetric(mass, r, y, 1e-10);
  if (!rep.converged)
    throw std::runtime_error("dual_mass_norm: mass solve did not converge");
  double s = vdot(r, y);
  return s > 0.0 ? std::sqrt(s) : 0.0;
}

// Audit string naming the mixed configuration a Hamiltonian was built from:
// which slots hold this step's updates, which hold the running inner iterate,
// which still hold the previous step. Orbital labels are 1-based.
inline std::string mixed_configuration_label(int step, int k, int j, int n_orb) {
  char head[32], tail[32], buf[160];
  if (k > 0)
    std::snprintf(head, sizeof head, "new 1..%d", k);
  else
    std::snprintf(head, sizeof head, "new -");
  if (k + 2 <= n_orb)
    std::snprintf(tail, sizeof tail, "old %d..%d", k + 2, n_orb);
  else
    std::snprintf(tail, sizeof tail, "old -");
  std::snprintf(buf, sizeof buf, "step %d inner %d: %s | iterate %d | %s", step,
                j, head, k + 1, tail);
  return buf;
}

}  // namespace detail

// Solves the linearized update relation for orbital k once: one sparse
// symmetric solve to relative residual 1e-12, warm-started from the current
// iterate. mixed[k] holds that iterate; old_wave the orbital's previous-step
// value. A solver failure carries the matrix's mass coefficient, since a
// resonant step size is the one condition that makes this system singular.
inline NodalField solve_component_linear_system(
    const SparseSymMatrix& mass, const HamiltonianMatrix& ham,
    const std::vector<NodalField>& mixed, const NodalField& old_wave, int k,
    double dt) {
  detail::ComponentSystem sys =
      detail::build_component_system(mass, ham, mixed, old_wave, k, dt);
  NodalField x;
  SolveReport rep = solve_sparse_symmetric(sys.matrix, sys.rhs, x,
                                           kComponentSolveTol, &mixed[k]);
  if (!rep.converged) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "component %d system solve failed (mass coefficient "
                  "1/dt - c1/2 = %.6e): residual %.3e after %d iterations",
                  k + 1, sys.shift, rep.residual, rep.iterations);
    throw ComponentSolveFailure(msg, sys.shift);
  }
  return x;
}

// Metadata of one converged orbital update. The updated wave itself lands in
// the caller's mixed configuration.
struct ComponentStep {
  int inner_iterations = 0;
  double last_increment = 0.0;   // mass norm of the final inner increment
  double scheme_residual = 0.0;  // update relation re-checked at acceptance
  double midpoint_pairing = 0.0;  // <H mid, (new - old)/dt> at acceptance
};

// Fixed-point loop for orbital k. Starts from the previous-step value,
// rebuilds the Hamiltonian at every iterate (the density moves with the
// orbital), and accepts once the iterate stalls below inner_tol in the mass
// norm AND the update relation, re-evaluated with coefficients at the
// accepted iterate, closes to within ten times that. The second check is
// what the orthonormality and energy guarantees actually rest on; the
// Hamiltonian built for it is reused for the next pass if it fails, so each
// iteration assembles exactly once.
//
// At step sizes well past the gradient-flow time scale the plain iteration
// can orbit instead of contract: the first map target can land far from the
// start, and iterates wander through regions where the system matrix passes
// near singular. The map is still contractive close to the solution, so the
// cure is to approach along the solution branch. When the plain loop fails
// (runaway growth of the map distance, a mid-loop solve failure, or a
// half-fraction relaxation retry failing too), the update relation is solved
// along a ramp of intermediate step sizes, each stage warm-starting the next,
// until the full-step relation converges from a near-branch guess. Only the
// full-step relation is accepted, and only after its residual, re-evaluated
// with coefficients at the accepted iterate, closes to within ten times
// inner_tol. A solve failure at the very first iterate of the plain loop
// cannot be cured this way, since that system depends only on the step data:
// it propagates as the resonant-step failure the caller retries with a
// shrunken step.
inline ComponentStep step_component(const HamiltonianBuilder& builder,
                                    std::vector<NodalField>& mixed,
                                    const NodalField& old_wave, int k, double dt,
                                    const FlowConfig& cfg, int step_index) {
  const SparseSymMatrix& mass = builder.mass();
  const int n_orb = static_cast<int>(mixed.size());

  int used = 0;
  double increment = std::numeric_limits<double>::infinity();
  ComponentStep out;
  bool accepted = false;

  auto stalled = [&]() {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "component %d inner iteration stalled: increment %.3e after "
                  "%d iterations (tolerance %.0e)",
                  k + 1, increment, used, cfg.inner_tol);
    return std::runtime_error(msg);
  };

  // One relaxation-guarded fixed-point run for the relation at dt_eff,
  // starting from anchor. Runaway (map distance an order of magnitude past
  // the attempt's first) and mid-run solve failures restart from the anchor
  // with half the correction fraction; two restarts exhaust the stage. An
  // attempt that merely orbits, its map distance not contracting across
  // successive iteration windows, abandons the stage outright: orbits have
  // shown up at every relaxation fraction, so the fix is a closer warm
  // start, not a smaller fraction. final stages gate acceptance on the
  // re-evaluated relation residual; non-final stages stop at the
  // map-distance criterion, their result is only a warm start. Returns
  // false when the stage gives up.
  auto run_stage = [&](const NodalField& anchor, double dt_eff, bool final,
                       bool spec_path) -> bool {
    mixed[k] = anchor;
    HamiltonianMatrix ham = builder.build(
        mixed, detail::mixed_configuration_label(step_index, k, used, n_orb));
    const double inf = std::numeric_limits<double>::infinity();
    double damping = 1.0;
    double attempt_first = 0.0;
    bool at_start = true;
    int attempt_its = 0;
    double window_min = inf, window_prev = inf;
    while (true) {
      if (used >= cfg.inner_max) throw stalled();
      ++used;
      NodalField x;
      bool solve_failed = false;
      try {
        x = solve_component_linear_system(mass, ham, mixed, old_wave, k, dt_eff);
      } catch (const ComponentSolveFailure&) {
        if (at_start && spec_path) throw;
        if (at_start || damping <= 0.25) return false;
        solve_failed = true;
      }
      if (!solve_failed) {
        NodalField delta = x;
        axpy(-1.0, mixed[k], delta);
        increment = std::sqrt(l2_inner(delta, delta, mass));
        if (attempt_first == 0.0) attempt_first = increment;
        ++attempt_its;
        window_min = std::min(window_min, increment);
        if (attempt_its % 12 == 0) {
          if (window_min >= 0.75 * window_prev) return false;
          window_prev = window_min;
          window_min = inf;
        }
        if (increment <= 10.0 * attempt_first) {
          if (damping == 1.0)
            mixed[k] = std::move(x);
          else
            axpy(damping, delta, mixed[k]);
          at_start = false;

          HamiltonianMatrix ham_next = builder.build(
              mixed,
              detail::mixed_configuration_label(step_index, k, used, n_orb));
          if (increment <= cfg.inner_tol) {
            if (!final) return true;
            detail::ComponentSystem sys = detail::build_component_system(
                mass, ham_next, mixed, old_wave, k, dt_eff);
            std::vector<double> residual = sys.matrix.apply(mixed[k]);
            axpy(-1.0, sys.rhs, residual);
            double res_norm = detail::dual_mass_norm(mass, residual);
            // The relation's residual carries a 1/dt factor, so at very
            // small steps the linear solver's relative-tolerance floor can
            // sit above the nominal gate no matter how exact the fixed point
            // is. Accept at that floor too; the gate still binds wherever
            // the step size leaves it reachable.
            const double floor = 10.0 * kComponentSolveTol *
                                 detail::dual_mass_norm(mass, sys.rhs);
            if (res_norm <= 10.0 * cfg.inner_tol || res_norm <= floor) {
              out.inner_iterations = used;
              out.last_increment = increment;
              out.scheme_residual = res_norm;
              const int n = mass.rows();
              NodalField mid(n);
              for (int i = 0; i < n; ++i)
                mid[i] = 0.5 * (old_wave[i] + mixed[k][i]);
              std::vector<double> h_mid = ham_next.matrix.apply(mid);
              NodalField step_dir = mixed[k];
              axpy(-1.0, old_wave, step_dir);
              out.midpoint_pairing = vdot(h_mid, step_dir) / dt_eff;
              accepted = true;
              return true;
            }
          }
          ham = std::move(ham_next);
          continue;
        }
        if (damping <= 0.25) return false;
      }
      damping *= 0.5;
      attempt_first = 0.0;
      attempt_its = 0;
      window_min = inf;
      window_prev = inf;
      mixed[k] = anchor;
      at_start = true;
      ham = builder.build(
          mixed, detail::mixed_configuration_label(step_index, k, used, n_orb));
    }
  };

  if (run_stage(old_wave, dt, true, true)) return out;

  // Arithmetic ramp of intermediate step sizes, refined until the chain of
  // warm starts carries the iterate into the full-step basin.
  for (int stages = 2; stages <= 16; stages *= 2) {
    NodalField guess = old_wave;
    bool chain_ok = true;
    for (int s = 1; s <= stages; ++s) {
      double dt_eff = dt * static_cast<double>(s) / stages;
      if (!run_stage(guess, dt_eff, s == stages, false)) {
        chain_ok = false;
        break;
      }
      guess = mixed[k];
    }
    if (chain_ok && accepted) return out;
  }
  throw stalled();
}

// One full pass over the orbitals in ascending order. Nothing in the state
// moves until every orbital update has succeeded, so a failed sweep leaves
// the state exactly as it was and the caller may retry with a different step
// size. Appends the step record to the history.
inline StepRecord sweep(const HamiltonianBuilder& builder, FlowState& state,
                        double dt, const FlowConfig& cfg) {
  const int n_orb = static_cast<int>(state.waves.waves.size());
  std::vector<NodalField> mixed = state.waves.waves;

  StepRecord rec;
  rec.step = state.step + 1;
  rec.time = state.time + dt;
  rec.dt = dt;
  const double energy_before = state.energy;
  if (cfg.monitor_descent) rec.mixed_energies.push_back(energy_before);

  for (int k = 0; k < n_orb; ++k) {
    ComponentStep cs = step_component(builder, mixed, state.waves.waves[k], k,
                                      dt, cfg, rec.step);
    rec.inner_iterations.push_back(cs.inner_iterations);
    rec.scheme_residuals.push_back(cs.scheme_residual);
    if (cfg.monitor_descent) {
      rec.midpoint_pairings.push_back(cs.midpoint_pairing);
      WaveFunctionSet partial{mixed, &builder.mass()};
      rec.mixed_energies.push_back(builder.total_energy(partial).total);
    }
  }

  state.waves.waves = std::move(mixed);
  state.step = rec.step;
  state.time = rec.time;
  state.energy = builder.total_energy(state.waves).total;
  rec.energy = state.energy;
  rec.energy_drop = energy_before - state.energy;
  rec.orthonormality = orthonormality_error(state.waves);
  state.history.push_back(rec);
  return rec;
}

// Wraps an orbital set into a fresh trajectory state. The flow preserves
// orthonormality but cannot create it, so the input must already sit on the
// constraint manifold.
inline FlowState make_flow_state(const HamiltonianBuilder& builder,
                                 WaveFunctionSet waves) {
  waves.mass = &builder.mass();
  double ortho = orthonormality_error(waves);
  if (!(ortho <= 1e-10)) {
    char msg[128];
    std::snprintf(msg, sizeof msg,
                  "make_flow_state: initial set departs from orthonormality "
                  "by %.3e; run gram_schmidt first",
                  ortho);
    throw std::invalid_argument(msg);
  }
  FlowState state;
  state.waves = std::move(waves);
  state.energy = builder.total_energy(state.waves).total;
  state.initial_energy = state.energy;
  return state;
}

// Drives sweeps until the energy settles to outer_tol or max_steps runs out
// (the trajectory is then flagged unconverged). A sweep that dies on a
// resonant system matrix is retried once at nine tenths of the step size;
// the schedule resumes afterwards. Adaptive runs take the large step first,
// before any energy drop exists to key on.
inline FlowState run(const HamiltonianBuilder& builder, WaveFunctionSet initial,
                     const FlowConfig& cfg) {
  validate(cfg);
  if (static_cast<int>(initial.waves.size()) != cfg.n_orbitals)
    throw std::invalid_argument("run: orbital count does not match config");
  if (cfg.hartree_enabled != (builder.hartree() != nullptr))
    throw std::invalid_argument(
        "run: hartree_enabled disagrees with how the Hamiltonian was built");

  FlowState state = make_flow_state(builder, std::move(initial));
  double dt = cfg.adaptive ? 5e-2 : cfg.dt;

  for (int s = 0; s < cfg.max_steps; ++s) {
    StepRecord rec;
    try {
      rec = sweep(builder, state, dt, cfg);
    } catch (const ComponentSolveFailure&) {
      rec = sweep(builder, state, 0.9 * dt, cfg);
    }
    if (std::abs(rec.energy_drop) <= cfg.outer_tol) return state;
    if (cfg.adaptive) dt = adaptive_dt(rec.energy_drop);
  }
  state.unconverged = true;
  return state;
}

// Worst-case monitors over a recorded trajectory, each against the bound the
// scheme is supposed to keep. Violations are reported as signed excesses, so
// zero or negative means the bound held.
struct TrajectoryCheck {
  int steps = 0;
  bool energy_monotone = true;
  bool orthonormal = true;
  bool residual_ok = true;
  bool descent_ok = true;
  double worst_energy_rise = -std::numeric_limits<double>::infinity();
  double worst_orthonormality = 0.0;
  double worst_scheme_residual = 0.0;
  double worst_descent_excess = -std::numeric_limits<double>::infinity();
};

inline TrajectoryCheck check_trajectory_invariants(const FlowState& state,
                                                   const FlowConfig& cfg) {
  TrajectoryCheck out;
  out.steps = static_cast<int>(state.history.size());
  double prev_energy = state.initial_energy;
  for (const StepRecord& rec : state.history) {
    const double slack = 1e-10 * (1.0 + std::abs(prev_energy));
    const double rise = rec.energy - prev_energy;
    out.worst_energy_rise = std::max(out.worst_energy_rise, rise - slack);
    if (rise > slack) out.energy_monotone = false;
    prev_energy = rec.energy;

    out.worst_orthonormality =
        std::max(out.worst_orthonormality, rec.orthonormality);
    if (rec.orthonormality > 100.0 * cfg.inner_tol) out.orthonormal = false;

    for (double r : rec.scheme_residuals) {
      out.worst_scheme_residual = std::max(out.worst_scheme_residual, r);
      if (r > 10.0 * cfg.inner_tol) out.residual_ok = false;
    }

    // Per-component descent: each orbital's half-step energy rate must stay
    // below the directional derivative its update was accepted against.
    if (!rec.mixed_energies.empty()) {
      const double scale =
          1e-8 * (1.0 + std::abs(rec.mixed_energies.front())) / (2.0 * rec.dt);
      for (size_t k = 0; k + 1 < rec.mixed_energies.size(); ++k) {
        double lhs = (rec.mixed_energies[k + 1] - rec.mixed_energies[k]) /
                     (2.0 * rec.dt);
        double excess = lhs - rec.midpoint_pairings[k] - scale;
        out.worst_descent_excess = std::max(out.worst_descent_excess, excess);
        if (excess > 0.0) out.descent_ok = false;
      }
    }
  }
  return out;
}

enum class InitialPreset { he, lih, ch4, unit_vectors, random };

namespace detail {

// Picks n interior nodes no two of which share a tetrahedron, scanning dofs
// in order and skipping any node adjacent to an earlier pick. Deterministic:
// ties never arise because the scan order is fixed.
inline std::vector<int> element_disjoint_dofs(const Mesh& mesh, int n) {
  std::vector<char> forbidden(mesh.n_nodes(), 0);
  std::vector<int> picked;
  picked.reserve(n);
  for (int d = 0; d < mesh.interior_dof_count() && (int)picked.size() < n; ++d) {
    int node = mesh.dof_to_node[d];
    if (forbidden[node]) continue;
    picked.push_back(d);
    for (const auto& tet : mesh.tets) {
      bool touches = false;
      for (int v : tet) touches = touches || v == node;
      if (touches)
        for (int v : tet) forbidden[v] = 1;
    }
  }
  if (static_cast<int>(picked.size()) < n)
    throw std::runtime_error(
        "make_initial_waves: mesh too coarse to place element-disjoint "
        "starting points");
  return picked;
}

// Nodal samples of exp(-2|r - center| + shift) on the interior dofs.
inline NodalField exponential_seed(const Mesh& mesh, Vec3 center, double shift) {
  NodalField w(mesh.interior_dof_count());
  for (int d = 0; d < mesh.interior_dof_count(); ++d) {
    Vec3 p = mesh.nodes[mesh.dof_to_node[d]];
    w[d] = std::exp(-2.0 * norm(p - center) + shift);
  }
  return w;
}

}  // namespace detail

// Starting orbital sets. The atom preset is a radial exponential around the
// first nucleus; the molecule presets start from coefficient unit vectors at
// element-disjoint interior nodes (so they begin orthogonal), the methane
// one swapping the first orbital for the atom exponential. Every set leaves
// here orthonormalized in the mass inner product.
inline WaveFunctionSet make_initial_waves(const Mesh& mesh,
                                          const SparseSymMatrix& mass,
                                          InitialPreset preset, int n_orbitals,
                                          const NuclearConfig& nuclei = {},
                                          unsigned seed = 0) {
  if (n_orbitals < 1)
    throw std::invalid_argument("make_initial_waves: need at least 1 orbital");
  const Vec3 first_center =
      nuclei.empty() ? mesh.box.center() : nuclei.front().position;

  WaveFunctionSet set;
  set.mass = &mass;

  auto unit_waves = [&](int count, int offset_into_set) {
    std::vector<int> dofs = detail::element_disjoint_dofs(mesh, count);
    for (int i = 0; i < count; ++i) {
      NodalField w(mesh.interior_dof_count(), 0.0);
      w[dofs[i]] = 1.0;
      set.waves[offset_into_set + i] = std::move(w);
    }
  };

  switch (preset) {
    case InitialPreset::he:
      if (n_orbitals != 1)
        throw std::invalid_argument("make_initial_waves: he preset has 1 orbital");
      set.waves.resize(1);
      set.waves[0] = detail::exponential_seed(mesh, first_center, 0.5);
      break;
    case InitialPreset::lih:
      if (n_orbitals != 2)
        throw std::invalid_argument("make_initial_waves: lih preset has 2 orbitals");
      set.waves.resize(2);
      unit_waves(2, 0);
      break;
    case InitialPreset::ch4:
      if (n_orbitals != 5)
        throw std::invalid_argument("make_initial_waves: ch4 preset has 5 orbitals");
      set.waves.resize(5);
      set.waves[0] = detail::exponential_seed(mesh, first_center, 0.0);
      unit_waves(4, 1);
      break;
    case InitialPreset::unit_vectors:
      set.waves.resize(n_orbitals);
      unit_waves(n_orbitals, 0);
      break;
    case InitialPreset::random: {
      std::mt19937 rng(seed);
      std::normal_distribution<double> gauss(0.0, 1.0);
      set.waves.resize(n_orbitals);
      for (auto& w : set.waves) {
        w.resize(mesh.interior_dof_count());
        for (double& v : w) v = gauss(rng);
      }
      break;
    }
  }

  gram_schmidt(set);
  return set;
}

}  // namespace ksgflow
