#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ksgflow/hartree.hpp"
#include "ksgflow/oracle.hpp"
#include "ksgflow/presets.hpp"

using namespace ksgflow;

namespace {

// Tiny atom fixture: 27 interior dofs, small enough that every dense
// identity below is instant.
const Mesh& tiny_mesh() {
  static Mesh mesh = build_graded_box_mesh(Box{}, uniform_grading(5.0), 130);
  return mesh;
}

const NuclearConfig& atom_nuclei() {
  static NuclearConfig nuclei{{2.0, {0.0, 0.0, 0.0}}};
  return nuclei;
}

}  // namespace

TEST_CASE("all eigenvalues sum to the operator trace", "[oracle]") {
  DenseLinearSystem sys = densify_linear_system(tiny_mesh(), atom_nuclei());
  GeneralizedEig eig = linear_spectrum(tiny_mesh(), atom_nuclei());
  REQUIRE((int)eig.eigenvalues.size() == tiny_mesh().interior_dof_count());

  double sum = 0.0;
  for (double ev : eig.eigenvalues) sum += ev;
  double tr = sys.m.llt().solve(sys.h).trace();
  REQUIRE(std::abs(sum - tr) <= 1e-12 * std::abs(tr));

  // the same sum through the orbital-count interface
  double all = linear_ground_energy(tiny_mesh(), atom_nuclei(),
                                    tiny_mesh().interior_dof_count());
  REQUIRE(all == Catch::Approx(sum).epsilon(1e-13));
}

TEST_CASE("free particle ground energy refines toward the box value from above",
          "[oracle]") {
  Mesh coarse = build_graded_box_mesh(Box{}, uniform_grading(4.0), 216);
  Mesh fine = build_graded_box_mesh(Box{}, uniform_grading(2.0), 1331);
  REQUIRE(coarse.interior_dof_count() == 64);
  REQUIRE(fine.interior_dof_count() == 729);

  const double analytic = 3.0 * M_PI * M_PI / 800.0;
  double lc = linear_ground_energy(coarse, {}, 1);
  double lf = linear_ground_energy(fine, {}, 1);
  REQUIRE(lc == Catch::Approx(0.043241076120).margin(1e-9));
  REQUIRE(lf == Catch::Approx(0.038540826044).margin(1e-9));
  REQUIRE(lf > analytic);
  REQUIRE(lc > lf);
}

TEST_CASE("atom ground energy at the validation mesh is pinned", "[oracle]") {
  Preset he = make_preset("he");
  Mesh mesh = he.build_mesh(he.linear_check_budget);
  REQUIRE(mesh.interior_dof_count() == 1100);
  double e = linear_ground_energy(mesh, he.nuclei, 1);
  REQUIRE(e == Catch::Approx(-1.075615525140).margin(1e-9));
}

TEST_CASE("dense and orbital count guards throw", "[oracle]") {
  Mesh big = build_graded_box_mesh(Box{}, uniform_grading(0.8), 20000);
  REQUIRE(big.interior_dof_count() > 5000);
  REQUIRE_THROWS_AS(densify_linear_system(big, atom_nuclei()),
                    std::invalid_argument);

  REQUIRE_THROWS_AS(linear_ground_energy(tiny_mesh(), atom_nuclei(), 0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(linear_ground_energy(tiny_mesh(), atom_nuclei(), 28),
                    std::invalid_argument);
}

TEST_CASE("random orthonormal sets never beat the spectral ground energy",
          "[oracle]") {
  DenseLinearSystem sys = densify_linear_system(tiny_mesh(), atom_nuclei());
  double ground = linear_ground_energy(tiny_mesh(), atom_nuclei(), 3);
  SparseSymMatrix mass = assemble_mass(tiny_mesh());

  double min_excess = std::numeric_limits<double>::infinity();
  for (unsigned seed = 1; seed <= 50; ++seed) {
    WaveFunctionSet set = make_initial_waves(
        tiny_mesh(), mass, InitialPreset::random, 3, atom_nuclei(), seed);
    min_excess =
        std::min(min_excess, linear_rayleigh_sum(sys, set) - ground);
  }
  REQUIRE(min_excess >= -1e-10);
  // random sets are nowhere near the minimizer on this mesh
  REQUIRE(min_excess > 0.5);
}

TEST_CASE("flow reproduces the atom spectrum from a random start", "[oracle]") {
  Preset he = make_preset("he");
  Mesh mesh = he.build_mesh(he.linear_check_budget);
  LinearValidationConfig vc;
  vc.dt = he.linear_check_dt;
  vc.sweeps = he.linear_check_sweeps;
  LinearValidation rep = validate_linear_flow(mesh, he.nuclei, 1, vc);
  INFO(rep.text);
  REQUIRE(rep.completed);
  REQUIRE(rep.energy_ok);
  REQUIRE(rep.span_tested);
  REQUIRE(rep.span_ok);
  REQUIRE(rep.passed);
  REQUIRE(rep.text.find("verdict: pass") != std::string::npos);
}

TEST_CASE("flow reproduces the molecule pair spectrum up to rotation",
          "[oracle]") {
  Preset lih = make_preset("lih");
  Mesh mesh = lih.build_mesh(lih.linear_check_budget);
  REQUIRE(mesh.interior_dof_count() == 96);
  LinearValidationConfig vc;
  vc.dt = lih.linear_check_dt;
  vc.sweeps = lih.linear_check_sweeps;
  LinearValidation rep = validate_linear_flow(mesh, lih.nuclei, 2, vc);
  INFO(rep.text);
  REQUIRE(rep.completed);
  REQUIRE(rep.oracle_energy == Catch::Approx(-2.436653309918).margin(1e-9));
  REQUIRE(rep.spectral_gap == Catch::Approx(0.221603).margin(1e-4));
  REQUIRE(rep.energy_ok);
  REQUIRE(rep.span_ok);
  REQUIRE(rep.max_principal_angle <= 1e-4);
  REQUIRE(rep.passed);
}

TEST_CASE("eigenbasis and random starts agree on the converged energy",
          "[oracle]") {
  Preset lih = make_preset("lih");
  Mesh mesh = lih.build_mesh(lih.linear_check_budget);
  const int n = mesh.interior_dof_count();
  GeneralizedEig eig = linear_spectrum(mesh, lih.nuclei);
  HamiltonianBuilder builder(mesh, lih.nuclei, false);

  WaveFunctionSet start;
  start.mass = &builder.mass();
  for (int k = 0; k < 2; ++k) {
    NodalField w(n);
    for (int i = 0; i < n; ++i) w[i] = eig.eigenvectors(i, k);
    start.waves.push_back(std::move(w));
  }
  FlowConfig cfg;
  cfg.dt = lih.linear_check_dt;
  cfg.inner_tol = 1e-10;
  cfg.inner_max = 4000;
  cfg.hartree_enabled = false;
  cfg.n_orbitals = 2;
  FlowState state = make_flow_state(builder, std::move(start));
  for (int s = 0; s < lih.linear_check_sweeps; ++s)
    sweep(builder, state, cfg.dt, cfg);

  LinearValidationConfig vc;
  vc.dt = lih.linear_check_dt;
  vc.sweeps = lih.linear_check_sweeps;
  LinearValidation rep = validate_linear_flow(mesh, lih.nuclei, 2, vc);
  REQUIRE(rep.completed);
  REQUIRE(std::abs(rep.flow_energy - state.energy) <= 1e-8);
}

TEST_CASE("grid sampling reads the nodal interpolant", "[oracle]") {
  Mesh mesh = build_graded_box_mesh(Box{{-3, -3, -3}, {3, 3, 3}},
                                    uniform_grading(0.5), 2250);
  NodalField ones(mesh.interior_dof_count(), 1.0);
  GridDensity g = sample_density_on_grid(mesh, ones, 8);
  REQUIRE(g.values.size() == 512);
  // deep interior samples hit the constant exactly; cells against the
  // boundary see the Dirichlet zero blend in
  double center = g.values[(std::size_t)4 * 64 + 4 * 8 + 4];
  double corner = g.values[0];
  REQUIRE(center == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(corner < 1.0);
}

TEST_CASE("direct coulomb quadrature matches separated point charges",
          "[oracle]") {
  GridDensity g;
  g.box = Box{{-4, -4, -4}, {4, 4, 4}};
  g.cells_per_axis = 16;
  g.values.assign(16 * 16 * 16, 0.0);
  REQUIRE(hartree_brute_force(g) == 0.0);

  // two unit charges three box units apart: the cross term is 2/d and the
  // self terms vanish with the diagonal cells skipped
  double w = g.cell_volume();
  g.values[(std::size_t)7 * 256 + 7 * 16 + 4] = 1.0 / w;
  g.values[(std::size_t)7 * 256 + 7 * 16 + 10] = 1.0 / w;
  double d = norm(g.cell_center(4, 7, 7) - g.cell_center(10, 7, 7));
  REQUIRE(d == Catch::Approx(3.0).margin(1e-14));
  REQUIRE(hartree_brute_force(g) == Catch::Approx(2.0 / 3.0).margin(1e-12));
}

TEST_CASE("direct coulomb quadrature confirms the bilinear form on a bump",
          "[oracle]") {
  Mesh mesh = build_graded_box_mesh(Box{{-3, -3, -3}, {3, 3, 3}},
                                    uniform_grading(0.5), 2250);
  const int n = mesh.interior_dof_count();
  REQUIRE(n == 1331);

  DensityField rho;
  rho.values.resize(n);
  for (int i = 0; i < n; ++i) {
    Vec3 p = mesh.nodes[mesh.dof_to_node[i]];
    rho.values[i] = std::exp(-2.0 * dot(p, p));
  }
  HartreeContext ctx(mesh);
  rho.total_charge = ctx.charge(rho.values);

  double fem = hartree_bilinear(ctx, rho, rho);
  REQUIRE(fem == Catch::Approx(3.880645998).epsilon(1e-8));

  GridDensity g = sample_density_on_grid(mesh, rho.values, 20);
  double brute = hartree_brute_force(g);
  // independent quadratures with different discretization errors; the grid
  // sum undercounts by the skipped self cells
  REQUIRE(std::abs(brute - fem) / fem < 0.10);
}

TEST_CASE("quadrature grid guards reject bad sizes", "[oracle]") {
  GridDensity g;
  g.box = Box{};
  g.cells_per_axis = 21;
  g.values.assign(21 * 21 * 21, 0.0);
  REQUIRE_THROWS_AS(hartree_brute_force(g), std::invalid_argument);

  g.cells_per_axis = 4;
  g.values.assign(63, 0.0);
  REQUIRE_THROWS_AS(hartree_brute_force(g), std::invalid_argument);
}
