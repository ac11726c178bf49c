#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <random>

#include "ksgflow/assembly.hpp"
#include "ksgflow/linalg.hpp"
#include "ksgflow/mesh.hpp"

using namespace ksgflow;

namespace {

struct Problem {
  Mesh mesh;
  SparseSymMatrix mass;
  SparseSymMatrix stiffness;
};

Problem uniform_box_problem(double extent, double h, int budget) {
  Box box{{-extent, -extent, -extent}, {extent, extent, extent}};
  Problem p{build_graded_box_mesh(box, uniform_grading(h), budget), {}, {}};
  p.mass = assemble_mass(p.mesh);
  p.stiffness = assemble_stiffness(p.mesh);
  return p;
}

std::vector<double> random_vector(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

}  // namespace

TEST_CASE("cg solves the SPD mass system to the requested residual", "[linalg]") {
  Problem p = uniform_box_problem(2.0, 0.5, 1500);
  std::vector<double> b = random_vector(p.mass.rows(), 7u);
  std::vector<double> x;
  SolveReport rep = solve_sparse_symmetric(p.mass, b, x, 1e-12);
  REQUIRE(rep.converged);
  CHECK(rep.algorithm == "cg");
  CHECK(rep.residual <= 1e-12 * vnorm(b) * (1.0 + 1e-9));

  // warm start from the solution finishes immediately
  std::vector<double> x2;
  SolveReport rep2 = solve_sparse_symmetric(p.mass, b, x2, 1e-12, &x);
  REQUIRE(rep2.converged);
  CHECK(rep2.iterations <= 2);
}

TEST_CASE("indefinite shifted system falls back to minres", "[linalg]") {
  Problem p = uniform_box_problem(2.0, 0.5, 1500);
  GeneralizedEig eig = dense_generalized_eig(to_dense(p.stiffness), to_dense(p.mass));
  REQUIRE(eig.eigenvalues.size() >= 4);
  // Shift into the gap between the (simple) ground state and the first
  // excited cluster. The excited levels come in near-degenerate groups, so
  // a midpoint inside one of those groups would sit at distance ~1e-13 from
  // an eigenvalue and make the shifted matrix numerically singular.
  double sigma = 0.5 * (eig.eigenvalues[0] + eig.eigenvalues[1]);
  SparseSymMatrix shifted = linear_combination(1.0, p.stiffness, -sigma, p.mass);

  std::vector<double> b = random_vector(shifted.rows(), 8u);
  std::vector<double> x;
  SolveReport rep = solve_sparse_symmetric(shifted, b, x, 1e-12);
  REQUIRE(rep.converged);
  CHECK(rep.algorithm == "minres");
  CHECK(rep.residual <= 1e-12 * vnorm(b) * (1.0 + 1e-9));
}

TEST_CASE("dense generalized eigensolve is self-consistent", "[linalg]") {
  Problem p = uniform_box_problem(2.0, 1.0, 300);
  NuclearConfig nuclei{{2.0, {0.3, 0.1, -0.2}}};
  SparseSymMatrix mv = assemble_external_potential_matrix(p.mesh, nuclei);
  SparseSymMatrix h = linear_combination(0.5, p.stiffness, 1.0, mv);

  Eigen::MatrixXd hd = to_dense(h), md = to_dense(p.mass);
  GeneralizedEig eig = dense_generalized_eig(hd, md);
  const int n = h.rows();
  REQUIRE(static_cast<int>(eig.eigenvalues.size()) == n);

  for (int i = 1; i < n; ++i) REQUIRE(eig.eigenvalues[i] >= eig.eigenvalues[i - 1]);

  double scale = hd.cwiseAbs().maxCoeff();
  for (int i = 0; i < std::min(n, 6); ++i) {
    Eigen::VectorXd v = eig.eigenvectors.col(i);
    double res = (hd * v - eig.eigenvalues[i] * (md * v)).norm();
    REQUIRE(res <= 1e-10 * scale * (1.0 + std::abs(eig.eigenvalues[i])));
  }
  Eigen::MatrixXd gram = eig.eigenvectors.transpose() * md * eig.eigenvectors;
  CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-12);

  // eigenvalue sum equals trace of M^{-1} H
  double tr = md.ldlt().solve(hd).trace();
  double esum = 0.0;
  for (double lam : eig.eigenvalues) esum += lam;
  CHECK(esum == Catch::Approx(tr).epsilon(1e-8));
}

TEST_CASE("dense eigensolver guards", "[linalg]") {
  Eigen::MatrixXd big = Eigen::MatrixXd::Identity(5001, 5001);
  CHECK_THROWS_WITH(dense_generalized_eig(big, big),
                    Catch::Matchers::ContainsSubstring("5000"));
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(4, 4);
  Eigen::MatrixXd bad = -Eigen::MatrixXd::Identity(4, 4);
  CHECK_THROWS_AS(dense_generalized_eig(a, bad), std::runtime_error);
}

TEST_CASE("free-box ground state converges to the separable eigenvalue from above",
          "[linalg]") {
  // kinetic-only operator on [-10,10]^3; lowest mode value is 3*pi^2/800
  const double exact = 0.037011016504085094;
  Problem p = uniform_box_problem(10.0, 2.0, 1400);
  SparseSymMatrix half_k = linear_combination(0.5, p.stiffness, 0.0, p.stiffness);
  GeneralizedEig eig = dense_generalized_eig(to_dense(half_k), to_dense(p.mass));
  double lam = eig.eigenvalues[0];
  std::printf("box ground state: discrete %.12g vs exact %.12g (rel err %.3g)\n",
              lam, exact, (lam - exact) / exact);
  REQUIRE(lam > exact);
  CHECK((lam - exact) / exact < 0.06);  // measured 4.1% at this resolution
  CHECK(lam == Catch::Approx(0.038540826044).epsilon(1e-9));
}

TEST_CASE("variational bound: random orthonormal sets sit above the spectrum sum",
          "[linalg]") {
  Problem p = uniform_box_problem(2.0, 1.0, 300);
  NuclearConfig nuclei{{1.0, {0.0, 0.0, 0.0}}};
  SparseSymMatrix mv = assemble_external_potential_matrix(p.mesh, nuclei);
  SparseSymMatrix h = linear_combination(0.5, p.stiffness, 1.0, mv);
  Eigen::MatrixXd hd = to_dense(h), md = to_dense(p.mass);
  GeneralizedEig eig = dense_generalized_eig(hd, md);

  const int n = h.rows(), N = 3;
  double ground = eig.eigenvalues[0] + eig.eigenvalues[1] + eig.eigenvalues[2];

  std::mt19937_64 rng(99);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd w(n, N);
    for (int j = 0; j < N; ++j)
      for (int i = 0; i < n; ++i) w(i, j) = dist(rng);
    // M-orthonormalize through the Gram Cholesky factor
    Eigen::MatrixXd gram = w.transpose() * md * w;
    w = w * gram.llt().matrixL().toDenseMatrix().inverse().transpose();
    double rayleigh = (w.transpose() * hd * w).trace();
    REQUIRE(rayleigh >= ground - 1e-10 * (1.0 + std::abs(ground)));
  }
}
