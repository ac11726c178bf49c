#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <map>
#include <set>

#include "ksgflow/mesh.hpp"

using namespace ksgflow;

namespace {

GradingFunction radial_test_grading() {
  // quadratic bowl on [-2,2]^3, fine near the origin
  return {"radial_test", 0.2, [](Vec3 p) { return 0.2 + dot(p, p) / 16.0; }};
}

GradingFunction atom_style_grading() {
  // the single-atom grading used by the default presets, on [-10,10]^3
  return {"atom", 0.2, [](Vec3 p) { return dot(p, p) / 400.0 + 0.2; }};
}

}  // namespace

TEST_CASE("uniform unit box at generous budget gives the minimal 3x3x3 lattice",
          "[mesh]") {
  Box box{{0, 0, 0}, {1, 1, 1}};
  Mesh mesh = build_graded_box_mesh(box, uniform_grading(1.0), 1000);
  CHECK(mesh.n_nodes() == 27);
  CHECK(mesh.n_tets() == 48);
  CHECK(mesh.interior_dof_count() == 1);
  CHECK(mesh.nodes[mesh.dof_to_node[0]].x == Catch::Approx(0.5));
}

TEST_CASE("tet volumes are positive and partition the box", "[mesh]") {
  Box box{{-2, -2, -2}, {2, 2, 2}};
  Mesh mesh = build_graded_box_mesh(box, radial_test_grading(), 6000);
  long double total = 0.0L;
  for (int t = 0; t < mesh.n_tets(); ++t) {
    double v = mesh.tet_volume(t);
    REQUIRE(v > 0.0);
    total += v;
  }
  double box_vol = 64.0;
  CHECK(std::abs(static_cast<double>(total) - box_vol) <= 1e-10 * box_vol);
}

TEST_CASE("mesh is conforming: internal faces shared by exactly two tets", "[mesh]") {
  Box box{{-2, -2, -2}, {2, 2, 2}};
  Mesh mesh = build_graded_box_mesh(box, radial_test_grading(), 3000);
  std::map<std::array<int, 3>, int> faces;
  for (const auto& e : mesh.tets)
    for (int skip = 0; skip < 4; ++skip) {
      std::array<int, 3> f;
      int w = 0;
      for (int v = 0; v < 4; ++v)
        if (v != skip) f[w++] = e[v];
      std::sort(f.begin(), f.end());
      ++faces[f];
    }
  for (const auto& [f, count] : faces) {
    bool on_boundary = mesh.is_boundary[f[0]] && mesh.is_boundary[f[1]] &&
                       mesh.is_boundary[f[2]];
    if (count == 1) {
      // a face used once must be a boundary face
      REQUIRE(on_boundary);
    } else {
      REQUIRE(count == 2);
    }
  }
  // every interior node appears in some tet
  std::set<int> used;
  for (const auto& e : mesh.tets) used.insert(e.begin(), e.end());
  for (int node : mesh.dof_to_node) REQUIRE(used.count(node) == 1);
}

TEST_CASE("axis spacing tracks the grading within a factor of two at full budget",
          "[mesh]") {
  Box box{{-2, -2, -2}, {2, 2, 2}};
  GradingFunction g = radial_test_grading();
  Mesh mesh = build_graded_box_mesh(box, g, 6000);

  const auto& gx = mesh.axis[0];
  // cell containing the origin
  for (std::size_t i = 0; i + 1 < gx.size(); ++i) {
    if (gx[i] <= 0.0 && 0.0 <= gx[i + 1]) {
      double spacing = gx[i + 1] - gx[i];
      double want = g.h({0, 0, 0});
      CHECK(spacing >= 0.5 * want);
      CHECK(spacing <= 2.0 * want);
    }
  }
  // outermost cell along the axis
  double spacing = gx[gx.size() - 1] - gx[gx.size() - 2];
  double want = g.h({0.5 * (gx[gx.size() - 1] + gx[gx.size() - 2]), 0, 0});
  CHECK(spacing >= 0.5 * want);
  CHECK(spacing <= 2.0 * want);

  auto [lo, hi] = mesh.edge_length_range();
  std::printf("radial_test mesh: %d nodes, %d tets, edge lengths [%g, %g]\n",
              mesh.n_nodes(), mesh.n_tets(), lo, hi);
  CHECK(lo > 0.0);
}

TEST_CASE("atom-style grading at the standard budget gives the pinned dof count",
          "[mesh]") {
  Box box{{-10, -10, -10}, {10, 10, 10}};
  Mesh mesh = build_graded_box_mesh(box, atom_style_grading(), 8000);
  CHECK(mesh.n_nodes() <= 8000);
  CHECK(mesh.interior_dof_count() == 5832);  // 19 cells per axis
  auto [lo, hi] = mesh.edge_length_range();
  std::printf("atom mesh at budget 8000: %d interior dofs, edges [%g, %g]\n",
              mesh.interior_dof_count(), lo, hi);
}

TEST_CASE("mesh build is deterministic", "[mesh]") {
  Box box{{-10, -10, -10}, {10, 10, 10}};
  Mesh a = build_graded_box_mesh(box, atom_style_grading(), 3000);
  Mesh b = build_graded_box_mesh(box, atom_style_grading(), 3000);
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    REQUIRE(a.nodes[i].x == b.nodes[i].x);
    REQUIRE(a.nodes[i].y == b.nodes[i].y);
    REQUIRE(a.nodes[i].z == b.nodes[i].z);
  }
  REQUIRE(a.tets == b.tets);
}

TEST_CASE("mesh budget below the minimal lattice fails loudly", "[mesh]") {
  Box box{{0, 0, 0}, {1, 1, 1}};
  CHECK_THROWS_WITH(build_graded_box_mesh(box, uniform_grading(1.0), 26),
                    Catch::Matchers::ContainsSubstring("27"));
}

TEST_CASE("grading inconsistent with its declared floor fails loudly", "[mesh]") {
  Box box{{0, 0, 0}, {1, 1, 1}};
  GradingFunction bad{"bad", 0.5, [](Vec3) { return 0.1; }};
  CHECK_THROWS_WITH(build_graded_box_mesh(box, bad, 1000),
                    Catch::Matchers::ContainsSubstring("h_min"));
}

TEST_CASE("point location returns the containing tet with clean barycentrics",
          "[mesh]") {
  Box box{{-2, -2, -2}, {2, 2, 2}};
  Mesh mesh = build_graded_box_mesh(box, radial_test_grading(), 2000);

  // interior sample: weights form a convex combination reproducing the point
  Vec3 p{0.37, -0.81, 1.03};
  TetLocation loc = mesh.locate(p);
  REQUIRE(loc.tet >= 0);
  double sum = 0.0;
  Vec3 rec{0, 0, 0};
  for (int v = 0; v < 4; ++v) {
    CHECK(loc.bary[v] >= 0.0);
    sum += loc.bary[v];
    rec = rec + loc.bary[v] * mesh.nodes[mesh.tets[loc.tet][v]];
  }
  CHECK(sum == Catch::Approx(1.0).margin(1e-12));
  CHECK(norm(rec - p) <= 1e-12);

  // querying a lattice node puts all weight on that node
  int node = mesh.dof_to_node[mesh.interior_dof_count() / 2];
  TetLocation at_node = mesh.locate(mesh.nodes[node]);
  double best = 0.0;
  int best_v = -1;
  for (int v = 0; v < 4; ++v)
    if (at_node.bary[v] > best) {
      best = at_node.bary[v];
      best_v = v;
    }
  REQUIRE(best_v >= 0);
  CHECK(mesh.tets[at_node.tet][best_v] == node);
  CHECK(best == Catch::Approx(1.0).margin(1e-12));

  CHECK_THROWS_AS(mesh.locate({5.0, 0.0, 0.0}), std::invalid_argument);
}
