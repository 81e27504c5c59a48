#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "immersed/aggregation.hpp"
#include "immersed/assembly.hpp"
#include "immersed/stability.hpp"

using namespace immersed;

namespace {

const QuadConfig kQuad = QuadConfig::for_degree(2);

ActiveMesh classify(const BackgroundMesh& mesh, const LevelSet& geo) { return classify_elements(mesh, geo, kQuad); }

// Value of the finite element function with the given coefficients at x.
double evaluate(const FeSpace& space, const Eigen::VectorXd& c, Point x) {
  const auto& mesh = space.mesh();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    auto dofs = space.element_dofs(e);
    if (dofs.empty()) continue;
    Cell cell = mesh.cell(e);
    Point u = cell.upper();
    if (x.x < cell.lower.x - 1e-14 || x.x > u.x + 1e-14 || x.y < cell.lower.y - 1e-14 || x.y > u.y + 1e-14) continue;
    ShapeData sd;
    space.eval(e, x, sd);
    double v = 0;
    for (int k = 0; k < sd.n; ++k) v += c[dofs[k]] * sd.v[k];
    return v;
  }
  throw std::runtime_error("point outside the active mesh");
}

// Two rows of unit elements over [0,2]x[0,2]; the top row is cut at y = 1.3.
struct TwoRoots {
  BackgroundMesh mesh{{0, 0}, {2, 2}, 2, 2};
  ActiveMesh active = classify(mesh, LevelSet::plane({0, 1}, 1.3));
};

}  // namespace

TEST_CASE("space dof counts") {
  auto everything = LevelSet::plane({1, 0}, 5.0);
  CHECK(build_space(classify(BackgroundMesh::unit_square(2), everything), 1).num_dofs() == 9);
  CHECK(build_space(classify(BackgroundMesh::unit_square(4), everything), 2).num_dofs() == 81);

  // the top-right element only touches the domain along two edges
  auto notched = LevelSet::combine(BooleanOp::Union, LevelSet::plane({1, 0}, 0.5), LevelSet::plane({0, 1}, 0.5));
  auto active = classify(BackgroundMesh::unit_square(2), notched);
  CHECK(active.cls[3] == ElementClass::Exterior);
  auto space = build_space(active, 1);
  CHECK(space.num_dofs() == 8);
  CHECK(space.node_dof(2, 2) == -1);
  CHECK(space.element_dofs(3).empty());
  // lexicographic numbering
  CHECK(space.node_dof(0, 0) == 0);
  CHECK(space.node_dof(2, 0) == 2);
  CHECK(space.node_dof(0, 2) == 6);

  CHECK_THROWS(build_space(active, 3));
}

TEST_CASE("reference shape functions") {
  auto v = shape_eval(1, {0, 0}, 0, 0);
  CHECK(v == std::vector<double>{1, 0, 0, 0});
  v = shape_eval(1, {2, 0}, 0, 0);
  CHECK(v[0] == doctest::Approx(-1));
  CHECK(v[1] == doctest::Approx(2));
  CHECK(v[2] == doctest::Approx(0));
  CHECK(v[3] == doctest::Approx(0));
  CHECK_THROWS(shape_eval(1, {0, 0}, 2, 1));

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1.5, 2.5);
  for (int p : {1, 2})
    for (int t = 0; t < 50; ++t) {
      Point xi{U(rng), U(rng)};
      auto val = shape_eval(p, xi, 0, 0);
      double s = 0;
      for (double x : val) s += x;
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
      for (auto [dx, dy] : {std::pair{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}}) {
        double ds = 0;
        for (double x : shape_eval(p, xi, dx, dy)) ds += x;
        CHECK(std::abs(ds) < 1e-10);
      }
    }

  // second x-derivative of the p=2 bubble along xi2 = 0.5 is -8/h^2
  auto mesh = BackgroundMesh::unit_square(4);
  auto space = build_space(classify(mesh, LevelSet::plane({1, 0}, 5.0)), 2);
  const double h = mesh.h();
  Cell c = mesh.cell(5);
  for (double t : {0.0, 0.3, 0.9, 1.7}) {
    auto d2 = space.shape(5, {c.lower.x + t * h, c.lower.y + 0.5 * h}, 2, 0);
    CHECK(d2[4] == doctest::Approx(-8.0 / (h * h)));
  }
}

TEST_CASE("aggregation extremes") {
  auto mesh = BackgroundMesh::unit_square(8);
  auto active = classify(mesh, LevelSet::circle({0.52, 0.47}, 0.31));

  auto none = aggregate(active, 0.0);
  CHECK(none.num_aggregates() == static_cast<int>(active.active.size()));
  for (int e : active.active) CHECK(none.chain[e] == 0);

  auto all = aggregate(active, 1.0);
  CHECK(all.num_aggregates() == static_cast<int>(active.interior.size()));
  for (int e : active.cut) {
    CHECK_FALSE(all.seed[e]);
    CHECK(all.chain[e] >= 1);
    auto path = all.path(e);
    CHECK(path.front() == e);
    CHECK(path.back() == all.root_of(e));
    CHECK(static_cast<int>(path.size()) == all.chain[e] + 1);
    for (std::size_t k = 1; k < path.size(); ++k) {
      auto nb = mesh.neighbors(path[k - 1]);
      CHECK(std::find(nb.begin(), nb.end(), path[k]) != nb.end());
    }
  }
  for (int a = 0; a < all.num_aggregates(); ++a) {
    int seeds = 0;
    for (int e : all.members[a]) seeds += all.seed[e];
    CHECK(seeds == 1);
    CHECK(active.cls[all.roots[a]] == ElementClass::Interior);
    if (a > 0) CHECK(all.roots[a] > all.roots[a - 1]);
  }

  // eta* between the extremes keeps the large cuts as seeds
  auto mid = aggregate(active, 0.5);
  for (int e : active.cut) CHECK(bool(mid.seed[e]) == (active.eta[e] > 0.5));
}

TEST_CASE("aggregation of a single cut element") {
  BackgroundMesh mesh({0, 0}, {2, 1}, 2, 1);
  auto active = classify(mesh, LevelSet::plane({1, 0}, 1.3));
  REQUIRE(active.cls[0] == ElementClass::Interior);
  REQUIRE(active.cls[1] == ElementClass::Cut);
  auto agg = aggregate(active, 1.0);
  CHECK(agg.num_aggregates() == 1);
  CHECK(agg.members[0].size() == 2);
  CHECK(agg.chain[1] == 1);
  CHECK(agg.parent[1] == 0);

  auto space = build_space(active, 1);
  auto dofs = classify_dofs(space, agg);
  CHECK(dofs.ip_dofs.size() == 2);
  for (int i : dofs.ip_dofs) {
    CHECK(space.dof_coord(i).x == doctest::Approx(2.0));
    CHECK(dofs.owner[i] == 0);
  }

  // the ill-posed node (2, 0) extends the root's bottom edge linearly
  auto cs = build_constraints(space, agg, dofs);
  int ip = space.node_dof(2, 0);
  auto row = cs.rows[ip];
  std::sort(row.begin(), row.end());
  REQUIRE(row.size() == 2);
  CHECK(row[0].first == space.node_dof(0, 0));
  CHECK(row[0].second == doctest::Approx(-1.0));
  CHECK(row[1].first == space.node_dof(1, 0));
  CHECK(row[1].second == doctest::Approx(2.0));
}

TEST_CASE("unreachable cut element") {
  auto geo = LevelSet::combine(BooleanOp::Union, LevelSet::plane({1, 0}, 0.3),
                               LevelSet::circle({0.85, 0.85}, 0.05));
  auto active = classify(BackgroundMesh::unit_square(4), geo);
  CHECK_THROWS_WITH_AS(aggregate(active, 1.0), doctest::Contains("15"), std::runtime_error);
}

TEST_CASE("dof classification and ownership") {
  auto everything = classify(BackgroundMesh::unit_square(3), LevelSet::plane({1, 0}, 5.0));
  auto space0 = build_space(everything, 2);
  auto d0 = classify_dofs(space0, aggregate(everything, 1.0));
  CHECK(d0.ip_dofs.empty());
  CHECK(d0.num_well_posed() == space0.num_dofs());

  TwoRoots t;
  auto agg = aggregate(t.active, 1.0);
  REQUIRE(agg.num_aggregates() == 2);
  CHECK(agg.root_of(2) == 0);
  CHECK(agg.root_of(3) == 1);
  auto space = build_space(t.active, 1);
  auto dofs = classify_dofs(space, agg);
  CHECK(dofs.ip_dofs.size() == 3);
  CHECK(dofs.owner[space.node_dof(0, 2)] == 0);
  CHECK(dofs.owner[space.node_dof(1, 2)] == 0);  // shared, lowest id wins
  CHECK(dofs.owner[space.node_dof(2, 2)] == 1);
  for (int i : dofs.wp_dofs) CHECK(dofs.owner[i] == -1);
}

TEST_CASE("constraint invariants") {
  for (int p : {1, 2}) {
    auto active = classify(BackgroundMesh::unit_square(8), LevelSet::circle({0.52, 0.47}, 0.31));
    auto space = build_space(active, p);
    auto agg = aggregate(active, 1.0);
    auto dofs = classify_dofs(space, agg);
    auto cs = build_constraints(space, agg, dofs);
    CHECK(cs.C.rows() == space.num_dofs());
    CHECK(cs.C.cols() == dofs.num_well_posed());
    for (int i = 0; i < space.num_dofs(); ++i) {
      double s = 0;
      for (auto [j, c] : cs.rows[i]) s += c;
      CHECK(std::abs(s - 1.0) < 1e-12);
      if (dofs.well_posed[i]) {
        REQUIRE(cs.rows[i].size() == 1);
        CHECK(cs.rows[i][0].first == i);
        CHECK(cs.rows[i][0].second == 1.0);
      }
    }
    Eigen::MatrixXd C(cs.C);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(C);
    CHECK(lu.rank() == C.cols());

    // global Q_p polynomials survive the extension
    ScalarField u = p == 1 ? ScalarField([](Point x) { return 1.0 + 2.0 * x.x - x.y + 3.0 * x.x * x.y; })
                           : ScalarField([](Point x) { return x.x * x.x * x.y * x.y - x.x * x.y + 0.5; });
    Eigen::VectorXd plain = interpolate(space, u), ext = interpolate(space, cs, u);
    CHECK((plain - ext).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::VectorXd ones = interpolate(space, cs, [](Point) { return 1.0; });
    CHECK((ones.array() - 1.0).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("chain length guard") {
  // a strip of cut elements hanging off a single interior column
  BackgroundMesh mesh({0, 0}, {6, 2}, 6, 2);
  auto geo = LevelSet::combine(BooleanOp::Union, LevelSet::plane({1, 0}, 1.0), LevelSet::plane({0, 1}, 0.5));
  auto active = classify(mesh, geo);
  auto agg = aggregate(active, 1.0);
  for (int i = 1; i < 6; ++i) CHECK(agg.chain[mesh.element_id(i, 0)] == i);
  auto space = build_space(active, 1);
  auto dofs = classify_dofs(space, agg);
  CHECK_NOTHROW(build_constraints(space, agg, dofs, 10));
  CHECK_THROWS(build_constraints(space, agg, dofs, 3));
}

TEST_CASE("nodal interpolation accuracy") {
  auto u = [](Point x) { return std::sin(std::numbers::pi * x.x) * std::sin(std::numbers::pi * x.y); };
  for (int n : {8, 16}) {
    auto mesh = BackgroundMesh::unit_square(n);
    auto space = build_space(classify(mesh, LevelSet::plane({1, 0}, 5.0)), 1);
    Eigen::VectorXd c = interpolate(space, u);
    const double h = mesh.h();
    double nodal = 0, mid = 0;
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) nodal = std::max(nodal, std::abs(evaluate(space, c, {i * h, j * h}) - u({i * h, j * h})));
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i < n; ++i) {
        Point x{(i + 0.5) * h, j * h};
        mid = std::max(mid, std::abs(evaluate(space, c, x) - u(x)));
      }
    CHECK(nodal < 1e-14);
    CHECK(mid <= h * h / 8 * std::numbers::pi * std::numbers::pi);
    CHECK(mid > 0.5 * h * h / 8 * std::numbers::pi * std::numbers::pi);
  }
}

TEST_CASE("extended stability of aggregated gradients") {
  StabilizationSpec stab;
  stab.mode = StabMode::AgFem;
  auto mesh = BackgroundMesh::unit_square(8);
  std::vector<double> c;
  for (double delta = 1e-1; delta > 1e-8 / 2; delta /= 10) {
    auto d = discretize(mesh, LevelSet::plane({1, 0}, 0.5 + delta * mesh.h()), 1, kQuad, stab);
    c.push_back(extended_control(d, stab));
  }
  auto [lo, hi] = std::minmax_element(c.begin(), c.end());
  CHECK(*lo > 0.0);
  CHECK(*hi / *lo < 2.0);
}
