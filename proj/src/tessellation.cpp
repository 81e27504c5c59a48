#include <algorithm>
#include <cmath>

#include "immersed/quadrature.hpp"

namespace immersed {

double polygon_area(const std::vector<Point>& poly) {
  double a = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) a += cross(poly[k], poly[(k + 1) % poly.size()]);
  return 0.5 * std::abs(a);
}

namespace {

// Outward normals of the cell sides, side k joining corner k to corner k+1.
constexpr Point kSideNormal[4] = {{0.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}};

Point unit_normal(Point a, Point b) {
  Point t = b - a;
  double len = norm(t);
  return {t.y / len, -t.x / len};
}

// Normal of ab oriented so that it points away from `inside_ref`.
Segment oriented(Point a, Point b, Point inside_ref) {
  Point n = unit_normal(a, b);
  Point mid = 0.5 * (a + b);
  if (dot(n, mid - inside_ref) < 0.0) n = -1.0 * n;
  return {a, b, n};
}

// Root on side k; the coordinate fixed by the side is copied exactly.
Point side_root(const std::array<Point, 4>& c, const std::array<double, 4>& s, int k) {
  int l = (k + 1) % 4;
  double t = s[k] / (s[k] - s[l]);
  Point p = c[k] + t * (c[l] - c[k]);
  if (k % 2 == 0)
    p.y = c[k].y;
  else
    p.x = c[k].x;
  return p;
}

bool on_common_side(Point a, Point b, const Cell& cell) {
  Point u = cell.upper();
  return (a.x == cell.lower.x && b.x == cell.lower.x) || (a.x == u.x && b.x == u.x) ||
         (a.y == cell.lower.y && b.y == cell.lower.y) || (a.y == u.y && b.y == u.y);
}

}  // namespace

std::vector<Segment> zero_side_segments(const Cell& cell, const LevelSet& geo, double snap_tol) {
  std::vector<Segment> out;
  auto c = cell.corners();
  for (int k = 0; k < 4; ++k) {
    Point a = c[k], b = c[(k + 1) % 4], mid = 0.5 * (a + b);
    if (snap(geo(a), snap_tol) == 0.0 && snap(geo(b), snap_tol) == 0.0 && snap(geo(mid), snap_tol) == 0.0 &&
        dot(geo.gradient(mid), kSideNormal[k]) > 0.0)
      out.push_back({a, b, kSideNormal[k]});
  }
  return out;
}

Tessellation tessellate(const Cell& cell, const LevelSet& geo, double snap_tol) {
  Tessellation t;
  auto c = cell.corners();
  std::array<double, 4> s;
  std::array<bool, 4> out;
  int n_out = 0;
  for (int k = 0; k < 4; ++k) {
    s[k] = snap(geo(c[k]), snap_tol);
    out[k] = s[k] > 0.0;
    n_out += out[k];
  }

  if (n_out == 0) {
    t.pieces.push_back({c.begin(), c.end()});
    t.segments = zero_side_segments(cell, geo, snap_tol);
    return t;
  }
  if (n_out == 4) return t;

  bool saddle = (out[1] && out[3] && !out[0] && !out[2]) || (out[0] && out[2] && !out[1] && !out[3]);
  if (saddle) {
    std::array<Point, 4> r;
    for (int k = 0; k < 4; ++k) r[k] = side_root(c, s, k);
    bool center_in = snap(geo(cell.center()), snap_tol) <= 0.0;
    for (int k = 0; k < 4; ++k) {
      int prev = (k + 3) % 4;
      if (!out[k]) {
        t.pieces.push_back({c[k], r[k], r[prev]});
        if (!center_in) t.segments.push_back(oriented(r[k], r[prev], c[k]));
      } else if (center_in) {
        // away from the interior means towards the outside corner
        Segment seg = oriented(r[prev], r[k], c[k]);
        seg.normal = -1.0 * seg.normal;
        t.segments.push_back(seg);
      }
    }
    if (center_in) t.pieces.push_back({r[0], r[1], r[2], r[3]});
  } else {
    std::vector<Point> poly;
    for (int k = 0; k < 4; ++k) {
      int l = (k + 1) % 4;
      if (!out[k]) poly.push_back(c[k]);
      if ((s[k] < 0.0 && s[l] > 0.0) || (s[k] > 0.0 && s[l] < 0.0)) poly.push_back(side_root(c, s, k));
    }
    Point centroid{0.0, 0.0};
    for (auto& p : poly) centroid = centroid + p;
    centroid = (1.0 / poly.size()) * centroid;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      Point a = poly[k], b = poly[(k + 1) % poly.size()];
      if (!on_common_side(a, b, cell)) t.segments.push_back(oriented(a, b, centroid));
    }
    t.pieces.push_back(std::move(poly));
  }

  // zero-area leftovers describe a boundary that touches the cell from outside
  std::erase_if(t.pieces, [](const std::vector<Point>& p) { return !(polygon_area(p) > 0.0); });
  if (t.pieces.empty()) t.segments.clear();
  std::erase_if(t.segments, [&](const Segment& sg) { return !(norm(sg.b - sg.a) > 1e-14 * cell.size); });
  return t;
}

CutQuadrature cut_quadrature(const Cell& element, const LevelSet& geo, const QuadConfig& cfg) {
  cfg.validate();
  double tol = kSnapRelTol * element.size;
  CutQuadrature q;
  // leaves stopped early can be as large as the element, so their rules are
  // raised to integrate products of two shape functions exactly
  std::vector<Segment> segments, coarse_segments;
  for (const SubCell& sc : quadtree_subdivide(element, geo, cfg.max_depth, tol, true)) {
    if (sc.status == CellStatus::Outside) continue;
    if (sc.status == CellStatus::Inside) {
      auto r = tensor_gauss(sc.cell, cfg.order);
      q.bulk.insert(q.bulk.end(), r.begin(), r.end());
      auto z = zero_side_segments(sc.cell, geo, tol);
      segments.insert(segments.end(), z.begin(), z.end());
      continue;
    }
    const bool coarse = sc.status == CellStatus::CutAffine;
    const int n = coarse ? std::max(cfg.order + 1, 2 * cfg.order - 1) : cfg.order + 1;
    Tessellation t = tessellate(sc.cell, geo, tol);
    for (const auto& poly : t.pieces)
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        auto r = triangle_gauss(poly[0], poly[k], poly[k + 1], n);
        for (const auto& qp : r)
          if (qp.w > 0.0) q.bulk.push_back(qp);
      }
    auto& dst = coarse ? coarse_segments : segments;
    dst.insert(dst.end(), t.segments.begin(), t.segments.end());
  }
  auto emit = [&](const std::vector<Segment>& list, int order) {
    const auto& g = gauss_legendre(order);
    for (const Segment& sg : list) {
      double len = norm(sg.b - sg.a);
      for (std::size_t i = 0; i < g.x.size(); ++i)
        q.boundary.push_back({sg.a + g.x[i] * (sg.b - sg.a), g.w[i] * len, sg.normal});
    }
  };
  emit(segments, cfg.boundary_order);
  emit(coarse_segments, std::max(cfg.boundary_order, 2 * cfg.boundary_order - 1));
  return q;
}

}  // namespace immersed
