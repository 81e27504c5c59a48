#include "immersed/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace immersed {

double CutQuadrature::measure() const {
  double s = 0.0;
  for (const auto& q : bulk) s += q.w;
  return s;
}

double CutQuadrature::boundary_measure() const {
  double s = 0.0;
  for (const auto& q : boundary) s += q.w;
  return s;
}

void QuadConfig::validate() const {
  if (max_depth < 0) throw std::invalid_argument("quadtree depth must be >= 0");
  if (order < 1 || boundary_order < 1) throw std::invalid_argument("quadrature orders must be >= 1");
  if (order + 1 > 20 || boundary_order > 20) throw std::invalid_argument("quadrature order too large");
}

namespace {

// Newton iteration on P_n in long double, then mapped to [0, 1].
GaussRule1D compute_gauss(int n) {
  GaussRule1D r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    long double z = std::cos(std::numbers::pi_v<long double> * (i + 0.75L) / (n + 0.5L));
    long double dp = 0;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1, p1 = 0;
      for (int k = 1; k <= n; ++k) {
        long double p2 = p1;
        p1 = p0;
        p0 = ((2 * k - 1) * z * p1 - (k - 1) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1);
      long double dz = p0 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-19L) break;
    }
    long double p0 = 1, p1 = 0;
    for (int k = 1; k <= n; ++k) {
      long double p2 = p1;
      p1 = p0;
      p0 = ((2 * k - 1) * z * p1 - (k - 1) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1);
    long double w = 2 / ((1 - z * z) * dp * dp);
    r.x[i] = static_cast<double>(0.5L * (1 - z));
    r.x[n - 1 - i] = static_cast<double>(0.5L * (1 + z));
    r.w[i] = r.w[n - 1 - i] = static_cast<double>(0.5L * w);
  }
  if (n % 2 == 1) r.x[n / 2] = 0.5;
  return r;
}

const std::array<GaussRule1D, 20>& gauss_table() {
  static const std::array<GaussRule1D, 20> table = [] {
    std::array<GaussRule1D, 20> t;
    for (int n = 1; n <= 20; ++n) t[n - 1] = compute_gauss(n);
    return t;
  }();
  return table;
}

}  // namespace

const GaussRule1D& gauss_legendre(int n) {
  if (n < 1 || n > 20) throw std::out_of_range("gauss_legendre: n must lie in [1, 20], got " + std::to_string(n));
  return gauss_table()[n - 1];
}

QuadRule tensor_gauss(const Cell& cell, int n) {
  const auto& g = gauss_legendre(n);
  QuadRule rule;
  rule.reserve(n * n);
  double area = cell.size * cell.size;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      rule.push_back({{cell.lower.x + g.x[i] * cell.size, cell.lower.y + g.x[j] * cell.size}, g.w[i] * g.w[j] * area});
  return rule;
}

QuadRule triangle_gauss(Point a, Point b, Point c, int n) {
  const auto& g = gauss_legendre(n);
  QuadRule rule;
  Point e1 = b - a, e2 = c - a;
  double det = std::abs(cross(e1, e2));
  if (det == 0.0) return rule;
  rule.reserve(n * n);
  for (int i = 0; i < n; ++i) {
    double u = g.x[i];
    for (int j = 0; j < n; ++j) {
      double v = g.x[j];
      Point x = a + u * ((1.0 - v) * e1 + v * e2);
      rule.push_back({x, g.w[i] * g.w[j] * u * det});
    }
  }
  return rule;
}

namespace {

// Affine to round-off on the 3x3 samples: mid-edge and center values are the
// averages of their end points and the bilinear twist vanishes. For max/min
// combinations of affine pieces this is exact on the whole cell, since the
// winning piece wins at all four corners.
bool samples_affine(const double (&v)[3][3]) {
  double scale = 0.0;
  for (auto& row : v)
    for (double x : row) scale = std::max(scale, std::abs(x));
  const double tol = 4e-15 + 1e-13 * scale;
  auto off = [&](double mid, double a, double b) { return std::abs(mid - 0.5 * (a + b)) > tol; };
  if (off(v[1][0], v[0][0], v[2][0]) || off(v[1][2], v[0][2], v[2][2])) return false;
  if (off(v[0][1], v[0][0], v[0][2]) || off(v[2][1], v[2][0], v[2][2])) return false;
  if (off(v[1][1], v[0][0], v[2][2]) || off(v[1][1], v[2][0], v[0][2])) return false;
  return std::abs(v[0][0] + v[2][2] - v[2][0] - v[0][2]) <= tol;
}

}  // namespace

std::vector<SubCell> quadtree_subdivide(const Cell& element, const LevelSet& geo, int max_depth, double snap_tol,
                                        bool stop_when_affine) {
  std::vector<SubCell> out;
  struct Item {
    Cell cell;
    int depth;
  };
  // explicit stack, children pushed in reverse so output is depth-first in z-order
  std::vector<Item> stack{{element, 0}};
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    bool all_le = true, all_ge = true, all_zero = true;
    double raw[3][3];  // [i][j]
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) {
        raw[i][j] = geo({it.cell.lower.x + 0.5 * i * it.cell.size, it.cell.lower.y + 0.5 * j * it.cell.size});
        double s = snap(raw[i][j], snap_tol);
        all_le = all_le && s <= 0.0;
        all_ge = all_ge && s >= 0.0;
        all_zero = all_zero && s == 0.0;
      }
    if (all_le && !all_zero) {
      out.push_back({it.cell, CellStatus::Inside, it.depth});
    } else if (all_ge && !all_zero) {
      out.push_back({it.cell, CellStatus::Outside, it.depth});
    } else if (it.depth >= max_depth) {
      out.push_back({it.cell, CellStatus::CutAtMaxDepth, it.depth});
    } else if (stop_when_affine && samples_affine(raw)) {
      out.push_back({it.cell, CellStatus::CutAffine, it.depth});
    } else {
      double hs = 0.5 * it.cell.size;
      Point l = it.cell.lower;
      stack.push_back({{{l.x + hs, l.y + hs}, hs}, it.depth + 1});
      stack.push_back({{{l.x, l.y + hs}, hs}, it.depth + 1});
      stack.push_back({{{l.x + hs, l.y}, hs}, it.depth + 1});
      stack.push_back({{l, hs}, it.depth + 1});
    }
  }
  return out;
}

}  // namespace immersed
