#pragma once

#include <array>
#include <vector>

#include "immersed/background_mesh.hpp"
#include "immersed/level_set.hpp"

namespace immersed {

struct QuadPoint {
  Point x;
  double w = 0.0;
};

using QuadRule = std::vector<QuadPoint>;

struct BoundaryPoint {
  Point x;
  double w = 0.0;
  Point normal;  // unit, pointing out of the domain
};

/// Bulk rule on T n Omega and boundary rule on T n dOmega.
struct CutQuadrature {
  QuadRule bulk;
  std::vector<BoundaryPoint> boundary;

  double measure() const;
  double boundary_measure() const;
};

struct QuadConfig {
  int max_depth = 6;
  int order = 2;           // Gauss points per direction on sub-cells
  int boundary_order = 2;  // Gauss points per boundary segment

  static QuadConfig for_degree(int p, int depth = 6) { return {depth, p + 1, p + 1}; }
  void validate() const;
};

/// 1D Gauss-Legendre rule on [0, 1].
struct GaussRule1D {
  std::vector<double> x;
  std::vector<double> w;
};

/// n-point rule, exact to degree 2n-1. Throws for n outside [1, 20].
const GaussRule1D& gauss_legendre(int n);

QuadRule tensor_gauss(const Cell& cell, int n);

/// Collapsed (Duffy) tensor rule on a triangle, n points per direction.
/// Exact to degree 2n-2 in the physical variables.
QuadRule triangle_gauss(Point a, Point b, Point c, int n);

// CutAffine: cut leaf above max depth on which phi is affine, so the linear
// tessellation is already exact. Only produced with stop_when_affine.
enum class CellStatus { Inside, Outside, CutAtMaxDepth, CutAffine };

struct SubCell {
  Cell cell;
  CellStatus status = CellStatus::CutAtMaxDepth;
  int depth = 0;
};

/// Recursive bisection driven by 3x3 sign samples. A cell is inside if all
/// (snapped) samples are <= 0 and not all zero, outside if all are >= 0 and
/// not all zero; otherwise it is split until `max_depth`.
std::vector<SubCell> quadtree_subdivide(const Cell& element, const LevelSet& geo, int max_depth,
                                        double snap_tol, bool stop_when_affine = false);

struct Segment {
  Point a;
  Point b;
  Point normal;  // unit, pointing out of the domain
};

/// Marching squares on one cell. `pieces` are convex polygons covering the
/// inside part; `segments` approximate the boundary.
struct Tessellation {
  std::vector<std::vector<Point>> pieces;
  std::vector<Segment> segments;
};

/// Sides of an all-inside cell on which phi vanishes and grows outward.
std::vector<Segment> zero_side_segments(const Cell& cell, const LevelSet& geo, double snap_tol);

Tessellation tessellate(const Cell& cell, const LevelSet& geo, double snap_tol);

double polygon_area(const std::vector<Point>& poly);

/// Full cut rule for one background element. Interior elements receive the
/// plain tensor rule, exterior ones an empty rule.
CutQuadrature cut_quadrature(const Cell& element, const LevelSet& geo, const QuadConfig& cfg);

}  // namespace immersed
