#pragma once

#include <array>
#include <utility>

#include "immersed/level_set.hpp"

namespace immersed {

/// Axis-aligned square cell.
struct Cell {
  Point lower;
  double size = 0.0;

  Point upper() const { return {lower.x + size, lower.y + size}; }
  Point center() const { return {lower.x + 0.5 * size, lower.y + 0.5 * size}; }
  /// Counterclockwise from the lower-left corner.
  std::array<Point, 4> corners() const {
    return {lower, Point{lower.x + size, lower.y}, upper(), Point{lower.x, lower.y + size}};
  }
};

/// A vertical face sits at x = const and separates (i-1, j) from (i, j);
/// a horizontal face sits at y = const and separates (i, j-1) from (i, j).
enum class FaceOrientation { Vertical, Horizontal };

struct Face {
  FaceOrientation orientation = FaceOrientation::Vertical;
  int i = 0;
  int j = 0;
  int first = -1;   // left or below, -1 on the ambient boundary
  int second = -1;  // right or above, -1 on the ambient boundary

  bool interior() const { return first >= 0 && second >= 0; }
  /// Unit normal pointing from `first` into `second`.
  Point normal() const {
    return orientation == FaceOrientation::Vertical ? Point{1.0, 0.0} : Point{0.0, 1.0};
  }
};

/// Uniform Cartesian grid over the ambient box.
class BackgroundMesh {
 public:
  BackgroundMesh(Point origin, Point extent, int nx, int ny);
  /// Unit box [0,1]^2 with n x n cells.
  static BackgroundMesh unit_square(int n) { return BackgroundMesh({0.0, 0.0}, {1.0, 1.0}, n, n); }

  Point origin() const { return origin_; }
  Point extent() const { return extent_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }

  int num_elements() const { return nx_ * ny_; }
  int element_id(int i, int j) const { return j * nx_ + i; }
  std::pair<int, int> element_ij(int e) const { return {e % nx_, e / nx_}; }
  Cell cell(int e) const;

  /// Face neighbours in the order left, right, below, above; -1 where absent.
  std::array<int, 4> neighbors(int e) const;

  int num_faces() const { return (nx_ + 1) * ny_ + nx_ * (ny_ + 1); }
  int face_id(FaceOrientation o, int i, int j) const;
  Face face(int id) const;
  /// The four faces of element e, in the order left, right, below, above.
  std::array<int, 4> element_faces(int e) const;

  /// True when p lies on the ambient box boundary, up to `tol`.
  bool on_box_boundary(Point p, double tol) const;

 private:
  Point origin_;
  Point extent_;
  int nx_;
  int ny_;
  double h_;
};

}  // namespace immersed
