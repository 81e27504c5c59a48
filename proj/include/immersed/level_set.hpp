#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <variant>

namespace immersed {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double norm(Point a);

class LevelSet;

struct Circle {
  Point center;
  double radius = 0.0;
};

/// Half-plane n.x < offset with |n| = 1.
struct Plane {
  Point normal;
  double offset = 0.0;
};

/// Lower-left quadrant {x < a + s, y < b + s}.
struct Corner {
  double a = 0.0;
  double b = 0.0;
  double s = 0.0;
};

struct Annulus {
  Point center;
  double inner_radius = 0.0;
  double outer_radius = 0.0;
};

enum class BooleanOp { Union, Intersection, Difference };

struct BooleanCombination {
  BooleanOp op = BooleanOp::Intersection;
  std::shared_ptr<const LevelSet> lhs;
  std::shared_ptr<const LevelSet> rhs;
};

/// Implicit geometry. The physical domain is {phi < 0}.
///
/// Values of |phi| below the snapping tolerance are treated as inside; see
/// `snap()`. Gradients follow the active branch of max/min compositions.
class LevelSet {
 public:
  using Shape = std::variant<Circle, Plane, Corner, Annulus, BooleanCombination>;

  static LevelSet circle(Point center, double radius);
  /// The normal is normalised, together with the offset.
  static LevelSet plane(Point normal, double offset);
  static LevelSet corner(double a, double b, double s);
  static LevelSet annulus(Point center, double inner_radius, double outer_radius);
  static LevelSet combine(BooleanOp op, LevelSet lhs, LevelSet rhs);

  double operator()(Point p) const;
  Point gradient(Point p) const;

  const Shape& shape() const { return shape_; }

  /// Literal in the `kind:a,b,...` grammar accepted by `parse_level_set`.
  /// Boolean combinations have no literal form and render as `boolean`.
  std::string literal() const;

 private:
  explicit LevelSet(Shape shape) : shape_(std::move(shape)) {}
  Shape shape_;
};

/// Parses `circle:cx,cy,r`, `plane:nx,ny,c`, `corner:a,b,s` or
/// `annulus:cx,cy,r0,r1`. Throws std::invalid_argument on malformed input.
LevelSet parse_level_set(std::string_view literal);

/// Resolves near-zero level-set values to exactly zero.
inline double snap(double phi, double tol) { return (phi < tol && phi > -tol) ? 0.0 : phi; }

/// Inside test under the snapping convention (phi <= 0 after snapping).
inline bool inside(double phi, double tol) { return snap(phi, tol) <= 0.0; }

/// Relative snapping tolerance; multiply by the element size.
inline constexpr double kSnapRelTol = 1e-14;

}  // namespace immersed
