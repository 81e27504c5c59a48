#include "immersed/level_set.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace immersed {

double norm(Point a) { return std::hypot(a.x, a.y); }

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Point radial(Point p, Point c) {
  Point d = p - c;
  double r = norm(d);
  if (r == 0.0) return {1.0, 0.0};  // any unit vector; the kink has no gradient
  return (1.0 / r) * d;
}

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

LevelSet LevelSet::circle(Point center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("circle radius must be positive");
  return LevelSet(Circle{center, radius});
}

LevelSet LevelSet::plane(Point normal, double offset) {
  double len = norm(normal);
  if (!(len > 0.0)) throw std::invalid_argument("plane normal must be nonzero");
  return LevelSet(Plane{(1.0 / len) * normal, offset / len});
}

LevelSet LevelSet::corner(double a, double b, double s) { return LevelSet(Corner{a, b, s}); }

LevelSet LevelSet::annulus(Point center, double inner_radius, double outer_radius) {
  if (!(inner_radius >= 0.0 && outer_radius > inner_radius))
    throw std::invalid_argument("annulus radii must satisfy 0 <= r0 < r1");
  return LevelSet(Annulus{center, inner_radius, outer_radius});
}

LevelSet LevelSet::combine(BooleanOp op, LevelSet lhs, LevelSet rhs) {
  return LevelSet(BooleanCombination{op, std::make_shared<const LevelSet>(std::move(lhs)),
                                     std::make_shared<const LevelSet>(std::move(rhs))});
}

double LevelSet::operator()(Point p) const {
  return std::visit(
      overloaded{
          [&](const Circle& c) { return norm(p - c.center) - c.radius; },
          [&](const Plane& s) { return dot(s.normal, p) - s.offset; },
          [&](const Corner& c) { return std::max(p.x - (c.a + c.s), p.y - (c.b + c.s)); },
          [&](const Annulus& a) {
            double d = norm(p - a.center);
            return std::max(a.inner_radius - d, d - a.outer_radius);
          },
          [&](const BooleanCombination& b) {
            double l = (*b.lhs)(p), r = (*b.rhs)(p);
            switch (b.op) {
              case BooleanOp::Union: return std::min(l, r);
              case BooleanOp::Intersection: return std::max(l, r);
              case BooleanOp::Difference: return std::max(l, -r);
            }
            return l;
          }},
      shape_);
}

Point LevelSet::gradient(Point p) const {
  return std::visit(
      overloaded{
          [&](const Circle& c) { return radial(p, c.center); },
          [&](const Plane& s) { return s.normal; },
          [&](const Corner& c) {
            return p.x - (c.a + c.s) >= p.y - (c.b + c.s) ? Point{1.0, 0.0} : Point{0.0, 1.0};
          },
          [&](const Annulus& a) {
            double d = norm(p - a.center);
            Point n = radial(p, a.center);
            return a.inner_radius - d >= d - a.outer_radius ? -1.0 * n : n;
          },
          [&](const BooleanCombination& b) {
            double l = (*b.lhs)(p), r = (*b.rhs)(p);
            switch (b.op) {
              case BooleanOp::Union: return l <= r ? b.lhs->gradient(p) : b.rhs->gradient(p);
              case BooleanOp::Intersection: return l >= r ? b.lhs->gradient(p) : b.rhs->gradient(p);
              case BooleanOp::Difference:
                return l >= -r ? b.lhs->gradient(p) : -1.0 * b.rhs->gradient(p);
            }
            return b.lhs->gradient(p);
          }},
      shape_);
}

std::string LevelSet::literal() const {
  return std::visit(overloaded{[](const Circle& c) {
                                 return "circle:" + fmt(c.center.x) + "," + fmt(c.center.y) + "," +
                                        fmt(c.radius);
                               },
                               [](const Plane& s) {
                                 return "plane:" + fmt(s.normal.x) + "," + fmt(s.normal.y) + "," +
                                        fmt(s.offset);
                               },
                               [](const Corner& c) {
                                 return "corner:" + fmt(c.a) + "," + fmt(c.b) + "," + fmt(c.s);
                               },
                               [](const Annulus& a) {
                                 return "annulus:" + fmt(a.center.x) + "," + fmt(a.center.y) + "," +
                                        fmt(a.inner_radius) + "," + fmt(a.outer_radius);
                               },
                               [](const BooleanCombination&) { return std::string("boolean"); }},
                    shape_);
}

LevelSet parse_level_set(std::string_view literal) {
  auto colon = literal.find(':');
  if (colon == std::string_view::npos)
    throw std::invalid_argument("geometry literal needs kind:values, got '" + std::string(literal) + "'");
  std::string_view kind = literal.substr(0, colon);
  std::string_view rest = literal.substr(colon + 1);

  std::vector<double> v;
  while (true) {
    auto comma = rest.find(',');
    std::string token(rest.substr(0, comma));
    // strtod accepts hex floats and inf; restrict to plain decimals
    if (token.empty() || token.find_first_not_of("0123456789+-.eE") != std::string::npos)
      throw std::invalid_argument("bad number '" + token + "' in geometry literal");
    std::size_t used = 0;
    double x = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument("bad number '" + token + "' in geometry literal");
    v.push_back(x);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }

  auto want = [&](std::size_t n) {
    if (v.size() != n)
      throw std::invalid_argument(std::string(kind) + " expects " + std::to_string(n) + " values, got " +
                                  std::to_string(v.size()));
  };
  if (kind == "circle") {
    want(3);
    return LevelSet::circle({v[0], v[1]}, v[2]);
  }
  if (kind == "plane") {
    want(3);
    return LevelSet::plane({v[0], v[1]}, v[2]);
  }
  if (kind == "corner") {
    want(3);
    return LevelSet::corner(v[0], v[1], v[2]);
  }
  if (kind == "annulus") {
    want(4);
    return LevelSet::annulus({v[0], v[1]}, v[2], v[3]);
  }
  throw std::invalid_argument("unknown geometry kind '" + std::string(kind) + "'");
}

}  // namespace immersed
