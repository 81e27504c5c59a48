#include "immersed/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace immersed {

ManufacturedSolution manufactured(std::string_view name) {
  using std::numbers::pi;
  if (name == "xy")
    return {"xy", [](Point p) { return p.x * p.y; }, [](Point p) { return Point{p.y, p.x}; },
            [](Point) { return 0.0; }};
  if (name == "x2-y2")
    return {"x2-y2", [](Point p) { return p.x * p.x - p.y * p.y; },
            [](Point p) { return Point{2.0 * p.x, -2.0 * p.y}; }, [](Point) { return 0.0; }};
  if (name == "sinsin")
    return {"sinsin", [](Point p) { return std::sin(pi * p.x) * std::sin(pi * p.y); },
            [](Point p) {
              return Point{pi * std::cos(pi * p.x) * std::sin(pi * p.y), pi * std::sin(pi * p.x) * std::cos(pi * p.y)};
            },
            [](Point p) { return -2.0 * pi * pi * std::sin(pi * p.x) * std::sin(pi * p.y); }};
  if (name == "zero")
    return {"zero", [](Point) { return 0.0; }, [](Point) { return Point{0.0, 0.0}; }, [](Point) { return 0.0; }};
  throw std::invalid_argument("unknown manufactured solution '" + std::string(name) + "'");
}

double StabilizationSpec::tau_at(int j) const {
  if (tau.empty()) return 0.0;
  int k = std::max(j - 1, 0);
  return tau[std::min<std::size_t>(k, tau.size() - 1)];
}

StabMode parse_stab_mode(std::string_view s) {
  if (s == "none") return StabMode::None;
  if (s == "ghost-face") return StabMode::GhostFace;
  if (s == "ghost-elem-s0") return StabMode::GhostElemS0;
  if (s == "ghost-elem-s1") return StabMode::GhostElemS1;
  if (s == "agfem") return StabMode::AgFem;
  throw std::invalid_argument("unknown stabilization '" + std::string(s) + "'");
}

std::string to_string(StabMode m) {
  switch (m) {
    case StabMode::None: return "none";
    case StabMode::GhostFace: return "ghost-face";
    case StabMode::GhostElemS0: return "ghost-elem-s0";
    case StabMode::GhostElemS1: return "ghost-elem-s1";
    case StabMode::AgFem: return "agfem";
  }
  return "none";
}

}  // namespace immersed
