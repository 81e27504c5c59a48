#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "immersed/level_set.hpp"

namespace immersed {

/// Exact solution u with its gradient and Laplacian; the source is f = -lap u.
struct ManufacturedSolution {
  std::string name;
  std::function<double(Point)> u;
  std::function<Point(Point)> grad;
  std::function<double(Point)> laplacian;

  double f(Point x) const { return -laplacian(x); }
};

/// `xy`, `x2-y2`, `sinsin` or `zero`.
ManufacturedSolution manufactured(std::string_view name);

enum class CutBoundary { Dirichlet, Neumann };

/// The ambient box sides always carry strong Dirichlet data from u.
struct ProblemSpec {
  ManufacturedSolution solution = manufactured("zero");
  CutBoundary cut_bc = CutBoundary::Dirichlet;
};

enum class StabMode { None, GhostFace, GhostElemS0, GhostElemS1, AgFem };
enum class BetaMode { Local, Global };

struct StabilizationSpec {
  StabMode mode = StabMode::None;
  std::vector<double> tau{0.1};  // tau_j, the last entry repeats
  bool neumann_scaling = false;  // h^(2j+1) instead of h^(2j-1)
  std::optional<BetaMode> beta_mode;  // default: local without stabilization, global otherwise
  double beta_c = 10.0;
  double eta_star = 1.0;
  int max_chain = 10;

  BetaMode effective_beta_mode() const {
    return beta_mode.value_or(mode == StabMode::None ? BetaMode::Local : BetaMode::Global);
  }
  double tau_at(int j) const;  // 1-based order for face terms, 0 for element terms
  bool is_ghost() const {
    return mode == StabMode::GhostFace || mode == StabMode::GhostElemS0 || mode == StabMode::GhostElemS1;
  }
};

StabMode parse_stab_mode(std::string_view s);
std::string to_string(StabMode m);

}  // namespace immersed
