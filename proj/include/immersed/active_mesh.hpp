#pragma once

#include <vector>

#include "immersed/background_mesh.hpp"
#include "immersed/execution.hpp"
#include "immersed/level_set.hpp"
#include "immersed/quadrature.hpp"

namespace immersed {

enum class ElementClass { Interior, Cut, Exterior };

inline constexpr double kCutTol = 1e-12;

struct ActiveMesh {
  BackgroundMesh mesh;
  LevelSet geo;
  std::vector<ElementClass> cls;
  std::vector<double> eta;  // volume fractions, 0 on exterior elements
  std::vector<int> active;
  std::vector<int> cut;
  std::vector<int> interior;
  std::vector<int> ghost;  // face ids

  bool is_active(int e) const { return cls[e] != ElementClass::Exterior; }
  double eta_min() const;
};

/// Classifies every background element. Throws "empty active mesh" when no
/// element lies fully inside.
ActiveMesh classify_elements(const BackgroundMesh& mesh, const LevelSet& geo, const QuadConfig& cfg,
                             Execution exec = Execution::Parallel);

/// |T n Omega| / |T| from the cut rule.
double volume_fraction(const BackgroundMesh& mesh, int element, const LevelSet& geo, const QuadConfig& cfg);

/// Interior faces between two active elements with at least one cut.
std::vector<int> ghost_faces(const ActiveMesh& active);

/// Cut rules indexed by element (empty for exterior elements). Boundary
/// points on the ambient box are dropped because those sides carry strong
/// conditions.
std::vector<CutQuadrature> build_cut_quadratures(const ActiveMesh& active, const QuadConfig& cfg,
                                                 Execution exec = Execution::Parallel);

}  // namespace immersed
