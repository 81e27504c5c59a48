#include "immersed/active_mesh.hpp"

#include <algorithm>
#include <stdexcept>

namespace immersed {

double ActiveMesh::eta_min() const {
  double m = 1.0;
  for (int e : active) m = std::min(m, eta[e]);
  return m;
}

double volume_fraction(const BackgroundMesh& mesh, int element, const LevelSet& geo, const QuadConfig& cfg) {
  Cell c = mesh.cell(element);
  double eta = cut_quadrature(c, geo, cfg).measure() / (c.size * c.size);
  return std::clamp(eta, 0.0, 1.0);
}

namespace {

bool samples_inside(const Cell& c, const LevelSet& geo, double tol) {
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i)
      if (!inside(geo({c.lower.x + 0.5 * i * c.size, c.lower.y + 0.5 * j * c.size}), tol)) return false;
  return true;
}

}  // namespace

ActiveMesh classify_elements(const BackgroundMesh& mesh, const LevelSet& geo, const QuadConfig& cfg,
                             Execution exec) {
  cfg.validate();
  const int ne = mesh.num_elements();
  ActiveMesh am{mesh, geo, std::vector<ElementClass>(ne), std::vector<double>(ne, 0.0), {}, {}, {}, {}};
  double tol = kSnapRelTol * mesh.h();

  auto classify = [&](int e) {
    if (samples_inside(mesh.cell(e), geo, tol)) {
      am.cls[e] = ElementClass::Interior;
      am.eta[e] = 1.0;
      return;
    }
    double eta = volume_fraction(mesh, e, geo, cfg);
    if (eta >= 1.0 - kCutTol) {
      am.cls[e] = ElementClass::Interior;
      am.eta[e] = 1.0;
    } else if (eta <= kCutTol) {
      am.cls[e] = ElementClass::Exterior;
      am.eta[e] = 0.0;
    } else {
      am.cls[e] = ElementClass::Cut;
      am.eta[e] = eta;
    }
  };
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (int e = 0; e < ne; ++e) classify(e);
  } else {
    for (int e = 0; e < ne; ++e) classify(e);
  }

  for (int e = 0; e < ne; ++e) {
    if (am.cls[e] == ElementClass::Exterior) continue;
    am.active.push_back(e);
    (am.cls[e] == ElementClass::Cut ? am.cut : am.interior).push_back(e);
  }
  if (am.interior.empty()) throw std::runtime_error("empty active mesh");
  am.ghost = ghost_faces(am);
  return am;
}

std::vector<int> ghost_faces(const ActiveMesh& active) {
  std::vector<int> faces;
  const auto& mesh = active.mesh;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    Face face = mesh.face(f);
    if (!face.interior()) continue;
    if (!active.is_active(face.first) || !active.is_active(face.second)) continue;
    if (active.cls[face.first] == ElementClass::Cut || active.cls[face.second] == ElementClass::Cut)
      faces.push_back(f);
  }
  return faces;
}

std::vector<CutQuadrature> build_cut_quadratures(const ActiveMesh& active, const QuadConfig& cfg, Execution exec) {
  const auto& mesh = active.mesh;
  std::vector<CutQuadrature> quads(mesh.num_elements());
  double tol = 1e-12 * mesh.h();
  auto build = [&](int k) {
    int e = active.active[k];
    quads[e] = cut_quadrature(mesh.cell(e), active.geo, cfg);
    std::erase_if(quads[e].boundary, [&](const BoundaryPoint& b) { return mesh.on_box_boundary(b.x, tol); });
  };
  const int na = static_cast<int>(active.active.size());
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (int k = 0; k < na; ++k) build(k);
  } else {
    for (int k = 0; k < na; ++k) build(k);
  }
  return quads;
}

}  // namespace immersed
