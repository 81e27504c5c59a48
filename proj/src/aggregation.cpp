#include "immersed/aggregation.hpp"

#include <algorithm>
#include <climits>
#include <stdexcept>
#include <string>

namespace immersed {

std::vector<int> AggregateMap::path(int e) const {
  std::vector<int> out{e};
  while (parent[out.back()] != out.back()) out.push_back(parent[out.back()]);
  return out;
}

AggregateMap aggregate(const ActiveMesh& active, double eta_star) {
  if (!(eta_star >= 0.0 && eta_star <= 1.0)) throw std::invalid_argument("eta* must lie in [0, 1]");
  const auto& mesh = active.mesh;
  const int ne = mesh.num_elements();
  AggregateMap m;
  m.seed.assign(ne, 0);
  m.aggregate_of.assign(ne, -1);
  m.parent.assign(ne, -1);
  m.chain.assign(ne, -1);

  for (int e : active.active) {
    bool s = active.cls[e] == ElementClass::Interior || active.eta[e] > eta_star;
    if (!s) continue;
    m.seed[e] = 1;
    m.parent[e] = e;
    m.chain[e] = 0;
    m.aggregate_of[e] = m.num_aggregates();
    m.roots.push_back(e);
  }

  std::vector<int> pending;
  for (int e : active.active)
    if (!m.seed[e]) pending.push_back(e);

  while (!pending.empty()) {
    // decisions of this pass only see assignments from earlier passes
    const std::vector<int> chain = m.chain;
    std::vector<int> still;
    for (int e : pending) {
      int best = -1;
      for (int nb : mesh.neighbors(e)) {
        if (nb < 0 || chain[nb] < 0) continue;
        if (best < 0 || chain[nb] < chain[best] || (chain[nb] == chain[best] && nb < best)) best = nb;
      }
      if (best < 0) {
        still.push_back(e);
        continue;
      }
      m.parent[e] = best;
      m.chain[e] = chain[best] + 1;
      m.aggregate_of[e] = m.aggregate_of[best];
    }
    if (still.size() == pending.size())
      throw std::runtime_error("cut element " + std::to_string(still.front()) +
                               " cannot reach an interior element through face neighbours");
    pending = std::move(still);
  }

  m.members.assign(m.roots.size(), {});
  for (int e : active.active) m.members[m.aggregate_of[e]].push_back(e);
  return m;
}

DofClassification classify_dofs(const FeSpace& space, const AggregateMap& agg) {
  const int n = space.num_dofs();
  DofClassification d;
  d.well_posed.assign(n, 0);
  d.owner.assign(n, -1);
  d.wp_index.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    const auto& els = space.dof_elements()[i];
    bool wp = std::any_of(els.begin(), els.end(), [&](int e) { return agg.seed[e] != 0; });
    if (wp) {
      d.well_posed[i] = 1;
      d.wp_index[i] = static_cast<int>(d.wp_dofs.size());
      d.wp_dofs.push_back(i);
    } else {
      int owner = INT_MAX;
      for (int e : els) owner = std::min(owner, agg.aggregate_of[e]);
      d.owner[i] = owner;
      d.ip_dofs.push_back(i);
    }
  }
  return d;
}

ConstraintSet build_constraints(const FeSpace& space, const AggregateMap& agg, const DofClassification& dofs,
                                int max_chain) {
  const int n = space.num_dofs();
  ConstraintSet cs;
  cs.dofs = dofs;
  cs.rows.assign(n, {});
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < n; ++i) {
    if (dofs.well_posed[i]) {
      cs.rows[i].push_back({i, 1.0});
      trip.emplace_back(i, dofs.wp_index[i], 1.0);
      continue;
    }
    int a = dofs.owner[i];
    int root = agg.roots[a];
    int dist = INT_MAX;
    for (int e : space.dof_elements()[i])
      if (agg.aggregate_of[e] == a) dist = std::min(dist, agg.chain[e]);
    if (dist > max_chain)
      throw std::runtime_error("dof " + std::to_string(i) + " is " + std::to_string(dist) +
                               " elements away from its root (max chain " + std::to_string(max_chain) + ")");
    auto phi = space.shape(root, space.dof_coord(i), 0, 0);
    auto rd = space.element_dofs(root);
    for (std::size_t k = 0; k < rd.size(); ++k) {
      if (phi[k] == 0.0) continue;
      cs.rows[i].push_back({rd[k], phi[k]});
      trip.emplace_back(i, dofs.wp_index[rd[k]], phi[k]);
    }
  }
  cs.C.resize(n, dofs.num_well_posed());
  cs.C.setFromTriplets(trip.begin(), trip.end());
  return cs;
}

Eigen::VectorXd interpolate(const FeSpace& space, const ConstraintSet& cs, const ScalarField& u) {
  Eigen::VectorXd w(cs.dofs.num_well_posed());
  for (int k = 0; k < w.size(); ++k) w[k] = u(space.dof_coord(cs.dofs.wp_dofs[k]));
  return cs.C * w;
}

}  // namespace immersed
