#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "immersed/solvers.hpp"
#include "local_kernels.hpp"

namespace immersed {

BlockSpec parse_block_spec(std::string_view s) {
  if (s == "cut") return {BlockStrategy::CutElements, 0.0};
  if (s == "all") return {BlockStrategy::AllElements, 0.0};
  if (s.starts_with("threshold:")) {
    std::string v(s.substr(10));
    std::size_t used = 0;
    double t = std::stod(v, &used);
    if (used != v.size() || !(t >= 0.0)) throw std::invalid_argument("bad block threshold '" + v + "'");
    return {BlockStrategy::Threshold, t};
  }
  throw std::invalid_argument("unknown block strategy '" + std::string(s) + "'");
}

BlockIndexSet with_singletons(std::vector<std::vector<int>> blocks, int n, std::string strategy) {
  BlockIndexSet set;
  set.strategy = std::move(strategy);
  std::vector<char> covered(n, 0);
  for (auto& b : blocks) {
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    for (int i : b) {
      if (i < 0 || i >= n) throw std::out_of_range("block index out of range");
      covered[i] = 1;
    }
  }
  set.covers_all = std::all_of(covered.begin(), covered.end(), [](char c) { return c != 0; });
  for (auto& b : blocks)
    if (!b.empty()) set.blocks.push_back(std::move(b));
  for (int i = 0; i < n; ++i)
    if (!covered[i]) set.blocks.push_back({i});
  for (const auto& b : set.blocks) set.num_multi += b.size() > 1;
  return set;
}

BlockIndexSet select_blocks(const Discretization& d, const SparseSystem& sys, const BlockSpec& spec) {
  std::vector<int> elements;
  std::string name;
  switch (spec.strategy) {
    case BlockStrategy::CutElements:
      elements = d.active.cut;
      name = "cut";
      break;
    case BlockStrategy::AllElements:
      elements = d.active.active;
      name = "all";
      break;
    case BlockStrategy::Threshold:
      for (int e : d.active.cut)
        if (d.active.eta[e] < spec.eta_threshold) elements.push_back(e);
      name = "threshold";
      break;
  }
  std::vector<std::vector<int>> blocks;
  for (int e : elements) {
    std::set<int> idx;
    for (int dof : d.space.element_dofs(e)) {
      if (d.constraints) {
        for (const auto& [wp, c] : d.constraints->rows[dof]) {
          int u = sys.coeff_to_unknown[d.constraints->dofs.wp_index[wp]];
          if (u >= 0) idx.insert(u);
        }
      } else if (int u = sys.coeff_to_unknown[dof]; u >= 0) {
        idx.insert(u);
      }
    }
    // a lone index would duplicate its singleton
    if (idx.size() > 1) blocks.emplace_back(idx.begin(), idx.end());
  }
  return with_singletons(std::move(blocks), sys.size(), name);
}

Eigen::MatrixXd Preconditioner::dense(int n) const {
  Eigen::MatrixXd B(n, n);
  for (int k = 0; k < n; ++k) B.col(k) = apply(Eigen::VectorXd::Unit(n, k));
  return B;
}

JacobiPreconditioner::JacobiPreconditioner(const SpMat& A) : inv_diag_(A.rows()) {
  Eigen::VectorXd d = A.diagonal();
  for (int i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0.0)) throw std::invalid_argument("jacobi needs a positive diagonal");
    inv_diag_[i] = 1.0 / d[i];
  }
}

Eigen::VectorXd JacobiPreconditioner::apply(const Eigen::VectorXd& r) const { return inv_diag_.cwiseProduct(r); }

SchwarzPreconditioner::SchwarzPreconditioner(const SpMat& A, BlockIndexSet blocks, SchwarzMode mode, double theta,
                                             Execution exec)
    : A_(&A), blocks_(std::move(blocks)), mode_(mode), exec_(exec) {
  const int nb = static_cast<int>(blocks_.blocks.size());
  factors_.resize(nb);
  std::vector<std::string> errors(nb);
  detail::for_each_index(nb, exec, [&](int i) {
    const auto& idx = blocks_.blocks[i];
    const int m = static_cast<int>(idx.size());
    Eigen::MatrixXd Ai(m, m);
    for (int c = 0; c < m; ++c)
      for (int r = 0; r < m; ++r) Ai(r, c) = A.coeff(idx[r], idx[c]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ai);
    double lmax = es.eigenvalues().maxCoeff();
    std::vector<int> keep;
    if (lmax > 0.0)
      for (int k = 0; k < m; ++k)
        if (es.eigenvalues()[k] > theta * lmax) keep.push_back(k);
    if (keep.empty()) {
      errors[i] = "fully degenerate block " + std::to_string(i);
      return;
    }
    Factor& f = factors_[i];
    f.V.resize(m, keep.size());
    f.inv_lambda.resize(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
      f.V.col(k) = es.eigenvectors().col(keep[k]);
      f.inv_lambda[k] = 1.0 / es.eigenvalues()[keep[k]];
    }
  });
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error(e);
}

std::vector<int> SchwarzPreconditioner::ranks() const {
  std::vector<int> r;
  for (const auto& f : factors_) r.push_back(static_cast<int>(f.inv_lambda.size()));
  return r;
}

Eigen::VectorXd SchwarzPreconditioner::local_solve(int i, const Eigen::VectorXd& r) const {
  const auto& idx = blocks_.blocks[i];
  Eigen::VectorXd ri(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) ri[k] = r[idx[k]];
  const Factor& f = factors_[i];
  return f.V * f.inv_lambda.cwiseProduct(f.V.transpose() * ri);
}

Eigen::VectorXd SchwarzPreconditioner::apply_block(int i, const Eigen::VectorXd& r) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(r.size());
  Eigen::VectorXd zi = local_solve(i, r);
  const auto& idx = blocks_.blocks[i];
  for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = zi[k];
  return out;
}

Eigen::VectorXd SchwarzPreconditioner::apply(const Eigen::VectorXd& r) const {
  const int nb = static_cast<int>(blocks_.blocks.size());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(r.size());
  if (mode_ == SchwarzMode::Additive) {
    std::vector<Eigen::VectorXd> local(nb);
    detail::for_each_index(nb, exec_, [&](int i) { local[i] = local_solve(i, r); });
    for (int i = 0; i < nb; ++i) {
      const auto& idx = blocks_.blocks[i];
      for (std::size_t k = 0; k < idx.size(); ++k) x[idx[k]] += local[i][k];
    }
    return x;
  }
  // sequential sweep; the residual is updated through the touched columns
  Eigen::VectorXd res = r;
  for (int i = 0; i < nb; ++i) {
    Eigen::VectorXd dz = local_solve(i, res);
    const auto& idx = blocks_.blocks[i];
    for (std::size_t k = 0; k < idx.size(); ++k) {
      x[idx[k]] += dz[k];
      for (SpMat::InnerIterator it(*A_, idx[k]); it; ++it) res[it.row()] -= it.value() * dz[k];
    }
  }
  return x;
}

PrecondKind parse_precond(std::string_view s) {
  if (s == "none") return PrecondKind::None;
  if (s == "jacobi") return PrecondKind::Jacobi;
  if (s == "as") return PrecondKind::Additive;
  if (s == "ms") return PrecondKind::Multiplicative;
  throw std::invalid_argument("unknown preconditioner '" + std::string(s) + "'");
}

std::string to_string(PrecondKind k) {
  switch (k) {
    case PrecondKind::None: return "none";
    case PrecondKind::Jacobi: return "jacobi";
    case PrecondKind::Additive: return "as";
    case PrecondKind::Multiplicative: return "ms";
  }
  return "none";
}

std::unique_ptr<Preconditioner> make_preconditioner(PrecondKind kind, const SpMat& A, const BlockIndexSet& blocks,
                                                    double theta, Execution exec) {
  switch (kind) {
    case PrecondKind::None: return nullptr;
    case PrecondKind::Jacobi: return std::make_unique<JacobiPreconditioner>(A);
    case PrecondKind::Additive:
      return std::make_unique<SchwarzPreconditioner>(A, blocks, SchwarzMode::Additive, theta, exec);
    case PrecondKind::Multiplicative:
      return std::make_unique<SchwarzPreconditioner>(A, blocks, SchwarzMode::Multiplicative, theta, exec);
  }
  return nullptr;
}

}  // namespace immersed
