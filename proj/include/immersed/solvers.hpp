#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "immersed/assembly.hpp"

namespace immersed {

// ---- block selection -------------------------------------------------------

enum class BlockStrategy { CutElements, AllElements, Threshold };

struct BlockSpec {
  BlockStrategy strategy = BlockStrategy::CutElements;
  double eta_threshold = 0.0;  // Threshold only: blocks for eta_i < threshold
};

/// `cut`, `all` or `threshold:<real>`.
BlockSpec parse_block_spec(std::string_view s);

struct BlockIndexSet {
  std::vector<std::vector<int>> blocks;  // sorted unknown indices
  std::string strategy;
  bool covers_all = false;
  int num_multi = 0;  // blocks with more than one index
};

/// One block per selected element holding the unknowns its basis functions
/// depend on, followed by singletons for every unknown left uncovered.
BlockIndexSet select_blocks(const Discretization& d, const SparseSystem& sys, const BlockSpec& spec);

/// Same fill-in rule for explicit blocks (used with hand-built matrices).
BlockIndexSet with_singletons(std::vector<std::vector<int>> blocks, int n, std::string strategy = "custom");

// ---- preconditioners -------------------------------------------------------

class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual Eigen::VectorXd apply(const Eigen::VectorXd& r) const = 0;
  virtual bool symmetric() const { return true; }
  /// Dense operator, column k = apply(e_k). For tests and small systems.
  Eigen::MatrixXd dense(int n) const;
};

class JacobiPreconditioner final : public Preconditioner {
 public:
  explicit JacobiPreconditioner(const SpMat& A);
  Eigen::VectorXd apply(const Eigen::VectorXd& r) const override;

 private:
  Eigen::VectorXd inv_diag_;
};

enum class SchwarzMode { Additive, Multiplicative };

/// Spectrally thresholded block pseudo-inverses A_i^+ = V_i L_i^-1 V_i^T,
/// modes below theta * lambda_max(A_i) discarded.
class SchwarzPreconditioner final : public Preconditioner {
 public:
  SchwarzPreconditioner(const SpMat& A, BlockIndexSet blocks, SchwarzMode mode, double theta = 1e-12,
                        Execution exec = Execution::Parallel);

  /// Additive: sum_i P_i A_i^+ P_i^T r. Multiplicative: sequential sweep
  /// x += P_i A_i^+ P_i^T (r - A x) in ascending block order.
  Eigen::VectorXd apply(const Eigen::VectorXd& r) const override;
  bool symmetric() const override { return mode_ == SchwarzMode::Additive; }

  /// P_i A_i^+ P_i^T r for one block, as a full-length vector.
  Eigen::VectorXd apply_block(int i, const Eigen::VectorXd& r) const;
  const BlockIndexSet& blocks() const { return blocks_; }
  SchwarzMode mode() const { return mode_; }
  /// Retained eigenvalue count per block.
  std::vector<int> ranks() const;

 private:
  struct Factor {
    Eigen::MatrixXd V;
    Eigen::VectorXd inv_lambda;
  };
  Eigen::VectorXd local_solve(int i, const Eigen::VectorXd& r) const;

  const SpMat* A_;
  BlockIndexSet blocks_;
  SchwarzMode mode_;
  Execution exec_;
  std::vector<Factor> factors_;
};

enum class PrecondKind { None, Jacobi, Additive, Multiplicative };
PrecondKind parse_precond(std::string_view s);
std::string to_string(PrecondKind k);

/// Builds the preconditioner named by `kind` (nullptr for none). The
/// Schwarz variants keep a pointer to `A`, which must outlive the result.
std::unique_ptr<Preconditioner> make_preconditioner(PrecondKind kind, const SpMat& A, const BlockIndexSet& blocks,
                                                    double theta, Execution exec = Execution::Parallel);

// ---- Krylov ----------------------------------------------------------------

/// Which residual the stopping test measures: ||B r|| or ||r||.
enum class ResidualNorm { Preconditioned, Plain };
ResidualNorm parse_residual_norm(std::string_view s);
std::string to_string(ResidualNorm n);

struct SolveOptions {
  double tol = 1e-8;
  ResidualNorm norm = ResidualNorm::Preconditioned;
  int maxit = -1;         // -1: ten times the system size
  bool flexible = false;  // Polak-Ribiere update, needed for nonsymmetric B
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;  // relative to the initial value, in the chosen norm
  double time_ms = 0.0;
  bool converged = false;
  std::vector<double> history;
};

/// Preconditioned CG from x = 0. Stops when the relative preconditioned
/// residual drops below tol; running out of iterations is reported, not
/// thrown. Throws "matrix not SPD" on breakdown.
SolveReport pcg(const SpMat& A, const Eigen::VectorXd& b, Eigen::VectorXd& x, const Preconditioner* M = nullptr,
                SolveOptions opts = {});

// ---- spectra ---------------------------------------------------------------

struct Spectrum {
  double kappa = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

enum class CondMethod { Dense, Lanczos };
CondMethod parse_cond_method(std::string_view s);

inline constexpr int kDenseLimit = 4000;

/// Throws "indefinite/singular" when lambda_min <= 0; dense needs N <= 4000.
Spectrum condition_number(const SpMat& A, CondMethod method = CondMethod::Dense);
Spectrum condition_number_dense(const Eigen::MatrixXd& A);
/// Spectrum of G^T G from singular values of G.
Spectrum condition_number_from_factor(const Eigen::MatrixXd& G);

/// D^-1/2 A D^-1/2; throws on a non-positive diagonal entry.
SpMat jacobi_scale(const SpMat& A);
/// G D^-1/2 with D = diag(G^T G).
Eigen::MatrixXd jacobi_scale_factor(const Eigen::MatrixXd& G);

}  // namespace immersed
