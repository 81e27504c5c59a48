#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "immersed/assembly.hpp"
#include "immersed/solvers.hpp"

namespace immersed {

enum class StudyKind { Solve, Conditioning, Convergence, Schwarz, Stability };
StudyKind parse_study_kind(std::string_view s);
std::string to_string(StudyKind k);

/// `log:a:b:n` (n log-spaced values from a to b) or a comma-separated list.
std::vector<double> parse_sweep(std::string_view s);

struct StudyConfig {
  StudyKind kind = StudyKind::Solve;
  std::string geometry;    // empty: the study default
  std::vector<int> meshes;  // empty: the study default
  int p = 1;
  StabilizationSpec stab;
  std::string mms;                       // empty: the study default
  std::optional<CutBoundary> cut_bc;     // empty: the study default
  std::optional<PrecondKind> precond;    // empty: all kinds for schwarz, as for solve
  BlockSpec blocks;
  double theta = 1e-12;
  SolveOptions solve;
  CondMethod cond = CondMethod::Dense;
  std::optional<int> quad_depth;
  std::optional<int> quad_order;
  std::vector<double> sweep;  // empty: the study default
  std::string rhs;  // schwarz: "load" (default) or "random" (seeded)
  std::uint64_t seed = 42;
  bool timing = false;
  Execution exec = Execution::Parallel;
};

struct StudyRow {
  std::string study;
  std::string geometry;
  int p = 1;
  std::string stab;
  std::string precond;
  std::optional<double> h;
  std::optional<double> eta_min;
  std::optional<double> kappa_raw;
  std::optional<double> kappa_jacobi;
  std::optional<double> lambda_min;
  std::optional<double> lambda_max;
  std::optional<double> energy_err;
  std::optional<double> l2_err;
  std::optional<long long> iters;
  std::optional<double> residual;
  std::optional<double> runtime_ms;

  bool operator==(const StudyRow&) const = default;
};

/// Least-squares line through (x, y) with its coefficient of determination.
struct Fit {
  std::string label;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  bool flagged = false;  // r2 < 0.95
};
Fit fit_line(const std::vector<double>& x, const std::vector<double>& y, std::string label = {});

/// A named pass/fail property evaluated on the rows.
struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  std::vector<Fit> fits;
  std::vector<Check> checks;

  bool all_passed() const;
};

StudyResult run_study(const StudyConfig& cfg);
StudyResult run_solve(const StudyConfig& cfg);
StudyResult run_conditioning(const StudyConfig& cfg);
StudyResult run_convergence(const StudyConfig& cfg);
StudyResult run_schwarz(const StudyConfig& cfg);
StudyResult run_stability(const StudyConfig& cfg);

inline constexpr const char* kCsvHeader =
    "study,geometry,p,stab,precond,h,eta_min,kappa_raw,kappa_jacobi,lambda_min,lambda_max,energy_err,l2_err,"
    "iters,residual,runtime_ms";

void write_csv(std::ostream& os, const std::vector<StudyRow>& rows);
void write_json(std::ostream& os, const std::vector<StudyRow>& rows);
std::vector<StudyRow> read_csv(std::istream& is);
/// Writes to `path` in the given format ("csv" or "json"); throws when the
/// rows are empty or the file cannot be written.
void emit(const std::vector<StudyRow>& rows, std::string_view format, const std::string& path);

}  // namespace immersed
