#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "immersed/studies.hpp"

using namespace immersed;

namespace {

std::vector<double> parse_reals(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, ',');) {
    std::size_t used = 0;
    out.push_back(std::stod(part, &used));
    if (used != part.size()) throw std::invalid_argument("bad number '" + part + "'");
  }
  return out;
}

std::vector<int> parse_meshes(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, ',');) {
    std::size_t used = 0;
    int n = std::stoi(part, &used);
    if (used != part.size() || n < 1) throw std::invalid_argument("bad mesh size '" + part + "'");
    out.push_back(n);
  }
  return out;
}

void print_summary(std::ostream& os, const StudyResult& res) {
  for (const auto& f : res.fits)
    os << "fit  " << f.label << ": slope " << f.slope << ", r2 " << f.r2 << (f.flagged ? "  [poor fit]" : "") << '\n';
  for (const auto& c : res.checks)
    os << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Immersed finite elements for the Poisson problem on a Cartesian background mesh"};
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "key value file; explicit flags win");
  app.get_config_formatter_base()->valueSeparator(' ');

  std::string stab = "none", tau = "0.1", beta_mode, bc_cut, mms, precond, blocks = "cut", cond = "dense", residual = "precond", rhs;
  std::string geometry, meshes, sweep, out = "-", format = "csv";
  int p = 1, max_chain = 10, maxit = -1;
  double eta_star = 1.0, beta_c = 10.0, theta = 1e-12, tol = 1e-8;
  std::optional<int> quad_depth, quad_order;
  std::uint64_t seed = 42;
  bool check = false, timing = false, serial = false;

  app.add_option("--p", p, "polynomial degree")->check(CLI::IsMember({1, 2}));
  app.add_option("--eta-star", eta_star, "aggregation threshold")->check(CLI::Range(0.0, 1.0));
  app.add_option("--max-chain", max_chain, "longest allowed aggregation chain");
  app.add_option("--stab", stab, "none|ghost-face|ghost-elem-s0|ghost-elem-s1|agfem");
  app.add_option("--tau", tau, "ghost penalty weights, comma separated");
  app.add_option("--beta-mode", beta_mode)->check(CLI::IsMember({"local", "global"}));
  app.add_option("--beta-c", beta_c, "global Nitsche constant, beta = c/h");
  app.add_option("--bc-cut", bc_cut)->check(CLI::IsMember({"dirichlet", "neumann"}));
  app.add_option("--mms", mms, "xy|x2-y2|sinsin|zero");
  app.add_option("--precond", precond, "none|jacobi|as|ms");
  app.add_option("--blocks", blocks, "cut|all|threshold:<real>");
  app.add_option("--theta", theta, "relative eigenvalue cutoff in Schwarz blocks");
  app.add_option("--tol", tol);
  app.add_option("--residual", residual, "stopping norm: precond (||B r||) or plain (||r||)")
      ->check(CLI::IsMember({"precond", "plain"}));
  app.add_option("--maxit", maxit);
  app.add_option("--cond", cond)->check(CLI::IsMember({"dense", "lanczos"}));
  app.add_option("--quad-depth", quad_depth);
  app.add_option("--quad-order", quad_order);
  app.add_option("--geometry", geometry, "circle:cx,cy,r | plane:nx,ny,c | corner:a,b,s | annulus:cx,cy,r0,r1");
  app.add_option("--mesh", meshes, "elements per side, comma separated");
  app.add_option("--sweep", sweep, "log:a:b:n or a comma-separated list");
  app.add_option("--seed", seed);
  app.add_option("--rhs", rhs, "schwarz right-hand side: random or load")->check(CLI::IsMember({"random", "load"}));
  app.add_option("--out", out, "output file, - for stdout");
  app.add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--check", check, "exit with 2 when a study check fails");
  app.add_flag("--timing", timing, "record runtime_ms");
  app.add_flag("--serial", serial, "disable the OpenMP kernels");

  for (const char* name : {"solve", "conditioning", "convergence", "schwarz", "stability"})
    app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    StudyConfig cfg;
    cfg.kind = parse_study_kind(app.get_subcommands().front()->get_name());
    cfg.geometry = geometry;
    if (!meshes.empty()) cfg.meshes = parse_meshes(meshes);
    cfg.p = p;
    cfg.stab.mode = parse_stab_mode(stab);
    cfg.stab.tau = parse_reals(tau);
    if (!beta_mode.empty()) cfg.stab.beta_mode = beta_mode == "local" ? BetaMode::Local : BetaMode::Global;
    cfg.stab.beta_c = beta_c;
    cfg.stab.eta_star = eta_star;
    cfg.stab.max_chain = max_chain;
    cfg.mms = mms;
    if (!bc_cut.empty()) cfg.cut_bc = bc_cut == "dirichlet" ? CutBoundary::Dirichlet : CutBoundary::Neumann;
    if (!precond.empty()) cfg.precond = parse_precond(precond);
    cfg.blocks = parse_block_spec(blocks);
    cfg.theta = theta;
    cfg.solve.tol = tol;
    cfg.solve.norm = parse_residual_norm(residual);
    cfg.solve.maxit = maxit;
    cfg.cond = parse_cond_method(cond);
    cfg.quad_depth = quad_depth;
    cfg.quad_order = quad_order;
    if (!sweep.empty()) cfg.sweep = parse_sweep(sweep);
    cfg.seed = seed;
    cfg.rhs = rhs;
    cfg.timing = timing;
    cfg.exec = serial ? Execution::Serial : Execution::Parallel;

    StudyResult res = run_study(cfg);
    if (out == "-") {
      if (res.rows.empty()) throw std::invalid_argument("no rows to emit");
      format == "json" ? write_json(std::cout, res.rows) : write_csv(std::cout, res.rows);
    } else {
      emit(res.rows, format, out);
    }
    print_summary(out == "-" ? std::cerr : std::cout, res);
    if (check && !res.all_passed()) return 2;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
