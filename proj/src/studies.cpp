#include "immersed/studies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "immersed/norms.hpp"
#include "immersed/stability.hpp"

namespace immersed {

StudyKind parse_study_kind(std::string_view s) {
  if (s == "solve") return StudyKind::Solve;
  if (s == "conditioning") return StudyKind::Conditioning;
  if (s == "convergence") return StudyKind::Convergence;
  if (s == "schwarz") return StudyKind::Schwarz;
  if (s == "stability") return StudyKind::Stability;
  throw std::invalid_argument("unknown study '" + std::string(s) + "'");
}

std::string to_string(StudyKind k) {
  switch (k) {
    case StudyKind::Solve: return "solve";
    case StudyKind::Conditioning: return "conditioning";
    case StudyKind::Convergence: return "convergence";
    case StudyKind::Schwarz: return "schwarz";
    case StudyKind::Stability: return "stability";
  }
  return "solve";
}

namespace {

double parse_real(const std::string& s) {
  std::size_t used = 0;
  double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

}  // namespace

std::vector<double> parse_sweep(std::string_view text) {
  std::string s(text);
  std::vector<double> out;
  if (s.starts_with("log:")) {
    std::vector<std::string> parts;
    std::stringstream ss(s.substr(4));
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw std::invalid_argument("log sweep needs log:a:b:n");
    double a = parse_real(parts[0]), b = parse_real(parts[1]);
    int n = std::stoi(parts[2]);
    if (!(a > 0 && b > 0) || n < 1) throw std::invalid_argument("log sweep needs positive bounds and n >= 1");
    for (int i = 0; i < n; ++i) {
      double t = n == 1 ? 0.0 : double(i) / (n - 1);
      out.push_back(std::exp(std::log(a) + t * (std::log(b) - std::log(a))));
    }
    // pin the end points so they are reproduced exactly
    out.front() = a;
    out.back() = n == 1 ? a : b;
    return out;
  }
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, ',');) out.push_back(parse_real(part));
  if (out.empty()) throw std::invalid_argument("empty sweep");
  return out;
}

Fit fit_line(const std::vector<double>& x, const std::vector<double>& y, std::string label) {
  Fit f;
  f.label = std::move(label);
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("fit needs at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= n, my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  f.flagged = f.r2 < 0.95;
  return f;
}

bool StudyResult::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

QuadConfig quad_for(const StudyConfig& cfg, int default_depth) {
  QuadConfig q = QuadConfig::for_degree(cfg.p, cfg.quad_depth.value_or(default_depth));
  if (cfg.quad_order) q.order = q.boundary_order = *cfg.quad_order;
  return q;
}

std::vector<int> meshes_or(const StudyConfig& cfg, std::vector<int> def) { return cfg.meshes.empty() ? def : cfg.meshes; }
std::vector<double> sweep_or(const StudyConfig& cfg, std::string_view def) {
  return cfg.sweep.empty() ? parse_sweep(def) : cfg.sweep;
}

StudyRow base_row(const StudyConfig& cfg, const std::string& geometry) {
  StudyRow r;
  r.study = to_string(cfg.kind);
  r.geometry = geometry;
  r.p = cfg.p;
  r.stab = to_string(cfg.stab.mode);
  return r;
}

// Corner probe with s = sqrt(eta) h at the grid vertex (a, b).
LevelSet corner_probe(const StudyConfig& cfg, double eta, double h) {
  LevelSet base = parse_level_set(cfg.geometry.empty() ? "corner:0.5,0.5,0" : cfg.geometry);
  const auto* c = std::get_if<Corner>(&base.shape());
  if (!c) throw std::invalid_argument("this study needs a corner geometry");
  return LevelSet::corner(c->a, c->b, std::sqrt(eta) * h);
}

ProblemSpec problem_for(const StudyConfig& cfg, const char* mms, CutBoundary bc) {
  return {manufactured(cfg.mms.empty() ? mms : cfg.mms), cfg.cut_bc.value_or(bc)};
}

void add_check(StudyResult& res, std::string name, bool ok, std::string detail) {
  res.checks.push_back({std::move(name), ok, std::move(detail)});
}

void check_fit(StudyResult& res, const Fit& f, double expected, double tol) {
  bool ok = std::abs(f.slope - expected) <= tol && !f.flagged;
  add_check(res, f.label, ok,
            "slope " + fmt(f.slope) + " (expected " + fmt(expected) + " +- " + fmt(tol) + "), r2 " + fmt(f.r2));
}

double ratio(const std::vector<double>& v) {
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

}  // namespace

StudyResult run_conditioning(const StudyConfig& cfg) {
  StudyResult res;
  auto meshes = meshes_or(cfg, {8});
  auto sweep = sweep_or(cfg, "log:1e-1:1e-4:7");
  QuadConfig quad = quad_for(cfg, 20);
  ProblemSpec prob = problem_for(cfg, "zero", CutBoundary::Neumann);
  // kappa per [mesh][eta]
  std::vector<std::vector<double>> kappa(meshes.size());
  std::vector<std::vector<double>> kappa_j(meshes.size());
  std::vector<std::vector<double>> etas(meshes.size());
  for (std::size_t m = 0; m < meshes.size(); ++m) {
    auto mesh = BackgroundMesh::unit_square(meshes[m]);
    for (double eta : sweep) {
      auto t0 = Clock::now();
      LevelSet geo = corner_probe(cfg, eta, mesh.h());
      auto d = discretize(mesh, geo, cfg.p, quad, cfg.stab, cfg.exec);
      auto sys = assemble(d, prob, cfg.stab, cfg.exec);
      Spectrum raw, jac;
      if (cfg.cond == CondMethod::Dense && prob.cut_bc == CutBoundary::Neumann) {
        Eigen::MatrixXd G = gram_factor(d, sys, cfg.stab);
        raw = condition_number_from_factor(G);
        jac = condition_number_from_factor(jacobi_scale_factor(G));
      } else {
        raw = condition_number(sys.A, cfg.cond);
        jac = condition_number(jacobi_scale(sys.A), cfg.cond);
      }
      StudyRow r = base_row(cfg, geo.literal());
      r.h = mesh.h();
      r.eta_min = d.active.eta_min();
      r.kappa_raw = raw.kappa;
      r.kappa_jacobi = jac.kappa;
      r.lambda_min = raw.lambda_min;
      r.lambda_max = raw.lambda_max;
      if (cfg.timing) r.runtime_ms = elapsed_ms(t0);
      res.rows.push_back(r);
      kappa[m].push_back(raw.kappa);
      kappa_j[m].push_back(jac.kappa);
      etas[m].push_back(*r.eta_min);
    }
  }

  const bool stabilized = cfg.stab.mode != StabMode::None;
  for (std::size_t m = 0; m < meshes.size(); ++m) {
    std::string tag = "n=" + std::to_string(meshes[m]);
    if (sweep.size() >= 2) {
      std::vector<double> x, y;
      for (std::size_t i = 0; i < sweep.size(); ++i) {
        x.push_back(std::log(1.0 / etas[m][i]));
        y.push_back(std::log(kappa[m][i]));
      }
      Fit f = fit_line(x, y, "kappa vs 1/eta, " + tag);
      res.fits.push_back(f);
      if (!stabilized) check_fit(res, f, 2.0 * cfg.p, cfg.p == 1 ? 0.3 : 0.5);
    }
    if (stabilized) {
      double rr = ratio(kappa[m]);
      add_check(res, "kappa flat in eta, " + tag, rr < 10.0, "max/min " + fmt(rr) + " (< 10)");
    } else if (cfg.p >= 2 && sweep.size() >= 2) {
      bool mono = true;
      for (std::size_t i = 1; i < sweep.size(); ++i)
        if (etas[m][i] < etas[m][i - 1]) mono = mono && kappa_j[m][i] > kappa_j[m][i - 1];
      add_check(res, "jacobi-scaled kappa grows as eta shrinks, " + tag, mono, "");
    }
  }
  if (meshes.size() >= 2) {
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      std::vector<double> x, y;
      for (std::size_t m = 0; m < meshes.size(); ++m) {
        x.push_back(std::log(double(meshes[m])));
        y.push_back(std::log(kappa[m][i]));
      }
      Fit f = fit_line(x, y, "kappa vs 1/h, eta=" + fmt(sweep[i]));
      res.fits.push_back(f);
      if (stabilized && meshes.size() >= 3) check_fit(res, f, 2.0, 0.3);
    }
  }
  return res;
}

namespace {

struct Solved {
  Eigen::VectorXd x;
  SolveReport report;
  double residual = 0.0;
  bool ok = false;
};

Solved solve_direct(const SparseSystem& sys) {
  Solved s;
  auto t0 = Clock::now();
  Eigen::SimplicialLDLT<SpMat> ldlt(sys.A);
  if (ldlt.info() != Eigen::Success) return s;
  s.x = ldlt.solve(sys.b);
  s.report.time_ms = elapsed_ms(t0);
  double bn = sys.b.norm();
  s.residual = (sys.A * s.x - sys.b).norm() / (bn > 0 ? bn : 1.0);
  s.ok = std::isfinite(s.residual);
  return s;
}

Solved solve_iterative(const Discretization& d, const SparseSystem& sys, const StudyConfig& cfg, PrecondKind kind,
                       const Eigen::VectorXd& b) {
  Solved s;
  auto blocks = select_blocks(d, sys, cfg.blocks);
  auto M = make_preconditioner(kind, sys.A, blocks, cfg.theta, cfg.exec);
  SolveOptions opts = cfg.solve;
  opts.flexible = kind == PrecondKind::Multiplicative;
  s.report = pcg(sys.A, b, s.x, M.get(), opts);
  s.residual = s.report.residual;
  s.ok = s.report.converged;
  return s;
}

}  // namespace

StudyResult run_convergence(const StudyConfig& cfg) {
  StudyResult res;
  auto meshes = meshes_or(cfg, {8, 16, 32, 64});
  std::string geometry = cfg.geometry.empty() ? "circle:0.51,0.49,0.3" : cfg.geometry;
  LevelSet geo = parse_level_set(geometry);
  QuadConfig quad = quad_for(cfg, 6);
  ProblemSpec prob = problem_for(cfg, "sinsin", CutBoundary::Dirichlet);
  std::vector<double> hs, ee, el, eh1;
  bool all_ok = true;
  for (int n : meshes) {
    auto t0 = Clock::now();
    auto mesh = BackgroundMesh::unit_square(n);
    auto d = discretize(mesh, geo, cfg.p, quad, cfg.stab, cfg.exec);
    auto sys = assemble(d, prob, cfg.stab, cfg.exec);
    Solved s = cfg.precond ? solve_iterative(d, sys, cfg, *cfg.precond, sys.b) : solve_direct(sys);
    StudyRow r = base_row(cfg, geometry);
    r.precond = cfg.precond ? to_string(*cfg.precond) : "direct";
    r.h = mesh.h();
    r.eta_min = d.active.eta_min();
    if (s.ok) {
      auto nrm = field_norms(d, sys, cfg.stab, prob, sys.expand(s.x), &prob.solution);
      r.energy_err = nrm.energy;
      r.l2_err = nrm.l2;
      r.residual = s.residual;
      if (cfg.precond) r.iters = s.report.iterations;
      hs.push_back(mesh.h());
      ee.push_back(nrm.energy);
      el.push_back(nrm.l2);
      eh1.push_back(nrm.h1_semi);
    }
    all_ok = all_ok && s.ok;
    if (cfg.timing) r.runtime_ms = elapsed_ms(t0);
    res.rows.push_back(r);
  }
  add_check(res, "all solves succeeded", all_ok, "");
  const bool patch = prob.solution.name == "xy" || prob.solution.name == "x2-y2";
  if (patch) {
    double worst = ee.empty() ? INFINITY : *std::max_element(ee.begin(), ee.end());
    add_check(res, "patch test energy error", worst < 1e-7, "max " + fmt(worst) + " (< 1e-7)");
  } else if (hs.size() >= 2) {
    std::vector<double> lh, le, ll, l1;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      lh.push_back(std::log(hs[i]));
      le.push_back(std::log(ee[i]));
      ll.push_back(std::log(el[i]));
      l1.push_back(std::log(eh1[i]));
    }
    Fit fe = fit_line(lh, le, "energy error rate");
    res.fits.push_back(fe);
    res.fits.push_back(fit_line(lh, ll, "L2 error rate"));
    // the boundary terms of the energy norm decay like h^(p+1/2), so on coarse
    // meshes the energy rate sits above p while this one does not
    res.fits.push_back(fit_line(lh, l1, "H1 seminorm error rate"));
    check_fit(res, fe, cfg.p, cfg.p == 1 ? 0.15 : 0.2);
  }
  return res;
}

StudyResult run_schwarz(const StudyConfig& cfg) {
  StudyResult res;
  auto meshes = meshes_or(cfg, {16});
  auto sweep = sweep_or(cfg, "log:1e-1:1e-8:8");
  QuadConfig quad = quad_for(cfg, 20);
  const std::string rhs = cfg.rhs.empty() ? "load" : cfg.rhs;
  if (rhs != "random" && rhs != "load") throw std::invalid_argument("unknown rhs '" + rhs + "'");
  ProblemSpec prob = problem_for(cfg, rhs == "load" ? "sinsin" : "zero", CutBoundary::Neumann);
  std::vector<PrecondKind> kinds = cfg.precond ? std::vector<PrecondKind>{*cfg.precond}
                                               : std::vector<PrecondKind>{PrecondKind::None, PrecondKind::Jacobi,
                                                                          PrecondKind::Additive,
                                                                          PrecondKind::Multiplicative};
  // iterations per [kind][mesh][eta], maxit + 1 when not converged
  std::vector<std::vector<std::vector<double>>> its(kinds.size(), std::vector<std::vector<double>>(meshes.size()));
  std::vector<std::vector<std::vector<char>>> conv(kinds.size(), std::vector<std::vector<char>>(meshes.size()));
  for (std::size_t m = 0; m < meshes.size(); ++m) {
    auto mesh = BackgroundMesh::unit_square(meshes[m]);
    for (double eta : sweep) {
      LevelSet geo = corner_probe(cfg, eta, mesh.h());
      auto d = discretize(mesh, geo, cfg.p, quad, cfg.stab, cfg.exec);
      auto sys = assemble(d, prob, cfg.stab, cfg.exec);
      Eigen::VectorXd b = sys.b;
      if (rhs == "random") {
        // excites every eigenmode, including the near-null ones of small cuts
        std::mt19937_64 rng(cfg.seed);
        std::normal_distribution<double> N01;
        for (int i = 0; i < b.size(); ++i) b[i] = N01(rng);
      }
      for (std::size_t k = 0; k < kinds.size(); ++k) {
        auto t0 = Clock::now();
        Solved s = solve_iterative(d, sys, cfg, kinds[k], b);
        StudyRow r = base_row(cfg, geo.literal());
        r.precond = to_string(kinds[k]);
        r.h = mesh.h();
        r.eta_min = d.active.eta_min();
        r.iters = s.report.iterations;
        r.residual = s.report.residual;
        if (cfg.timing) r.runtime_ms = elapsed_ms(t0);
        res.rows.push_back(r);
        its[k][m].push_back(s.report.converged ? s.report.iterations : s.report.iterations + 1.0);
        conv[k][m].push_back(s.report.converged);
      }
    }
  }
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    std::string name = to_string(kinds[k]);
    for (std::size_t m = 0; m < meshes.size(); ++m) {
      std::string tag = name + ", n=" + std::to_string(meshes[m]);
      const auto& it = its[k][m];
      bool all_conv = std::all_of(conv[k][m].begin(), conv[k][m].end(), [](char c) { return c != 0; });
      if (kinds[k] == PrecondKind::Additive || kinds[k] == PrecondKind::Multiplicative) {
        double rr = ratio(it);
        add_check(res, "iterations independent of eta, " + tag, all_conv && rr < 2.0,
                  "max/min " + fmt(rr) + " (< 2)" + (all_conv ? "" : ", not all converged"));
      } else if (kinds[k] == PrecondKind::None && it.size() >= 2) {
        bool mono = true;
        for (std::size_t i = 1; i < it.size(); ++i) mono = mono && it[i] >= it[i - 1];
        bool grows = !conv[k][m].back() || it.back() > 3.0 * it.front();
        add_check(res, "unpreconditioned iterations grow as eta shrinks, " + tag, mono && grows,
                  "first " + fmt(it.front()) + ", last " + fmt(it.back()) + (conv[k][m].back() ? "" : " (no convergence)"));
      }
    }
    if (meshes.size() >= 2 && kinds[k] == PrecondKind::Additive) {
      for (std::size_t m = 1; m < meshes.size(); ++m) {
        std::vector<double> growth;
        for (std::size_t i = 0; i < sweep.size(); ++i) growth.push_back(its[k][m][i] / its[k][m - 1][i]);
        double per_halving = std::pow(*std::max_element(growth.begin(), growth.end()),
                                      1.0 / std::log2(double(meshes[m]) / meshes[m - 1]));
        double lo = std::pow(*std::min_element(growth.begin(), growth.end()),
                             1.0 / std::log2(double(meshes[m]) / meshes[m - 1]));
        add_check(res, "as iterations per h-halving, n=" + std::to_string(meshes[m]), lo >= 1.0 && per_halving <= 3.0,
                  "growth " + fmt(lo) + ".." + fmt(per_halving) + " (2 +- 50%)");
      }
    }
  }
  return res;
}

StudyResult run_stability(const StudyConfig& cfg) {
  StudyResult res;
  auto meshes = meshes_or(cfg, {8});
  auto sweep = sweep_or(cfg, "log:1e-1:1e-8:8");
  QuadConfig quad = quad_for(cfg, 6);
  LevelSet base = parse_level_set(cfg.geometry.empty() ? "plane:1,0,0.5" : cfg.geometry);
  const auto* pl = std::get_if<Plane>(&base.shape());
  if (!pl) throw std::invalid_argument("the stability study needs a plane geometry");
  for (int n : meshes) {
    auto mesh = BackgroundMesh::unit_square(n);
    std::vector<double> ctrl, beta;
    for (double delta : sweep) {
      auto t0 = Clock::now();
      LevelSet geo = LevelSet::plane(pl->normal, pl->offset + delta * mesh.h());
      auto d = discretize(mesh, geo, cfg.p, quad, cfg.stab, cfg.exec);
      double bmax = 0.0;
      for (int e : d.active.active)
        if (!d.quads[e].boundary.empty()) bmax = std::max(bmax, nitsche_parameter_local(d, e));
      double c = extended_control(d, cfg.stab);
      StudyRow r = base_row(cfg, geo.literal());
      r.h = mesh.h();
      r.eta_min = delta;
      r.lambda_min = c;
      r.lambda_max = bmax;
      if (cfg.timing) r.runtime_ms = elapsed_ms(t0);
      res.rows.push_back(r);
      ctrl.push_back(c);
      beta.push_back(bmax);
    }
    std::string tag = "n=" + std::to_string(n);
    if (cfg.stab.mode == StabMode::None) {
      bool mono = true;
      for (std::size_t i = 1; i < beta.size(); ++i)
        if (sweep[i] < sweep[i - 1]) mono = mono && beta[i] > beta[i - 1];
      add_check(res, "local beta grows as the cut shrinks, " + tag, mono,
                "from " + fmt(beta.front()) + " to " + fmt(beta.back()));
    } else {
      double rr = ratio(ctrl);
      add_check(res, "extended control independent of the cut, " + tag, rr < 2.0, "max/min " + fmt(rr) + " (< 2)");
    }
  }
  return res;
}

StudyResult run_solve(const StudyConfig& cfg) {
  StudyResult res;
  auto meshes = meshes_or(cfg, {16});
  std::string geometry = cfg.geometry.empty() ? "circle:0.5,0.5,0.4" : cfg.geometry;
  LevelSet geo = parse_level_set(geometry);
  QuadConfig quad = quad_for(cfg, 6);
  ProblemSpec prob = problem_for(cfg, "sinsin", CutBoundary::Dirichlet);
  PrecondKind kind = cfg.precond.value_or(PrecondKind::Additive);
  for (int n : meshes) {
    auto t0 = Clock::now();
    auto mesh = BackgroundMesh::unit_square(n);
    auto d = discretize(mesh, geo, cfg.p, quad, cfg.stab, cfg.exec);
    auto sys = assemble(d, prob, cfg.stab, cfg.exec);
    Solved s = solve_iterative(d, sys, cfg, kind, sys.b);
    auto nrm = field_norms(d, sys, cfg.stab, prob, sys.expand(s.x), &prob.solution);
    StudyRow r = base_row(cfg, geometry);
    r.precond = to_string(kind);
    r.h = mesh.h();
    r.eta_min = d.active.eta_min();
    r.energy_err = nrm.energy;
    r.l2_err = nrm.l2;
    r.iters = s.report.iterations;
    r.residual = s.report.residual;
    if (cfg.timing) r.runtime_ms = elapsed_ms(t0);
    res.rows.push_back(r);
    add_check(res, "solver converged, n=" + std::to_string(n), s.report.converged,
              "relative residual " + fmt(s.report.residual));
  }
  return res;
}

StudyResult run_study(const StudyConfig& cfg) {
  switch (cfg.kind) {
    case StudyKind::Solve: return run_solve(cfg);
    case StudyKind::Conditioning: return run_conditioning(cfg);
    case StudyKind::Convergence: return run_convergence(cfg);
    case StudyKind::Schwarz: return run_schwarz(cfg);
    case StudyKind::Stability: return run_stability(cfg);
  }
  return {};
}

}  // namespace immersed
