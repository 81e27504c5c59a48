#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "immersed/studies.hpp"
#include "json.hpp"

using namespace immersed;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "immersed_test_studies";
  fs::create_directories(dir);
  return dir / name;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(IMMERSED_CLI) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

StudyRow sample_row() {
  StudyRow r;
  r.study = "conditioning";
  r.geometry = "corner:0.5,0.5,0.01";
  r.p = 2;
  r.stab = "ghost-face";
  r.precond = "as";
  r.h = 0.125;
  r.eta_min = 1.0 / 3.0;
  r.kappa_raw = 12345.678901234567;
  r.lambda_min = 1e-300;
  r.iters = 17;
  return r;
}

StudyConfig small_conditioning() {
  StudyConfig cfg;
  cfg.kind = StudyKind::Conditioning;
  cfg.meshes = {4};
  cfg.sweep = {1e-1, 1e-2, 1e-3};
  return cfg;
}

}  // namespace

TEST_CASE("csv layout") {
  std::ostringstream os;
  write_csv(os, {sample_row()});
  std::string text = os.str();
  auto nl = text.find('\n');
  CHECK(text.substr(0, nl) == kCsvHeader);
  std::string line = text.substr(nl + 1);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(line.find("0.33333333333333331") != std::string::npos);
  // kappa_jacobi, lambda_max, energy_err, l2_err, residual, runtime_ms are empty
  CHECK(line.find(",,") != std::string::npos);
  CHECK(line.back() == '\n');
  CHECK(line.substr(line.size() - 2) == ",\n");
}

TEST_CASE("csv round trip") {
  StudyRow a = sample_row(), b;
  b.study = "schwarz";
  b.geometry = "circle:0.5,0.5,0.3";
  b.stab = "none";
  b.precond = "none";
  b.residual = 3.2e-9;
  b.runtime_ms = 0.5;
  b.energy_err = std::nextafter(1.0, 2.0);
  std::stringstream ss;
  write_csv(ss, {a, b});
  auto back = read_csv(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == a);
  CHECK(back[1] == b);
}

TEST_CASE("json rows use the csv keys") {
  std::ostringstream os;
  write_json(os, {sample_row()});
  auto j = nlohmann::json::parse(os.str());
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 1);
  std::vector<std::string> keys;
  std::stringstream header(kCsvHeader);
  for (std::string k; std::getline(header, k, ',');) keys.push_back(k);
  CHECK(j[0].size() == keys.size());
  for (const auto& k : keys) CHECK(j[0].contains(k));
  CHECK(j[0]["iters"] == 17);
  CHECK(j[0]["kappa_jacobi"].is_null());
  CHECK(j[0]["geometry"] == "corner:0.5,0.5,0.01");
}

TEST_CASE("emit") {
  CHECK_THROWS(emit({}, "csv", scratch("empty.csv").string()));
  CHECK_THROWS(emit({sample_row()}, "csv", "/nonexistent/dir/out.csv"));
  CHECK_THROWS(emit({sample_row()}, "xml", scratch("x.xml").string()));
  emit({sample_row()}, "json", scratch("one.json").string());
  CHECK(nlohmann::json::parse(read_file(scratch("one.json"))).size() == 1);
}

TEST_CASE("sweep parsing") {
  auto s = parse_sweep("log:1e-1:1e-4:7");
  REQUIRE(s.size() == 7);
  CHECK(s.front() == 1e-1);
  CHECK(s.back() == 1e-4);
  CHECK(s[2] == doctest::Approx(1e-2).epsilon(1e-12));
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] / s[i - 1] == doctest::Approx(std::pow(10.0, -0.5)));
  CHECK(parse_sweep("0.5,0.25") == std::vector<double>{0.5, 0.25});
  CHECK(parse_sweep("log:2:2:1") == std::vector<double>{2.0});
  CHECK_THROWS(parse_sweep("log:-1:1e-2:3"));
  CHECK_THROWS(parse_sweep("log:1:1e-2:0"));
  CHECK_THROWS(parse_sweep("log:1:1e-2"));
  CHECK_THROWS(parse_sweep(""));
  CHECK_THROWS(parse_sweep("1,abc"));
}

TEST_CASE("line fit") {
  auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7}, "exact");
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK_FALSE(f.flagged);
  auto g = fit_line({0, 1, 2, 3}, {0, 1, 0, 1});
  CHECK(g.r2 < 0.95);
  CHECK(g.flagged);
  CHECK_THROWS(fit_line({1}, {1}));
}

TEST_CASE("study kinds") {
  for (auto k : {StudyKind::Solve, StudyKind::Conditioning, StudyKind::Convergence, StudyKind::Schwarz,
                 StudyKind::Stability})
    CHECK(parse_study_kind(to_string(k)) == k);
  CHECK_THROWS(parse_study_kind("plot"));
}

TEST_CASE("conditioning study rows follow the sweep") {
  auto res = run_study(small_conditioning());
  REQUIRE(res.rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(res.rows[i].eta_min.value() == doctest::Approx(small_conditioning().sweep[i]).epsilon(1e-4));
    CHECK(res.rows[i].kappa_raw.has_value());
    CHECK(res.rows[i].kappa_jacobi.has_value());
    CHECK_FALSE(res.rows[i].runtime_ms.has_value());
    CHECK_FALSE(res.rows[i].iters.has_value());
  }
  CHECK(res.rows[2].kappa_raw > res.rows[0].kappa_raw);
  CHECK_FALSE(res.fits.empty());
}

TEST_CASE("identical configs give byte-identical csv") {
  auto cfg = small_conditioning();
  std::ostringstream a, b;
  write_csv(a, run_study(cfg).rows);
  cfg.exec = Execution::Serial;
  write_csv(b, run_study(cfg).rows);
  CHECK(a.str() == b.str());

  StudyConfig sw;
  sw.kind = StudyKind::Schwarz;
  sw.meshes = {8};
  sw.sweep = {1e-2, 1e-4};
  sw.rhs = "random";
  std::ostringstream c, d;
  write_csv(c, run_study(sw).rows);
  write_csv(d, run_study(sw).rows);
  CHECK(c.str() == d.str());
  sw.seed = 7;
  std::ostringstream e;
  write_csv(e, run_study(sw).rows);
  CHECK(e.str() != c.str());
}

TEST_CASE("patch test through the convergence study") {
  StudyConfig cfg;
  cfg.kind = StudyKind::Convergence;
  cfg.meshes = {8, 16};
  cfg.mms = "xy";
  cfg.stab.mode = StabMode::GhostFace;
  auto res = run_study(cfg);
  REQUIRE(res.rows.size() == 2);
  for (const auto& r : res.rows) CHECK(r.energy_err.value() < 1e-7);
  CHECK(res.all_passed());
}

TEST_CASE("command line") {
  auto out = scratch("cli.csv");
  fs::remove(out);
  CHECK(run_cli("conditioning --mesh 4 --sweep 0.1,0.01 --out " + out.string()) == 0);
  auto text = read_file(out);
  CHECK(text.rfind(kCsvHeader, 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);

  // flags override the config file
  auto cfg = scratch("study.cfg");
  {
    std::ofstream f(cfg);
    f << "mesh 4\nsweep 0.1,0.01,0.001\np 1\n";
  }
  auto out2 = scratch("cli2.json");
  CHECK(run_cli("conditioning --config " + cfg.string() + " --sweep 0.1 --format json --out " + out2.string()) == 0);
  CHECK(nlohmann::json::parse(read_file(out2)).size() == 1);

  CHECK(run_cli("conditioning --mesh 4 --sweep 0.1 --stab bogus") == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("conditioning --mesh 4 --sweep 0.1 --out /nonexistent/dir/x.csv") == 1);
  CHECK(run_cli("--help") == 0);
  // eta near 1 is far from the small-cut slope of 2
  CHECK(run_cli("conditioning --mesh 4 --sweep 0.9,0.8 --check --out " + out.string()) == 2);
  CHECK(run_cli("convergence --mesh 8,16 --mms xy --stab ghost-face --check --out " + out.string()) == 0);
}
