#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "immersed/studies.hpp"
#include "json.hpp"

namespace immersed {

namespace {

std::string num(const std::optional<double>& v) {
  if (!v) return {};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

std::string num(const std::optional<long long>& v) { return v ? std::to_string(*v) : std::string{}; }

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells(1);
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_quotes) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cells.back() += '"';
        ++i;
      } else if (c == '"') {
        in_quotes = false;
      } else {
        cells.back() += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      cells.emplace_back();
    } else {
      cells.back() += c;
    }
  }
  return cells;
}

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "' in CSV");
  return v;
}

template <class T>
nlohmann::json js(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<StudyRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << quoted(r.study) << ',' << quoted(r.geometry) << ',' << r.p << ',' << quoted(r.stab) << ','
       << quoted(r.precond) << ',' << num(r.h) << ',' << num(r.eta_min) << ',' << num(r.kappa_raw) << ','
       << num(r.kappa_jacobi) << ',' << num(r.lambda_min) << ',' << num(r.lambda_max) << ',' << num(r.energy_err)
       << ',' << num(r.l2_err) << ',' << num(r.iters) << ',' << num(r.residual) << ',' << num(r.runtime_ms)
       << '\n';
  }
}

void write_json(std::ostream& os, const std::vector<StudyRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["study"] = r.study;
    o["geometry"] = r.geometry;
    o["p"] = r.p;
    o["stab"] = r.stab;
    o["precond"] = r.precond;
    o["h"] = js(r.h);
    o["eta_min"] = js(r.eta_min);
    o["kappa_raw"] = js(r.kappa_raw);
    o["kappa_jacobi"] = js(r.kappa_jacobi);
    o["lambda_min"] = js(r.lambda_min);
    o["lambda_max"] = js(r.lambda_max);
    o["energy_err"] = js(r.energy_err);
    o["l2_err"] = js(r.l2_err);
    o["iters"] = js(r.iters);
    o["residual"] = js(r.residual);
    o["runtime_ms"] = js(r.runtime_ms);
    arr.push_back(std::move(o));
  }
  os << arr.dump(2) << '\n';
}

std::vector<StudyRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw std::invalid_argument("unexpected CSV header");
  std::vector<StudyRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto c = split_csv_line(line);
    if (c.size() != 16) throw std::invalid_argument("CSV row has " + std::to_string(c.size()) + " cells");
    StudyRow r;
    r.study = c[0];
    r.geometry = c[1];
    r.p = std::stoi(c[2]);
    r.stab = c[3];
    r.precond = c[4];
    r.h = parse_opt(c[5]);
    r.eta_min = parse_opt(c[6]);
    r.kappa_raw = parse_opt(c[7]);
    r.kappa_jacobi = parse_opt(c[8]);
    r.lambda_min = parse_opt(c[9]);
    r.lambda_max = parse_opt(c[10]);
    r.energy_err = parse_opt(c[11]);
    r.l2_err = parse_opt(c[12]);
    if (!c[13].empty()) r.iters = std::stoll(c[13]);
    r.residual = parse_opt(c[14]);
    r.runtime_ms = parse_opt(c[15]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void emit(const std::vector<StudyRow>& rows, std::string_view format, const std::string& path) {
  if (rows.empty()) throw std::invalid_argument("no rows to emit");
  if (format != "csv" && format != "json") throw std::invalid_argument("unknown format '" + std::string(format) + "'");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path + "'");
  if (format == "csv")
    write_csv(os, rows);
  else
    write_json(os, rows);
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace immersed
