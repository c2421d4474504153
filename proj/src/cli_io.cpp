#include "expander/cli_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

#include "expander/barrier_forge.hpp"

namespace expander {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Shortest text that parses back to the same double.
std::string fmt_short(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

struct Pos {
  int line = 1, col = 1;
};

[[noreturn]] void parse_fail(const Pos& at, const std::string& what) {
  std::ostringstream os;
  os << "line " << at.line << ", column " << at.col << ": " << what;
  throw Error(ErrorCode::ParseError, os.str());
}

struct Entry {
  std::string key, value;
  Pos key_at, value_at;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Splits into entries at top-level commas and newlines, dropping comments.
std::vector<Entry> tokenize(const std::string& text) {
  std::vector<Entry> out;
  std::string cur;
  Pos cur_at, at;
  int depth = 0;
  bool comment = false;
  auto flush = [&] {
    const std::string t = trim(cur);
    if (!t.empty()) {
      const auto eq = cur.find('=');
      if (eq == std::string::npos) parse_fail(cur_at, "expected key=value, got '" + t + "'");
      Entry e;
      e.key = trim(cur.substr(0, eq));
      e.value = trim(cur.substr(eq + 1));
      const auto lead = cur.find_first_not_of(" \t\r");
      e.key_at = {cur_at.line, cur_at.col + static_cast<int>(lead)};
      const auto vlead = cur.find_first_not_of(" \t\r", eq + 1);
      e.value_at = {cur_at.line, cur_at.col + static_cast<int>(vlead == std::string::npos ? eq + 1 : vlead)};
      if (e.key.empty()) parse_fail(e.key_at, "empty key");
      if (e.value.empty()) parse_fail(e.value_at, "empty value for key '" + e.key + "'");
      out.push_back(std::move(e));
    }
    cur.clear();
  };
  cur_at = at;
  for (char c : text) {
    if (comment && c != '\n') {
      ++at.col;
      continue;
    }
    if (c == '#') {
      comment = true;
    } else if (c == '\n') {
      if (depth != 0) parse_fail(at, "unterminated list");
      flush();
      comment = false;
      ++at.line;
      at.col = 1;
      cur_at = at;
      continue;
    } else if (c == ',' && depth == 0) {
      flush();
      ++at.col;
      cur_at = at;
      continue;
    } else {
      if (c == '[') ++depth;
      if (c == ']' && --depth < 0) parse_fail(at, "unbalanced ']'");
      cur.push_back(c);
    }
    ++at.col;
  }
  if (depth != 0) parse_fail(at, "unterminated list");
  flush();
  return out;
}

double to_double(const std::string& v, const Pos& at, const std::string& key) {
  double x = 0.0;
  const char* b = v.data();
  const char* e = b + v.size();
  if (!v.empty() && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, x);
  if (ec != std::errc() || p != e || !std::isfinite(x)) parse_fail(at, "'" + v + "' is not a real number for key '" + key + "'");
  return x;
}

int to_int(const std::string& v, const Pos& at, const std::string& key) {
  int x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) parse_fail(at, "'" + v + "' is not an integer for key '" + key + "'");
  return x;
}

std::vector<std::string> list_items(const std::string& v, const Pos& at, const std::string& key) {
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') parse_fail(at, "key '" + key + "' expects a list [..]");
  std::vector<std::string> items;
  std::string cur;
  for (char c : v.substr(1, v.size() - 2)) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) items.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) items.push_back(cur);
  return items;
}

std::vector<double> to_doubles(const std::string& v, const Pos& at, const std::string& key) {
  std::vector<double> out;
  for (const auto& it : list_items(v, at, key)) out.push_back(to_double(it, at, key));
  return out;
}

std::vector<CosineTerm> to_terms(const std::string& v, const Pos& at, const std::string& key) {
  std::vector<CosineTerm> out;
  for (const auto& it : list_items(v, at, key)) {
    std::vector<std::string> parts;
    std::stringstream ss(it);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.size() < 2 || parts.size() > 3) parse_fail(at, "cosine term '" + it + "' must be m:amplitude[:phase]");
    CosineTerm t;
    t.frequency = to_int(parts[0], at, key);
    t.amplitude = to_double(parts[1], at, key);
    if (parts.size() == 3) t.phase = to_double(parts[2], at, key);
    out.push_back(t);
  }
  return out;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "n", "k", "alpha", "phi.mode", "phi.c0", "phi.coefficients", "grid.n_r", "grid.n_theta", "grid.grading",
      "grid.stencil_width", "grid.scheme", "schedule.s_values", "schedule.r_values", "newton.tol",
      "newton.max_iters", "newton.damping_floor", "audit.delta0", "audit.delta1"};
  return keys;
}

void assign(RunConfig& c, const Entry& e) {
  const auto& k = e.key;
  const auto& v = e.value;
  const Pos& at = e.value_at;
  if (k == "n") c.spec.n = to_int(v, at, k);
  else if (k == "k") c.spec.k = to_int(v, at, k);
  else if (k == "alpha") c.spec.alpha = to_double(v, at, k);
  else if (k == "phi.mode") {
    if (v == "constant") c.spec.phi.mode = BoundaryData::Mode::constant;
    else if (v == "cosine" || v == "cosine_series") c.spec.phi.mode = BoundaryData::Mode::cosine_series;
    else parse_fail(at, "phi.mode must be constant or cosine, got '" + v + "'");
  } else if (k == "phi.c0") c.spec.phi.c0 = to_double(v, at, k);
  else if (k == "phi.coefficients") c.spec.phi.terms = to_terms(v, at, k);
  else if (k == "grid.n_r") c.grid.n_r = to_int(v, at, k);
  else if (k == "grid.n_theta") c.grid.n_theta = to_int(v, at, k);
  else if (k == "grid.grading") c.grid.grading_exponent = to_double(v, at, k);
  else if (k == "grid.stencil_width") c.grid.stencil_width = to_int(v, at, k);
  else if (k == "grid.scheme") {
    try {
      c.scheme = parse_scheme(v);
    } catch (const Error&) {
      parse_fail(at, "grid.scheme must be polar or monotone, got '" + v + "'");
    }
  } else if (k == "schedule.s_values") c.schedule.s_values = to_doubles(v, at, k);
  else if (k == "schedule.r_values") c.schedule.r_values = to_doubles(v, at, k);
  else if (k == "newton.tol") c.schedule.newton_tol = to_double(v, at, k);
  else if (k == "newton.max_iters") c.schedule.max_newton_iters = to_int(v, at, k);
  else if (k == "newton.damping_floor") c.schedule.damping_floor = to_double(v, at, k);
  else if (k == "audit.delta0") c.delta0 = to_double(v, at, k);
  else if (k == "audit.delta1") c.delta1 = to_double(v, at, k);
  else parse_fail(e.key_at, "unknown key '" + k + "'");
}

void validate(const RunConfig& c, bool coefficients_given) {
  ValidationResult r = validate_spec(c.spec);
  const auto sr = validate_schedule(c.schedule);
  r.violations.insert(r.violations.end(), sr.violations.begin(), sr.violations.end());
  if (c.spec.phi.mode == BoundaryData::Mode::constant && coefficients_given) {
    r.violations.push_back({ErrorCode::ValidationError, "phi.coefficients needs phi.mode=cosine"});
  }
  if (c.grid.n_r < 4 || c.grid.n_theta < 8 || c.grid.n_theta % 2 != 0) {
    r.violations.push_back({ErrorCode::DegenerateGrid, "grid needs n_r >= 4 and an even n_theta >= 8"});
  }
  if (!(c.grid.grading_exponent >= 1.0) || c.grid.stencil_width < 1) {
    r.violations.push_back({ErrorCode::DegenerateGrid, "grid.grading must be >= 1 and grid.stencil_width >= 1"});
  }
  if (!(c.delta0 > 0.0 && c.delta0 <= 0.2)) {
    r.violations.push_back({ErrorCode::BadConstant, "audit.delta0 must lie in (0, 0.2]"});
  }
  if (!(c.delta1 > 0.0 && c.delta1 < 1.0)) {
    r.violations.push_back({ErrorCode::BadConstant, "audit.delta1 must lie in (0, 1)"});
  }
  if (!r.ok()) throw Error(ErrorCode::ValidationError, r.summary());
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  return os;
}

void close_checked(std::ofstream& os, const fs::path& path) {
  os.close();
  if (!os) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_echo(std::ostream& os, const RunConfig* echo) {
  if (!echo) return;
  std::istringstream lines(config_to_text(*echo));
  std::string l;
  while (std::getline(lines, l)) os << "# config: " << l << "\n";
}

std::string kind_name(CaseTag k) { return k == CaseTag::gauss ? "gauss" : "quotient"; }

struct FieldFile {
  DualField field;
  CaseTag kind = CaseTag::gauss;
  std::optional<RunConfig> config;
};

FieldFile load_field(const fs::path& path) {
  const std::string text = read_text(path);
  std::istringstream is(text);
  std::map<std::string, std::string> head;
  std::string config_text;
  std::vector<double> values;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(line.substr(1));
      if (body.rfind("config: ", 0) == 0) {
        config_text += body.substr(8) + "\n";
        continue;
      }
      const auto eq = body.find('=');
      if (eq != std::string::npos) head[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
      continue;
    }
    std::stringstream row(line);
    std::string cell;
    for (int c = 0; c < 5; ++c) {
      if (!std::getline(row, cell, ',')) parse_fail({lineno, 1}, "row has fewer than 8 columns");
    }
    values.push_back(to_double(trim(cell), {lineno, 1}, "u_star"));
  }
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = head.find(key);
    if (it == head.end()) parse_fail({1, 1}, "field header lacks '" + key + "'");
    return it->second;
  };
  GridSpec gs;
  gs.n_r = to_int(need("n_r"), {1, 1}, "n_r");
  gs.n_theta = to_int(need("n_theta"), {1, 1}, "n_theta");
  gs.grading_exponent = to_double(need("grading"), {1, 1}, "grading");
  gs.stencil_width = to_int(need("stencil_width"), {1, 1}, "stencil_width");
  const double radius = to_double(need("radius"), {1, 1}, "radius");
  FieldFile f;
  f.field.grid = std::make_shared<BallGrid>(build_grid(gs, radius));
  f.field.param = to_double(need("param"), {1, 1}, "param");
  f.kind = need("kind") == "quotient" ? CaseTag::quotient : CaseTag::gauss;
  if (static_cast<int>(values.size()) != f.field.grid->node_count()) {
    std::ostringstream os;
    os << values.size() << " rows for " << f.field.grid->node_count() << " nodes";
    parse_fail({lineno, 1}, os.str());
  }
  f.field.values = std::move(values);
  if (!config_text.empty()) f.config = parse_config(config_text);
  return f;
}

std::string field_name(const std::string& stem, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%02zu.csv", stem.c_str(), i);
  return buf;
}

void write_manifest(const fs::path& out, const std::string& command, const RunConfig& cfg,
                    const std::vector<std::string>& files) {
  auto os = open_out(out / "manifest.txt");
  os << "command=" << command << "\n";
  os << "deterministic=true\n";
  os << "config=config.txt\n";
  for (const auto& f : files) os << "file=" << f << "\n";
  close_checked(os, out / "manifest.txt");
  auto cs = open_out(out / "config.txt");
  cs << config_to_text(cfg);
  close_checked(cs, out / "config.txt");
}

std::map<std::string, std::string> read_manifest(const fs::path& dir) {
  std::istringstream is(read_text(dir / "manifest.txt"));
  std::map<std::string, std::string> m;
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos && line.substr(0, eq) != "file") m[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return m;
}

void require_planar(const RunConfig& cfg) {
  if (cfg.spec.n != 2) {
    throw Error(ErrorCode::ValidationError, "the grid solver is two-dimensional; use the radial oracle for n > 2");
  }
}

PrimalSurface reconstruct(const DualField& f, const BoundaryData* phi, double rmax = 50.0, int n_angles = 32) {
  std::vector<double> xs, ys;
  polar_samples(reconstruction_radii(rmax), n_angles, xs, ys);
  return legendre_transform(f, xs, ys, 1e-6, f.grid->radius == 1.0 ? phi : nullptr);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  Pos end_at{1, 1};
  for (char c : text) {
    if (c == '\n') ++end_at.line, end_at.col = 1;
    else ++end_at.col;
  }
  for (const auto& e : tokenize(text)) {
    if (!known_keys().count(e.key)) parse_fail(e.key_at, "unknown key '" + e.key + "'");
    if (!seen.insert(e.key).second) parse_fail(e.key_at, "key '" + e.key + "' given twice");
    assign(cfg, e);
  }
  if (seen.count("phi.coefficients") && !seen.count("phi.mode")) cfg.spec.phi.mode = BoundaryData::Mode::cosine_series;
  if (!seen.count("n")) {
    if (seen.count("alpha") && seen.count("k") && (!(cfg.spec.alpha > 0.0) || cfg.spec.alpha > cfg.spec.k)) {
      std::ostringstream os;
      os << "alpha=" << cfg.spec.alpha << " must satisfy 0 < alpha <= k=" << cfg.spec.k;
      throw Error(ErrorCode::ValidationError, os.str());
    }
    parse_fail(end_at, "missing required key 'n'");
  }
  if (!seen.count("alpha")) parse_fail(end_at, "missing required key 'alpha'");
  if (!seen.count("k")) cfg.spec.k = cfg.spec.n;
  validate(cfg, seen.count("phi.coefficients") > 0);
  return cfg;
}

RunConfig read_config(const fs::path& path) { return parse_config(read_text(path)); }

void apply_override(RunConfig& cfg, const std::string& assignment) {
  auto entries = tokenize(assignment);
  if (entries.size() != 1) parse_fail({1, 1}, "override must be a single key=value");
  const auto& e = entries[0];
  if (!known_keys().count(e.key)) parse_fail(e.key_at, "unknown key '" + e.key + "'");
  assign(cfg, e);
  if (e.key == "phi.coefficients") cfg.spec.phi.mode = BoundaryData::Mode::cosine_series;
  validate(cfg, !cfg.spec.phi.terms.empty());
}

std::string config_to_text(const RunConfig& c) {
  std::ostringstream os;
  auto list = [](const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt_short(v[i]);
    return s + "]";
  };
  os << "n=" << c.spec.n << "\n";
  os << "k=" << c.spec.k << "\n";
  os << "alpha=" << fmt_short(c.spec.alpha) << "\n";
  const bool cosine = c.spec.phi.mode == BoundaryData::Mode::cosine_series;
  os << "phi.mode=" << (cosine ? "cosine" : "constant") << "\n";
  os << "phi.c0=" << fmt_short(c.spec.phi.c0) << "\n";
  if (cosine) {
    os << "phi.coefficients=[";
    for (std::size_t i = 0; i < c.spec.phi.terms.size(); ++i) {
      const auto& t = c.spec.phi.terms[i];
      os << (i ? ", " : "") << t.frequency << ":" << fmt_short(t.amplitude) << ":" << fmt_short(t.phase);
    }
    os << "]\n";
  }
  os << "grid.n_r=" << c.grid.n_r << "\n";
  os << "grid.n_theta=" << c.grid.n_theta << "\n";
  os << "grid.grading=" << fmt_short(c.grid.grading_exponent) << "\n";
  os << "grid.stencil_width=" << c.grid.stencil_width << "\n";
  os << "grid.scheme=" << to_string(c.scheme) << "\n";
  os << "schedule.s_values=" << list(c.schedule.s_values) << "\n";
  os << "schedule.r_values=" << list(c.schedule.r_values) << "\n";
  os << "newton.tol=" << fmt_short(c.schedule.newton_tol) << "\n";
  os << "newton.max_iters=" << c.schedule.max_newton_iters << "\n";
  os << "newton.damping_floor=" << fmt_short(c.schedule.damping_floor) << "\n";
  os << "audit.delta0=" << fmt_short(c.delta0) << "\n";
  os << "audit.delta1=" << fmt_short(c.delta1) << "\n";
  return os.str();
}

void export_field(const DualField& field, const fs::path& path, CaseTag kind, const RunConfig* echo) {
  const BallGrid& g = *field.grid;
  FieldGeometry geo(field);
  const double s = kind == CaseTag::gauss ? field.param : 1.0;
  auto os = open_out(path);
  os << "# expander dual field\n";
  os << "# kind=" << kind_name(kind) << "\n";
  os << "# param=" << fmt(field.param) << "\n";
  os << "# radius=" << fmt(g.radius) << "\n";
  os << "# n_r=" << g.n_r << "\n";
  os << "# n_theta=" << g.n_theta << "\n";
  os << "# grading=" << fmt(g.grading) << "\n";
  os << "# stencil_width=" << g.stencil_width << "\n";
  write_echo(os, echo);
  os << "# columns: r,theta,xi1,xi2,u_star,grad_norm,h,flags\n";
  for (int p = 0; p < g.node_count(); ++p) {
    const auto& d = geo.gradient()[p];
    os << fmt(g.rho[p]) << ',' << fmt(g.theta[p]) << ',' << fmt(g.x[p]) << ',' << fmt(g.y[p]) << ','
       << fmt(field.values[p]) << ',' << fmt(std::hypot(d[0], d[1])) << ','
       << fmt(1.0 - s * g.rho[p] * g.rho[p]) << ',' << (g.boundary[p] ? 1 : 0) << "\n";
  }
  close_checked(os, path);
}

DualField import_field(const fs::path& path) { return load_field(path).field; }

void export_surface(const PrimalSurface& s, const fs::path& path, const RunConfig* echo) {
  auto os = open_out(path);
  os << "# expander primal surface\n";
  write_echo(os, echo);
  os << "# columns: x,y,u,dux,duy,kappa1,kappa2,v,xi_norm,boundary_supported\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    os << fmt(s.x[i]) << ',' << fmt(s.y[i]) << ',' << fmt(s.u[i]) << ',' << fmt(s.dux[i]) << ','
       << fmt(s.duy[i]) << ',' << fmt(s.kappa[i][0]) << ',' << fmt(s.kappa[i][1]) << ',' << fmt(s.v[i]) << ','
       << fmt(s.xi_norm[i]) << ',' << (s.boundary_supported[i] ? 1 : 0) << "\n";
  }
  close_checked(os, path);
}

void export_trace(const SolveTrace& trace, const fs::path& path) {
  auto os = open_out(path);
  os << "# columns: param,iterations,residual_scaled,residual_l2,substeps,roundoff_limited,damping\n";
  for (const auto& st : trace.steps) {
    os << fmt(st.param) << ',' << st.iterations << ',' << fmt(st.residual_scaled) << ',' << fmt(st.residual_l2)
       << ',' << st.substeps << ',' << (st.roundoff_limited ? 1 : 0) << ',';
    for (std::size_t i = 0; i < st.damping.size(); ++i) os << (i ? ";" : "") << fmt(st.damping[i]);
    os << "\n";
  }
  close_checked(os, path);
}

void export_profile(const RadialProfile& P, const fs::path& path) {
  auto os = open_out(path);
  os << "# radial profile\n";
  os << "# n=" << P.n << "\n";
  os << "# param=" << fmt(P.param) << "\n";
  os << "# radius=" << fmt(P.radius) << "\n";
  os << "# max_residual=" << fmt(P.max_residual) << "\n";
  os << "# shooting_monotone=" << (P.shooting_monotone ? "true" : "false") << "\n";
  os << "# columns: r,u_star,du_star,d2u_star\n";
  for (std::size_t i = 0; i < P.radii.size(); ++i) {
    os << fmt(P.radii[i]) << ',' << fmt(P.values[i]) << ',' << fmt(P.derivative[i]) << ',' << fmt(P.second[i])
       << "\n";
  }
  close_checked(os, path);
}

std::string report_to_text(const EstimateReport& rep) {
  std::ostringstream os;
  os << "# expander estimate report\n";
  if (rep.records.empty() && rep.metadata.empty()) return os.str();
  os << "report {\n";
  os << "  passed = " << (rep.passed ? "true" : "false") << "\n";
  os << "  metadata {\n";
  for (const auto& [k, v] : rep.metadata) os << "    " << k << " = " << v << "\n";
  os << "  }\n";
  os << "  failures {\n";
  for (const auto& f : rep.failures) os << "    - " << f << "\n";
  os << "  }\n";
  for (const auto& r : rep.records) {
    os << "  check " << r.name << " {\n";
    os << "    anchor = " << r.anchor << "\n";
    os << "    passed = " << (r.passed ? "true" : "false") << "\n";
    os << "    threshold = " << fmt(r.threshold) << "\n";
    os << "    threshold_rule = " << r.threshold_rule << "\n";
    os << "    worst_node = " << r.worst_node << "\n";
    os << "    worst_x = " << fmt(r.worst_x) << "\n";
    os << "    worst_y = " << fmt(r.worst_y) << "\n";
    if (!r.note.empty()) os << "    note = " << r.note << "\n";
    os << "    quantities {\n";
    for (const auto& [k, v] : r.quantities) os << "      " << k << " = " << fmt(v) << "\n";
    os << "    }\n";
    os << "  }\n";
  }
  os << "}\n";
  return os.str();
}

void export_report(const EstimateReport& report, const fs::path& path) {
  auto os = open_out(path);
  os << report_to_text(report);
  close_checked(os, path);
}

void emit_plotdata(const PrimalSurface& s, const BoundaryData& phi, const fs::path& path) {
  struct Row {
    long long key;
    double theta, R, excess;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double R = std::hypot(s.x[i], s.y[i]);
    if (R == 0.0) continue;
    double th = std::atan2(s.y[i], s.x[i]);
    if (th < 0.0) th += 2.0 * std::numbers::pi;
    rows.push_back({std::llround(th * 1e9), th, R, s.u[i] - R});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.key != b.key ? a.key < b.key : a.R < b.R;
  });
  auto os = open_out(path);
  os << "# per-ray asymptotics u(R theta) - R against phi(theta)\n";
  os << "# columns: theta,R,u_minus_R,phi\n";
  for (const auto& r : rows) {
    os << fmt(r.theta) << ',' << fmt(r.R) << ',' << fmt(r.excess) << ',' << fmt(phi.value(r.theta)) << "\n";
  }
  close_checked(os, path);
}

std::vector<std::pair<std::string, std::string>> report_metadata(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> m;
  std::istringstream lines(config_to_text(cfg));
  std::string l;
  while (std::getline(lines, l)) {
    const auto eq = l.find('=');
    m.emplace_back(l.substr(0, eq), l.substr(eq + 1));
  }
  return m;
}

std::vector<double> reconstruction_radii(double rmax) {
  std::vector<double> r;
  for (int i = 0; i * 0.125 <= std::min(rmax, 2.0); ++i) r.push_back(i * 0.125);
  for (double R = 2.5; R <= std::min(rmax, 10.0); R += 0.5) r.push_back(R);
  for (double R = 11.0; R <= rmax; R += 1.0) r.push_back(R);
  return r;
}

void run_solve_gauss(const RunConfig& cfg, const fs::path& out) {
  require_planar(cfg);
  if (cfg.spec.case_tag() != CaseTag::gauss) throw Error(ErrorCode::ValidationError, "solve-gauss needs k = n");
  auto grid = std::make_shared<BallGrid>(build_grid(cfg.grid, 1.0));
  auto disc = make_discretization(grid, cfg.scheme);
  const auto B = build_gauss_barriers(cfg.spec, disc, cfg.schedule, cfg.delta0);
  const auto run = solve_gauss_dual(cfg.spec, disc, cfg.schedule);

  std::vector<std::string> files;
  auto put = [&](const DualField& f, const std::string& name) {
    export_field(f, out / name, CaseTag::gauss, &cfg);
    files.push_back(name);
  };
  for (std::size_t i = 0; i < run.fields.size(); ++i) put(run.fields[i], field_name("field", i));
  if (run.limit) put(run.limit->field, "limit.csv");
  for (std::size_t i = 0; i < B.ubar_star.run.fields.size(); ++i) put(B.ubar_star.run.fields[i], field_name("ubar", i));
  put(B.u0_star.last(), "u0_star.csv");
  if (B.super) put(B.super->field, "supersolution.csv");
  if (B.psi) put(B.psi->field, "psi.csv");
  export_trace(run.trace, out / "trace.csv");
  files.push_back("trace.csv");
  write_manifest(out, "solve-gauss", cfg, files);
}

void run_solve_quotient(const RunConfig& cfg, const fs::path& out, bool coarse) {
  require_planar(cfg);
  if (cfg.spec.case_tag() != CaseTag::quotient) throw Error(ErrorCode::ValidationError, "solve-quotient needs k < n");
  auto grid = std::make_shared<BallGrid>(build_grid(cfg.grid, 1.0));
  auto disc = make_discretization(grid, cfg.scheme);
  const auto B = build_quotient_barriers(cfg.spec, disc, cfg.schedule);
  const auto run = solve_quotient_dual(cfg.spec, cfg.grid, cfg.schedule, B.maclaurin.limit_or_last());

  std::vector<std::string> files;
  auto put = [&](const DualField& f, const std::string& name, CaseTag kind) {
    export_field(f, out / name, kind, &cfg);
    files.push_back(name);
  };
  for (std::size_t i = 0; i < run.fields.size(); ++i) put(run.fields[i], field_name("field", i), CaseTag::quotient);
  if (run.limit) put(run.limit->field, "limit.csv", CaseTag::quotient);
  put(B.maclaurin.limit_or_last(), "maclaurin.csv", CaseTag::quotient);
  put(B.sub100.limit_or_last(), "sub100.csv", CaseTag::quotient);
  put(B.const_super, "const_super.csv", CaseTag::quotient);

  GridSpec half = cfg.grid;
  half.n_r /= 2;
  half.n_theta /= 2;
  if (coarse && half.n_r >= 4 && half.n_theta >= 8 && half.n_theta % 2 == 0) {
    auto cgrid = std::make_shared<BallGrid>(build_grid(half, 1.0));
    auto cdisc = make_discretization(cgrid, cfg.scheme);
    const auto mac = maclaurin_subsolution(cfg.spec, cdisc, cfg.schedule);
    const auto crun = solve_quotient_dual(cfg.spec, half, cfg.schedule, mac.limit_or_last());
    put(crun.fields.back(), "coarse_last.csv", CaseTag::quotient);
  }
  export_trace(run.trace, out / "trace.csv");
  files.push_back("trace.csv");
  write_manifest(out, "solve-quotient", cfg, files);
}

void run_barriers(const RunConfig& cfg, const fs::path& out) {
  require_planar(cfg);
  auto grid = std::make_shared<BallGrid>(build_grid(cfg.grid, 1.0));
  auto disc = make_discretization(grid, cfg.scheme);
  std::vector<std::string> files;
  auto put = [&](const DualField& f, const std::string& name, CaseTag kind) {
    export_field(f, out / name, kind, &cfg);
    files.push_back(name);
  };
  if (cfg.spec.case_tag() == CaseTag::gauss) {
    const auto B = build_gauss_barriers(cfg.spec, disc, cfg.schedule, cfg.delta0);
    for (std::size_t i = 0; i < B.ubar_star.run.fields.size(); ++i)
      put(B.ubar_star.run.fields[i], field_name("ubar", i), CaseTag::gauss);
    put(B.u0_star.last(), "u0_star.csv", CaseTag::gauss);
    if (B.super) put(B.super->field, "supersolution.csv", CaseTag::gauss);
    if (B.psi) put(B.psi->field, "psi.csv", CaseTag::gauss);
  } else {
    const auto B = build_quotient_barriers(cfg.spec, disc, cfg.schedule);
    put(B.maclaurin.limit_or_last(), "maclaurin.csv", CaseTag::quotient);
    put(B.sub100.limit_or_last(), "sub100.csv", CaseTag::quotient);
    put(B.const_super, "const_super.csv", CaseTag::quotient);
  }
  write_manifest(out, "barriers", cfg, files);
}

EstimateReport run_audit(const fs::path& dir, const fs::path& out) {
  const auto manifest = read_manifest(dir);
  const RunConfig cfg = read_config(dir / "config.txt");
  const std::string command = manifest.count("command") ? manifest.at("command") : "";
  const auto& spec = cfg.spec;
  std::vector<CheckRecord> records;
  auto load = [&](const std::string& name) { return import_field(dir / name); };

  if (command == "solve-gauss") {
    std::vector<DualField> fields, ubar;
    for (std::size_t i = 0; i < cfg.schedule.s_values.size(); ++i) {
      fields.push_back(load(field_name("field", i)));
      ubar.push_back(load(field_name("ubar", i)));
    }
    const DualField u0 = load("u0_star.csv");
    records.push_back(check_c0_sandwich(fields, ubar, &u0, spec.c0_bound()));
    records.push_back(check_gradient_upper(fields));
    records.push_back(check_gradient_lower(fields.back(), cfg.delta1));
    records.push_back(check_eta_exponent(fields.back(), u0, m_alpha(spec.n, spec.alpha)));
    records.push_back(check_pogorelov_dual(fields, u0, make_pogorelov_dual(spec.n, spec.alpha)));
    const DualField lim = fs::exists(dir / "limit.csv") ? load("limit.csv") : fields.back();
    records.push_back(check_primal_certificate(reconstruct(lim, &spec.phi), spec));
    records.push_back(check_rhs_monotonicity(fields, spec));
    const double s_last = cfg.schedule.s_values.back();
    records.push_back(check_psi_barrier(boundary_barrier_psi(spec, s_last, u0)));
    double umin = 0.0;
    for (const auto& f : ubar) umin = std::min(umin, *std::min_element(f.values.begin(), f.values.end()));
    try {
      records.push_back(check_supersolution(build_supersolution(spec, fields.back().grid, s_last, cfg.delta0, -umin)));
    } catch (const Error& e) {
      CheckRecord rec;
      rec.name = "supersolution";
      rec.anchor = "rho Phi convex with det D^2(rho Phi) below the lower right-hand side bound";
      rec.note = e.what();
      records.push_back(rec);
    }
  } else if (command == "solve-quotient") {
    std::vector<DualField> fields;
    for (std::size_t i = 0; i < cfg.schedule.r_values.size(); ++i) fields.push_back(load(field_name("field", i)));
    const DualField mac = load("maclaurin.csv");
    const DualField sub100 = load("sub100.csv");
    const DualField sup = load("const_super.csv");
    records.push_back(check_c0_sandwich_quotient(fields, sup, mac));
    const PrimalSurface su = reconstruct(fields.back(), nullptr);
    records.push_back(check_gradient_estimate_bp(su, reconstruct(sup, &spec.phi), reconstruct(mac, &spec.phi),
                                                 reconstruct(sub100, &spec.phi), mac, sub100));
    if (fs::exists(dir / "coarse_last.csv")) {
      records.push_back(check_primal_pogorelov(reconstruct(load("coarse_last.csv"), nullptr), su));
    }
    records.push_back(check_quotient_residual_hyperbolic(fields.back(), spec));
    records.push_back(check_primal_certificate(su, spec));
    records.push_back(check_rhs_monotonicity(fields, spec));
  } else {
    throw Error(ErrorCode::ValidationError, "'" + dir.string() + "' holds no solve-gauss or solve-quotient output");
  }

  auto meta = report_metadata(cfg);
  meta.insert(meta.begin(), {"source", command});
  EstimateReport rep = emit_report(std::move(records), std::move(meta));
  export_report(rep, out / "report.txt");
  return rep;
}

RadialProfile run_oracle(int n, int k, double alpha, double param, double boundary, const fs::path& out) {
  RadialProfile P = k == n ? solve_radial_gauss(n, alpha, param, boundary)
                           : solve_radial_quotient(n, k, alpha, param, boundary);
  if (!out.empty()) export_profile(P, out / "profile.csv");
  return P;
}

void run_reconstruct(const fs::path& field_path, double rmax, int n_angles, const fs::path& out) {
  const FieldFile f = load_field(field_path);
  const PrimalSurface s = reconstruct(f.field, f.config ? &f.config->spec.phi : nullptr, rmax, n_angles);
  const RunConfig* echo = f.config ? &*f.config : nullptr;
  export_surface(s, out / "surface.csv", echo);
  if (f.config) emit_plotdata(s, f.config->spec.phi, out / "plotdata.csv");
}

}  // namespace expander
