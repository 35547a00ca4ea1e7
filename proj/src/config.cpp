#include "monoflow/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <Eigen/SVD>

namespace monoflow {

namespace {

using nlohmann::ordered_json;

// ---- schema -------------------------------------------------------------

const char* const kSetKeys[] = {"kind",   "dim", "lo",     "hi",   "G",
                                "rhs",    "center", "radius", "point"};
const char* const kFnKeys[] = {"kind", "dim", "P", "q", "c",
                               "weight", "p", "center"};

struct TableSchema {
  const char* name;
  std::vector<const char*> keys;
};

const std::vector<TableSchema>& schema() {
  static const std::vector<TableSchema> s = [] {
    std::vector<TableSchema> t;
    t.push_back({"system", {}});
    t.push_back({"system.operator",
                 {"kind", "dim", "matrix", "set", "lo", "hi", "G", "rhs",
                  "center", "radius", "point"}});
    t.push_back({"system.drift", {"kind", "F", "b", "level"}});
    t.push_back({"candidate", {"a"}});
    t.push_back({"candidate.v",
                 std::vector<const char*>(std::begin(kFnKeys),
                                          std::end(kFnKeys))});
    t.push_back({"candidate.w",
                 std::vector<const char*>(std::begin(kFnKeys),
                                          std::end(kFnKeys))});
    t.push_back({"region",
                 std::vector<const char*>(std::begin(kSetKeys),
                                          std::end(kSetKeys))});
    t.push_back({"invariance",
                 std::vector<const char*>(std::begin(kSetKeys),
                                          std::end(kSetKeys))});
    t.push_back({"run",
                 {"T", "h", "samples", "seed", "variant", "x0", "rho_bar",
                  "lambda_bar"}});
    t.push_back({"lcs", {"A", "B", "C", "D", "x0"}});
    return t;
  }();
  return s;
}

const TableSchema* find_table(const std::string& name) {
  for (const auto& t : schema())
    if (name == t.name) return &t;
  return nullptr;
}

[[noreturn]] void schema_fail(const std::string& msg, int line) {
  if (line > 0)
    fail(ErrorCode::SchemaError, msg + " at line " + std::to_string(line));
  fail(ErrorCode::SchemaError, msg);
}

// ---- raw text parsing ---------------------------------------------------

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

struct Scan {
  const std::string& s;
  size_t pos = 0;
  int line;
};

void skip_ws(Scan& sc) {
  while (sc.pos < sc.s.size() && std::isspace(
             static_cast<unsigned char>(sc.s[sc.pos])))
    ++sc.pos;
}

ordered_json scan_value(Scan& sc) {
  skip_ws(sc);
  if (sc.pos >= sc.s.size()) schema_fail("missing value", sc.line);
  char c = sc.s[sc.pos];
  if (c == '[') {
    ++sc.pos;
    ordered_json arr = ordered_json::array();
    skip_ws(sc);
    if (sc.pos < sc.s.size() && sc.s[sc.pos] == ']') {
      ++sc.pos;
      return arr;
    }
    while (true) {
      arr.push_back(scan_value(sc));
      skip_ws(sc);
      if (sc.pos >= sc.s.size())
        schema_fail("unterminated array", sc.line);
      if (sc.s[sc.pos] == ',') {
        ++sc.pos;
        continue;
      }
      if (sc.s[sc.pos] == ']') {
        ++sc.pos;
        return arr;
      }
      schema_fail("malformed array", sc.line);
    }
  }
  if (c == '"') {
    size_t end = sc.s.find('"', sc.pos + 1);
    if (end == std::string::npos)
      schema_fail("unterminated string", sc.line);
    std::string out = sc.s.substr(sc.pos + 1, end - sc.pos - 1);
    sc.pos = end + 1;
    return out;
  }
  size_t end = sc.pos;
  while (end < sc.s.size() && sc.s[end] != ',' && sc.s[end] != ']' &&
         !std::isspace(static_cast<unsigned char>(sc.s[end])))
    ++end;
  std::string tok = sc.s.substr(sc.pos, end - sc.pos);
  sc.pos = end;
  if (tok == "true") return true;
  if (tok == "false") return false;
  // integers keep their type so seeds round-trip exactly
  if (tok.find_first_not_of("0123456789") == std::string::npos &&
      !tok.empty()) {
    errno = 0;
    char* rest = nullptr;
    unsigned long long u = std::strtoull(tok.c_str(), &rest, 10);
    if (errno == 0 && rest && *rest == '\0')
      return static_cast<uint64_t>(u);
  }
  if (!tok.empty() && tok[0] == '-' &&
      tok.find_first_not_of("0123456789", 1) == std::string::npos) {
    errno = 0;
    char* rest = nullptr;
    long long v = std::strtoll(tok.c_str(), &rest, 10);
    if (errno == 0 && rest && *rest == '\0') return static_cast<int64_t>(v);
  }
  char* rest = nullptr;
  double d = std::strtod(tok.c_str(), &rest);
  if (!rest || *rest != '\0' || tok.empty())
    schema_fail("malformed value '" + tok + "'", sc.line);
  return d;
}

ordered_json parse_value(const std::string& raw, int line) {
  Scan sc{raw, 0, line};
  ordered_json v = scan_value(sc);
  skip_ws(sc);
  if (sc.pos != sc.s.size()) schema_fail("trailing characters", line);
  return v;
}

ordered_json* dig(ordered_json& tree, const std::string& dotted) {
  ordered_json* node = &tree;
  size_t start = 0;
  while (true) {
    size_t dot = dotted.find('.', start);
    std::string part = dotted.substr(start, dot - start);
    node = &(*node)[part];
    if (dot == std::string::npos) return node;
    start = dot + 1;
  }
}

const ordered_json* find_node(const ordered_json& tree,
                              const std::string& dotted) {
  const ordered_json* node = &tree;
  size_t start = 0;
  while (true) {
    size_t dot = dotted.find('.', start);
    std::string part = dotted.substr(start, dot - start);
    if (!node->is_object() || !node->contains(part)) return nullptr;
    node = &(*node)[part];
    if (dot == std::string::npos) return node;
    start = dot + 1;
  }
}

// ---- typed access -------------------------------------------------------

int line_of(const ScenarioConfig& cfg, const std::string& path) {
  auto it = cfg.lines.find(path);
  return it == cfg.lines.end() ? 0 : it->second;
}

double as_number(const ordered_json& v, const std::string& path, int line) {
  if (!v.is_number())
    schema_fail("key '" + path + "' must be a number", line);
  return v.get<double>();
}

int as_int(const ordered_json& v, const std::string& path, int line) {
  if (!v.is_number_integer() && !v.is_number_unsigned())
    schema_fail("key '" + path + "' must be an integer", line);
  return static_cast<int>(v.get<int64_t>());
}

uint64_t as_uint(const ordered_json& v, const std::string& path, int line) {
  if (!v.is_number_unsigned() &&
      !(v.is_number_integer() && v.get<int64_t>() >= 0))
    schema_fail("key '" + path + "' must be a nonnegative integer", line);
  return v.get<uint64_t>();
}

std::string as_string(const ordered_json& v, const std::string& path,
                      int line) {
  if (!v.is_string())
    schema_fail("key '" + path + "' must be a string", line);
  return v.get<std::string>();
}

Vector as_vector(const ordered_json& v, const std::string& path, int line) {
  if (!v.is_array())
    schema_fail("key '" + path + "' must be an array of numbers", line);
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      schema_fail("key '" + path + "' must be an array of numbers", line);
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  return out;
}

Matrix as_matrix(const ordered_json& v, const std::string& path, int line) {
  if (!v.is_array() || v.empty() || !v[0].is_array())
    schema_fail("key '" + path + "' must be an array of rows", line);
  const auto rows = static_cast<Eigen::Index>(v.size());
  const auto cols = static_cast<Eigen::Index>(v[0].size());
  Matrix out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = v[static_cast<size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      schema_fail("key '" + path + "' must be rectangular", line);
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& e = row[static_cast<size_t>(c)];
      if (!e.is_number())
        schema_fail("key '" + path + "' must hold numbers", line);
      out(r, c) = e.get<double>();
    }
  }
  return out;
}

// fetches table.key or reports the miss against the table's line
const ordered_json& need(const ScenarioConfig& cfg, const std::string& table,
                         const char* key) {
  const auto* node = find_node(cfg.tree, table + "." + key);
  if (!node)
    schema_fail("missing key '" + std::string(key) + "' in [" + table + "]",
                line_of(cfg, table));
  return *node;
}

const ordered_json* maybe(const ScenarioConfig& cfg, const std::string& table,
                          const char* key) {
  return find_node(cfg.tree, table + "." + key);
}

// ---- builders -----------------------------------------------------------

ConvexSet build_set(const ScenarioConfig& cfg, const std::string& table,
                    const char* kind_key) {
  const std::string kind = as_string(need(cfg, table, kind_key),
                                     table + "." + kind_key,
                                     line_of(cfg, table + "." + kind_key));
  auto vec = [&](const char* key) {
    return as_vector(need(cfg, table, key), table + "." + key,
                     line_of(cfg, table + "." + key));
  };
  auto mat = [&](const char* key) {
    return as_matrix(need(cfg, table, key), table + "." + key,
                     line_of(cfg, table + "." + key));
  };
  if (kind == "box") return ConvexSet::box(vec("lo"), vec("hi"));
  if (kind == "polyhedron") return ConvexSet::polyhedron(mat("G"), vec("rhs"));
  if (kind == "ball")
    return ConvexSet::ball(vec("center"),
                           as_number(need(cfg, table, "radius"),
                                     table + ".radius",
                                     line_of(cfg, table + ".radius")));
  if (kind == "singleton") return ConvexSet::singleton(vec("point"));
  if (kind == "whole-space")
    return ConvexSet::whole_space(as_int(need(cfg, table, "dim"),
                                         table + ".dim",
                                         line_of(cfg, table + ".dim")));
  schema_fail("unknown set kind '" + kind + "'",
              line_of(cfg, table + "." + kind_key));
}

MonotoneOperator build_operator(const ScenarioConfig& cfg) {
  const std::string table = "system.operator";
  const std::string kind = as_string(need(cfg, table, "kind"), table + ".kind",
                                     line_of(cfg, table + ".kind"));
  if (kind == "zero")
    return MonotoneOperator::zero(as_int(need(cfg, table, "dim"),
                                         table + ".dim",
                                         line_of(cfg, table + ".dim")));
  if (kind == "linear")
    return MonotoneOperator::linear(as_matrix(need(cfg, table, "matrix"),
                                              table + ".matrix",
                                              line_of(cfg, table + ".matrix")));
  if (kind == "normal-cone")
    return MonotoneOperator::normal_cone_of(build_set(cfg, table, "set"));
  schema_fail("unknown operator kind '" + kind + "'",
              line_of(cfg, table + ".kind"));
}

Drift build_drift(const ScenarioConfig& cfg) {
  const std::string table = "system.drift";
  const std::string kind = as_string(need(cfg, table, "kind"), table + ".kind",
                                     line_of(cfg, table + ".kind"));
  Matrix F = as_matrix(need(cfg, table, "F"), table + ".F",
                       line_of(cfg, table + ".F"));
  Vector b = maybe(cfg, table, "b")
                 ? as_vector(*maybe(cfg, table, "b"), table + ".b",
                             line_of(cfg, table + ".b"))
                 : Vector(Vector::Zero(F.rows()));
  if (kind == "affine") return Drift::affine(std::move(F), std::move(b));
  double level = maybe(cfg, table, "level")
                     ? as_number(*maybe(cfg, table, "level"), table + ".level",
                                 line_of(cfg, table + ".level"))
                     : 1.0;
  if (kind == "saturated")
    return Drift::saturated(std::move(F), std::move(b), level);
  if (kind == "tanh") return Drift::tanh_sat(std::move(F), std::move(b), level);
  schema_fail("unknown drift kind '" + kind + "'",
              line_of(cfg, table + ".kind"));
}

FunctionSpec build_function(const ScenarioConfig& cfg,
                            const std::string& table) {
  const std::string kind = as_string(need(cfg, table, "kind"), table + ".kind",
                                     line_of(cfg, table + ".kind"));
  if (kind == "quadratic") {
    Matrix P = as_matrix(need(cfg, table, "P"), table + ".P",
                         line_of(cfg, table + ".P"));
    Vector q = maybe(cfg, table, "q")
                   ? as_vector(*maybe(cfg, table, "q"), table + ".q",
                               line_of(cfg, table + ".q"))
                   : Vector(Vector::Zero(P.rows()));
    double c = maybe(cfg, table, "c")
                   ? as_number(*maybe(cfg, table, "c"), table + ".c",
                               line_of(cfg, table + ".c"))
                   : 0.0;
    return FunctionSpec::quadratic(std::move(P), std::move(q), c);
  }
  if (kind == "scaled-norm") {
    double weight = as_number(need(cfg, table, "weight"), table + ".weight",
                              line_of(cfg, table + ".weight"));
    int p = as_int(need(cfg, table, "p"), table + ".p",
                   line_of(cfg, table + ".p"));
    if (maybe(cfg, table, "center"))
      return FunctionSpec::scaled_norm(weight, p,
                                       as_vector(*maybe(cfg, table, "center"),
                                                 table + ".center",
                                                 line_of(cfg,
                                                         table + ".center")));
    return FunctionSpec::scaled_norm(weight, p,
                                     static_cast<Eigen::Index>(as_int(
                                         need(cfg, table, "dim"),
                                         table + ".dim",
                                         line_of(cfg, table + ".dim"))));
  }
  if (kind == "zero")
    return FunctionSpec::zero(as_int(need(cfg, table, "dim"), table + ".dim",
                                     line_of(cfg, table + ".dim")));
  schema_fail("unknown function kind '" + kind + "'",
              line_of(cfg, table + ".kind"));
}

double spectral_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

void validate(ScenarioConfig& cfg) {
  if (!(cfg.h > 0.0)) schema_fail("h must be positive", line_of(cfg, "run.h"));
  if (cfg.T < 0.0)
    schema_fail("T must be nonnegative", line_of(cfg, "run.T"));
  if (cfg.samples <= 0)
    schema_fail("samples must be positive", line_of(cfg, "run.samples"));
  if (cfg.rho_bar < 0.0)
    schema_fail("rho_bar must be nonnegative", line_of(cfg, "run.rho_bar"));
  if (!cfg.variant.empty() && cfg.variant != "i" && cfg.variant != "ii" &&
      cfg.variant != "iv" && cfg.variant != "v" && cfg.variant != "vi" &&
      cfg.variant != "min-section" && cfg.variant != "set-min")
    schema_fail("unknown variant '" + cfg.variant + "'",
                line_of(cfg, "run.variant"));
  if (cfg.system) {
    double cap = cfg.system->L_f > 0.0
                     ? std::min(0.1, 1.0 / (10.0 * cfg.system->L_f))
                     : 0.1;
    if (cfg.h > cap * (1.0 + 1e-12)) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%g", cap);
      schema_fail("h exceeds the stability cap " + std::string(buf),
                  line_of(cfg, "run.h"));
    }
  }
  if (cfg.lcs) {
    double nA = spectral_norm(cfg.lcs->A_lin);
    double cap = nA > 0.0 ? 1.0 / (10.0 * nA) : 0.1;
    if (cfg.h > cap * (1.0 + 1e-12)) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%g", cap);
      schema_fail("h exceeds the lcs stability cap " + std::string(buf),
                  line_of(cfg, "run.h"));
    }
  }
}

void build_typed(ScenarioConfig& cfg) {
  if (find_node(cfg.tree, "system.operator") ||
      find_node(cfg.tree, "system.drift")) {
    if (!find_node(cfg.tree, "system.operator"))
      schema_fail("missing table [system.operator]", line_of(cfg, "system"));
    if (!find_node(cfg.tree, "system.drift"))
      schema_fail("missing table [system.drift]", line_of(cfg, "system"));
    cfg.system = make_system(build_operator(cfg), build_drift(cfg));
  }
  if (find_node(cfg.tree, "candidate.v")) {
    FunctionSpec V = build_function(cfg, "candidate.v");
    FunctionSpec W = find_node(cfg.tree, "candidate.w")
                         ? build_function(cfg, "candidate.w")
                         : FunctionSpec::zero(V.dim());
    double a = maybe(cfg, "candidate", "a")
                   ? as_number(*maybe(cfg, "candidate", "a"), "candidate.a",
                               line_of(cfg, "candidate.a"))
                   : 0.0;
    cfg.candidate = make_candidate(std::move(V), std::move(W), a);
  }
  if (find_node(cfg.tree, "region"))
    cfg.region = build_set(cfg, "region", "kind");
  if (find_node(cfg.tree, "invariance"))
    cfg.invariant_set = build_set(cfg, "invariance", "kind");
  if (find_node(cfg.tree, "lcs")) {
    auto m = [&](const char* key) {
      return as_matrix(need(cfg, "lcs", key), std::string("lcs.") + key,
                       line_of(cfg, std::string("lcs.") + key));
    };
    cfg.lcs = make_lcs(m("A"), m("B"), m("C"), m("D"),
                       as_vector(need(cfg, "lcs", "x0"), "lcs.x0",
                                 line_of(cfg, "lcs.x0")));
  }
  if (const auto* v = maybe(cfg, "run", "T"))
    cfg.T = as_number(*v, "run.T", line_of(cfg, "run.T"));
  if (const auto* v = maybe(cfg, "run", "h"))
    cfg.h = as_number(*v, "run.h", line_of(cfg, "run.h"));
  if (const auto* v = maybe(cfg, "run", "samples"))
    cfg.samples = as_int(*v, "run.samples", line_of(cfg, "run.samples"));
  if (const auto* v = maybe(cfg, "run", "seed"))
    cfg.seed = as_uint(*v, "run.seed", line_of(cfg, "run.seed"));
  if (const auto* v = maybe(cfg, "run", "variant"))
    cfg.variant = as_string(*v, "run.variant", line_of(cfg, "run.variant"));
  if (const auto* v = maybe(cfg, "run", "x0"))
    cfg.x0 = as_vector(*v, "run.x0", line_of(cfg, "run.x0"));
  if (const auto* v = maybe(cfg, "run", "rho_bar"))
    cfg.rho_bar = as_number(*v, "run.rho_bar", line_of(cfg, "run.rho_bar"));
  if (const auto* v = maybe(cfg, "run", "lambda_bar"))
    cfg.lambda_bar =
        as_number(*v, "run.lambda_bar", line_of(cfg, "run.lambda_bar"));
}

// ---- canonical rendering and hashing ------------------------------------

std::string render_number(const ordered_json& v) {
  char buf[32];
  if (v.is_number_unsigned()) {
    std::snprintf(buf, sizeof buf, "%llu",
                  static_cast<unsigned long long>(v.get<uint64_t>()));
    return buf;
  }
  if (v.is_number_integer()) {
    std::snprintf(buf, sizeof buf, "%lld",
                  static_cast<long long>(v.get<int64_t>()));
    return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
  return buf;
}

void render_value(const ordered_json& v, std::string& out) {
  if (v.is_string()) {
    out += '"';
    out += v.get<std::string>();
    out += '"';
  } else if (v.is_boolean()) {
    out += v.get<bool>() ? "true" : "false";
  } else if (v.is_array()) {
    out += '[';
    for (size_t i = 0; i < v.size(); ++i) {
      if (i) out += ", ";
      render_value(v[i], out);
    }
    out += ']';
  } else {
    out += render_number(v);
  }
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::string serialize_config(const ScenarioConfig& cfg) {
  std::string out;
  for (const auto& t : schema()) {
    const auto* node = find_node(cfg.tree, t.name);
    if (!node || !node->is_object()) continue;
    bool any = false;
    for (const char* key : t.keys)
      if (node->contains(key)) any = true;
    if (!any) continue;
    out += '[';
    out += t.name;
    out += "]\n";
    for (const char* key : t.keys) {
      if (!node->contains(key)) continue;
      out += key;
      out += " = ";
      render_value((*node)[key], out);
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

uint64_t config_hash(const ScenarioConfig& cfg) {
  return fnv1a(serialize_config(cfg));
}

ScenarioConfig parse_config_text(const std::string& text) {
  ScenarioConfig cfg;
  cfg.tree = ordered_json::object();

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  std::string table;
  const TableSchema* table_schema = nullptr;
  std::vector<std::string> seen_tables;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        schema_fail("malformed table header", line_no);
      table = trim(line.substr(1, line.size() - 2));
      table_schema = find_table(table);
      if (!table_schema)
        schema_fail("unknown table '" + table + "'", line_no);
      if (std::find(seen_tables.begin(), seen_tables.end(), table) !=
          seen_tables.end())
        schema_fail("duplicate table '" + table + "'", line_no);
      seen_tables.push_back(table);
      cfg.lines[table] = line_no;
      (void)dig(cfg.tree, table);  // materialize the node even when empty
      continue;
    }

    size_t eq = line.find('=');
    if (eq == std::string::npos)
      schema_fail("expected 'key = value'", line_no);
    if (table.empty())
      schema_fail("key outside any table", line_no);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    const int key_line = line_no;

    // multi-line arrays: accumulate until the brackets balance
    auto balance = [](const std::string& s) {
      int b = 0;
      bool quoted = false;
      for (char c : s) {
        if (c == '"') quoted = !quoted;
        if (quoted) continue;
        if (c == '[') ++b;
        if (c == ']') --b;
      }
      return b;
    };
    while (balance(value) > 0 && std::getline(in, raw)) {
      ++line_no;
      value += ' ';
      value += trim(strip_comment(raw));
    }

    bool known = false;
    for (const char* k : table_schema->keys)
      if (key == k) known = true;
    if (!known)
      schema_fail("unknown key '" + key + "' in [" + table + "]", key_line);

    ordered_json* node = dig(cfg.tree, table);
    if (node->contains(key))
      schema_fail("duplicate key '" + key + "'", key_line);
    (*node)[key] = parse_value(value, key_line);
    cfg.lines[table + "." + key] = key_line;
  }

  build_typed(cfg);
  validate(cfg);
  cfg.hash = config_hash(cfg);
  return cfg;
}

ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot read config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void apply_overrides(ScenarioConfig& cfg, const RunOverrides& ov) {
  if (!ov.seed && !ov.h && !ov.T) return;
  ordered_json* run = dig(cfg.tree, "run");
  if (ov.seed) {
    (*run)["seed"] = *ov.seed;
    cfg.seed = *ov.seed;
  }
  if (ov.h) {
    (*run)["h"] = *ov.h;
    cfg.h = *ov.h;
  }
  if (ov.T) {
    (*run)["T"] = *ov.T;
    cfg.T = *ov.T;
  }
  validate(cfg);
  cfg.hash = config_hash(cfg);
}

namespace {

std::string hash_hex(uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

// hash-suffixed artifact path; an existing file is never overwritten
std::string fresh_path(const std::string& dir, const std::string& stem,
                       const std::string& ext) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  fs::path p = fs::path(dir) / (stem + ext);
  for (int k = 2; fs::exists(p); ++k)
    p = fs::path(dir) / (stem + "." + std::to_string(k) + ext);
  return p.string();
}

}  // namespace

int run_command(const std::string& command, ScenarioConfig& cfg,
                const std::string& out_dir, std::ostream& log,
                std::ostream& err) {
  const std::string hex = hash_hex(cfg.hash);
  auto emit = [&](const std::string& stem, const std::string& ext,
                  const std::string& text) {
    std::string path = fresh_path(out_dir, stem + "-" + hex, ext);
    std::ofstream out(path);
    require(out.good(), ErrorCode::IoError, "cannot write " + path);
    out << text;
    return path;
  };
  auto verdict_status = [](const std::string& v) {
    if (v == "Refuted") return 1;
    if (v == "Inconclusive") return 2;
    return 0;
  };

  try {
    if (command == "simulate") {
      require(cfg.system.has_value(), ErrorCode::SchemaError,
              "simulate needs [system.operator] and [system.drift]");
      require(cfg.x0.has_value(), ErrorCode::SchemaError,
              "simulate needs x0 in [run]");
      auto traj = simulate(*cfg.system, *cfg.x0, cfg.T, cfg.h);
      std::ostringstream csv;
      write_trajectory_csv(traj, csv);
      auto path = emit("trajectory", ".csv", csv.str());
      log << "simulate: " << traj.states.size() << " states, wrote " << path
          << "\n";
      return 0;
    }
    if (command == "check-lyapunov") {
      require(cfg.system && cfg.candidate && cfg.region,
              ErrorCode::SchemaError,
              "check-lyapunov needs [system], [candidate] and [region]");
      auto variant = cfg.variant.empty()
                         ? CriterionVariant::i
                         : criterion_from_string(cfg.variant);
      auto rep = certify(*cfg.candidate, *cfg.system, *cfg.region,
                         cfg.samples, variant, cfg.T, cfg.h, cfg.seed,
                         cfg.hash);
      auto path = emit("report", ".json", to_json(rep) + "\n");
      log << "check-lyapunov: " << rep.verdict << ", wrote " << path << "\n";
      return verdict_status(rep.verdict);
    }
    if (command == "check-invariance") {
      require(cfg.system && cfg.invariant_set, ErrorCode::SchemaError,
              "check-invariance needs [system] and [invariance]");
      auto variant = cfg.variant.empty()
                         ? NormalVariant::MinSection
                         : normal_variant_from_string(cfg.variant);
      auto rep = certify_invariance(*cfg.invariant_set, *cfg.system,
                                    cfg.samples, variant, cfg.T, cfg.h,
                                    cfg.seed, cfg.hash);
      auto path = emit("report", ".json", to_json(rep) + "\n");
      log << "check-invariance: " << rep.verdict << ", wrote " << path
          << "\n";
      return verdict_status(rep.verdict);
    }
    if (command == "simulate-lcs") {
      require(cfg.lcs.has_value(), ErrorCode::SchemaError,
              "simulate-lcs needs [lcs]");
      auto traj = simulate_lcs(*cfg.lcs, cfg.T, cfg.h);
      std::ostringstream csv;
      write_lcs_csv(traj, csv);
      auto path = emit("lcs-trajectory", ".csv", csv.str());
      log << "simulate-lcs: " << traj.states.size() << " states, wrote "
          << path << "\n";
      return 0;
    }
    if (command == "rho-horizon") {
      require(cfg.system && cfg.candidate && cfg.x0, ErrorCode::SchemaError,
              "rho-horizon needs [system], [candidate] and x0 in [run]");
      double nu = rho_horizon(*cfg.candidate, *cfg.system, *cfg.x0,
                              cfg.rho_bar, cfg.lambda_bar, cfg.h);
      nlohmann::ordered_json j;
      j["mode"] = "rho-horizon";
      j["tool"] = "monoflow";
      j["version"] = kToolVersion;
      if (std::isinf(nu))
        j["horizon"] = nullptr;
      else
        j["horizon"] = nu;
      j["rho_bar"] = cfg.rho_bar;
      j["lambda_bar"] = cfg.lambda_bar;
      j["config_hash"] = hex;
      auto path = emit("rho-horizon", ".json", j.dump(2) + "\n");
      log << "rho-horizon: " << (std::isinf(nu) ? "unbounded" : "bounded")
          << ", wrote " << path << "\n";
      return 0;
    }
    if (command == "report") {
      nlohmann::ordered_json j;
      j["tool"] = "monoflow";
      j["version"] = kToolVersion;
      j["config_hash"] = hex;
      j["reports"] = nlohmann::ordered_json::array();
      int status = 0;
      auto fold = [&](const std::string& verdict) {
        int s = verdict_status(verdict);
        if (s == 1 || status == 1)
          status = 1;
        else
          status = std::max(status, s);
      };
      if (cfg.system && cfg.candidate && cfg.region) {
        auto variant = cfg.variant.empty() || cfg.variant == "min-section" ||
                               cfg.variant == "set-min"
                           ? CriterionVariant::i
                           : criterion_from_string(cfg.variant);
        auto rep = certify(*cfg.candidate, *cfg.system, *cfg.region,
                           cfg.samples, variant, cfg.T, cfg.h, cfg.seed,
                           cfg.hash);
        j["reports"].push_back(nlohmann::ordered_json::parse(to_json(rep)));
        fold(rep.verdict);
      }
      if (cfg.system && cfg.invariant_set) {
        auto rep = certify_invariance(*cfg.invariant_set, *cfg.system,
                                      cfg.samples, NormalVariant::MinSection,
                                      cfg.T, cfg.h, cfg.seed, cfg.hash);
        j["reports"].push_back(nlohmann::ordered_json::parse(to_json(rep)));
        fold(rep.verdict);
      }
      require(!j["reports"].empty(), ErrorCode::SchemaError,
              "report needs a checkable scenario (candidate+region or "
              "invariance)");
      auto path = emit("summary", ".json", j.dump(2) + "\n");
      log << "report: wrote " << path << "\n";
      return status;
    }
    fail(ErrorCode::SetupViolation, "unknown command: " + command);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::OutsideDomain)
      err << "error: initial point outside domain\n";
    else
      err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace monoflow
