#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "monoflow/config.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"

using namespace monoflow;
namespace fs = std::filesystem;

namespace {

// scalar decay toward the origin on a half-interval; V = x^2, W = x^2,
// a = 0 is an exact pair for f(x) = -x
const char* kDecay = R"(# scalar decay on the half line
[system]

[system.operator]
kind = "normal-cone"
set = "box"          # the admissible interval
lo = [0.0]
hi = [8.0]

[system.drift]
kind = "affine"
F = [
  [-1.0]
]
b = [0.0]

[candidate]
a = 0

[candidate.v]
kind = "quadratic"
P = [[1.0]]

[candidate.w]
kind = "quadratic"
P = [[2.0]]

[region]
kind = "box"
lo = [0.125]
hi = [1.0]

[run]
T = 0.5
h = 0.01
samples = 16
seed = 7
x0 = [1.0]
)";

std::string fresh_dir() {
  static std::mt19937_64 g(std::random_device{}());
  fs::path p = fs::temp_directory_path() /
               ("monoflow_cfg_" + std::to_string(g()));
  fs::create_directories(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string only_file_with(const std::string& dir, const std::string& part,
                           const std::string& ext) {
  std::string hit;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.find(part) != std::string::npos &&
        name.size() >= ext.size() &&
        name.compare(name.size() - ext.size(), ext.size(), ext) == 0) {
      REQUIRE(hit.empty());
      hit = e.path().string();
    }
  }
  REQUIRE(!hit.empty());
  return hit;
}

}  // namespace

TEST_CASE("config: round trip through the canonical serialization") {
  ScenarioConfig cfg = parse_config_text(kDecay);
  CHECK(cfg.system.has_value());
  CHECK(cfg.candidate.has_value());
  CHECK(cfg.region.has_value());
  CHECK(!cfg.invariant_set.has_value());
  CHECK(!cfg.lcs.has_value());
  CHECK(cfg.T == doctest::Approx(0.5));
  CHECK(cfg.h == doctest::Approx(0.01));
  CHECK(cfg.samples == 16);
  CHECK(cfg.seed == 7);
  REQUIRE(cfg.x0.has_value());
  CHECK((*cfg.x0)(0) == 1.0);
  CHECK(cfg.system->L_f == doctest::Approx(1.0));
  CHECK(cfg.hash != 0);

  const std::string canon = serialize_config(cfg);
  ScenarioConfig cfg2 = parse_config_text(canon);
  CHECK(serialize_config(cfg2) == canon);
  CHECK(cfg2.hash == cfg.hash);
}

TEST_CASE("config: hash ignores comments, tracks content") {
  ScenarioConfig a = parse_config_text(kDecay);
  ScenarioConfig b = parse_config_text(kDecay);
  CHECK(a.hash == b.hash);

  // cosmetic edits leave the canonical form alone
  std::string cosmetic = std::string("# extra banner\n\n") + kDecay;
  CHECK(parse_config_text(cosmetic).hash == a.hash);

  std::string reseeded = kDecay;
  auto pos = reseeded.find("seed = 7");
  REQUIRE(pos != std::string::npos);
  reseeded.replace(pos, 8, "seed = 8");
  CHECK(parse_config_text(reseeded).hash != a.hash);
}

TEST_CASE("config: schema violations carry the offending line") {
  CHECK_THROWS_WITH_AS(parse_config_text("[run]\nstepp = 0.1\n"),
                       "unknown key 'stepp' in [run] at line 2", Error);
  CHECK_THROWS_WITH_AS(parse_config_text("[runn]\n"),
                       "unknown table 'runn' at line 1", Error);
  CHECK_THROWS_WITH_AS(parse_config_text("T = 1.0\n"),
                       "key outside any table at line 1", Error);
  CHECK_THROWS_WITH_AS(parse_config_text("[run]\nT 1.0\n"),
                       "expected 'key = value' at line 2", Error);
  CHECK_THROWS_WITH_AS(parse_config_text("[run]\nT = 1.0\nT = 2.0\n"),
                       "duplicate key 'T' at line 3", Error);
  CHECK_THROWS_WITH_AS(parse_config_text("[run]\n[run]\n"),
                       "duplicate table 'run' at line 2", Error);
  CHECK_THROWS_WITH_AS(parse_config_text("[run]\nh = fast\n"),
                       "malformed value 'fast' at line 2", Error);

  try {
    parse_config_text("[run]\nsamples = \"ten\"\n");
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaError);
    CHECK(std::string(e.what()).find("must be an integer") !=
          std::string::npos);
  }
}

TEST_CASE("config: numeric validation") {
  CHECK_THROWS_WITH_AS(parse_config_text("[run]\nh = -0.1\n"),
                       "h must be positive at line 2", Error);
  CHECK_THROWS_WITH_AS(parse_config_text("[run]\nT = -1.0\n"),
                       "T must be nonnegative at line 2", Error);
  CHECK_THROWS_WITH_AS(parse_config_text("[run]\nsamples = 0\n"),
                       "samples must be positive at line 2", Error);
  CHECK_THROWS_WITH_AS(parse_config_text("[run]\nvariant = \"iii\"\n"),
                       "unknown variant 'iii' at line 2", Error);

  // L_f = 1 caps h at 0.1
  std::string fast = kDecay;
  auto pos = fast.find("h = 0.01");
  REQUIRE(pos != std::string::npos);
  fast.replace(pos, 8, "h = 0.20");
  try {
    parse_config_text(fast);
    FAIL("expected the stability cap to reject h");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaError);
    CHECK(std::string(e.what()).find("stability cap") != std::string::npos);
  }
}

TEST_CASE("config: lcs table and its step cap") {
  const char* ok = R"([lcs]
A = [[0.0]]
B = [[1.0]]
C = [[1.0]]
D = [[1.0]]
x0 = [1.0]

[run]
T = 0.1
h = 0.01
)";
  ScenarioConfig cfg = parse_config_text(ok);
  REQUIRE(cfg.lcs.has_value());
  CHECK(cfg.lcs->A_lin(0, 0) == 0.0);
  CHECK(cfg.lcs->x0(0) == 1.0);

  std::string stiff = ok;
  auto pos = stiff.find("A = [[0.0]]");
  REQUIRE(pos != std::string::npos);
  stiff.replace(pos, 11, "A = [[100.]]");
  try {
    parse_config_text(stiff);
    FAIL("expected the lcs stability cap to reject h");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("lcs stability cap") !=
          std::string::npos);
  }
}

TEST_CASE("config: overrides fold into the tree and rehash") {
  ScenarioConfig cfg = parse_config_text(kDecay);
  const uint64_t before = cfg.hash;

  apply_overrides(cfg, RunOverrides{});
  CHECK(cfg.hash == before);

  RunOverrides ov;
  ov.seed = 9;
  ov.T = 0.25;
  apply_overrides(cfg, ov);
  CHECK(cfg.seed == 9);
  CHECK(cfg.T == doctest::Approx(0.25));
  CHECK(cfg.hash != before);
  const std::string canon = serialize_config(cfg);
  CHECK(canon.find("seed = 9") != std::string::npos);
  CHECK(parse_config_text(canon).hash == cfg.hash);

  RunOverrides bad;
  bad.h = 0.5;  // beyond the L_f cap
  CHECK_THROWS_AS(apply_overrides(cfg, bad), Error);
}

TEST_CASE("config: command dispatch writes hash-named artifacts") {
  ScenarioConfig cfg = parse_config_text(kDecay);
  const std::string dir = fresh_dir();
  std::ostringstream log, err;

  SUBCASE("check-lyapunov certifies the exact pair") {
    CHECK(run_command("check-lyapunov", cfg, dir, log, err) == 0);
    CHECK(err.str().empty());
    auto path = only_file_with(dir, "report-", ".json");
    auto j = nlohmann::ordered_json::parse(slurp(path));
    CHECK(j["mode"] == "pointwise");
    CHECK(j["worst_margin"].get<double>() <= 1e-8);

    // identical rerun: new suffixed file, byte-identical content
    ScenarioConfig again = parse_config_text(kDecay);
    CHECK(run_command("check-lyapunov", again, dir, log, err) == 0);
    int reports = 0;
    std::string second;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".json") {
        ++reports;
        if (e.path().string() != path) second = e.path().string();
      }
    CHECK(reports == 2);
    REQUIRE(!second.empty());
    CHECK(second.find(".2.json") != std::string::npos);
    CHECK(slurp(second) == slurp(path));
  }

  SUBCASE("simulate writes a trajectory CSV") {
    CHECK(run_command("simulate", cfg, dir, log, err) == 0);
    auto csv = slurp(only_file_with(dir, "trajectory-", ".csv"));
    CHECK(csv.rfind("t,x_1,residual\n", 0) == 0);
  }

  SUBCASE("simulate rejects an initial point outside the domain") {
    (*cfg.x0)(0) = -1.0;
    CHECK(run_command("simulate", cfg, dir, log, err) == 3);
    CHECK(err.str() == "error: initial point outside domain\n");
  }

  SUBCASE("report wraps the per-check artifacts") {
    CHECK(run_command("report", cfg, dir, log, err) == 0);
    auto j = nlohmann::ordered_json::parse(
        slurp(only_file_with(dir, "summary-", ".json")));
    CHECK(j["tool"] == "monoflow");
    CHECK(j["version"] == kToolVersion);
    CHECK(j["config_hash"].get<std::string>().size() == 16);
    REQUIRE(j["reports"].is_array());
    CHECK(j["reports"].size() == 1);
    CHECK(j["reports"][0]["verdict"] == "Certified-on-samples");
  }

  SUBCASE("rho-horizon reports a positive local horizon") {
    CHECK(run_command("rho-horizon", cfg, dir, log, err) == 0);
    auto j = nlohmann::ordered_json::parse(
        slurp(only_file_with(dir, "rho-horizon-", ".json")));
    CHECK(j["mode"] == "rho-horizon");
    CHECK((j["horizon"].is_null() || j["horizon"].get<double>() >= 0.0));
  }

  SUBCASE("unknown command maps to the error status") {
    CHECK(run_command("frobnicate", cfg, dir, log, err) == 3);
    CHECK(err.str().rfind("error:", 0) == 0);
  }

  fs::remove_all(dir);
}

TEST_CASE("config: refuting scenario exits with status 1") {
  std::string grow = kDecay;
  auto pos = grow.find("[-1.0]");
  REQUIRE(pos != std::string::npos);
  grow.replace(pos, 6, "[1.0]");  // f(x) = +x now grows along the flow
  ScenarioConfig cfg = parse_config_text(grow);
  const std::string dir = fresh_dir();
  std::ostringstream log, err;
  CHECK(run_command("check-lyapunov", cfg, dir, log, err) == 1);
  auto j = nlohmann::ordered_json::parse(
      slurp(only_file_with(dir, "report-", ".json")));
  CHECK(j["verdict"] == "Refuted");
  fs::remove_all(dir);
}
