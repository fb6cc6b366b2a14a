#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "doctest.h"

#include "addkit/density_engine.hpp"
#include "addkit/error.hpp"
#include "addkit/harness_cli.hpp"
#include "addkit/report.hpp"

using namespace addkit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("addkit_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
  static inline int counter = 0;
};

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "addkit");
  return run(args);
}

nlohmann::json load_json(const std::string& path) { return nlohmann::json::parse(read_file(path)); }

std::set<std::string> check_groups(const nlohmann::json& report) {
  std::set<std::string> out;
  for (const auto& c : report["checks"]) {
    const std::string name = c["name"];
    const auto a = name.find('.');
    const auto b = name.find('.', a + 1);
    out.insert(name.substr(a + 1, b - a - 1));
  }
  return out;
}

}  // namespace

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("format_double keeps 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(NAN) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
  CHECK(std::stod(format_double(std::nextafter(1.0, 2.0))) == std::nextafter(1.0, 2.0));
}

TEST_CASE("suite on the gaussian family") {
  TempDir dir;
  const auto out = dir / "suite.json";
  CHECK(cli({"suite", "--family", "builtin:gaussian", "--report", out}) == exit_pass);
  const auto j = load_json(out);
  CHECK(j["pass"] == true);
  CHECK(j["command"] == "suite");
  CHECK(j["schema_version"] == report_schema_version);
  const auto groups = check_groups(j);
  for (const char* g : {"comparability", "basic_assumption_I", "axioms_dQ", "axioms_deltaQ", "doubling_dQ", "dual_formula",
                        "adjointness", "fundamental", "contraction", "chapman_kolmogorov", "oracle"}) {
    CAPTURE(g);
    CHECK(groups.count(g) == 1);
  }
  // overall pass is the conjunction of the items
  bool all = true;
  for (const auto& c : j["checks"]) all = all && c["pass"].get<bool>();
  CHECK(all);
}

TEST_CASE("suite on every built-in family") {
  TempDir dir;
  const auto out = dir / "suite.json";
  CHECK(cli({"suite", "--report", out, "--triples", "2000"}) == exit_pass);
  const auto j = load_json(out);
  std::set<std::string> labels;
  for (const auto& c : j["checks"]) {
    const std::string name = c["name"];
    labels.insert(name.substr(0, name.find('.')));
  }
  CHECK(labels == std::set<std::string>{"gaussian", "poisson", "coshlog"});
}

TEST_CASE("configuration errors exit with 2") {
  TempDir dir;
  const auto out = dir / "r.json";
  CHECK(cli({"density", "--family", "builtin:gaussian", "--t", "-1"}) == exit_config_error);
  CHECK(cli({"density", "--family", "builtin:gaussian", "--t", "1", "--s", "2"}) == exit_config_error);
  CHECK(cli({"density", "--family", "builtin:nosuch", "--t", "1"}) == exit_config_error);
  CHECK(cli({"density", "--t", "1"}) == exit_config_error);
  CHECK(cli({"density", "--family", "builtin:gaussian", "--t", "1", "--grid", "N=1000"}) == exit_config_error);
  CHECK(cli({"density", "--family", "builtin:gaussian", "--t", "1", "--grid", "M=64"}) == exit_config_error);
  CHECK(cli({"density", "--family", dir / "missing.json", "--t", "1"}) == exit_config_error);
  CHECK(cli({"density", "--family", "{\"kind\": ", "--t", "1"}) == exit_config_error);
  CHECK(cli({"frobnicate"}) == exit_config_error);
  CHECK(cli({}) == exit_config_error);
  CHECK(cli({"density", "--family", "builtin:gaussian"}) == exit_config_error);
  CHECK(cli({"density", "--family", "builtin:gaussian", "--t", "1", "--format", "yaml"}) == exit_config_error);
  CHECK(cli({"operator-check", "--family", "builtin:gaussian", "--times", "1,0.5,0.2"}) == exit_config_error);
  CHECK(cli({"simulate", "--family", "builtin:gaussian", "--times", "0.5,1"}) == exit_config_error);
  CHECK(cli({"simulate", "--family", "builtin:gaussian", "--process", "Z"}) == exit_config_error);
  CHECK(cli({"oracle", "--name", "laplace"}) == exit_config_error);
  CHECK(cli({"verify-cndf", "--symbol", "abs(x"}) == exit_config_error);
  CHECK(cli({"geometry", "--family", "builtin:gaussian", "--metric", "euclid"}) == exit_config_error);
  // nothing is written for a rejected configuration
  CHECK(cli({"density", "--family", "builtin:gaussian", "--t", "-1", "--report", out}) == exit_config_error);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("verify-cndf falsifies |x|^3 with the lattice witness") {
  TempDir dir;
  const auto out = dir / "nd.json";
  CHECK(cli({"verify-cndf", "--symbol", "abs(x)^3", "--report", out}) == exit_check_failure);
  const auto j = load_json(out);
  CHECK(j["pass"] == false);
  const auto& w = j["data"]["reports"][0]["witnesses"][0];
  CHECK(w["points"] == nlohmann::json::parse("[[0.0],[1.0],[2.0]]"));
  CHECK(w["weights"] == nlohmann::json::parse("[1.0,-2.0,1.0]"));
  CHECK(w["value"].get<double>() == doctest::Approx(8.0));
  CHECK(j["data"]["reports"][0]["verdict"] == "violation found");

  for (const char* ok : {"abs(x)^0.5", "abs(x)", "abs(x)^1.5", "x^2", "lncosh(x)", "log1p(x^2)"}) {
    CAPTURE(ok);
    CHECK(cli({"verify-cndf", "--symbol", ok, "--report", out}) == exit_pass);
  }
  CHECK(cli({"verify-cndf", "--symbol", "t*x^2", "--t", "0.5,2", "--dimension", "2", "--report", out}) == exit_pass);
  CHECK(load_json(out)["data"]["reports"].size() == 2);
  CHECK(cli({"verify-cndf", "--family", "builtin:poisson", "--t", "0.5,1,2", "--report", out}) == exit_pass);
  CHECK(load_json(out)["data"]["reports"][0]["verdict"] == "no violation found");
}

TEST_CASE("reports are reproducible") {
  TempDir dir;
  const auto a = dir / "a.json", b = dir / "b.json";
  for (const auto& out : {a, b})
    CHECK(cli({"geometry", "--family", "builtin:coshlog", "--triples", "500", "--seed", "3", "--report", out}) == exit_pass);
  auto ja = nlohmann::ordered_json::parse(read_file(a));
  auto jb = nlohmann::ordered_json::parse(read_file(b));
  CHECK(ja["config_hash"] == jb["config_hash"]);
  ja.erase("wall_time_s");
  jb.erase("wall_time_s");
  // argv differs only through the report path
  ja["data"].erase("argv");
  jb["data"].erase("argv");
  CHECK(ja.dump(2) == jb.dump(2));

  // the hash covers the configuration only
  Report r;
  r.config = ja["config"];
  CHECK(r.config_hash() == ja["config_hash"].get<std::string>());
  CHECK(cli({"geometry", "--family", "builtin:coshlog", "--triples", "500", "--seed", "4", "--report", b}) == exit_pass);
  CHECK(load_json(b)["config_hash"] != ja["config_hash"]);
}

TEST_CASE("density CSV round-trips exactly") {
  TempDir dir;
  const auto csv_path = dir / "p.csv";
  const auto out = dir / "r.json";
  CHECK(cli({"density", "--family", "builtin:coshlog", "--t", "1.0", "--s", "0.0", "--grid", "N=4096,L=auto", "--out", csv_path,
             "--report", out}) == exit_pass);
  const CsvTable csv = parse_csv(read_file(csv_path));
  REQUIRE(csv.header == std::vector<std::string>{"x", "value"});
  const DensityTable table = density_grid(SymbolFamily::coshlog(), 0.0, 1.0, GridSpec{1, 4096, 0.0});
  REQUIRE(csv.rows.size() == table.values.size());
  double drift = 0.0;
  for (std::size_t j = 0; j < csv.rows.size(); ++j) {
    drift = std::max(drift, std::abs(csv.rows[j][1] - table.values[j]));
    drift = std::max(drift, std::abs(csv.rows[j][0] - table.grid.coordinate(j)));
  }
  CHECK(drift == 0.0);
  // re-serialization is byte-stable
  CHECK(to_csv(csv) == read_file(csv_path));

  // 2D tables carry x, y, value
  CHECK(cli({"density", "--family", "{\"kind\":\"gaussian\",\"dimension\":2}", "--t", "1", "--grid", "N=64,L=auto", "--out",
             csv_path, "--report", out}) == exit_pass);
  const CsvTable csv2 = parse_csv(read_file(csv_path));
  CHECK(csv2.header == std::vector<std::string>{"x", "y", "value"});
  CHECK(csv2.rows.size() == 64 * 64);
}

TEST_CASE("text and csv reports project the json content") {
  TempDir dir;
  const auto js = dir / "r.json", txt = dir / "r.txt", csv = dir / "r.csv";
  const std::vector<std::string> base{"check-adjoint", "--family", "builtin:poisson", "--t", "0.5,1,2", "--tol", "1e-5"};
  auto with = [&](std::vector<std::string> extra) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return cli(args);
  };
  CHECK(with({"--report", js}) == exit_pass);
  CHECK(with({"--report", txt, "--format", "text"}) == exit_pass);
  CHECK(with({"--report", csv, "--format", "csv"}) == exit_pass);
  const auto j = load_json(js);
  std::istringstream text(read_file(txt));
  std::vector<std::string> lines;
  for (std::string l; std::getline(text, l);) lines.push_back(l);
  REQUIRE(lines.size() == j["checks"].size() + 2);
  for (std::size_t i = 0; i < j["checks"].size(); ++i) {
    const auto& c = j["checks"][i];
    const std::string expected = std::string(c["pass"].get<bool>() ? "PASS " : "FAIL ") + c["name"].get<std::string>() + " ";
    CHECK(lines[i + 1].rfind(expected, 0) == 0);
  }
  CHECK(lines.back() == "PASS overall");
  std::istringstream rows(read_file(csv));
  std::size_t n = 0;
  for (std::string l; std::getline(rows, l);) ++n;
  CHECK(n == j["checks"].size() + 1);
}

TEST_CASE("simulate writes paths that cf-check re-ingests") {
  TempDir dir;
  const auto paths = dir / "paths.csv";
  const auto r1 = dir / "sim.json", r2 = dir / "cf.json";
  CHECK(cli({"simulate", "--family", "builtin:poisson", "--process", "X", "--times", "0,0.5,1", "--paths", "20000", "--seed", "7",
             "--out", paths, "--report", r1}) == exit_pass);
  CHECK(fs::exists(paths + ".json"));
  CHECK(cli({"cf-check", "--in", paths, "--probes", "0.5,1,2", "--sigmas", "4", "--report", r2}) == exit_pass);
  const auto a = load_json(r1), b = load_json(r2);
  REQUIRE(a["checks"].size() == b["checks"].size());
  for (std::size_t i = 0; i < a["checks"].size(); ++i) CHECK(a["checks"][i]["value"] == b["checks"][i]["value"]);
  CHECK(cli({"cf-check", "--in", paths, "--time", "0.5", "--report", r2}) == exit_pass);
  CHECK(cli({"cf-check", "--in", paths, "--time", "0.7", "--report", r2}) == exit_config_error);

  // a wrong family is caught by the empirical characteristic function
  CHECK(cli({"cf-check", "--in", paths, "--family", "builtin:gaussian", "--report", r2}) == exit_check_failure);

  // a truncated file is a configuration error
  const std::string text = read_file(paths);
  write_file_atomic(paths, text.substr(0, text.rfind('\n', text.size() - 2) + 1));
  CHECK(cli({"cf-check", "--in", paths, "--report", r2}) == exit_config_error);
}

TEST_CASE("remaining subcommands") {
  TempDir dir;
  const auto out = dir / "r.json";
  CHECK(cli({"adjoint", "--family", "builtin:coshlog", "--t", "1.0", "--out", dir / "phi.csv", "--report", out}) == exit_pass);
  CHECK(parse_csv(read_file(dir / "phi.csv")).header == std::vector<std::string>{"x", "value"});
  CHECK(cli({"verify-dual", "--family", "builtin:gaussian", "--t", "1.0", "--tol", "1e-5", "--report", out}) == exit_pass);
  {
    const auto j = load_json(out);
    CHECK(j["data"]["p_peak_ball_integral"].get<double>() == doctest::Approx(0.2820948).epsilon(1e-6));
    CHECK(j["data"]["phi_peak_ball_integral"].get<double>() == doctest::Approx(0.5641896).epsilon(1e-6));
  }
  CHECK(cli({"geometry", "--family", "builtin:poisson", "--t", "1.0", "--curve", dir / "curve.csv", "--report", out}) == exit_pass);
  const CsvTable curve = parse_csv(read_file(dir / "curve.csv"));
  CHECK(curve.header == std::vector<std::string>{"r", "volume"});
  CHECK(curve.rows.size() == 49);
  CHECK(load_json(out)["data"]["c0"].get<double>() == doctest::Approx(4.0).epsilon(1e-4));
  // delta_Q balls of the Cauchy kernel grow like e^{r^2/2}: not doubling
  CHECK(cli({"geometry", "--family", "builtin:poisson", "--metric", "deltaQ", "--report", out}) == exit_check_failure);
  CHECK(load_json(out)["error"].get<std::string>().rfind("unbounded_ball", 0) == 0);
  CHECK(cli({"operator-check", "--family", "builtin:poisson", "--times", "0.2,0.5,1.0", "--tol", "1e-4", "--report", out}) ==
        exit_pass);
  CHECK(cli({"operator-check", "--family", "builtin:gaussian", "--times", "0.5,0.5,0.5", "--report", out}) == exit_pass);
  CHECK(cli({"oracle", "--name", "lewis", "--out", dir / "lewis.csv", "--report", out}) == exit_pass);
  CHECK(cli({"oracle", "--name", "coshlog", "--t", "1.0", "--out", dir / "co.csv", "--report", out}) == exit_pass);
  CHECK(parse_csv(read_file(dir / "co.csv")).header == std::vector<std::string>{"x", "p", "phi"});
  CHECK(cli({"oracle", "--name", "gaussian", "--profile", "t^2", "--t", "1.5", "--report", out}) == exit_pass);
}

TEST_CASE("family specs and grids") {
  TempDir dir;
  const auto cfg = dir / "f.json";
  write_file_atomic(cfg, R"({"kind": "poisson", "dimension": 2, "profile": {"form": "t^2"}})");
  const SymbolFamily f = family_from_spec(cfg);
  CHECK(f.kind() == FamilyKind::poisson);
  CHECK(f.dimension() == 2);
  CHECK(family_from_spec(R"({"kind":"coshlog"})").kind() == FamilyKind::coshlog);
  CHECK(family_from_spec("builtin:gaussian").kind() == FamilyKind::gaussian);
  CHECK_THROWS_AS(family_from_spec(""), Error);
  const GridSpec g = parse_grid("N=512,L=20", 1);
  CHECK(g.points == 512);
  CHECK(g.half_width == 20.0);
  CHECK(parse_grid("", 2) == default_grid(2));
  CHECK(parse_grid("L=auto", 1).half_width == 0.0);
  CHECK_THROWS_AS(parse_grid("N=100", 1), Error);
  CHECK_THROWS_AS(parse_grid("L=-3", 1), Error);
}

TEST_CASE("artifact writes are atomic and report their path") {
  TempDir dir;
  const auto target = dir / "x.txt";
  write_file_atomic(target, "one");
  write_file_atomic(target, "two");
  CHECK(read_file(target) == "two");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++entries;
  CHECK(entries == 1);
  try {
    write_file_atomic(dir / "no/such/dir/x.txt", "z");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
    CHECK(std::string(e.what()).find("no/such/dir") != std::string::npos);
  }
  CHECK(cli({"density", "--family", "builtin:gaussian", "--t", "1", "--report", dir / "no/such/r.json"}) == exit_config_error);
}

TEST_CASE("csv parsing") {
  const CsvTable t = parse_csv("a,b\r\n1,2.5\n-inf,nan\n");
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  CHECK(t.rows.size() == 2);
  CHECK(std::isinf(t.rows[1][0]));
  CHECK(std::isnan(t.rows[1][1]));
  CHECK(t.column("b") == 1);
  CHECK_THROWS_AS(t.column("c"), Error);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), Error);
  CHECK_THROWS_AS(parse_csv("a\nx\n"), Error);
  CHECK_THROWS_AS(parse_csv(""), Error);
}
