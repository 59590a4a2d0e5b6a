#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "run_config.hpp"

using namespace torbill::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "torbill");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "torbill_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("simulate emits three events per period on the triangle orbit") {
  const double period = 9.0 * std::sqrt(3.0);
  for (int periods : {1, 2, 3}) {
    const auto r = call({"simulate", "--length", std::to_string(periods * period + 0.1)});
    REQUIRE(r.code == 0);
    const auto ls = lines(r.out);
    int events = 0;
    for (const auto& l : ls) events += l.find("\"record\":\"event\"") != std::string::npos;
    CHECK(events == 3 * periods);
    CHECK(ls.front().find("\"record\":\"meta\"") != std::string::npos);
    CHECK(ls.front().find("config_hash") != std::string::npos);
    CHECK(ls[1].find("domain_hash") != std::string::npos);
  }
  const auto csv = call({"simulate", "--length", "16", "--format", "csv"});
  const auto ls = lines(csv.out);
  REQUIRE(ls.size() == 5);
  CHECK(ls[0].rfind("# tool=torbill", 0) == 0);
  CHECK(ls[1].rfind("record,k,t,x_0,x_1,x_2,tau", 0) == 0);
}

TEST_CASE("coords-check passes on the default chart") {
  const auto r = call({"coords-check"});
  CHECK(r.code == 0);
  const auto ls = lines(r.out);
  CHECK(ls.size() == 15);
  for (std::size_t i = 2; i < ls.size(); ++i) CHECK(ls[i].back() == '1');
}

TEST_CASE("badset output is byte-identical across reruns and worker counts") {
  const auto a = scratch("a.csv"), b = scratch("b.csv"), c = scratch("c.csv");
  REQUIRE(call({"badset", "--samples", "1500", "--seed", "77", "--out", a.string()}).code == 0);
  REQUIRE(call({"badset", "--samples", "1500", "--seed", "77", "--out", b.string()}).code == 0);
  REQUIRE(call({"--workers", "3", "badset", "--samples", "1500", "--seed", "77", "--out", c.string()}).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) == slurp(c));
  CHECK(lines(slurp(a)).size() == 5);
  const auto d = scratch("d.csv");
  REQUIRE(call({"badset", "--samples", "1500", "--seed", "78", "--out", d.string()}).code == 0);
  CHECK(lines(slurp(a))[0] != lines(slurp(d))[0]);
}

TEST_CASE("config parsing") {
  const auto good = scratch("good.json");
  std::ofstream(good) << R"({"curve": {"kind": "ellipse", "center": 4, "semi_rho": 2, "semi_z": 1},
                             "tolerances": {"graze_threshold": 1e-8}, "caps": {"max_bounces": 50},
                             "seed": 18446744073709551615})";
  const auto cfg = load_config(good.string());
  CHECK(cfg.curve.kind == "ellipse");
  CHECK(cfg.graze_threshold == 1e-8);
  CHECK(cfg.max_bounces == 50);
  CHECK(cfg.seed == 18446744073709551615ull);
  CHECK(call({"--config", good.string(), "inflection-map", "--n-tau", "16"}).code == 0);

  const auto unknown = scratch("unknown.json");
  std::ofstream(unknown) << R"({"curve": {"kind": "circle"}, "colour": 1})";
  auto r = call({"--config", unknown.string(), "coords-check"});
  CHECK(r.code == 1);
  CHECK(r.err.find("colour") != std::string::npos);

  const auto negative = scratch("negative.json");
  std::ofstream(negative) << R"({"tolerances": {"root_tol": -1}})";
  CHECK(call({"--config", negative.string(), "coords-check"}).code == 1);

  const auto notjson = scratch("notjson.json");
  std::ofstream(notjson) << "{curve";
  CHECK(call({"--config", notjson.string(), "coords-check"}).code == 1);

  const auto bad_curve = scratch("bad_curve.json");
  std::ofstream(bad_curve) << R"({"curve": {"kind": "circle", "major_radius": 1, "minor_radius": 2}})";
  CHECK(call({"--config", bad_curve.string(), "simulate"}).code == 1);

  CHECK(call({"--config", "/nonexistent/x.json", "simulate"}).code == 1);
  CHECK(call({"nosuchcommand"}).code == 1);
  CHECK(call({"badset", "--samples", "10"}).code == 1);
}

TEST_CASE("custom curve from samples") {
  std::ostringstream doc;
  doc << R"({"curve": {"kind": "custom", "samples": [)";
  const int n = 64;
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * M_PI * i / n;
    doc << (i ? "," : "") << "[" << 2.0 + std::cos(t) << "," << std::sin(t) << "]";
  }
  doc << "]}}";
  const auto path = scratch("custom.json");
  std::ofstream(path) << doc.str();
  const auto r = call({"--config", path.string(), "simulate", "--length", "16"});
  CHECK(r.code == 0);
  int events = 0;
  for (const auto& l : lines(r.out)) events += l.find("\"record\":\"event\"") != std::string::npos;
  CHECK(events == 3);
}

TEST_CASE("numeric failures exit 2 and echo the state") {
  const auto r = call({"jacobian", "--state", "1,-2,0,0,-1,0,3", "--s", "0"});
  CHECK(r.code == 2);
  CHECK(r.err.find("state=1,-2,0,0,-1,0,3") != std::string::npos);
  const auto ok = call({"jacobian", "--state", "2,0,0,0.1,0.2,0.05,2", "--s", "0"});
  CHECK(ok.code == 0);
  CHECK(lines(ok.out)[1] == "det,det_coarse,rel_spread,bounces");
}

TEST_CASE("identity failures exit 3") {
  CHECK(call({"coords-check", "--step", "0.2"}).code == 3);
}

TEST_CASE("recurrence-check") {
  const auto r = call({"recurrence-check", "--alpha", "0.02,0.01"});
  CHECK(r.code == 0);
  CHECK(lines(r.out).size() == 4);
}
