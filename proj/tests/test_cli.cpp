#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sobolev/cli.hpp"
#include "sobolev/error.hpp"

using namespace sobolev;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::ScenarioFailed;  // sentinel: nothing thrown
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config keys") {
  RunConfig c;
  c.set("manifold", "torus");
  c.set("n", "5");
  c.set("B", "0.25");
  c.set("beta", "1.5,1.1");
  c.set("format", "csv");
  CHECK(c.manifold == "torus");
  CHECK(c.n == 5);
  CHECK(*c.B == 0.25);
  CHECK(c.betas == Vec{1.5, 1.1});
  CHECK(c.format == OutputFormat::Csv);
  CHECK(code_of([&] { c.set("colour", "blue"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { c.set("n", "four"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { c.load("/nonexistent/run.cfg"); }) == ErrorCode::IoError);
}

TEST_CASE("config file") {
  const auto path = fs::temp_directory_path() / "sobolev_test.cfg";
  {
    std::ofstream out(path);
    out << "# torus run\nmanifold = torus\nside=3\nF = lq:q=2\nB=0.1  # coefficient\n";
  }
  RunConfig c;
  c.load(path.string());
  fs::remove(path);
  CHECK(c.manifold == "torus");
  CHECK(c.side == 3.0);
  CHECK(*c.B == doctest::Approx(0.1));
  CHECK(make_manifold(c).kind() == ManifoldKind::FlatTorus);
}

TEST_CASE("validation") {
  RunConfig c;
  c.n = 2;
  CHECK_THROWS_AS(c.validate(), Error);
  c = RunConfig{};
  c.betas = {1.5, 0.9};
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::BetaOutOfRange);
  c = RunConfig{};
  c.grid_N = 4;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::GridTooCoarse);
}

TEST_CASE("potential specs") {
  const auto f = parse_potential("lq:q=1;c=2", 4, 2);
  CHECK(f.degree() == 4.0);
  CHECK(f.evaluate({1.0, 1.0}) == doctest::Approx(32.0));
  const auto p = parse_potential("power_sum:c=1,0.5", 4, 2);
  CHECK(p.evaluate({0.0, 2.0}) == doctest::Approx(8.0));
  CHECK_THROWS_AS(parse_potential("lq:z=3", 4, 2), Error);
  CHECK_THROWS_AS(parse_potential("nope", 4, 2), Error);

  const auto g = parse_spatial("quadratic:diag=1.5,1.5;off=-0.5", 2);
  CHECK(g.evaluate(0.0, {1.0, 1.0}) == doctest::Approx(2.0));
  CHECK(parse_spatial("norm2:c=3", 2).evaluate(0.0, {1.0, 1.0}) == doctest::Approx(6.0));
  const auto spike = parse_conformal("spike:amp=1;width=0.5");
  CHECK(spike.u(0.0) == doctest::Approx(2.0));
}

TEST_CASE("scenario names") {
  CHECK(all_scenarios().size() == 7);
  for (ScenarioId id : all_scenarios()) CHECK(parse_scenario(to_string(id)) == id);
  CHECK(code_of([] { parse_scenario("example9"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("every scenario passes") {
  for (ScenarioId id : all_scenarios()) {
    CAPTURE(to_string(id));
    const auto rep = run_scenario(id);
    CHECK(rep.passed());
    CHECK(rep.first_failure() == nullptr);
    CHECK_FALSE(rep.checks.empty());
  }
}

TEST_CASE("failed checks raise when asked") {
  RunConfig c;
  c.grid_N = 64;  // too coarse for the sphere identity tolerances
  const auto rep = run_scenario(ScenarioId::SphereIdentity, c);
  if (!rep.passed()) {
    CHECK(code_of([&] { run_scenario(ScenarioId::SphereIdentity, c, true); }) == ErrorCode::ScenarioFailed);
  }
}

TEST_CASE("deterministic output") {
  Json j = {{"b", 0.1 + 0.2}, {"a", {1, 2}}, {"inf", INFINITY}};
  const std::string s = deterministic_json(j);
  CHECK(s == deterministic_json(Json::parse(s).is_object() ? j : j));
  CHECK(s.find("\"a\"") < s.find("\"b\""));
  CHECK(s.find("null") != std::string::npos);
  CHECK(s.find("0.3") != std::string::npos);

  const Json rows = Json::array({{{"x", 1}, {"y", "a,b"}}, {{"x", 2}, {"z", {{"k", 1}}}}});
  const std::string csv = records_to_csv(rows);
  CHECK(csv.substr(0, csv.find('\n')) == "x,y,z");
  CHECK(csv.find("\"a,b\"") != std::string::npos);

  const auto dir = fs::temp_directory_path() / "sobolev_emit_test";
  fs::remove_all(dir);
  const auto run = [&](const std::string& name) {
    const auto a = run_scenario(ScenarioId::Example2);
    emit_report(Json::array({a.to_json()}), OutputFormat::Json, (dir / name).string());
    return slurp(dir / name);
  };
  CHECK(run("one.json") == run("two.json"));
  fs::remove_all(dir);
  CHECK(code_of([&] { emit_report(rows, OutputFormat::Csv, "/proc/forbidden/x.csv"); }) == ErrorCode::IoError);
}

TEST_CASE("empty and mixed-format reports") {
  CHECK(records_to_csv(Json::array()).empty());
  const auto dir = fs::temp_directory_path() / "sobolev_empty_test";
  fs::remove_all(dir);
  emit_report(Json::array(), OutputFormat::Json, (dir / "r.json").string());
  CHECK(Json::parse(slurp(dir / "r.json")) == Json::array());

  // JSON and CSV of the same run carry the same numbers.
  const auto rows = run_scenario(ScenarioId::SphereIdentity).check_rows();
  emit_report(rows, OutputFormat::Json, (dir / "c.json").string());
  emit_report(rows, OutputFormat::Csv, (dir / "c.csv").string());
  const Json back = Json::parse(slurp(dir / "c.json"));
  const std::string csv = slurp(dir / "c.csv");
  REQUIRE(back.size() == rows.size());
  for (const auto& r : back) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", r.at("value").get<double>());
    CHECK(csv.find(buf) != std::string::npos);
  }
  fs::remove_all(dir);
}
