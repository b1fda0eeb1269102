// Command-line front end. Exit codes: 0 pass, 1 failed check or runtime error, 2 usage error.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "sobolev/cli.hpp"
#include "sobolev/concentration.hpp"
#include "sobolev/constants.hpp"
#include "sobolev/error.hpp"
#include "sobolev/extremals.hpp"
#include "sobolev/solver.hpp"

using namespace sobolev;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

// Flag values are kept as strings and applied through RunConfig::set, so the
// config file and the command line share one parser and flags win.
struct Flags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void add(CLI::App& app, const std::string& flag, const std::string& key, const std::string& help) {
    options[key] = app.add_option(flag, values[key], help);
  }
  void apply(RunConfig& cfg) const {
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) cfg.set(key, values.at(key));
  }
};

std::string out_path(const RunConfig& cfg, const std::string& stem, OutputFormat f) {
  return (std::filesystem::path(cfg.out_dir) / (stem + (f == OutputFormat::Json ? ".json" : ".csv"))).string();
}

void say(const std::string& s) { std::cout << s << '\n'; }

int run_constants(const RunConfig& cfg) {
  const auto F = parse_potential(cfg.F, cfg.n, cfg.k);
  const auto G = parse_spatial(cfg.G, cfg.k);
  const auto M = make_manifold(cfg);
  auto rep = b0_bounds(F, G, M, {.hebey_conformal = cfg.hebey, .grid_N = cfg.grid_N});
  rep.verdict = classify_dichotomy(rep, F, G, M);
  const std::string path = out_path(cfg, "constants", cfg.format);
  if (cfg.format == OutputFormat::Json) {
    emit_report(rep.to_json(), cfg.format, path);
  } else {
    std::ofstream(path) << rep.to_csv();
  }
  say("B0 in [" + std::to_string(rep.max_lower()) + ", " + std::to_string(rep.min_upper()) + "], verdict " +
      to_string(rep.verdict->verdict) + " -> " + path);
  return rep.inconsistent ? kFail : kPass;
}

int run_solve(const RunConfig& cfg) {
  const auto F = parse_potential(cfg.F, cfg.n, cfg.k);
  const auto G = parse_spatial(cfg.G, cfg.k);
  if (!cfg.B) throw Error(ErrorCode::InvalidArgument, "solve needs --B");
  const VariationalProblem P{make_manifold(cfg), F, G, cfg.A.value_or(a0_vector(cfg.n, F)), *cfg.B};
  SolverConfig sc;
  sc.grid_N = cfg.grid_N;
  sc.el_tol = cfg.tol;
  sc.seed = cfg.seed;
  sc.smoothing_eps = cfg.smoothing_eps;
  const auto res = minimize(P, sc);
  Json j = res.to_json();
  j["config"] = cfg.to_json();
  j["A"] = P.coeff_A;
  j["B"] = P.coeff_B;
  j["int_F"] = integrate_F(P.F, res.U);
  if (cfg.format == OutputFormat::Json) {
    emit_report(j, OutputFormat::Json, out_path(cfg, "solve", OutputFormat::Json));
  } else {
    Json rows = Json::array();
    for (std::size_t i = 0; i < res.history.size(); ++i)
      rows.push_back({{"iteration", int(i)}, {"lambda", res.history[i].lambda}, {"residual", res.history[i].residual}});
    emit_report(rows, OutputFormat::Csv, out_path(cfg, "solve_history", OutputFormat::Csv));
  }
  std::filesystem::create_directories(cfg.out_dir);
  write_field_csv(res.U, (std::filesystem::path(cfg.out_dir) / "profile.csv").string());
  char buf[160];
  std::snprintf(buf, sizeof buf, "lambda=%.12g el_residual=%.3g converged=%s start=%s", res.lambda, res.el_residual,
                res.converged ? "yes" : "no", res.start.c_str());
  say(buf);
  return res.converged ? kPass : kFail;
}

int run_extremal(const RunConfig& cfg) {
  const Vec betas = cfg.betas.empty() ? default_beta_ladder() : cfg.betas;
  const auto rows = sphere_extremal_family(cfg.n, betas, std::max(cfg.grid_N, 16));
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back({{"beta", r.beta}, {"pole_amplitude", r.pole_amplitude}, {"norm", r.norm}, {"residual", r.residual}});
  }
  const std::string path = out_path(cfg, "extremal", cfg.format);
  emit_report(out, cfg.format, path);
  say(std::to_string(rows.size()) + " sphere extremals -> " + path);
  return kPass;
}

int run_concentration(const RunConfig& cfg) {
  const Vec betas = cfg.betas.empty() ? Vec{1.5, 1.1, 1.03, 1.01, 1.003} : cfg.betas;
  const auto F = parse_potential(cfg.F, cfg.n, cfg.k);
  const MaximizerSet xf = max_on_direction_sphere(F);
  const auto grid = make_grid(ModelManifold::round_sphere(cfg.n), {.N = cfg.grid_N});
  FieldFamily fam;
  fam.parameter = "beta";
  for (double b : betas) {
    fam.values.push_back(b);
    fam.fields.push_back(sphere_extremal_profile({cfg.n, b, xf.points.front()}, grid));
  }
  const auto rep = reverse_holder_check(fam, F, a0_vector(cfg.n, F));
  emit_report(rep.to_json(), OutputFormat::Json, out_path(cfg, "concentration", OutputFormat::Json));
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream(out_path(cfg, "concentration_members", OutputFormat::Csv)) << rep.to_csv();
  char buf[160];
  std::snprintf(buf, sizeof buf, "nu1=%.6g mu1=%.6g margin=%.4g", rep.nu1, rep.mu1, rep.reverse_holder_margin);
  say(buf);
  return rep.margin_ok ? kPass : kFail;
}

int run_scenarios(const RunConfig& cfg, const std::string& which) {
  std::vector<ScenarioId> ids;
  if (which == "all") ids = all_scenarios();
  else ids.push_back(parse_scenario(which));
  Json reports = Json::array(), rows = Json::array();
  bool ok = true;
  for (ScenarioId id : ids) {
    const auto rep = run_scenario(id, cfg);
    ok = ok && rep.passed();
    reports.push_back(rep.to_json());
    for (const auto& r : rep.check_rows()) rows.push_back(r);
    for (const auto& c : rep.checks)
      say(std::string(c.passed ? "PASS " : "FAIL ") + to_string(id) + ": " + c.name);
  }
  const std::string stem = which == "all" ? "scenarios" : "scenario_" + which;
  emit_report(cfg.format == OutputFormat::Json ? reports : rows, cfg.format, out_path(cfg, stem, cfg.format));
  return ok ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sharp vector Sobolev constants on model manifolds"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  Flags global;
  app.add_option("--config", config_path, "key=value configuration file");
  global.add(app, "--out", "out", "output directory");
  global.add(app, "--format", "format", "json or csv");
  global.add(app, "--seed", "seed", "random seed");
  global.add(app, "--grid", "grid", "radial grid size");

  auto problem_flags = [](CLI::App* sub, Flags& f) {
    f.add(*sub, "--manifold", "manifold", "sphere | torus | conformal | euclidean");
    f.add(*sub, "--n", "n", "dimension");
    f.add(*sub, "--k", "k", "number of components");
    f.add(*sub, "--F", "F", "potential F, e.g. lq:q=1 or power_sum:c=1,0.5");
    f.add(*sub, "--G", "G", "potential G, e.g. norm2 or abs_bilinear:diag=1,1;off=0.2");
    f.add(*sub, "--side", "side", "torus side length");
    f.add(*sub, "--conformal", "conformal", "conformal factor, e.g. spike:amp=2;width=0.1");
  };

  Flags cflags, sflags, eflags, kflags, scflags;
  auto* constants = app.add_subcommand("constants", "bounds for the second best constant");
  problem_flags(constants, cflags);
  cflags.add(*constants, "--hebey", "hebey", "use the conformal-class value of B0(n,1,g)");

  auto* solve = app.add_subcommand("solve", "minimize J on the constraint set");
  problem_flags(solve, sflags);
  sflags.add(*solve, "--A", "A", "coefficient A (default A0(n,F))");
  sflags.add(*solve, "--B", "B", "coefficient B");
  sflags.add(*solve, "--tol", "tol", "Euler-Lagrange tolerance");
  sflags.add(*solve, "--smoothing-eps", "smoothing_eps", "smoothing for non-C1 potentials");

  auto* extremal = app.add_subcommand("extremal", "sphere extremal family table");
  eflags.add(*extremal, "--n", "n", "dimension");
  eflags.add(*extremal, "--beta", "beta", "comma-separated beta values");

  auto* concentration = app.add_subcommand("concentration", "concentration diagnostics on sphere extremals");
  kflags.add(*concentration, "--n", "n", "dimension");
  kflags.add(*concentration, "--k", "k", "number of components");
  kflags.add(*concentration, "--F", "F", "potential F");
  kflags.add(*concentration, "--beta", "beta", "comma-separated beta values");

  std::string scenario_name;
  auto* scenario = app.add_subcommand("scenario", "run one of the examples, or all");
  scenario->add_option("id", scenario_name,
                       "example1..example5 | sphere-identity | torus-existence | all")
      ->required();
  scflags.add(*scenario, "--n", "n", "dimension");
  scflags.add(*scenario, "--tol", "tol", "solver tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg.load(config_path);
    global.apply(cfg);
    for (Flags* f : {&cflags, &sflags, &eflags, &kflags, &scflags}) f->apply(cfg);
    cfg.subcommand = app.get_subcommands().front()->get_name();
    cfg.validate();
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return e.code() == ErrorCode::IoError ? kFail : kUsage;
  }

  try {
    if (*constants) return run_constants(cfg);
    if (*solve) return run_solve(cfg);
    if (*extremal) return run_extremal(cfg);
    if (*concentration) return run_concentration(cfg);
    if (*scenario) return run_scenarios(cfg, scenario_name);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return e.code() == ErrorCode::InvalidArgument ? kUsage : kFail;
  }
  return kUsage;
}
