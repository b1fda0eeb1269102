#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sobolev/manifolds.hpp"
#include "sobolev/potentials.hpp"

namespace sobolev {

enum class OutputFormat { Json, Csv };

/// Options shared by all subcommands. Potentials, manifolds and conformal
/// factors are given as spec strings "kind:key=value;key=value".
struct RunConfig {
  std::string subcommand;
  std::string manifold = "sphere";  // sphere | torus | conformal | euclidean
  int n = 4;
  int k = 1;
  double side = 2.0;
  std::string F = "lq:q=2";
  std::string G = "norm2";
  std::string conformal = "identity";
  std::optional<double> A;
  std::optional<double> B;
  int grid_N = 2048;
  double tol = 1e-8;
  std::uint64_t seed = 1;
  double smoothing_eps = 0.0;
  bool hebey = false;
  Vec betas;
  std::string out_dir = ".";
  OutputFormat format = OutputFormat::Json;

  /// Applies one key=value setting. Throws InvalidArgument on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  /// Reads key=value lines ('#' starts a comment). Throws IoError.
  void load(const std::string& path);
  /// Range checks on the numeric options.
  void validate() const;
  Json to_json() const;
};

HomogeneousPotential parse_potential(const std::string& spec, int n, int k);
SpatialPotential parse_spatial(const std::string& spec, int k);
ConformalFactor parse_conformal(const std::string& spec);
ModelManifold make_manifold(const RunConfig& cfg);

enum class ScenarioId { Example1, Example2, Example3, Example4, Example5, SphereIdentity, TorusExistence };

std::string to_string(ScenarioId id);
/// Throws InvalidArgument for names outside the enumerated set.
ScenarioId parse_scenario(const std::string& name);
const std::vector<ScenarioId>& all_scenarios();

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct ScenarioReport {
  ScenarioId id = ScenarioId::SphereIdentity;
  std::vector<Check> checks;
  std::vector<std::string> notes;
  Json data = Json::object();
  double seconds = 0.0;

  bool passed() const;
  /// First failed check, or nullptr.
  const Check* first_failure() const;
  Json to_json() const;
  /// One record per check, for tabular output.
  Json check_rows() const;
};

/// Runs one of the examples. Only n, grid_N, seed, tol and hebey are taken
/// from the overrides; the potentials are fixed by the example. With
/// throw_on_failure the first failed check raises ScenarioFailed.
ScenarioReport run_scenario(ScenarioId id, const RunConfig& overrides = {}, bool throw_on_failure = false);

/// Serializes with sorted keys and %.12g numbers; identical input gives identical bytes.
std::string deterministic_json(const Json& j, int indent = 2);
/// Array of flat records to CSV (header = sorted union of keys). Nested values
/// are written as compact JSON strings.
std::string records_to_csv(const Json& records);

/// Writes `results` (an array of records) to path. Throws IoError.
void emit_report(const Json& results, OutputFormat format, const std::string& path);

}  // namespace sobolev
