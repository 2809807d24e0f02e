#ifndef RMSPACE_SCENARIO_HPP
#define RMSPACE_SCENARIO_HPP

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rmspace/fixpoint.hpp"
#include "rmspace/variational.hpp"

namespace rmspace {

/// Scenario parse failure, with line/column for syntax errors and an object
/// path for semantic ones.
class ScenarioError : public Error {
 public:
  using Error::Error;
};

// Operators in scenarios form a small declarative algebra: per-atom affine
// maps on Euclidean sections and per-atom lookup tables on finite bases.
// Arbitrary code is not accepted.

struct AffineOperator {
  std::vector<std::vector<std::vector<double>>> a;  // [atom][row][col]
  std::vector<std::vector<double>> b;               // [atom][dim]
};

struct TableOperator {
  std::vector<std::vector<int>> map;  // [atom][base index] -> base index
};

using OperatorSpec = std::variant<AffineOperator, TableOperator>;

struct DistanceObjective {
  std::string point;  // name of the reference point object
};

struct AtomTableObjective {
  std::vector<std::vector<double>> values;  // [atom][base index]; +inf allowed
};

using ObjectiveSpec = std::variant<DistanceObjective, AtomTableObjective>;

enum class TaskKind { Banach, Power, Nadler, Pointwise, Ekeland, Caristi, Verify };

std::string task_kind_name(TaskKind kind);

struct Task {
  TaskKind kind = TaskKind::Verify;
  std::optional<OperatorSpec> op;
  std::vector<OperatorSpec> branches;
  std::optional<ObjectiveSpec> objective;
  std::string x0_name;
  std::string carrier_name;
  std::optional<RandomScalar> alpha;
  std::optional<RandomScalar> eps;
  std::optional<RandomInteger> power;
  std::vector<std::vector<ContractionCertificate>> certificates;
  double tol = 1e-9;
  int max_iter = 10000;
  std::uint64_t seed = 0;
  int verify_samples = 4;
};

struct Scenario {
  ProbSpace prob;
  BaseMetricSpace base;
  std::map<std::string, RandomPoint> points;
  std::map<std::string, std::vector<RandomPoint>> sets;  // generators by name
  std::map<std::string, RandomScalar> scalars;
  Task task;

  RMSpace space() const;
  const RandomPoint& point(const std::string& name) const;
  const std::vector<RandomPoint>& set(const std::string& name) const;
};

/// Parses and validates a scenario document.
Scenario parse_scenario(const std::string& text);

/// Canonical JSON form; parse(emit(parse(s))) equals parse(s).
nlohmann::json scenario_to_json(const Scenario& scenario);

PointMap make_point_map(const Scenario& scenario, const OperatorSpec& op);
AtomOperator make_atom_operator(const Scenario& scenario, const OperatorSpec& op);
MultiMap make_multi_map(const Scenario& scenario, std::span<const OperatorSpec> branches);
RandomFunction make_objective(const Scenario& scenario, const ObjectiveSpec& objective);

struct RunOverrides {
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::uint64_t> seed;
};

struct Report {
  std::string status = "ok";  // ok | violation | error
  nlohmann::json body = nlohmann::json::object();
  double wall_ms = 0.0;

  // 0 ok, 1 violation or runtime failure; parse/usage problems exit 2
  // before a report exists.
  int exit_code() const { return status == "ok" ? 0 : 1; }
};

/// Executes the scenario's task and assembles a deterministic report.
Report run_scenario(const Scenario& scenario, const RunOverrides& overrides = {});

enum class ReportFormat { Json, Text };

/// Json output is stable-keyed and byte-deterministic for a fixed scenario
/// and seed; wall-clock timing appears only in the text rendering.
std::string emit_report(const Report& report, ReportFormat format);

/// Hull listing for the named set object.
Report hull_report(const Scenario& scenario, const std::string& set_name);

}  // namespace rmspace

#endif  // RMSPACE_SCENARIO_HPP
