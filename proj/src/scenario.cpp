#include "rmspace/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace rmspace {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ScenarioError(path + ": " + msg);
}

// JSON accessor that carries the object path for error messages.
struct Cursor {
  const json* node;
  std::string path;

  Cursor at(const std::string& key) const {
    if (!node->is_object()) fail(path, "expected an object");
    auto it = node->find(key);
    if (it == node->end()) fail(path, "missing required key '" + key + "'");
    return Cursor{&*it, path + "." + key};
  }
  std::optional<Cursor> maybe(const std::string& key) const {
    if (!node->is_object()) fail(path, "expected an object");
    auto it = node->find(key);
    if (it == node->end()) return std::nullopt;
    return Cursor{&*it, path + "." + key};
  }
  Cursor item(std::size_t i) const {
    if (!node->is_array()) fail(path, "expected an array");
    if (i >= node->size()) fail(path, "index out of range");
    std::ostringstream os;
    os << path << "[" << i << "]";
    return Cursor{&(*node)[i], os.str()};
  }
  std::size_t size() const {
    if (!node->is_array()) fail(path, "expected an array");
    return node->size();
  }
  double as_double() const {
    if (node->is_string() && node->get<std::string>() == "inf") return kInf;
    if (!node->is_number()) fail(path, "expected a number");
    return node->get<double>();
  }
  int as_int() const {
    if (!node->is_number_integer()) fail(path, "expected an integer");
    return node->get<int>();
  }
  std::string as_string() const {
    if (!node->is_string()) fail(path, "expected a string");
    return node->get<std::string>();
  }
  std::vector<double> as_doubles() const {
    std::vector<double> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(item(i).as_double());
    return out;
  }
};

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

BasePoint parse_section(const Cursor& c, const BaseMetricSpace& base) {
  if (base.is_finite()) return BasePoint(base.label_index(c.as_string()));
  const std::vector<double> coords = c.as_doubles();
  if (static_cast<int>(coords.size()) != base.dim()) fail(c.path, "coordinate dimension mismatch");
  return BasePoint(coords);
}

RandomPoint parse_point(const Cursor& c, const BaseMetricSpace& base, int atoms) {
  if (static_cast<int>(c.size()) != atoms) fail(c.path, "expected one section per atom");
  std::vector<BasePoint> sections;
  sections.reserve(atoms);
  for (int i = 0; i < atoms; ++i) sections.push_back(parse_section(c.item(i), base));
  return RandomPoint(std::move(sections));
}

RandomScalar parse_scalar_value(const Cursor& c, const Scenario& sc) {
  const int atoms = sc.prob.atom_count();
  if (c.node->is_string()) {
    const std::string name = c.as_string();
    auto it = sc.scalars.find(name);
    if (it == sc.scalars.end()) fail(c.path, "unknown scalar object '" + name + "'");
    return it->second;
  }
  if (c.node->is_number()) return RandomScalar::constant(atoms, c.as_double());
  const std::vector<double> values = c.as_doubles();
  if (static_cast<int>(values.size()) != atoms) fail(c.path, "expected one value per atom");
  return RandomScalar(values);
}

OperatorSpec parse_operator(const Cursor& c, const Scenario& sc) {
  const int atoms = sc.prob.atom_count();
  const std::string type = c.at("type").as_string();
  if (type == "affine") {
    if (sc.base.is_finite()) fail(c.path, "affine operators need a Euclidean base");
    const int dim = sc.base.dim();
    AffineOperator op;
    const Cursor a = c.at("a");
    const Cursor b = c.at("b");
    if (static_cast<int>(a.size()) != atoms || static_cast<int>(b.size()) != atoms) {
      fail(c.path, "expected one matrix and one vector per atom");
    }
    for (int atom = 0; atom < atoms; ++atom) {
      const Cursor rows = a.item(atom);
      if (static_cast<int>(rows.size()) != dim) fail(rows.path, "matrix row count mismatch");
      std::vector<std::vector<double>> m;
      for (int r = 0; r < dim; ++r) {
        std::vector<double> row = rows.item(r).as_doubles();
        if (static_cast<int>(row.size()) != dim) fail(rows.item(r).path, "matrix column count mismatch");
        m.push_back(std::move(row));
      }
      op.a.push_back(std::move(m));
      std::vector<double> vec = b.item(atom).as_doubles();
      if (static_cast<int>(vec.size()) != dim) fail(b.item(atom).path, "vector dimension mismatch");
      op.b.push_back(std::move(vec));
    }
    return op;
  }
  if (type == "table") {
    if (!sc.base.is_finite()) fail(c.path, "table operators need a finite base");
    const int k = sc.base.point_count();
    TableOperator op;
    const Cursor map = c.at("map");
    if (static_cast<int>(map.size()) != atoms) fail(map.path, "expected one table per atom");
    for (int atom = 0; atom < atoms; ++atom) {
      const Cursor row = map.item(atom);
      if (static_cast<int>(row.size()) != k) fail(row.path, "expected one image per base point");
      std::vector<int> images;
      for (int i = 0; i < k; ++i) images.push_back(sc.base.label_index(row.item(i).as_string()));
      op.map.push_back(std::move(images));
    }
    return op;
  }
  fail(c.path, "unknown operator type '" + type + "' (expected affine or table)");
}

ObjectiveSpec parse_objective(const Cursor& c, const Scenario& sc) {
  const std::string type = c.at("type").as_string();
  if (type == "distance-to") {
    const std::string name = c.at("point").as_string();
    if (sc.points.find(name) == sc.points.end()) {
      fail(c.at("point").path, "unknown point object '" + name + "'");
    }
    return DistanceObjective{name};
  }
  if (type == "atom-table") {
    if (!sc.base.is_finite()) fail(c.path, "atom-table objectives need a finite base");
    const int atoms = sc.prob.atom_count();
    const int k = sc.base.point_count();
    AtomTableObjective obj;
    const Cursor values = c.at("values");
    if (static_cast<int>(values.size()) != atoms) fail(values.path, "expected one row per atom");
    for (int atom = 0; atom < atoms; ++atom) {
      const Cursor row = values.item(atom);
      if (static_cast<int>(row.size()) != k) fail(row.path, "expected one value per base point");
      obj.values.push_back(row.as_doubles());
    }
    return obj;
  }
  fail(c.path, "unknown objective type '" + type + "' (expected distance-to or atom-table)");
}

const std::vector<std::pair<TaskKind, std::string>> kTaskNames = {
    {TaskKind::Banach, "solve-banach"},     {TaskKind::Power, "solve-power"},
    {TaskKind::Nadler, "solve-nadler"},     {TaskKind::Pointwise, "solve-pointwise"},
    {TaskKind::Ekeland, "ekeland"},         {TaskKind::Caristi, "caristi"},
    {TaskKind::Verify, "verify"},
};

TaskKind parse_task_kind(const Cursor& c) {
  const std::string name = c.as_string();
  for (const auto& [kind, n] : kTaskNames) {
    if (n == name) return kind;
  }
  std::ostringstream os;
  os << "unknown task '" << name << "'; valid tasks:";
  for (const auto& [kind, n] : kTaskNames) os << " " << n;
  fail(c.path, os.str());
}

void require_point_name(const Scenario& sc, const Cursor& c, const std::string& name) {
  if (sc.points.find(name) == sc.points.end()) fail(c.path, "unknown point object '" + name + "'");
}

void require_set_name(const Scenario& sc, const Cursor& c, const std::string& name) {
  if (sc.sets.find(name) == sc.sets.end()) fail(c.path, "unknown set object '" + name + "'");
}

}  // namespace

std::string task_kind_name(TaskKind kind) {
  for (const auto& [k, n] : kTaskNames) {
    if (k == kind) return n;
  }
  return "?";
}

RMSpace Scenario::space() const { return l0_space(prob, base); }

const RandomPoint& Scenario::point(const std::string& name) const {
  auto it = points.find(name);
  if (it == points.end()) throw ScenarioError("unknown point object '" + name + "'");
  return it->second;
}

const std::vector<RandomPoint>& Scenario::set(const std::string& name) const {
  auto it = sets.find(name);
  if (it == sets.end()) throw ScenarioError("unknown set object '" + name + "'");
  return it->second;
}

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::ostringstream os;
    os << "parse error at line " << line << ", column " << col << ": " << e.what();
    throw ScenarioError(os.str());
  }
  const Cursor root{&doc, "$"};

  // Probability space.
  const Cursor space = root.at("space");
  std::vector<double> probs = space.at("probs").as_doubles();
  auto prob = [&]() -> ProbSpace {
    try {
      return ProbSpace(std::move(probs));
    } catch (const InvalidArgument& e) {
      fail(space.at("probs").path, e.what());
    }
  }();
  const int atoms = prob.atom_count();

  // Base metric space.
  const Cursor base_node = root.at("base");
  const std::string base_type = base_node.at("type").as_string();
  auto base = [&]() -> BaseMetricSpace {
    try {
      if (base_type == "euclidean") {
        return BaseMetricSpace::euclidean(base_node.at("dim").as_int());
      }
      if (base_type == "finite") {
        const Cursor labels_node = base_node.at("labels");
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < labels_node.size(); ++i) {
          labels.push_back(labels_node.item(i).as_string());
        }
        const Cursor dist_node = base_node.at("dist");
        std::vector<std::vector<double>> dist;
        for (std::size_t i = 0; i < dist_node.size(); ++i) {
          dist.push_back(dist_node.item(i).as_doubles());
        }
        return BaseMetricSpace::finite_points(std::move(labels), std::move(dist));
      }
      fail(base_node.at("type").path, "unknown base type '" + base_type + "'");
    } catch (const InvalidArgument& e) {
      fail(base_node.path, e.what());
    }
  }();

  Scenario sc{std::move(prob), std::move(base), {}, {}, {}, Task{}};

  // Named objects.
  if (const auto objects = root.maybe("objects")) {
    if (!objects->node->is_object()) fail(objects->path, "expected an object");
    for (auto it = objects->node->begin(); it != objects->node->end(); ++it) {
      const Cursor obj{&it.value(), objects->path + "." + it.key()};
      const std::string kind = obj.at("kind").as_string();
      try {
        if (kind == "point") {
          sc.points.emplace(it.key(), parse_point(obj.at("sections"), sc.base, atoms));
        } else if (kind == "scalar") {
          std::vector<double> values = obj.at("values").as_doubles();
          if (static_cast<int>(values.size()) != atoms) {
            fail(obj.at("values").path, "expected one value per atom");
          }
          sc.scalars.emplace(it.key(), RandomScalar(std::move(values)));
        } else if (kind == "set") {
          const Cursor gens = obj.at("generators");
          std::vector<RandomPoint> generators;
          for (std::size_t i = 0; i < gens.size(); ++i) {
            generators.push_back(parse_point(gens.item(i), sc.base, atoms));
          }
          if (generators.empty()) fail(gens.path, "a set needs at least one generator");
          sc.sets.emplace(it.key(), std::move(generators));
        } else {
          fail(obj.path, "unknown object kind '" + kind + "' (expected point, scalar, or set)");
        }
      } catch (const InvalidArgument& e) {
        fail(obj.path, e.what());
      }
    }
  }

  // Task.
  const Cursor task = root.at("task");
  Task& t = sc.task;
  t.kind = parse_task_kind(task.at("kind"));
  try {
    if (const auto c = task.maybe("tol")) t.tol = c->as_double();
    if (const auto c = task.maybe("max_iter")) t.max_iter = c->as_int();
    if (const auto c = task.maybe("seed")) t.seed = static_cast<std::uint64_t>(c->as_int());
    if (const auto c = task.maybe("samples")) t.verify_samples = c->as_int();
    if (t.tol <= 0.0) fail(task.path, "tol must be positive");

    auto need_x0 = [&] {
      const Cursor c = task.at("x0");
      t.x0_name = c.as_string();
      require_point_name(sc, c, t.x0_name);
    };
    auto need_alpha = [&] {
      const Cursor c = task.at("alpha");
      try {
        t.alpha = parse_scalar_value(c, sc);
        (void)ContractionFactor(*t.alpha);  // range validation
      } catch (const InvalidArgument& e) {
        fail(c.path, e.what());
      }
    };

    switch (t.kind) {
      case TaskKind::Banach:
      case TaskKind::Pointwise:
        t.op = parse_operator(task.at("operator"), sc);
        need_x0();
        need_alpha();
        break;
      case TaskKind::Power: {
        t.op = parse_operator(task.at("operator"), sc);
        need_x0();
        if (const auto certs = task.maybe("certificates")) {
          if (static_cast<int>(certs->size()) != atoms) {
            fail(certs->path, "expected one certificate list per atom");
          }
          for (int atom = 0; atom < atoms; ++atom) {
            const Cursor list = certs->item(atom);
            std::vector<ContractionCertificate> row;
            for (std::size_t i = 0; i < list.size(); ++i) {
              const Cursor cert = list.item(i);
              row.push_back(ContractionCertificate{cert.at("power").as_int(),
                                                   cert.at("level").as_int()});
            }
            t.certificates.push_back(std::move(row));
          }
        } else {
          const Cursor power = task.at("power");
          std::vector<int> values;
          for (std::size_t i = 0; i < power.size(); ++i) values.push_back(power.item(i).as_int());
          if (static_cast<int>(values.size()) != atoms) {
            fail(power.path, "expected one exponent per atom");
          }
          try {
            t.power = RandomInteger(std::move(values));
          } catch (const InvalidArgument& e) {
            fail(power.path, e.what());
          }
          need_alpha();
        }
        break;
      }
      case TaskKind::Nadler: {
        const Cursor branches = task.at("branches");
        if (branches.size() == 0) fail(branches.path, "need at least one branch");
        for (std::size_t i = 0; i < branches.size(); ++i) {
          t.branches.push_back(parse_operator(branches.item(i), sc));
        }
        need_x0();
        need_alpha();
        break;
      }
      case TaskKind::Ekeland: {
        const Cursor carrier = task.at("carrier");
        t.carrier_name = carrier.as_string();
        require_set_name(sc, carrier, t.carrier_name);
        t.objective = parse_objective(task.at("objective"), sc);
        need_x0();
        need_alpha();
        t.eps = parse_scalar_value(task.at("eps"), sc);
        break;
      }
      case TaskKind::Caristi: {
        const Cursor carrier = task.at("carrier");
        t.carrier_name = carrier.as_string();
        require_set_name(sc, carrier, t.carrier_name);
        t.op = parse_operator(task.at("operator"), sc);
        t.objective = parse_objective(task.at("objective"), sc);
        break;
      }
      case TaskKind::Verify:
        break;
    }
  } catch (const InvalidArgument& e) {
    fail(task.path, e.what());
  }
  return sc;
}

// ---------------------------------------------------------------------------
// Canonical emission

namespace {

json section_to_json(const BaseMetricSpace& base, const BasePoint& p) {
  if (base.is_finite()) return base.label(std::get<int>(p));
  return json(std::get<std::vector<double>>(p));
}

json point_to_json(const BaseMetricSpace& base, const RandomPoint& x) {
  json out = json::array();
  for (int atom = 0; atom < x.atoms(); ++atom) out.push_back(section_to_json(base, x.section(atom)));
  return out;
}

json double_to_json(double v) {
  if (v == kInf) return "inf";
  return v;
}

json operator_to_json(const BaseMetricSpace& base, const OperatorSpec& op) {
  json out;
  if (const auto* affine = std::get_if<AffineOperator>(&op)) {
    out["type"] = "affine";
    out["a"] = affine->a;
    out["b"] = affine->b;
  } else {
    const auto& table = std::get<TableOperator>(op);
    out["type"] = "table";
    json map = json::array();
    for (const auto& row : table.map) {
      json images = json::array();
      for (int i : row) images.push_back(base.label(i));
      map.push_back(std::move(images));
    }
    out["map"] = std::move(map);
  }
  return out;
}

json objective_to_json(const ObjectiveSpec& obj) {
  json out;
  if (const auto* dist = std::get_if<DistanceObjective>(&obj)) {
    out["type"] = "distance-to";
    out["point"] = dist->point;
  } else {
    const auto& table = std::get<AtomTableObjective>(obj);
    out["type"] = "atom-table";
    json values = json::array();
    for (const auto& row : table.values) {
      json r = json::array();
      for (double v : row) r.push_back(double_to_json(v));
      values.push_back(std::move(r));
    }
    out["values"] = std::move(values);
  }
  return out;
}

}  // namespace

json scenario_to_json(const Scenario& sc) {
  json out;
  out["space"]["probs"] = sc.prob.atom_count() > 0
                              ? [&] {
                                  std::vector<double> p;
                                  for (int i = 0; i < sc.prob.atom_count(); ++i) {
                                    p.push_back(sc.prob.prob(i));
                                  }
                                  return p;
                                }()
                              : std::vector<double>{};
  if (sc.base.is_finite()) {
    out["base"]["type"] = "finite";
    json labels = json::array();
    json dist = json::array();
    for (int i = 0; i < sc.base.point_count(); ++i) {
      labels.push_back(sc.base.label(i));
      json row = json::array();
      for (int j = 0; j < sc.base.point_count(); ++j) {
        row.push_back(sc.base.distance(BasePoint(i), BasePoint(j)));
      }
      dist.push_back(std::move(row));
    }
    out["base"]["labels"] = std::move(labels);
    out["base"]["dist"] = std::move(dist);
  } else {
    out["base"]["type"] = "euclidean";
    out["base"]["dim"] = sc.base.dim();
  }

  json objects = json::object();
  for (const auto& [name, p] : sc.points) {
    objects[name] = {{"kind", "point"}, {"sections", point_to_json(sc.base, p)}};
  }
  for (const auto& [name, s] : sc.scalars) {
    objects[name] = {{"kind", "scalar"}, {"values", s.values()}};
  }
  for (const auto& [name, gens] : sc.sets) {
    json g = json::array();
    for (const RandomPoint& p : gens) g.push_back(point_to_json(sc.base, p));
    objects[name] = {{"kind", "set"}, {"generators", std::move(g)}};
  }
  if (!objects.empty()) out["objects"] = std::move(objects);

  json task;
  task["kind"] = task_kind_name(sc.task.kind);
  task["tol"] = sc.task.tol;
  task["max_iter"] = sc.task.max_iter;
  if (sc.task.kind == TaskKind::Verify) {
    task["seed"] = sc.task.seed;
    task["samples"] = sc.task.verify_samples;
  }
  if (sc.task.op) task["operator"] = operator_to_json(sc.base, *sc.task.op);
  if (!sc.task.branches.empty()) {
    json branches = json::array();
    for (const OperatorSpec& b : sc.task.branches) {
      branches.push_back(operator_to_json(sc.base, b));
    }
    task["branches"] = std::move(branches);
  }
  if (sc.task.objective) task["objective"] = objective_to_json(*sc.task.objective);
  if (!sc.task.x0_name.empty()) task["x0"] = sc.task.x0_name;
  if (!sc.task.carrier_name.empty()) task["carrier"] = sc.task.carrier_name;
  if (sc.task.alpha) task["alpha"] = sc.task.alpha->values();
  if (sc.task.eps) task["eps"] = sc.task.eps->values();
  if (sc.task.power) task["power"] = sc.task.power->values();
  if (!sc.task.certificates.empty()) {
    json certs = json::array();
    for (const auto& row : sc.task.certificates) {
      json list = json::array();
      for (const ContractionCertificate& c : row) {
        list.push_back({{"power", c.power}, {"level", c.level}});
      }
      certs.push_back(std::move(list));
    }
    task["certificates"] = std::move(certs);
  }
  out["task"] = std::move(task);
  return out;
}

// ---------------------------------------------------------------------------
// Operator and objective realization

PointMap make_point_map(const Scenario& sc, const OperatorSpec& op) {
  const AtomOperator atom_op = make_atom_operator(sc, op);
  return PointMap{[atom_op](const Point& p) {
                    const RandomPoint& x = p.l0();
                    std::vector<BasePoint> out(x.atoms());
                    for (int atom = 0; atom < x.atoms(); ++atom) {
                      out[atom] = atom_op(atom, x.section(atom));
                    }
                    return Point(RandomPoint(std::move(out)));
                  },
                  true};
}

AtomOperator make_atom_operator(const Scenario&, const OperatorSpec& op) {
  if (const auto* affine = std::get_if<AffineOperator>(&op)) {
    const AffineOperator data = *affine;
    return [data](int atom, const BasePoint& p) {
      const auto& x = std::get<std::vector<double>>(p);
      const auto& m = data.a[atom];
      const auto& b = data.b[atom];
      std::vector<double> out(b);
      for (std::size_t r = 0; r < m.size(); ++r) {
        for (std::size_t c = 0; c < m[r].size(); ++c) out[r] += m[r][c] * x[c];
      }
      return BasePoint(std::move(out));
    };
  }
  const TableOperator data = std::get<TableOperator>(op);
  return [data](int atom, const BasePoint& p) {
    return BasePoint(data.map[atom][std::get<int>(p)]);
  };
}

MultiMap make_multi_map(const Scenario& sc, std::span<const OperatorSpec> branches) {
  std::vector<PointMap> maps;
  maps.reserve(branches.size());
  for (const OperatorSpec& b : branches) maps.push_back(make_point_map(sc, b));
  const RMSpace space = sc.space();
  return [space, maps](const RandomPoint& x) {
    std::vector<RandomPoint> generators;
    generators.reserve(maps.size());
    for (const PointMap& m : maps) generators.push_back(m.apply(Point(x)).l0());
    return sigma_hull(space, std::move(generators));
  };
}

RandomFunction make_objective(const Scenario& sc, const ObjectiveSpec& objective) {
  if (const auto* dist = std::get_if<DistanceObjective>(&objective)) {
    const RandomPoint ref = sc.point(dist->point);
    const RMSpace space = sc.space();
    return RandomFunction{
        [space, ref](const RandomPoint& x) {
          return ExtRandomScalar(space.distance(Point(x), Point(ref)));
        },
        true};
  }
  const AtomTableObjective data = std::get<AtomTableObjective>(objective);
  return RandomFunction{[data](const RandomPoint& x) {
                          std::vector<double> out(x.atoms());
                          for (int atom = 0; atom < x.atoms(); ++atom) {
                            out[atom] = data.values[atom][std::get<int>(x.section(atom))];
                          }
                          return ExtRandomScalar(std::move(out));
                        },
                        true};
}

// ---------------------------------------------------------------------------
// Task execution

namespace {

json scalar_json(const RandomScalar& s) { return json(s.values()); }

json certificate_json(const BaseMetricSpace& base, const EkelandCertificate& cert) {
  json out;
  out["z"] = point_to_json(base, cert.z);
  out["cond1"] = cert.cond1_ok;
  out["cond2"] = cert.cond2_ok;
  out["cond3"] = cert.cond3_ok;
  if (cert.cond3_witness) out["cond3_witness"] = point_to_json(base, *cert.cond3_witness);
  return out;
}

std::vector<RandomPoint> random_sample_points(const Scenario& sc, std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::vector<RandomPoint> out;
  const int atoms = sc.prob.atom_count();
  for (int s = 0; s < count; ++s) {
    std::vector<BasePoint> sections(atoms);
    for (int atom = 0; atom < atoms; ++atom) {
      if (sc.base.is_finite()) {
        std::uniform_int_distribution<int> pick(0, sc.base.point_count() - 1);
        sections[atom] = pick(rng);
      } else {
        std::uniform_real_distribution<double> coord(-2.0, 2.0);
        std::vector<double> c(sc.base.dim());
        for (double& v : c) v = coord(rng);
        sections[atom] = std::move(c);
      }
    }
    out.emplace_back(std::move(sections));
  }
  return out;
}

json run_verify(const Scenario& sc, std::uint64_t seed, int samples) {
  const RMSpace space = sc.space();
  const int atoms = sc.prob.atom_count();
  json checks = json::array();
  bool all_pass = true;

  auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    checks.push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
    if (!pass) all_pass = false;
  };

  // Sample pool: named points, set generators, then seeded random points.
  std::vector<RandomPoint> pool;
  for (const auto& [name, p] : sc.points) pool.push_back(p);
  for (const auto& [name, gens] : sc.sets) {
    for (const RandomPoint& g : gens) pool.push_back(g);
  }
  for (RandomPoint& p : random_sample_points(sc, seed, samples)) pool.push_back(std::move(p));
  if (pool.size() > 8) pool.erase(pool.begin() + 8, pool.end());  // the triple scan is cubic

  {
    std::vector<Point> pts;
    for (const RandomPoint& p : pool) pts.emplace_back(p);
    const AxiomReport report = check_rm_axioms(space, pts);
    std::ostringstream os;
    os << report.pairs_checked << " pairs, " << report.triples_checked << " triples";
    if (!report.ok()) {
      os << "; first violation " << report.violations.front().axiom << " at atom "
         << report.violations.front().atom;
    }
    add("rm-axioms", report.ok(), os.str());
  }

  if (!sc.base.is_finite()) {
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    std::vector<RandomScalar> scalars;
    for (int i = 0; i < 3; ++i) {
      std::vector<double> v(atoms);
      for (double& x : v) x = coord(rng);
      scalars.emplace_back(std::move(v));
    }
    const RNModuleSpace module{space};
    const AxiomReport report = check_rn_axioms(module, pool, scalars);
    add("rn-axioms", report.ok(),
        report.ok() ? "norm axioms and d(x,y)=|x-y| hold on all samples"
                    : "violation: " + report.violations.front().axiom);
  }

  {
    // Gluing uniqueness: atomwise gluing versus composed two-block gluings.
    std::mt19937_64 rng(seed + 2);
    bool pass = true;
    std::string detail = "atomwise and two-block compositions agree";
    for (int trial = 0; trial < 20 && pass; ++trial) {
      std::uniform_int_distribution<int> pick_block(0, std::min(3, atoms - 1));
      std::vector<std::vector<int>> assignment(pick_block.max() + 1);
      for (int atom = 0; atom < atoms; ++atom) assignment[pick_block(rng)].push_back(atom);
      std::vector<Event> blocks;
      for (auto& b : assignment) blocks.push_back(Event(std::move(b)));
      const Partition pi{std::move(blocks)};
      std::uniform_int_distribution<std::size_t> pick_point(0, pool.size() - 1);
      std::vector<RandomPoint> xs;
      for (int b = 0; b < pi.block_count(); ++b) xs.push_back(pool[pick_point(rng)]);

      const RandomPoint glued = glue_points(pi, xs);
      RandomPoint composed = xs.back();
      for (int b = pi.block_count() - 2; b >= 0; --b) {
        const Partition two = Partition::two_block(pi.blocks()[b], atoms);
        const std::vector<RandomPoint> pieces = {xs[b], composed};
        composed = glue_points(two, pieces);
      }
      const double gap = space.distance(Point(glued), Point(composed)).max_value();
      if (gap > 1e-12) {
        pass = false;
        detail = "two-block composition disagreed with atomwise gluing";
      }
      for (int b = 0; b < pi.block_count() && pass; ++b) {
        const RandomScalar masked =
            indicator(sc.prob, pi.blocks()[b]) * space.distance(Point(glued), Point(xs[b]));
        if (masked.abs().max_value() > 1e-12) {
          pass = false;
          detail = "glued point disagrees with a piece on its block";
        }
      }
    }
    add("gluing-uniqueness", pass, detail);
  }

  for (const auto& [name, gens] : sc.sets) {
    const SigmaStableSet set = sigma_hull(space, gens);
    if (set.size() > 256) {
      add("distance-lattice:" + name, true, "skipped: hull too large");
      continue;
    }
    std::vector<RandomPoint> members;
    for (std::size_t i = 0; i < set.size(); ++i) members.push_back(set.member(i));
    std::vector<RandomScalar> distances;
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = 0; j < members.size(); ++j) {
        distances.push_back(space.distance(Point(members[i]), Point(members[j])));
      }
    }
    bool pass = is_sigma_stable_scalars(distances);
    std::string detail = "distance set is sigma-stable";
    if (pass && members.size() >= 2) {
      const LatticeWitness w = distance_lattice_witness(
          set, {members[0], members[members.size() / 2]}, {members.back(), members[0]});
      const RandomScalar d1 = space.distance(Point(members[0]), Point(members[members.size() / 2]));
      const RandomScalar d2 = space.distance(Point(members.back()), Point(members[0]));
      const RandomScalar got_min = space.distance(Point(w.min_pair.first), Point(w.min_pair.second));
      const RandomScalar got_max = space.distance(Point(w.max_pair.first), Point(w.max_pair.second));
      if (!(got_min == d1.pointwise_min(d2)) || !(got_max == d1.pointwise_max(d2))) {
        pass = false;
        detail = "lattice witness did not realize the pointwise min/max";
      }
    }
    add("distance-lattice:" + name, pass, detail);

    bool closure_pass = true;
    std::string closure_detail = "d(x,G)=0 iff x in closure; hull replacement invariant";
    for (const RandomPoint& x : pool) {
      const SetDistance d = dist_to_set(x, set);
      if (in_closure(x, set) != (d.value.max_value() <= kZeroTol)) closure_pass = false;
      const SigmaStableSet rehull = sigma_hull(space, members);
      const SetDistance d2 = dist_to_set(x, rehull);
      if ((d.value - d2.value).abs().max_value() > 1e-12) closure_pass = false;
      if (in_closure(x, set) != in_closure(x, rehull)) closure_pass = false;
    }
    for (std::size_t i = 0; i < members.size() && closure_pass; ++i) {
      if (!in_closure(members[i], set)) closure_pass = false;
    }
    add("closure:" + name, closure_pass, closure_detail);
  }

  json out;
  out["checks"] = std::move(checks);
  out["all_pass"] = all_pass;
  return out;
}

}  // namespace

Report run_scenario(const Scenario& sc, const RunOverrides& overrides) {
  const auto started = std::chrono::steady_clock::now();
  Report report;
  report.body["task"] = task_kind_name(sc.task.kind);

  SolveOptions opt;
  opt.tol = overrides.tol.value_or(sc.task.tol);
  opt.max_iter = overrides.max_iter.value_or(sc.task.max_iter);
  const std::uint64_t seed = overrides.seed.value_or(sc.task.seed);

  const RMSpace space = sc.space();
  try {
    switch (sc.task.kind) {
      case TaskKind::Banach: {
        const PointMap t = make_point_map(sc, *sc.task.op);
        const ContractionFactor alpha{*sc.task.alpha};
        const SolveReport r = banach_solve(space, t, Point(sc.point(sc.task.x0_name)), alpha, opt);
        report.body["solution"] = point_to_json(sc.base, r.solution.l0());
        report.body["residual"] = scalar_json(r.residual);
        report.body["iterations"] = r.iterations;
        break;
      }
      case TaskKind::Power: {
        const PointMap t = make_point_map(sc, *sc.task.op);
        RandomInteger power = RandomInteger::constant(sc.prob.atom_count(), 1);
        std::optional<ContractionFactor> alpha;
        if (!sc.task.certificates.empty()) {
          HansConstruction hans = hans_construct(sc.task.certificates);
          power = hans.power;
          alpha = hans.alpha;
          report.body["power"] = power.values();
          report.body["alpha"] = scalar_json(alpha->alpha());
        } else {
          power = *sc.task.power;
          alpha = ContractionFactor{*sc.task.alpha};
        }
        const SolveReport r =
            random_power_solve(space, t, power, *alpha, Point(sc.point(sc.task.x0_name)), opt);
        report.body["solution"] = point_to_json(sc.base, r.solution.l0());
        report.body["residual"] = scalar_json(r.residual);
        report.body["iterations"] = r.iterations;
        break;
      }
      case TaskKind::Nadler: {
        const MultiMap t = make_multi_map(sc, sc.task.branches);
        const ContractionFactor alpha{*sc.task.alpha};
        const SolveReport r = nadler_solve(space, t, sc.point(sc.task.x0_name), alpha, opt);
        const RandomPoint& x = r.solution.l0();
        report.body["solution"] = point_to_json(sc.base, x);
        report.body["residual"] = scalar_json(r.residual);
        report.body["iterations"] = r.iterations;
        report.body["membership"] = in_closure(x, t(x));
        break;
      }
      case TaskKind::Pointwise: {
        const AtomOperator t = make_atom_operator(sc, *sc.task.op);
        const ContractionFactor alpha{*sc.task.alpha};
        const SolveReport r =
            pointwise_operator_solve(space, t, alpha, sc.point(sc.task.x0_name), opt);
        report.body["solution"] = point_to_json(sc.base, r.solution.l0());
        report.body["residual"] = scalar_json(r.residual);
        report.body["iterations"] = r.iterations;
        break;
      }
      case TaskKind::Ekeland: {
        const SigmaStableSet carrier = sigma_hull(space, sc.set(sc.task.carrier_name));
        const RandomFunction f = make_objective(sc, *sc.task.objective);
        const EkelandCertificate cert =
            ekeland_point(carrier, f, sc.point(sc.task.x0_name), *sc.task.eps, *sc.task.alpha,
                          opt.max_iter);
        report.body["certificate"] = certificate_json(sc.base, cert);
        if (!cert.ok()) {
          report.status = "violation";
          report.body["violation"] = "variational certificate failed";
        }
        break;
      }
      case TaskKind::Caristi: {
        const SigmaStableSet carrier = sigma_hull(space, sc.set(sc.task.carrier_name));
        const PointMap t = make_point_map(sc, *sc.task.op);
        const RandomFunction f = make_objective(sc, *sc.task.objective);
        const RandomPoint z = caristi_fixed_point(carrier, t, f);
        report.body["fixed_point"] = point_to_json(sc.base, z);
        report.body["residual"] = scalar_json(space.distance(Point(z), t.apply(Point(z))));
        break;
      }
      case TaskKind::Verify: {
        json verify = run_verify(sc, seed, sc.task.verify_samples);
        report.body["checks"] = verify["checks"];
        if (!verify["all_pass"].get<bool>()) {
          report.status = "violation";
          report.body["violation"] = "one or more verification checks failed";
        }
        break;
      }
    }
  } catch (const ContractionViolation& e) {
    report.status = "violation";
    report.body["violation"] = e.what();
  } catch (const HypothesisViolation& e) {
    report.status = "violation";
    report.body["violation"] = e.what();
  } catch (const Error& e) {
    report.status = "error";
    report.body["error"] = e.what();
  }

  report.body["status"] = report.status;
  report.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
          .count();
  return report;
}

Report hull_report(const Scenario& sc, const std::string& set_name) {
  Report report;
  report.body["task"] = "hull";
  try {
    const SigmaStableSet set = sigma_hull(sc.space(), sc.set(set_name));
    report.body["set"] = set_name;
    report.body["size"] = set.size();
    json members = json::array();
    for (std::size_t i = 0; i < set.size(); ++i) {
      members.push_back(point_to_json(sc.base, set.member(i)));
    }
    report.body["members"] = std::move(members);
  } catch (const Error& e) {
    report.status = "error";
    report.body["error"] = e.what();
  }
  report.body["status"] = report.status;
  return report;
}

// ---------------------------------------------------------------------------
// Emission

namespace {

void render_value(std::ostream& os, const json& v) {
  os << v.dump();
}

}  // namespace

std::string emit_report(const Report& report, ReportFormat format) {
  if (format == ReportFormat::Json) {
    return report.body.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "status: " << report.status << "\n";
  if (report.body.contains("task")) os << "task: " << report.body["task"].get<std::string>() << "\n";
  if (report.body.contains("iterations")) os << "iterations: " << report.body["iterations"] << "\n";
  if (report.body.contains("solution")) {
    os << "atom | solution | residual\n";
    const json& sol = report.body["solution"];
    for (std::size_t atom = 0; atom < sol.size(); ++atom) {
      os << atom << " | ";
      render_value(os, sol[atom]);
      os << " | ";
      if (report.body.contains("residual")) {
        render_value(os, report.body["residual"][atom]);
      }
      os << "\n";
    }
  }
  if (report.body.contains("fixed_point")) {
    os << "fixed_point: ";
    render_value(os, report.body["fixed_point"]);
    os << "\n";
  }
  if (report.body.contains("membership")) {
    os << "membership: " << (report.body["membership"].get<bool>() ? "true" : "false") << "\n";
  }
  if (report.body.contains("certificate")) {
    const json& cert = report.body["certificate"];
    os << "certificate: cond1=" << cert["cond1"] << " cond2=" << cert["cond2"]
       << " cond3=" << cert["cond3"] << "\n";
    os << "z: ";
    render_value(os, cert["z"]);
    os << "\n";
  }
  if (report.body.contains("checks")) {
    for (const json& check : report.body["checks"]) {
      os << (check["pass"].get<bool>() ? "[pass] " : "[FAIL] ") << check["name"].get<std::string>()
         << ": " << check["detail"].get<std::string>() << "\n";
    }
  }
  if (report.body.contains("members")) {
    os << "set: " << report.body["set"].get<std::string>() << " (" << report.body["size"]
       << " members)\n";
    for (const json& m : report.body["members"]) {
      os << "  ";
      render_value(os, m);
      os << "\n";
    }
  }
  if (report.body.contains("violation")) {
    os << "violation: " << report.body["violation"].get<std::string>() << "\n";
  }
  if (report.body.contains("error")) {
    os << "error: " << report.body["error"].get<std::string>() << "\n";
  }
  os << std::setprecision(3) << std::fixed << "wall_ms: " << report.wall_ms << "\n";
  return os.str();
}

}  // namespace rmspace
