#include "rmspace/metric.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <set>
#include <sstream>

namespace rmspace {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

}  // namespace

// ---------------------------------------------------------------------------
// BaseMetricSpace

struct BaseMetricSpace::Impl {
  bool finite = false;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> dist;
  int dim = 0;
};

BaseMetricSpace BaseMetricSpace::finite_points(std::vector<std::string> labels,
                                               std::vector<std::vector<double>> dist) {
  const std::size_t k = labels.size();
  require(k >= 1, "finite base needs at least one point");
  require(dist.size() == k, "distance matrix must be square with one row per label");
  for (const auto& row : dist) require(row.size() == k, "distance matrix must be square");
  // Identity, symmetry, and triangle inequality, exhaustively.
  for (std::size_t i = 0; i < k; ++i) {
    require(dist[i][i] == 0.0, "distance matrix diagonal must be zero");
    for (std::size_t j = 0; j < k; ++j) {
      require(std::isfinite(dist[i][j]) && dist[i][j] >= 0.0,
              "distance matrix entries must be finite and nonnegative");
      require(dist[i][j] == dist[j][i], "distance matrix must be symmetric");
      if (i != j) require(dist[i][j] > 0.0, "distinct points must have positive distance");
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t l = 0; l < k; ++l) {
        require(dist[i][l] <= dist[i][j] + dist[j][l] + kCheckSlack,
                "distance matrix violates the triangle inequality");
      }
    }
  }
  auto impl = std::make_shared<Impl>();
  impl->finite = true;
  impl->labels = std::move(labels);
  impl->dist = std::move(dist);
  return BaseMetricSpace(std::move(impl));
}

BaseMetricSpace BaseMetricSpace::euclidean(int dim) {
  require(dim >= 1, "Euclidean dimension must be >= 1");
  auto impl = std::make_shared<Impl>();
  impl->finite = false;
  impl->dim = dim;
  return BaseMetricSpace(std::move(impl));
}

bool BaseMetricSpace::is_finite() const { return impl_->finite; }

int BaseMetricSpace::point_count() const {
  require(impl_->finite, "point_count is only defined for finite bases");
  return static_cast<int>(impl_->labels.size());
}

const std::string& BaseMetricSpace::label(int i) const {
  require(impl_->finite, "labels are only defined for finite bases");
  require(i >= 0 && i < point_count(), "label index out of range");
  return impl_->labels[i];
}

int BaseMetricSpace::label_index(const std::string& label) const {
  require(impl_->finite, "labels are only defined for finite bases");
  for (std::size_t i = 0; i < impl_->labels.size(); ++i) {
    if (impl_->labels[i] == label) return static_cast<int>(i);
  }
  throw InvalidArgument("unknown base point label: " + label);
}

int BaseMetricSpace::dim() const {
  require(!impl_->finite, "dim is only defined for Euclidean bases");
  return impl_->dim;
}

void BaseMetricSpace::check_point(const BasePoint& p) const {
  if (impl_->finite) {
    const int* idx = std::get_if<int>(&p);
    require(idx != nullptr, "expected a finite-base point index");
    require(*idx >= 0 && *idx < point_count(), "base point index out of range");
  } else {
    const auto* coords = std::get_if<std::vector<double>>(&p);
    require(coords != nullptr, "expected Euclidean coordinates");
    require(static_cast<int>(coords->size()) == impl_->dim, "coordinate dimension mismatch");
    for (double c : *coords) require(std::isfinite(c), "coordinates must be finite");
  }
}

double BaseMetricSpace::distance(const BasePoint& p, const BasePoint& q) const {
  check_point(p);
  check_point(q);
  if (impl_->finite) {
    return impl_->dist[std::get<int>(p)][std::get<int>(q)];
  }
  const auto& a = std::get<std::vector<double>>(p);
  const auto& b = std::get<std::vector<double>>(q);
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

bool BaseMetricSpace::same_point(const BasePoint& p, const BasePoint& q, double tol) const {
  if (impl_->finite) return std::get<int>(p) == std::get<int>(q);
  return distance(p, q) <= tol;
}

bool BaseMetricSpace::same_base(const BaseMetricSpace& other) const {
  if (impl_ == other.impl_) return true;
  if (impl_->finite != other.impl_->finite) return false;
  if (impl_->finite) return impl_->labels == other.impl_->labels && impl_->dist == other.impl_->dist;
  return impl_->dim == other.impl_->dim;
}

// ---------------------------------------------------------------------------
// RandomPoint / Point

RandomPoint::RandomPoint(std::vector<BasePoint> sections) : sections_(std::move(sections)) {
  require(!sections_.empty(), "random point needs at least one atom");
}

RandomPoint RandomPoint::constant(int atom_count, BasePoint p) {
  require(atom_count >= 1, "atom_count must be >= 1");
  return RandomPoint(std::vector<BasePoint>(atom_count, std::move(p)));
}

RandomPoint RandomPoint::with_section(int atom, BasePoint p) const {
  require(atom >= 0 && atom < atoms(), "atom index out of range");
  std::vector<BasePoint> out(sections_);
  out[atom] = std::move(p);
  return RandomPoint(std::move(out));
}

Point::Point(RandomPoint p) : rep_(std::move(p)) {}

Point::Point(Point first, Point second)
    : rep_(Pair{std::make_shared<const Point>(std::move(first)),
                std::make_shared<const Point>(std::move(second))}) {}

bool Point::is_pair() const { return std::holds_alternative<Pair>(rep_); }

const RandomPoint& Point::l0() const {
  const RandomPoint* p = std::get_if<RandomPoint>(&rep_);
  require(p != nullptr, "expected a section point, got a product pair");
  return *p;
}

const Point& Point::first() const {
  const Pair* p = std::get_if<Pair>(&rep_);
  require(p != nullptr, "expected a product pair");
  return *p->first;
}

const Point& Point::second() const {
  const Pair* p = std::get_if<Pair>(&rep_);
  require(p != nullptr, "expected a product pair");
  return *p->second;
}

// ---------------------------------------------------------------------------
// RMSpace

struct RMSpace::Impl {
  enum class Kind { L0, Product, Custom } kind;
  ProbSpace prob;
  // L0
  std::optional<BaseMetricSpace> base;
  // Product
  std::shared_ptr<const RMSpace> left, right;
  // Custom
  CustomMetric metric;

  explicit Impl(ProbSpace p) : kind(Kind::L0), prob(std::move(p)) {}
};

RMSpace l0_space(ProbSpace space, BaseMetricSpace base) {
  auto impl = std::make_shared<RMSpace::Impl>(std::move(space));
  impl->kind = RMSpace::Impl::Kind::L0;
  impl->base = std::move(base);
  return RMSpace(std::move(impl));
}

RMSpace product_space(RMSpace e1, RMSpace e2) {
  require(e1.prob_space() == e2.prob_space(),
          "product components must share the base probability space");
  auto impl = std::make_shared<RMSpace::Impl>(e1.prob_space());
  impl->kind = RMSpace::Impl::Kind::Product;
  impl->left = std::make_shared<const RMSpace>(std::move(e1));
  impl->right = std::make_shared<const RMSpace>(std::move(e2));
  return RMSpace(std::move(impl));
}

RMSpace custom_space(ProbSpace space, RMSpace::CustomMetric metric) {
  require(static_cast<bool>(metric), "custom space needs a metric callback");
  auto impl = std::make_shared<RMSpace::Impl>(std::move(space));
  impl->kind = RMSpace::Impl::Kind::Custom;
  impl->metric = std::move(metric);
  return RMSpace(std::move(impl));
}

const ProbSpace& RMSpace::prob_space() const { return impl_->prob; }
bool RMSpace::is_l0() const { return impl_->kind == Impl::Kind::L0; }
bool RMSpace::is_product() const { return impl_->kind == Impl::Kind::Product; }
bool RMSpace::is_custom() const { return impl_->kind == Impl::Kind::Custom; }

const BaseMetricSpace& RMSpace::base() const {
  require(is_l0(), "base() is only defined for section carriers");
  return *impl_->base;
}

const RMSpace& RMSpace::component(int i) const {
  require(is_product(), "component() is only defined for product spaces");
  require(i == 0 || i == 1, "component index must be 0 or 1");
  return i == 0 ? *impl_->left : *impl_->right;
}

void RMSpace::check_point(const Point& x) const {
  switch (impl_->kind) {
    case Impl::Kind::Product:
      require(x.is_pair(), "product space expects pair points");
      impl_->left->check_point(x.first());
      impl_->right->check_point(x.second());
      return;
    case Impl::Kind::L0: {
      const RandomPoint& p = x.l0();
      require(p.atoms() == impl_->prob.atom_count(), "point atom count mismatch");
      for (int atom = 0; atom < p.atoms(); ++atom) impl_->base->check_point(p.section(atom));
      return;
    }
    case Impl::Kind::Custom:
      require(x.l0().atoms() == impl_->prob.atom_count(), "point atom count mismatch");
      return;
  }
}

RandomScalar RMSpace::distance(const Point& x, const Point& y) const {
  switch (impl_->kind) {
    case Impl::Kind::Product:
      return impl_->left->distance(x.first(), y.first()) +
             impl_->right->distance(x.second(), y.second());
    case Impl::Kind::Custom:
      return impl_->metric(x.l0(), y.l0());
    case Impl::Kind::L0: {
      const RandomPoint& p = x.l0();
      const RandomPoint& q = y.l0();
      check_point(x);
      check_point(y);
      std::vector<double> out(p.atoms());
      for (int atom = 0; atom < p.atoms(); ++atom) {
        out[atom] = impl_->base->distance(p.section(atom), q.section(atom));
      }
      return RandomScalar(std::move(out));
    }
  }
  throw InvalidArgument("unreachable");
}

bool RMSpace::points_equal(const Point& x, const Point& y) const {
  switch (impl_->kind) {
    case Impl::Kind::Product:
      return impl_->left->points_equal(x.first(), y.first()) &&
             impl_->right->points_equal(x.second(), y.second());
    case Impl::Kind::Custom:
      return x.l0() == y.l0();
    case Impl::Kind::L0: {
      const RandomPoint& p = x.l0();
      const RandomPoint& q = y.l0();
      if (p.atoms() != q.atoms()) return false;
      for (int atom = 0; atom < p.atoms(); ++atom) {
        if (!impl_->base->same_point(p.section(atom), q.section(atom))) return false;
      }
      return true;
    }
  }
  return false;
}

RandomPoint glue_points(const Partition& partition, std::span<const RandomPoint> xs) {
  require(!xs.empty(), "glue needs at least one piece");
  require(static_cast<int>(xs.size()) == partition.block_count(),
          "glue needs one piece per partition block");
  const int n = xs[0].atoms();
  for (const RandomPoint& x : xs) require(x.atoms() == n, "point atom count mismatch");
  partition.validate(n);
  std::vector<BasePoint> sections(n);
  for (int b = 0; b < partition.block_count(); ++b) {
    for (int atom : partition.blocks()[b].members()) sections[atom] = xs[b].section(atom);
  }
  return RandomPoint(std::move(sections));
}

Point RMSpace::glue(const Partition& partition, std::span<const Point> xs, bool verify) const {
  require(!xs.empty(), "glue needs at least one piece");
  Point result = [&]() -> Point {
    switch (impl_->kind) {
      case Impl::Kind::Product: {
        std::vector<Point> firsts, seconds;
        firsts.reserve(xs.size());
        seconds.reserve(xs.size());
        for (const Point& x : xs) {
          firsts.push_back(x.first());
          seconds.push_back(x.second());
        }
        return Point(impl_->left->glue(partition, firsts), impl_->right->glue(partition, seconds));
      }
      case Impl::Kind::L0: {
        std::vector<RandomPoint> pieces;
        pieces.reserve(xs.size());
        for (const Point& x : xs) pieces.push_back(x.l0());
        return glue_points(partition, pieces);
      }
      case Impl::Kind::Custom:
        throw InvalidArgument("gluing is not defined for custom carriers");
    }
    throw InvalidArgument("unreachable");
  }();
  if (verify) {
    for (int b = 0; b < partition.block_count(); ++b) {
      const RandomScalar d = indicator(impl_->prob, partition.blocks()[b]) * distance(result, xs[b]);
      require(d.abs().max_value() <= kZeroTol, "glued point disagrees with a piece on its block");
    }
  }
  return result;
}

bool RMSpace::same_space(const RMSpace& other) const {
  if (impl_ == other.impl_) return true;
  if (impl_->kind != other.impl_->kind) return false;
  if (!(impl_->prob == other.impl_->prob)) return false;
  switch (impl_->kind) {
    case Impl::Kind::L0:
      return impl_->base->same_base(*other.impl_->base);
    case Impl::Kind::Product:
      return impl_->left->same_space(*other.impl_->left) &&
             impl_->right->same_space(*other.impl_->right);
    case Impl::Kind::Custom:
      return false;  // distinct callbacks are distinct spaces
  }
  return false;
}

// ---------------------------------------------------------------------------
// RM axiom checking

AxiomReport check_rm_axioms(const RMSpace& space, std::span<const Point> samples) {
  require(!samples.empty(), "axiom check needs at least one sample");
  AxiomReport report;
  const int n = space.prob_space().atom_count();
  const std::size_t count = samples.size();

  auto record = [&](const std::string& axiom, int atom, std::vector<int> idx, double lhs,
                    double rhs) {
    report.violations.push_back(AxiomViolation{axiom, atom, std::move(idx), lhs, rhs});
  };

  // RM-1: d(p,p) = 0.
  for (std::size_t i = 0; i < count; ++i) {
    const RandomScalar d = space.distance(samples[i], samples[i]);
    for (int atom = 0; atom < n; ++atom) {
      if (std::abs(d[atom]) > kZeroTol) record("RM-1", atom, {static_cast<int>(i)}, d[atom], 0.0);
    }
  }

  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i + 1; j < count; ++j) {
      const RandomScalar dij = space.distance(samples[i], samples[j]);
      const RandomScalar dji = space.distance(samples[j], samples[i]);
      ++report.pairs_checked;
      bool zero = true;
      for (int atom = 0; atom < n; ++atom) {
        // Nonnegativity is part of d mapping into L0_+.
        if (dij[atom] < 0.0) {
          record("RM-1", atom, {static_cast<int>(i), static_cast<int>(j)}, dij[atom], 0.0);
        }
        if (std::abs(dij[atom] - dji[atom]) > kZeroTol) {
          record("RM-2", atom, {static_cast<int>(i), static_cast<int>(j)}, dij[atom], dji[atom]);
        }
        if (std::abs(dij[atom]) > kZeroTol) zero = false;
      }
      // RM-3: d(p,q) = 0 on every atom must force p = q.
      if (zero && !space.points_equal(samples[i], samples[j])) {
        record("RM-3", -1, {static_cast<int>(i), static_cast<int>(j)}, 0.0, 0.0);
      }
    }
  }

  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < count; ++j) {
      for (std::size_t l = 0; l < count; ++l) {
        if (i == j || j == l || i == l) continue;
        const RandomScalar dil = space.distance(samples[i], samples[l]);
        const RandomScalar dij = space.distance(samples[i], samples[j]);
        const RandomScalar djl = space.distance(samples[j], samples[l]);
        ++report.triples_checked;
        for (int atom = 0; atom < n; ++atom) {
          if (dil[atom] > dij[atom] + djl[atom] + kZeroTol) {
            record("RM-4", atom, {static_cast<int>(i), static_cast<int>(j), static_cast<int>(l)},
                   dil[atom], dij[atom] + djl[atom]);
          }
        }
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// SigmaStableSet

struct SigmaStableSet::Impl {
  RMSpace space;
  std::vector<RandomPoint> generators;
  std::size_t cap;

  std::once_flag once;
  std::vector<std::vector<BasePoint>> pools;  // per atom, deduplicated sections
  std::vector<std::size_t> strides;
  std::size_t total = 0;

  Impl(RMSpace s, std::vector<RandomPoint> g, std::size_t c)
      : space(std::move(s)), generators(std::move(g)), cap(c) {}

  void materialize() {
    const int n = space.prob_space().atom_count();
    const BaseMetricSpace& base = space.base();
    pools.assign(n, {});
    for (int atom = 0; atom < n; ++atom) {
      for (const RandomPoint& g : generators) {
        const BasePoint& s = g.section(atom);
        bool known = false;
        for (const BasePoint& p : pools[atom]) {
          if (base.same_point(p, s)) {
            known = true;
            break;
          }
        }
        if (!known) pools[atom].push_back(s);
      }
    }
    total = 1;
    for (int atom = 0; atom < n; ++atom) {
      if (total > cap / pools[atom].size() && total * pools[atom].size() > cap) {
        std::ostringstream os;
        os << "sigma-stable hull exceeds cap of " << cap
           << " members; the combinatorial blowup is intrinsic, raise the cap explicitly";
        throw HullCapExceeded(os.str());
      }
      total *= pools[atom].size();
    }
    strides.assign(n, 1);
    for (int atom = n - 2; atom >= 0; --atom) {
      strides[atom] = strides[atom + 1] * pools[atom + 1].size();
    }
  }

  void ensure() { std::call_once(once, [this] { materialize(); }); }
};

SigmaStableSet::SigmaStableSet(RMSpace space, std::vector<RandomPoint> generators, std::size_t cap)
    : impl_(std::make_shared<Impl>(std::move(space), std::move(generators), cap)) {
  require(impl_->space.is_l0(), "sigma-stable sets require a section carrier");
  require(!impl_->generators.empty(), "sigma-stable set needs at least one generator");
  for (const RandomPoint& g : impl_->generators) impl_->space.check_point(Point(g));
}

const RMSpace& SigmaStableSet::space() const { return impl_->space; }
const std::vector<RandomPoint>& SigmaStableSet::generators() const { return impl_->generators; }

std::size_t SigmaStableSet::size() const {
  impl_->ensure();
  return impl_->total;
}

const std::vector<BasePoint>& SigmaStableSet::sections(int atom) const {
  impl_->ensure();
  return impl_->pools[atom];
}

std::size_t SigmaStableSet::stride(int atom) const {
  impl_->ensure();
  return impl_->strides[atom];
}

std::size_t SigmaStableSet::digit(std::size_t index, int atom) const {
  impl_->ensure();
  return (index / impl_->strides[atom]) % impl_->pools[atom].size();
}

RandomPoint SigmaStableSet::member(std::size_t index) const {
  impl_->ensure();
  require(index < impl_->total, "hull index out of range");
  const int n = static_cast<int>(impl_->pools.size());
  std::vector<BasePoint> sections(n);
  for (int atom = 0; atom < n; ++atom) sections[atom] = impl_->pools[atom][digit(index, atom)];
  return RandomPoint(std::move(sections));
}

std::optional<std::size_t> SigmaStableSet::find(const RandomPoint& x) const {
  impl_->ensure();
  if (x.atoms() != static_cast<int>(impl_->pools.size())) return std::nullopt;
  const BaseMetricSpace& base = impl_->space.base();
  std::size_t index = 0;
  for (int atom = 0; atom < x.atoms(); ++atom) {
    bool found = false;
    for (std::size_t j = 0; j < impl_->pools[atom].size(); ++j) {
      if (base.same_point(impl_->pools[atom][j], x.section(atom))) {
        index += j * impl_->strides[atom];
        found = true;
        break;
      }
    }
    if (!found) return std::nullopt;
  }
  return index;
}

SigmaStableSet sigma_hull(const RMSpace& space, std::vector<RandomPoint> generators,
                          std::size_t cap) {
  SigmaStableSet set(space, std::move(generators), cap);
  set.size();  // materialize now so cap violations surface here
  return set;
}

SetDistance dist_to_set(const RandomPoint& x, const SigmaStableSet& g) {
  const RMSpace& space = g.space();
  space.check_point(Point(x));
  const BaseMetricSpace& base = space.base();
  const int n = x.atoms();
  std::vector<double> value(n);
  std::vector<std::size_t> witness(n);
  for (int atom = 0; atom < n; ++atom) {
    const auto& pool = g.sections(atom);
    double best = base.distance(x.section(atom), pool[0]);
    std::size_t best_j = 0;
    for (std::size_t j = 1; j < pool.size(); ++j) {
      const double d = base.distance(x.section(atom), pool[j]);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    value[atom] = best;
    // Lowest hull index whose digit at this atom attains the minimum.
    witness[atom] = best_j * g.stride(atom);
  }
  return SetDistance{RandomScalar(std::move(value)), std::move(witness)};
}

bool in_closure(const RandomPoint& x, const SigmaStableSet& g) {
  return dist_to_set(x, g).value.max_value() <= kZeroTol;
}

LatticeWitness distance_lattice_witness(const SigmaStableSet& g, const PointPair& p1,
                                        const PointPair& p2) {
  for (const RandomPoint* p : {&p1.first, &p1.second, &p2.first, &p2.second}) {
    require(g.find(*p).has_value(), "lattice witness arguments must lie in the hull");
  }
  const RMSpace& space = g.space();
  const RandomScalar d1 = space.distance(Point(p1.first), Point(p1.second));
  const RandomScalar d2 = space.distance(Point(p2.first), Point(p2.second));
  std::vector<int> a_members;
  for (int atom = 0; atom < d1.atoms(); ++atom) {
    if (d1[atom] <= d2[atom]) a_members.push_back(atom);
  }
  const Partition pi = Partition::two_block(Event(a_members), d1.atoms());
  const std::vector<RandomPoint> xs_min = {p1.first, p2.first};
  const std::vector<RandomPoint> ys_min = {p1.second, p2.second};
  const std::vector<RandomPoint> xs_max = {p2.first, p1.first};
  const std::vector<RandomPoint> ys_max = {p2.second, p1.second};
  return LatticeWitness{
      {glue_points(pi, xs_min), glue_points(pi, ys_min)},
      {glue_points(pi, xs_max), glue_points(pi, ys_max)},
  };
}

RandomScalar random_diameter(const SigmaStableSet& g) {
  const BaseMetricSpace& base = g.space().base();
  const int n = g.space().prob_space().atom_count();
  std::vector<double> out(n, 0.0);
  for (int atom = 0; atom < n; ++atom) {
    const auto& pool = g.sections(atom);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      for (std::size_t j = i + 1; j < pool.size(); ++j) {
        out[atom] = std::max(out[atom], base.distance(pool[i], pool[j]));
      }
    }
  }
  return RandomScalar(std::move(out));
}

// ---------------------------------------------------------------------------
// Convergence predicates

namespace {

template <typename Member>
std::optional<int> first_settled_index(std::size_t count, Member in_neighborhood) {
  // Smallest n such that every element from n on is inside.
  int n = static_cast<int>(count);
  for (int m = static_cast<int>(count) - 1; m >= 0; --m) {
    if (!in_neighborhood(m)) break;
    n = m;
  }
  if (n == static_cast<int>(count)) return std::nullopt;
  return n;
}

}  // namespace

std::optional<int> converges_eps_lambda(const RMSpace& space, std::span<const Point> seq,
                                        const Point& x, double eps, double lambda) {
  require(!seq.empty(), "convergence check needs a nonempty sequence");
  require(eps > 0.0, "eps must be positive");
  require(lambda > 0.0 && lambda < 1.0, "lambda must lie in (0,1)");
  const ProbSpace& prob = space.prob_space();
  return first_settled_index(seq.size(), [&](int m) {
    const RandomScalar d = space.distance(seq[m], x);
    double mass = 0.0;
    for (int atom = 0; atom < d.atoms(); ++atom) {
      if (d[atom] < eps) mass += prob.prob(atom);
    }
    return mass > 1.0 - lambda;
  });
}

std::optional<int> converges_l0(const RMSpace& space, std::span<const Point> seq, const Point& x,
                                const RandomScalar& eps) {
  require(!seq.empty(), "convergence check needs a nonempty sequence");
  require(eps.strictly_positive(), "eps must be > 0 on every atom");
  return first_settled_index(seq.size(),
                             [&](int m) { return leq(space.distance(seq[m], x), eps); });
}

// ---------------------------------------------------------------------------
// Stability predicates

namespace {

std::optional<std::size_t> locate(const RMSpace& space, std::span<const RandomPoint> g,
                                  const RandomPoint& x) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (space.points_equal(Point(g[i]), Point(x))) return i;
  }
  return std::nullopt;
}

}  // namespace

bool is_d_stable(const RMSpace& space, std::span<const RandomPoint> g) {
  if (g.empty()) return false;
  const int n = space.prob_space().atom_count();
  require(n <= 20, "two-block closure enumeration is limited to 20 atoms");
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<int> members;
        for (int atom = 0; atom < n; ++atom) {
          if (mask & (1u << atom)) members.push_back(atom);
        }
        const Partition pi = Partition::two_block(Event(std::move(members)), n);
        const std::vector<RandomPoint> xs = {g[i], g[j]};
        if (!locate(space, g, glue_points(pi, xs))) return false;
      }
    }
  }
  return true;
}

bool is_d_sigma_stable(const RMSpace& space, std::span<const RandomPoint> g) {
  if (g.empty()) return false;
  require(space.is_l0(), "sigma-stability check requires a section carrier");
  const BaseMetricSpace& base = space.base();
  const int n = space.prob_space().atom_count();

  // Per-atom pools of distinct sections; members map to digit tuples.
  std::vector<std::vector<BasePoint>> pools(n);
  std::set<std::vector<std::size_t>> tuples;
  for (const RandomPoint& x : g) {
    std::vector<std::size_t> tuple(n);
    for (int atom = 0; atom < n; ++atom) {
      bool found = false;
      for (std::size_t j = 0; j < pools[atom].size(); ++j) {
        if (base.same_point(pools[atom][j], x.section(atom))) {
          tuple[atom] = j;
          found = true;
          break;
        }
      }
      if (!found) {
        tuple[atom] = pools[atom].size();
        pools[atom].push_back(x.section(atom));
      }
    }
    tuples.insert(std::move(tuple));
  }
  std::size_t product = 1;
  for (int atom = 0; atom < n; ++atom) {
    product *= pools[atom].size();
    if (product > tuples.size()) return false;
  }
  return product == tuples.size();
}

// ---------------------------------------------------------------------------
// RN modules

namespace {

const std::vector<double>& coords(const BasePoint& p) {
  const auto* c = std::get_if<std::vector<double>>(&p);
  if (c == nullptr) throw InvalidArgument("module operations need Euclidean sections");
  return *c;
}

}  // namespace

RandomPoint module_add(const RandomPoint& x, const RandomPoint& y) {
  require(x.atoms() == y.atoms(), "point atom count mismatch");
  std::vector<BasePoint> out(x.atoms());
  for (int atom = 0; atom < x.atoms(); ++atom) {
    const auto& a = coords(x.section(atom));
    const auto& b = coords(y.section(atom));
    require(a.size() == b.size(), "coordinate dimension mismatch");
    std::vector<double> c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
    out[atom] = std::move(c);
  }
  return RandomPoint(std::move(out));
}

RandomPoint module_sub(const RandomPoint& x, const RandomPoint& y) {
  return module_add(x, module_scale(RandomScalar::constant(y.atoms(), -1.0), y));
}

RandomPoint module_scale(const RandomScalar& xi, const RandomPoint& x) {
  require(xi.atoms() == x.atoms(), "point atom count mismatch");
  std::vector<BasePoint> out(x.atoms());
  for (int atom = 0; atom < x.atoms(); ++atom) {
    std::vector<double> c(coords(x.section(atom)));
    for (double& v : c) v *= xi[atom];
    out[atom] = std::move(c);
  }
  return RandomPoint(std::move(out));
}

RandomPoint module_zero(int atom_count, int dim) {
  return RandomPoint::constant(atom_count, BasePoint(std::vector<double>(dim, 0.0)));
}

RNModuleSpace::RNModuleSpace(RMSpace space)
    : RNModuleSpace(std::move(space), std::function<RandomScalar(const RandomPoint&)>{}) {}

RNModuleSpace::RNModuleSpace(RMSpace space, std::function<RandomScalar(const RandomPoint&)> norm)
    : space_(std::move(space)), norm_(std::move(norm)) {
  require(space_.is_l0() && !space_.base().is_finite(),
          "RN module requires Euclidean sections");
  if (!norm_) {
    const RMSpace s = space_;
    const int dim = s.base().dim();
    norm_ = [s, dim](const RandomPoint& x) {
      return s.distance(Point(x), Point(module_zero(x.atoms(), dim)));
    };
  }
}

AxiomReport check_rn_axioms(const RNModuleSpace& module, std::span<const RandomPoint> points,
                            std::span<const RandomScalar> scalars) {
  require(!points.empty(), "axiom check needs at least one sample");
  AxiomReport report;
  const RMSpace& space = module.space();
  const int n = space.prob_space().atom_count();
  const int dim = space.base().dim();

  auto record = [&](const std::string& axiom, int atom, std::vector<int> idx, double lhs,
                    double rhs) {
    report.violations.push_back(AxiomViolation{axiom, atom, std::move(idx), lhs, rhs});
  };

  const RandomPoint zero = module_zero(n, dim);
  {
    const RandomScalar nz = module.norm(zero);
    for (int atom = 0; atom < n; ++atom) {
      if (std::abs(nz[atom]) > kZeroTol) record("RN-2", atom, {}, nz[atom], 0.0);
    }
  }

  const std::vector<double> constants = {-2.0, -1.0, 0.5, 3.0};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const RandomScalar ni = module.norm(points[i]);
    // RN-2 converse direction: a vanishing norm forces the zero point.
    bool zero_norm = true;
    for (int atom = 0; atom < n; ++atom) {
      if (std::abs(ni[atom]) > kZeroTol) zero_norm = false;
    }
    if (zero_norm && !space.points_equal(Point(points[i]), Point(zero))) {
      record("RN-2", -1, {static_cast<int>(i)}, ni.max_value(), 0.0);
    }
    // RN-1 with plain constants.
    for (double c : constants) {
      const RandomScalar lhs = module.norm(module_scale(RandomScalar::constant(n, c), points[i]));
      const RandomScalar rhs = std::abs(c) * ni;
      for (int atom = 0; atom < n; ++atom) {
        if (std::abs(lhs[atom] - rhs[atom]) > kZeroTol) {
          record("RN-1", atom, {static_cast<int>(i)}, lhs[atom], rhs[atom]);
        }
      }
    }
    // RNM-1 with random scalars.
    for (std::size_t s = 0; s < scalars.size(); ++s) {
      const RandomScalar lhs = module.norm(module_scale(scalars[s], points[i]));
      const RandomScalar rhs = scalars[s].abs() * ni;
      for (int atom = 0; atom < n; ++atom) {
        if (std::abs(lhs[atom] - rhs[atom]) > kZeroTol) {
          record("RNM-1", atom, {static_cast<int>(i), static_cast<int>(s)}, lhs[atom], rhs[atom]);
        }
      }
    }
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      ++report.pairs_checked;
      const RandomScalar nj = module.norm(points[j]);
      const RandomScalar nsum = module.norm(module_add(points[i], points[j]));
      const RandomScalar ndiff = module.norm(module_sub(points[i], points[j]));
      const RandomScalar d = space.distance(Point(points[i]), Point(points[j]));
      for (int atom = 0; atom < n; ++atom) {
        if (nsum[atom] > ni[atom] + nj[atom] + kZeroTol) {
          record("RN-3", atom, {static_cast<int>(i), static_cast<int>(j)}, nsum[atom],
                 ni[atom] + nj[atom]);
        }
        if (std::abs(d[atom] - ndiff[atom]) > kZeroTol) {
          record("d=norm", atom, {static_cast<int>(i), static_cast<int>(j)}, d[atom], ndiff[atom]);
        }
      }
    }
  }
  return report;
}

}  // namespace rmspace
