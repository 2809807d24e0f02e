#include "rmspace/prob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace rmspace {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

void require_same_atoms(int a, int b) {
  if (a != b) {
    std::ostringstream os;
    os << "atom count mismatch: " << a << " vs " << b;
    throw InvalidArgument(os.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Event

Event::Event(std::initializer_list<int> atoms) : Event(std::vector<int>(atoms)) {}

Event::Event(std::vector<int> atoms) : members_(std::move(atoms)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  require(members_.empty() || members_.front() >= 0, "event contains a negative atom index");
}

Event Event::full(int atom_count) {
  std::vector<int> all(atom_count);
  std::iota(all.begin(), all.end(), 0);
  return Event(std::move(all));
}

bool Event::contains(int atom) const {
  return std::binary_search(members_.begin(), members_.end(), atom);
}

bool Event::valid_for(int atom_count) const {
  return members_.empty() || members_.back() < atom_count;
}

Event Event::complement(int atom_count) const {
  require(valid_for(atom_count), "event has atoms outside the space");
  std::vector<int> rest;
  rest.reserve(atom_count - size());
  for (int i = 0; i < atom_count; ++i) {
    if (!contains(i)) rest.push_back(i);
  }
  return Event(std::move(rest));
}

// ---------------------------------------------------------------------------
// ProbSpace

ProbSpace::ProbSpace(std::vector<double> probs) : probs_(std::move(probs)) {
  require(!probs_.empty(), "probability space needs at least one atom");
  double sum = 0.0;
  for (double p : probs_) {
    require(std::isfinite(p) && p > 0.0, "every atom probability must be strictly positive");
    sum += p;
  }
  require(std::abs(sum - 1.0) <= kProbSumTol, "probs must sum to 1");
}

ProbSpace ProbSpace::uniform(int atom_count) {
  require(atom_count >= 1, "atom_count must be >= 1");
  return ProbSpace(std::vector<double>(atom_count, 1.0 / atom_count));
}

double ProbSpace::prob(int atom) const {
  require(atom >= 0 && atom < atom_count(), "atom index out of range");
  return probs_[atom];
}

double ProbSpace::event_prob(const Event& a) const {
  require(a.valid_for(atom_count()), "invalid event for this space");
  double sum = 0.0;
  for (int atom : a.members()) sum += probs_[atom];
  return sum;
}

double ProbSpace::min_prob() const {
  return *std::min_element(probs_.begin(), probs_.end());
}

// ---------------------------------------------------------------------------
// Partition

Partition::Partition(std::vector<Event> blocks) : blocks_(std::move(blocks)) {
  require(!blocks_.empty(), "partition needs at least one block");
  std::set<int> seen;
  for (const Event& block : blocks_) {
    for (int atom : block.members()) {
      require(seen.insert(atom).second, "partition blocks overlap");
    }
  }
}

Partition Partition::atomic(int atom_count) {
  std::vector<Event> blocks;
  blocks.reserve(atom_count);
  for (int i = 0; i < atom_count; ++i) blocks.push_back(Event{i});
  return Partition(std::move(blocks));
}

Partition Partition::two_block(const Event& a, int atom_count) {
  return Partition({a, a.complement(atom_count)});
}

void Partition::validate(int atom_count) const {
  int covered = 0;
  for (const Event& block : blocks_) {
    require(block.valid_for(atom_count), "partition block has atoms outside the space");
    covered += block.size();
  }
  // Blocks are disjoint by construction, so counting suffices for coverage.
  require(covered == atom_count, "partition does not cover the atom set");
}

int Partition::block_of(int atom) const {
  for (int b = 0; b < block_count(); ++b) {
    if (blocks_[b].contains(atom)) return b;
  }
  throw InvalidArgument("atom not covered by partition");
}

// ---------------------------------------------------------------------------
// RandomScalar

RandomScalar::RandomScalar(std::vector<double> values) : values_(std::move(values)) {
  require(!values_.empty(), "random scalar needs at least one atom");
  for (double v : values_) {
    require(std::isfinite(v), "random scalar values must be finite");
  }
}

RandomScalar RandomScalar::constant(int atom_count, double value) {
  require(atom_count >= 1, "atom_count must be >= 1");
  return RandomScalar(std::vector<double>(atom_count, value));
}

RandomScalar RandomScalar::pointwise_min(const RandomScalar& other) const {
  require_same_atoms(atoms(), other.atoms());
  std::vector<double> out(values_);
  for (int i = 0; i < atoms(); ++i) out[i] = std::min(out[i], other[i]);
  return RandomScalar(std::move(out));
}

RandomScalar RandomScalar::pointwise_max(const RandomScalar& other) const {
  require_same_atoms(atoms(), other.atoms());
  std::vector<double> out(values_);
  for (int i = 0; i < atoms(); ++i) out[i] = std::max(out[i], other[i]);
  return RandomScalar(std::move(out));
}

RandomScalar RandomScalar::abs() const {
  std::vector<double> out(values_);
  for (double& v : out) v = std::abs(v);
  return RandomScalar(std::move(out));
}

double RandomScalar::max_value() const { return *std::max_element(values_.begin(), values_.end()); }
double RandomScalar::min_value() const { return *std::min_element(values_.begin(), values_.end()); }

bool RandomScalar::all_nonnegative() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
}

bool RandomScalar::strictly_positive() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v > 0.0; });
}

namespace {
template <typename Op>
RandomScalar zip(const RandomScalar& a, const RandomScalar& b, Op op) {
  require_same_atoms(a.atoms(), b.atoms());
  std::vector<double> out(a.values());
  for (int i = 0; i < a.atoms(); ++i) out[i] = op(out[i], b[i]);
  return RandomScalar(std::move(out));
}
}  // namespace

RandomScalar operator+(const RandomScalar& a, const RandomScalar& b) {
  return zip(a, b, [](double x, double y) { return x + y; });
}
RandomScalar operator-(const RandomScalar& a, const RandomScalar& b) {
  return zip(a, b, [](double x, double y) { return x - y; });
}
RandomScalar operator*(const RandomScalar& a, const RandomScalar& b) {
  return zip(a, b, [](double x, double y) { return x * y; });
}
RandomScalar operator*(double c, const RandomScalar& a) {
  return RandomScalar::constant(a.atoms(), c) * a;
}
RandomScalar operator/(const RandomScalar& a, const RandomScalar& b) {
  return zip(a, b, [](double x, double y) {
    if (y == 0.0) throw InvalidArgument("pointwise division by zero");
    return x / y;
  });
}

// ---------------------------------------------------------------------------
// ExtRandomScalar

ExtRandomScalar::ExtRandomScalar(std::vector<double> values) : values_(std::move(values)) {
  require(!values_.empty(), "random scalar needs at least one atom");
  for (double v : values_) {
    require(!std::isnan(v), "extended random scalar values must not be NaN");
  }
}

ExtRandomScalar::ExtRandomScalar(const RandomScalar& finite) : values_(finite.values()) {}

ExtRandomScalar ExtRandomScalar::constant(int atom_count, double value) {
  require(atom_count >= 1, "atom_count must be >= 1");
  return ExtRandomScalar(std::vector<double>(atom_count, value));
}

bool ExtRandomScalar::finite_everywhere() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

bool ExtRandomScalar::finite_at(int atom) const { return std::isfinite(values_[atom]); }

RandomScalar ExtRandomScalar::to_random() const {
  if (!finite_everywhere()) throw ExtendedArithmeticError("value is infinite on some atom");
  return RandomScalar(values_);
}

ExtRandomScalar ExtRandomScalar::pointwise_min(const ExtRandomScalar& other) const {
  require_same_atoms(atoms(), other.atoms());
  std::vector<double> out(values_);
  for (int i = 0; i < atoms(); ++i) out[i] = std::min(out[i], other[i]);
  return ExtRandomScalar(std::move(out));
}

ExtRandomScalar ExtRandomScalar::pointwise_max(const ExtRandomScalar& other) const {
  require_same_atoms(atoms(), other.atoms());
  std::vector<double> out(values_);
  for (int i = 0; i < atoms(); ++i) out[i] = std::max(out[i], other[i]);
  return ExtRandomScalar(std::move(out));
}

namespace {

double ext_add(double x, double y) {
  if (std::isinf(x) && std::isinf(y) && (x > 0) != (y > 0)) {
    throw ExtendedArithmeticError("(+inf) + (-inf) is undefined");
  }
  if (std::isinf(x)) return x;
  if (std::isinf(y)) return y;
  return x + y;
}

// Measure-theoretic convention: anything times zero is zero.
double ext_mul(double x, double y) {
  if (x == 0.0 || y == 0.0) return 0.0;
  return x * y;
}

template <typename Op>
ExtRandomScalar zip_ext(const ExtRandomScalar& a, const ExtRandomScalar& b, Op op) {
  require_same_atoms(a.atoms(), b.atoms());
  std::vector<double> out(a.values());
  for (int i = 0; i < a.atoms(); ++i) out[i] = op(out[i], b[i]);
  return ExtRandomScalar(std::move(out));
}

}  // namespace

ExtRandomScalar operator+(const ExtRandomScalar& a, const ExtRandomScalar& b) {
  return zip_ext(a, b, ext_add);
}
ExtRandomScalar operator-(const ExtRandomScalar& a, const ExtRandomScalar& b) {
  return zip_ext(a, b, [](double x, double y) { return ext_add(x, -y); });
}
ExtRandomScalar operator*(const ExtRandomScalar& a, const ExtRandomScalar& b) {
  return zip_ext(a, b, ext_mul);
}

// ---------------------------------------------------------------------------
// RandomInteger / ContractionFactor

RandomInteger::RandomInteger(std::vector<int> values) : values_(std::move(values)) {
  require(!values_.empty(), "random integer needs at least one atom");
  for (int v : values_) require(v >= 1, "random integer values must be >= 1");
}

RandomInteger RandomInteger::constant(int atom_count, int value) {
  require(atom_count >= 1, "atom_count must be >= 1");
  return RandomInteger(std::vector<int>(atom_count, value));
}

int RandomInteger::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

ContractionFactor::ContractionFactor(RandomScalar alpha) : alpha_(std::move(alpha)) {
  for (double v : alpha_.values()) {
    require(v >= 0.0 && v < 1.0, "contraction factor must satisfy 0 <= alpha < 1 on every atom");
  }
}

ContractionFactor ContractionFactor::constant(int atom_count, double value) {
  return ContractionFactor(RandomScalar::constant(atom_count, value));
}

RandomScalar ContractionFactor::lifted() const {
  std::vector<double> out(alpha_.values());
  for (double& v : out) {
    if (v == 0.0) v = 0.5;
  }
  return RandomScalar(std::move(out));
}

// ---------------------------------------------------------------------------
// Lattice operations

RandomScalar indicator(const ProbSpace& space, const Event& a) {
  if (!a.valid_for(space.atom_count())) throw InvalidArgument("invalid event: atom index out of range");
  std::vector<double> out(space.atom_count(), 0.0);
  for (int atom : a.members()) out[atom] = 1.0;
  return RandomScalar(std::move(out));
}

namespace {

template <typename Scalar>
Scalar glue_impl(const Partition& partition, std::span<const Scalar> xs) {
  require(!xs.empty(), "glue needs at least one piece");
  require(static_cast<int>(xs.size()) == partition.block_count(),
          "glue needs one piece per partition block");
  const int n = xs[0].atoms();
  for (const Scalar& x : xs) require_same_atoms(n, x.atoms());
  partition.validate(n);
  std::vector<double> out(n, 0.0);
  for (int b = 0; b < partition.block_count(); ++b) {
    for (int atom : partition.blocks()[b].members()) out[atom] = xs[b][atom];
  }
  return Scalar(std::move(out));
}

}  // namespace

RandomScalar glue_scalars(const Partition& partition, std::span<const RandomScalar> xs) {
  return glue_impl(partition, xs);
}

ExtRandomScalar glue_ext_scalars(const Partition& partition, std::span<const ExtRandomScalar> xs) {
  return glue_impl(partition, xs);
}

namespace {

// less=true picks per-atom minima, otherwise maxima; first attaining index wins.
EssExtremum extremum(std::span<const ExtRandomScalar> xs, bool less) {
  if (xs.empty()) throw InvalidArgument("essential sup/inf of an empty family");
  const int n = xs[0].atoms();
  std::vector<double> value(xs[0].values());
  std::vector<int> witness(n, 0);
  for (int i = 1; i < static_cast<int>(xs.size()); ++i) {
    require_same_atoms(n, xs[i].atoms());
    for (int atom = 0; atom < n; ++atom) {
      const double v = xs[i][atom];
      if (less ? (v < value[atom]) : (v > value[atom])) {
        value[atom] = v;
        witness[atom] = i;
      }
    }
  }
  return EssExtremum{ExtRandomScalar(std::move(value)), std::move(witness)};
}

std::vector<ExtRandomScalar> widen(std::span<const RandomScalar> xs) {
  std::vector<ExtRandomScalar> out;
  out.reserve(xs.size());
  for (const RandomScalar& x : xs) out.emplace_back(x);
  return out;
}

}  // namespace

EssExtremum ess_sup(std::span<const ExtRandomScalar> xs) { return extremum(xs, false); }
EssExtremum ess_inf(std::span<const ExtRandomScalar> xs) { return extremum(xs, true); }

EssExtremumFinite ess_sup(std::span<const RandomScalar> xs) {
  auto wide = widen(xs);
  EssExtremum e = ess_sup(std::span<const ExtRandomScalar>(wide));
  return EssExtremumFinite{e.value.to_random(), std::move(e.witness)};
}

EssExtremumFinite ess_inf(std::span<const RandomScalar> xs) {
  auto wide = widen(xs);
  EssExtremum e = ess_inf(std::span<const ExtRandomScalar>(wide));
  return EssExtremumFinite{e.value.to_random(), std::move(e.witness)};
}

bool leq(const RandomScalar& x, const RandomScalar& y) {
  require_same_atoms(x.atoms(), y.atoms());
  for (int i = 0; i < x.atoms(); ++i) {
    if (!(x[i] <= y[i])) return false;
  }
  return true;
}

bool leq(const ExtRandomScalar& x, const ExtRandomScalar& y) {
  require_same_atoms(x.atoms(), y.atoms());
  for (int i = 0; i < x.atoms(); ++i) {
    if (!(x[i] <= y[i])) return false;
  }
  return true;
}

bool lt_on(const RandomScalar& x, const RandomScalar& y, const Event& a) {
  require_same_atoms(x.atoms(), y.atoms());
  if (!a.valid_for(x.atoms())) throw InvalidArgument("invalid event: atom index out of range");
  for (int atom : a.members()) {
    if (!(x[atom] < y[atom])) return false;
  }
  return true;
}

bool lt_on(const ExtRandomScalar& x, const ExtRandomScalar& y, const Event& a) {
  require_same_atoms(x.atoms(), y.atoms());
  if (!a.valid_for(x.atoms())) throw InvalidArgument("invalid event: atom index out of range");
  for (int atom : a.members()) {
    if (!(x[atom] < y[atom])) return false;
  }
  return true;
}

bool is_sigma_stable_scalars(std::span<const RandomScalar> g) {
  if (g.empty()) return true;
  const int n = g[0].atoms();
  for (const RandomScalar& x : g) require_same_atoms(n, x.atoms());

  // Closure under atomwise gluing means the set is exactly the product of
  // its per-atom value pools, so it suffices to compare cardinalities.
  std::set<std::vector<double>> distinct;
  for (const RandomScalar& x : g) distinct.insert(x.values());

  std::size_t product = 1;
  for (int atom = 0; atom < n; ++atom) {
    std::set<double> pool;
    for (const RandomScalar& x : g) pool.insert(x[atom]);
    product *= pool.size();
    if (product > distinct.size()) return false;
  }
  return product == distinct.size();
}

namespace {

RandomScalar near_extremum_witness(std::span<const RandomScalar> g, const RandomScalar& eps,
                                   bool verify, bool want_sup) {
  if (g.empty()) throw InvalidArgument("near-extremum witness of an empty family");
  const int n = g[0].atoms();
  require_same_atoms(n, eps.atoms());
  require(eps.strictly_positive(), "eps must be > 0 on every atom");
  if (verify && !is_sigma_stable_scalars(g)) {
    throw InvalidArgument("family is not closed under atomwise gluing");
  }

  const EssExtremumFinite ext = want_sup ? ess_sup(g) : ess_inf(g);
  std::vector<double> glued(n);
  for (int atom = 0; atom < n; ++atom) glued[atom] = g[ext.witness[atom]][atom];
  const RandomScalar pick{std::move(glued)};

  for (const RandomScalar& x : g) {
    if (x == pick) return x;
  }
  throw InvalidArgument("glued extremum is not a member; family is not closed under gluing");
}

}  // namespace

RandomScalar near_supremum_witness(std::span<const RandomScalar> g, const RandomScalar& eps,
                                   bool verify_sigma_stable) {
  return near_extremum_witness(g, eps, verify_sigma_stable, true);
}

RandomScalar near_infimum_witness(std::span<const RandomScalar> g, const RandomScalar& eps,
                                  bool verify_sigma_stable) {
  return near_extremum_witness(g, eps, verify_sigma_stable, false);
}

}  // namespace rmspace
