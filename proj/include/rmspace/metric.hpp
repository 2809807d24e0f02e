#ifndef RMSPACE_METRIC_HPP
#define RMSPACE_METRIC_HPP

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rmspace/prob.hpp"

namespace rmspace {

/// A point of the base metric space: an index into a finite point list, or
/// a coordinate vector in R^d.
using BasePoint = std::variant<int, std::vector<double>>;

/// Either a finite metric space given by an explicit distance matrix
/// (validated exhaustively) or Euclidean R^d. Cheap to copy.
class BaseMetricSpace {
 public:
  static BaseMetricSpace finite_points(std::vector<std::string> labels,
                                       std::vector<std::vector<double>> dist);
  static BaseMetricSpace euclidean(int dim);

  bool is_finite() const;
  int point_count() const;              // finite bases only
  const std::string& label(int i) const;
  int label_index(const std::string& label) const;
  int dim() const;                      // Euclidean bases only

  double distance(const BasePoint& p, const BasePoint& q) const;
  /// Dedup predicate: exact for finite bases, within tol for Euclidean.
  bool same_point(const BasePoint& p, const BasePoint& q, double tol = kZeroTol) const;
  /// Throws InvalidArgument if p does not belong to this base.
  void check_point(const BasePoint& p) const;

  bool same_base(const BaseMetricSpace& other) const;

 private:
  struct Impl;
  explicit BaseMetricSpace(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// A section of the base space: one base point per atom. At finite scale
/// every random element is simple, so sections are total maps.
class RandomPoint {
 public:
  explicit RandomPoint(std::vector<BasePoint> sections);
  static RandomPoint constant(int atom_count, BasePoint p);

  int atoms() const { return static_cast<int>(sections_.size()); }
  const BasePoint& section(int atom) const { return sections_[atom]; }
  const std::vector<BasePoint>& sections() const { return sections_; }
  RandomPoint with_section(int atom, BasePoint p) const;

  bool operator==(const RandomPoint&) const = default;

 private:
  std::vector<BasePoint> sections_;
};

/// A point of an RM space: a section point, or a pair of component points
/// when the space is a product.
class Point {
 public:
  Point(RandomPoint p);  // NOLINT: implicit by design
  Point(Point first, Point second);

  bool is_pair() const;
  const RandomPoint& l0() const;
  const Point& first() const;
  const Point& second() const;

 private:
  using Pair = std::pair<std::shared_ptr<const Point>, std::shared_ptr<const Point>>;
  std::variant<RandomPoint, Pair> rep_;
};

/// Carrier plus random metric. Handles are cheap to copy and immutable.
/// Three carriers are supported: sections of a base metric space, products
/// of two spaces over the same base probability space, and a caller-supplied
/// distance callback over section points (trusted; axiom checking is opt-in).
class RMSpace {
 public:
  using CustomMetric = std::function<RandomScalar(const RandomPoint&, const RandomPoint&)>;

  const ProbSpace& prob_space() const;
  bool is_l0() const;
  bool is_product() const;
  bool is_custom() const;
  const BaseMetricSpace& base() const;     // l0 spaces only
  const RMSpace& component(int i) const;   // product spaces only

  RandomScalar distance(const Point& x, const Point& y) const;
  /// Structural point equality relative to this space (sections within the
  /// dedup tolerance for l0 carriers, componentwise for products).
  bool points_equal(const Point& x, const Point& y) const;
  void check_point(const Point& x) const;

  /// Concatenates points along the partition so the result agrees with
  /// xs[n] on block n (componentwise for products; unsupported for custom
  /// carriers). With verify set, the defining property is re-checked.
  Point glue(const Partition& partition, std::span<const Point> xs, bool verify = false) const;

  bool same_space(const RMSpace& other) const;

  friend RMSpace l0_space(ProbSpace space, BaseMetricSpace base);
  friend RMSpace product_space(RMSpace e1, RMSpace e2);
  friend RMSpace custom_space(ProbSpace space, CustomMetric metric);

 private:
  struct Impl;
  explicit RMSpace(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// The RM space of sections of `base`: d(x,y) evaluates the base distance
/// atom by atom. The full carrier is closed under gluing.
RMSpace l0_space(ProbSpace space, BaseMetricSpace base);

/// Product carrier with d((x1,y1),(x2,y2)) = d1(x1,x2) + d2(y1,y2).
RMSpace product_space(RMSpace e1, RMSpace e2);

/// Carrier of section points with a caller-supplied metric, trusted as-is.
RMSpace custom_space(ProbSpace space, RMSpace::CustomMetric metric);

/// Splice sections along a partition: result agrees with xs[n] on block n.
RandomPoint glue_points(const Partition& partition, std::span<const RandomPoint> xs);

// ---------------------------------------------------------------------------
// Axiom checking

struct AxiomViolation {
  std::string axiom;               // "RM-1".."RM-4", "RN-1".."RN-3", "RNM-1", "d=norm"
  int atom = -1;                   // -1 when the violation is not atom-local
  std::vector<int> sample_indices; // which samples witnessed it
  double lhs = 0.0;
  double rhs = 0.0;
};

struct AxiomReport {
  std::vector<AxiomViolation> violations;
  int pairs_checked = 0;
  int triples_checked = 0;
  bool ok() const { return violations.empty(); }
};

/// Verifies RM-1..RM-4 pointwise over all sampled points/pairs/triples.
/// Violations become report entries, never exceptions.
AxiomReport check_rm_axioms(const RMSpace& space, std::span<const Point> samples);

// ---------------------------------------------------------------------------
// Sigma-stable sets

inline constexpr std::size_t kDefaultHullCap = 100000;

/// A finite generator set together with its closure under atomwise gluing.
/// The hull is the product of the per-atom section pools and is materialized
/// lazily (pools only; members are reconstructed from mixed-radix indices).
/// Copies share the memoized pools; first access is race-safe.
class SigmaStableSet {
 public:
  SigmaStableSet(RMSpace space, std::vector<RandomPoint> generators,
                 std::size_t cap = kDefaultHullCap);

  const RMSpace& space() const;
  const std::vector<RandomPoint>& generators() const;

  std::size_t size() const;
  RandomPoint member(std::size_t index) const;
  const std::vector<BasePoint>& sections(int atom) const;
  std::size_t stride(int atom) const;
  std::size_t digit(std::size_t index, int atom) const;

  /// Hull index of x if its sections all appear in the per-atom pools.
  std::optional<std::size_t> find(const RandomPoint& x) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

/// Builds the sigma-stable hull of the generators; throws HullCapExceeded
/// instead of truncating when the product of pool sizes passes the cap.
SigmaStableSet sigma_hull(const RMSpace& space, std::vector<RandomPoint> generators,
                          std::size_t cap = kDefaultHullCap);

struct SetDistance {
  RandomScalar value;
  std::vector<std::size_t> witness;  // per atom, hull index attaining the inf
};

/// d(x,G): pointwise infimum of d(x,g) over the hull, attained atomwise.
SetDistance dist_to_set(const RandomPoint& x, const SigmaStableSet& g);

/// True iff d(x,G) vanishes (within kZeroTol) on every atom. At finite
/// scale this decides membership in both the (eps,lambda)- and L0-closures.
bool in_closure(const RandomPoint& x, const SigmaStableSet& g);

using PointPair = std::pair<RandomPoint, RandomPoint>;

struct LatticeWitness {
  PointPair min_pair;
  PointPair max_pair;
};

/// Realizes d(p1) min d(p2) and d(p1) max d(p2) as distances of hull pairs,
/// glued on the event where d(p1) <= d(p2). All four points must lie in the
/// hull of G.
LatticeWitness distance_lattice_witness(const SigmaStableSet& g, const PointPair& p1,
                                        const PointPair& p2);

/// D(G): pointwise supremum of pairwise distances within the hull.
RandomScalar random_diameter(const SigmaStableSet& g);

/// Smallest n such that every tail element from n on lies in U(eps,lambda)
/// around x, i.e. P{d(seq[m],x) < eps} > 1 - lambda; nullopt if the tail
/// never settles.
std::optional<int> converges_eps_lambda(const RMSpace& space, std::span<const Point> seq,
                                        const Point& x, double eps, double lambda);

/// L0-uniformity companion: entry means d(seq[m],x) <= eps on every atom.
std::optional<int> converges_l0(const RMSpace& space, std::span<const Point> seq, const Point& x,
                                const RandomScalar& eps);

/// Closed under two-block gluings (enumerates all events and pairs).
bool is_d_stable(const RMSpace& space, std::span<const RandomPoint> g);
/// Closed under atomwise gluings (product-cardinality characterization).
bool is_d_sigma_stable(const RMSpace& space, std::span<const RandomPoint> g);

// ---------------------------------------------------------------------------
// RN modules (Euclidean sections)

RandomPoint module_add(const RandomPoint& x, const RandomPoint& y);
RandomPoint module_sub(const RandomPoint& x, const RandomPoint& y);
RandomPoint module_scale(const RandomScalar& xi, const RandomPoint& x);
RandomPoint module_zero(int atom_count, int dim);

/// An l0 space over a Euclidean base together with an L0-valued norm.
/// The default norm takes the Euclidean length of each section; a custom
/// (possibly deliberately broken) norm can be supplied for checking.
class RNModuleSpace {
 public:
  explicit RNModuleSpace(RMSpace space);
  RNModuleSpace(RMSpace space, std::function<RandomScalar(const RandomPoint&)> norm);

  const RMSpace& space() const { return space_; }
  RandomScalar norm(const RandomPoint& x) const { return norm_(x); }

 private:
  RMSpace space_;
  std::function<RandomScalar(const RandomPoint&)> norm_;
};

/// Verifies RN-1..RN-3 and RNM-1 on the sampled points/scalars, plus the
/// consistency d(x,y) = ||x-y||.
AxiomReport check_rn_axioms(const RNModuleSpace& module, std::span<const RandomPoint> points,
                            std::span<const RandomScalar> scalars);

}  // namespace rmspace

#endif  // RMSPACE_METRIC_HPP
