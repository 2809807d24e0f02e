#ifndef RMSPACE_FIXPOINT_HPP
#define RMSPACE_FIXPOINT_HPP

#include <functional>
#include <vector>

#include "rmspace/metric.hpp"

namespace rmspace {

/// Single-valued operator on an RM space. The sigma_stable flag is a claim
/// that T commutes with gluing; it is checked where the algorithms need it.
struct PointMap {
  std::function<Point(const Point&)> apply;
  bool sigma_stable = false;
};

/// Set-valued operator: every image is a sigma-stable set with a
/// materializable hull.
using MultiMap = std::function<SigmaStableSet(const RandomPoint&)>;

struct SolveOptions {
  double tol = 1e-9;
  int max_iter = 10000;
  bool record_trace = false;
  bool check_contraction = true;
};

struct SolveReport {
  Point solution;
  RandomScalar residual;            // d(x, T(x)), or distance to the image set
  int iterations = 0;               // operator applications driving the iteration
  std::vector<RandomScalar> trace;  // per-step distances d(x_n, x_{n+1})
};

/// Verifies T(glue(pi, xs)) = glue(pi, map T xs) within kZeroTol.
bool map_commutes_with_gluing(const RMSpace& space, const PointMap& t, const Partition& partition,
                              std::span<const Point> xs);

/// Picard iteration for d(T(x),T(y)) <= alpha * d(x,y). Stops once the
/// a-posteriori bound alpha/(1-alpha) * d(x_n, x_{n+1}) <= tol holds on every
/// atom; the contraction claim is spot-checked on consecutive iterates.
SolveReport banach_solve(const RMSpace& space, const PointMap& t, const Point& x0,
                         const ContractionFactor& alpha, const SolveOptions& opt = {});

/// T^L(x): on each atom, T applied L(omega) times, realized as a gluing over
/// the level sets {L = k}. Requires a sigma-stable T; with verify_commute the
/// identity T^L(T(x)) = T(T^L(x)) is asserted at x.
Point iterate_power(const RMSpace& space, const PointMap& t, const RandomInteger& power,
                    const Point& x, bool verify_commute = false);

/// Fixed point of T when only T^L is a contraction. Runs banach_solve on
/// T^L, then verifies the result is fixed under T itself within tol.
SolveReport random_power_solve(const RMSpace& space, const PointMap& t, const RandomInteger& power,
                               const ContractionFactor& alpha, const Point& x0,
                               const SolveOptions& opt = {});

/// Random Hausdorff distance between two hulls:
/// max of the two directed pointwise sup-inf distances.
RandomScalar hausdorff(const SigmaStableSet& g1, const SigmaStableSet& g2);

/// Picks g2 in hull(G2) with d(g1,g2) <= d(g1,G2) + eps on every atom, by
/// gluing per-atom nearest sections (lowest hull index wins ties).
RandomPoint approx_selection(const RandomPoint& g1, const SigmaStableSet& g2,
                             const RandomScalar& eps);

/// Iteration for a set-valued contraction H(T(x),T(y)) <= alpha * d(x,y):
/// x_{n+1} = approx_selection(x_n, T(x_n), lifted_alpha^n), stopping when
/// d(x_n, T(x_n)) <= tol on every atom.
SolveReport nadler_solve(const RMSpace& space, const MultiMap& t, const RandomPoint& x0,
                         const ContractionFactor& alpha, const SolveOptions& opt = {});

/// Certificate that the n-th iterate is a contraction with factor 1 - 1/level
/// at some atom.
struct ContractionCertificate {
  int power = 1;  // which iterate T^n
  int level = 1;  // factor index m; the certified factor is 1 - 1/m
};

struct HansConstruction {
  RandomInteger power;
  ContractionFactor alpha;
};

/// Assembles the random exponent L and factor alpha from per-atom
/// certificates: each atom is assigned its smallest certified level m, with
/// L the smallest power certified at that level.
HansConstruction hans_construct(const std::vector<std::vector<ContractionCertificate>>& per_atom);

/// Atom-indexed family of base-space operators.
using AtomOperator = std::function<BasePoint(int atom, const BasePoint&)>;

/// Solves the induced map T(x)(omega) = T(omega, x(omega)) via banach_solve
/// and independently by classical per-atom iteration; the two solutions are
/// required to agree within tol.
SolveReport pointwise_operator_solve(const RMSpace& space, const AtomOperator& t,
                                     const ContractionFactor& alpha, const RandomPoint& x0,
                                     const SolveOptions& opt = {});

}  // namespace rmspace

#endif  // RMSPACE_FIXPOINT_HPP
