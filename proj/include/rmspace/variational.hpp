#ifndef RMSPACE_VARIATIONAL_HPP
#define RMSPACE_VARIATIONAL_HPP

#include <functional>
#include <optional>

#include "rmspace/fixpoint.hpp"
#include "rmspace/metric.hpp"

namespace rmspace {

/// Extended-real objective on section points. A proper function is never
/// -inf and is finite everywhere at some point; a sigma-stable function
/// commutes with gluing.
struct RandomFunction {
  std::function<ExtRandomScalar(const RandomPoint&)> eval;
  bool declared_sigma_stable = false;
};

/// Never -inf anywhere, and some point of the list has an all-finite value.
bool is_proper(const RandomFunction& f, std::span<const RandomPoint> points);

/// f commutes with every atomwise gluing of the given points.
bool is_sigma_stable_fn(const RMSpace& space, const RandomFunction& f,
                        std::span<const RandomPoint> points, std::size_t cap = kDefaultHullCap);

/// f commutes with every two-block gluing of the given points.
bool is_stable_fn(const RMSpace& space, const RandomFunction& f,
                  std::span<const RandomPoint> points);

struct LscOptions {
  int sequences = 16;
  int steps = 12;
  double eps = 0.05;     // neighborhood size used by both uniformities
  double lambda = 0.25;  // probability defect for the (eps,lambda) side
  std::uint64_t seed = 0;
};

/// Sequential closedness of the epigraph inside E x L0: sampled sequences
/// that stay in epi(f) and converge (under both uniformities, whose verdicts
/// must agree) are required to have their limit in epi(f).
bool lsc_check(const RMSpace& space, const RandomFunction& f, std::span<const RandomPoint> points,
               const LscOptions& opt = {});

struct NearExtremum {
  RandomPoint point;
  std::size_t hull_index = 0;
  RandomScalar value;
};

/// x_eps in the hull with f(x_eps) <= inf f + eps pointwise, built by gluing
/// per-atom minimizers (the glued pick lands in dom(f) automatically).
NearExtremum near_infimum(const RandomFunction& f, const SigmaStableSet& g,
                          const RandomScalar& eps);
/// Dual form: f(x_eps) >= sup f - eps pointwise (f bounded above).
NearExtremum near_supremum(const RandomFunction& f, const SigmaStableSet& g,
                           const RandomScalar& eps);

/// Conclusions of the variational principle at z:
///   (1) f(z) <= f(x0) - alpha * d(z,x0) on every atom;
///   (2) d(z,x0) <= alpha^{-1} * eps on every atom;
///   (3) every x != z has f(x) >= f(z) - alpha * d(x,z) on every atom with
///       strict inequality somewhere.
struct EkelandCertificate {
  RandomPoint z;
  bool cond1_ok = false;
  bool cond2_ok = false;
  bool cond3_ok = false;
  std::optional<RandomPoint> cond3_witness;  // a violating x, when one exists
  bool ok() const { return cond1_ok && cond2_ok && cond3_ok; }
};

/// Checks conditions (1)-(3) for a candidate z against the whole carrier.
EkelandCertificate verify_ekeland_conditions(const RMSpace& space, const RandomFunction& f,
                                             const RandomPoint& x0, const RandomScalar& eps,
                                             const RandomScalar& alpha,
                                             std::span<const RandomPoint> carrier,
                                             const RandomPoint& z);

/// Descent construction over the hull of E: repeatedly minimize f over
/// S(z) = {y : f(y) + alpha * d(z,y) <= f(z)} until S(z) = {z}. Requires
/// f proper with f(x0) <= inf f + eps, and eps, alpha > 0 on every atom.
EkelandCertificate ekeland_point(const SigmaStableSet& e, const RandomFunction& f,
                                 const RandomPoint& x0, const RandomScalar& eps,
                                 const RandomScalar& alpha, int max_iter = 1000);

/// Independent oracle: exhaustively scans candidates z over the carrier and
/// returns the first one whose certificate validates. Finding none is an
/// error, since it would contradict the variational principle.
EkelandCertificate ekeland_bruteforce(const RMSpace& space, const RandomFunction& f,
                                      const RandomPoint& x0, const RandomScalar& eps,
                                      const RandomScalar& alpha,
                                      std::span<const RandomPoint> carrier);

/// Fixed point of T under the descent condition
/// f(T(x)) + d(T(x),x) <= f(x): runs the variational principle with
/// alpha = 1 from a minimizer of f; condition (3) forces T(z) = z.
RandomPoint caristi_fixed_point(const SigmaStableSet& e, const PointMap& t,
                                const RandomFunction& f);

}  // namespace rmspace

#endif  // RMSPACE_VARIATIONAL_HPP
