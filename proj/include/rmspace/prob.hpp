#ifndef RMSPACE_PROB_HPP
#define RMSPACE_PROB_HPP

#include <optional>
#include <span>
#include <vector>

#include "rmspace/errors.hpp"

namespace rmspace {

/// Absolute tolerance for "this distance is zero" assertions. Gluing and
/// indicator arithmetic are exact; only iterative solvers introduce error.
inline constexpr double kZeroTol = 1e-9;

/// Tolerance for probability normalization.
inline constexpr double kProbSumTol = 1e-12;

/// Float slack used when spot-checking inequalities along solver iterates.
inline constexpr double kCheckSlack = 1e-12;

/// A measurable set of atoms, kept as a sorted list of distinct indices.
class Event {
 public:
  Event() = default;
  Event(std::initializer_list<int> atoms);
  explicit Event(std::vector<int> atoms);

  static Event full(int atom_count);

  const std::vector<int>& members() const { return members_; }
  bool contains(int atom) const;
  bool empty() const { return members_.empty(); }
  int size() const { return static_cast<int>(members_.size()); }
  bool valid_for(int atom_count) const;
  Event complement(int atom_count) const;

  bool operator==(const Event&) const = default;

 private:
  std::vector<int> members_;
};

/// Finite atomic probability space. Every atom carries strictly positive
/// mass, so equivalence classes of random variables collapse to per-atom
/// value vectors and "almost surely" means "on every atom".
class ProbSpace {
 public:
  explicit ProbSpace(std::vector<double> probs);
  static ProbSpace uniform(int atom_count);

  int atom_count() const { return static_cast<int>(probs_.size()); }
  double prob(int atom) const;
  double event_prob(const Event& a) const;
  double min_prob() const;

  bool operator==(const ProbSpace&) const = default;

 private:
  std::vector<double> probs_;
};

/// A finite partition of the atom set. Empty blocks are permitted; they are
/// the finite-scale stand-in for the null tail of a countable partition.
class Partition {
 public:
  explicit Partition(std::vector<Event> blocks);

  static Partition atomic(int atom_count);
  static Partition two_block(const Event& a, int atom_count);

  const std::vector<Event>& blocks() const { return blocks_; }
  int block_count() const { return static_cast<int>(blocks_.size()); }

  /// Throws InvalidArgument unless the blocks are disjoint and cover
  /// exactly the atoms of a space with `atom_count` atoms.
  void validate(int atom_count) const;

  /// Index of the block containing `atom` (validate first).
  int block_of(int atom) const;

 private:
  std::vector<Event> blocks_;
};

/// Element of L0: one finite real value per atom.
class RandomScalar {
 public:
  explicit RandomScalar(std::vector<double> values);
  static RandomScalar constant(int atom_count, double value);
  static RandomScalar zeros(int atom_count) { return constant(atom_count, 0.0); }
  static RandomScalar ones(int atom_count) { return constant(atom_count, 1.0); }

  int atoms() const { return static_cast<int>(values_.size()); }
  double operator[](int atom) const { return values_[atom]; }
  const std::vector<double>& values() const { return values_; }

  RandomScalar pointwise_min(const RandomScalar& other) const;
  RandomScalar pointwise_max(const RandomScalar& other) const;
  RandomScalar abs() const;
  double max_value() const;
  double min_value() const;

  bool all_nonnegative() const;
  /// True iff the scalar is > 0 on every atom (the L0_{++} condition).
  bool strictly_positive() const;

  bool operator==(const RandomScalar&) const = default;

 private:
  std::vector<double> values_;
};

RandomScalar operator+(const RandomScalar& a, const RandomScalar& b);
RandomScalar operator-(const RandomScalar& a, const RandomScalar& b);
RandomScalar operator*(const RandomScalar& a, const RandomScalar& b);
RandomScalar operator*(double c, const RandomScalar& a);
/// Pointwise quotient; division by zero is an error.
RandomScalar operator/(const RandomScalar& a, const RandomScalar& b);

/// Element of the extended lattice: per-atom values in [-inf, +inf].
/// NaN is never representable; (+inf) + (-inf) is a hard error rather than
/// a silent NaN, and x * 0 is 0 even for infinite x.
class ExtRandomScalar {
 public:
  explicit ExtRandomScalar(std::vector<double> values);
  ExtRandomScalar(const RandomScalar& finite);  // NOLINT: deliberate widening
  static ExtRandomScalar constant(int atom_count, double value);

  int atoms() const { return static_cast<int>(values_.size()); }
  double operator[](int atom) const { return values_[atom]; }
  const std::vector<double>& values() const { return values_; }

  bool finite_everywhere() const;
  bool finite_at(int atom) const;
  /// Narrow back to L0; throws if any atom is infinite.
  RandomScalar to_random() const;

  ExtRandomScalar pointwise_min(const ExtRandomScalar& other) const;
  ExtRandomScalar pointwise_max(const ExtRandomScalar& other) const;

  bool operator==(const ExtRandomScalar&) const = default;

 private:
  std::vector<double> values_;
};

ExtRandomScalar operator+(const ExtRandomScalar& a, const ExtRandomScalar& b);
ExtRandomScalar operator-(const ExtRandomScalar& a, const ExtRandomScalar& b);
ExtRandomScalar operator*(const ExtRandomScalar& a, const ExtRandomScalar& b);

/// Positive integer-valued random variable (the random exponent L).
class RandomInteger {
 public:
  explicit RandomInteger(std::vector<int> values);
  static RandomInteger constant(int atom_count, int value);

  int atoms() const { return static_cast<int>(values_.size()); }
  int operator[](int atom) const { return values_[atom]; }
  const std::vector<int>& values() const { return values_; }
  int max_value() const;

  bool operator==(const RandomInteger&) const = default;

 private:
  std::vector<int> values_;
};

/// Random Lipschitz factor with 0 <= alpha < 1 on every atom.
class ContractionFactor {
 public:
  explicit ContractionFactor(RandomScalar alpha);
  static ContractionFactor constant(int atom_count, double value);

  const RandomScalar& alpha() const { return alpha_; }
  int atoms() const { return alpha_.atoms(); }
  double operator[](int atom) const { return alpha_[atom]; }

  /// The factor with its zero set lifted to 1/2, so that the slack sequence
  /// alpha^n stays strictly positive on every atom.
  RandomScalar lifted() const;

 private:
  RandomScalar alpha_;
};

/// Characteristic function of A as a random scalar: 1 on A, 0 elsewhere.
RandomScalar indicator(const ProbSpace& space, const Event& a);

/// Concatenates the inputs along the partition: the result agrees with
/// xs[n] on block n. The partition and xs must have matching lengths.
RandomScalar glue_scalars(const Partition& partition, std::span<const RandomScalar> xs);
ExtRandomScalar glue_ext_scalars(const Partition& partition, std::span<const ExtRandomScalar> xs);

/// Pointwise supremum/infimum of a nonempty family together with, per atom,
/// the index of a member attaining it (lowest index wins on ties).
struct EssExtremum {
  ExtRandomScalar value;
  std::vector<int> witness;
};
EssExtremum ess_sup(std::span<const ExtRandomScalar> xs);
EssExtremum ess_inf(std::span<const ExtRandomScalar> xs);

struct EssExtremumFinite {
  RandomScalar value;
  std::vector<int> witness;
};
EssExtremumFinite ess_sup(std::span<const RandomScalar> xs);
EssExtremumFinite ess_inf(std::span<const RandomScalar> xs);

/// x <= y on every atom.
bool leq(const RandomScalar& x, const RandomScalar& y);
bool leq(const ExtRandomScalar& x, const ExtRandomScalar& y);
/// x < y strictly on every atom of A (vacuously true for empty A).
bool lt_on(const RandomScalar& x, const RandomScalar& y, const Event& a);
bool lt_on(const ExtRandomScalar& x, const ExtRandomScalar& y, const Event& a);

/// True iff every atomwise gluing of members of G lands back in G.
bool is_sigma_stable_scalars(std::span<const RandomScalar> g);

/// Picks g in G with g > sup(G) - eps strictly on every atom, by gluing
/// per-atom maximizers over the atomic partition. G must be closed under
/// gluing (checked exhaustively when verify is set; membership of the glued
/// pick is always checked). eps must be > 0 on every atom.
RandomScalar near_supremum_witness(std::span<const RandomScalar> g, const RandomScalar& eps,
                                   bool verify_sigma_stable = false);
/// Dual form: g < inf(G) + eps strictly on every atom.
RandomScalar near_infimum_witness(std::span<const RandomScalar> g, const RandomScalar& eps,
                                  bool verify_sigma_stable = false);

}  // namespace rmspace

#endif  // RMSPACE_PROB_HPP
