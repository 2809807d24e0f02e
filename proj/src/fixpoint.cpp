#include "rmspace/fixpoint.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rmspace {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

bool within_tol(const RandomScalar& x, double tol) { return x.max_value() <= tol; }

void check_step_contraction(const RandomScalar& next_step, const RandomScalar& step,
                            const ContractionFactor& alpha, int iteration) {
  for (int atom = 0; atom < step.atoms(); ++atom) {
    if (next_step[atom] > alpha[atom] * step[atom] + kCheckSlack) {
      std::ostringstream os;
      os << "contraction bound failed at iterate " << iteration << ", atom " << atom << ": "
         << next_step[atom] << " > " << alpha[atom] << " * " << step[atom];
      throw ContractionViolation(os.str());
    }
  }
}

// Stop once alpha/(1-alpha) * step <= tol on every atom.
bool a_posteriori_stop(const RandomScalar& step, const ContractionFactor& alpha, double tol) {
  for (int atom = 0; atom < step.atoms(); ++atom) {
    if (step[atom] * alpha[atom] / (1.0 - alpha[atom]) > tol) return false;
  }
  return true;
}

}  // namespace

bool map_commutes_with_gluing(const RMSpace& space, const PointMap& t, const Partition& partition,
                              std::span<const Point> xs) {
  std::vector<Point> images;
  images.reserve(xs.size());
  for (const Point& x : xs) images.push_back(t.apply(x));
  const Point lhs = t.apply(space.glue(partition, xs));
  const Point rhs = space.glue(partition, images);
  return within_tol(space.distance(lhs, rhs), kZeroTol);
}

SolveReport banach_solve(const RMSpace& space, const PointMap& t, const Point& x0,
                         const ContractionFactor& alpha, const SolveOptions& opt) {
  require(opt.tol > 0.0, "tol must be positive");
  require(alpha.atoms() == space.prob_space().atom_count(), "alpha atom count mismatch");

  Point x = x0;
  Point tx = t.apply(x);
  RandomScalar step = space.distance(x, tx);
  int iterations = 1;
  std::vector<RandomScalar> trace;
  if (opt.record_trace) trace.push_back(step);

  while (!a_posteriori_stop(step, alpha, opt.tol)) {
    if (iterations >= opt.max_iter) {
      throw MaxIterationsExceeded("banach_solve did not converge within max_iter");
    }
    Point x_next = tx;
    Point tx_next = t.apply(x_next);
    RandomScalar step_next = space.distance(x_next, tx_next);
    ++iterations;
    if (opt.check_contraction) check_step_contraction(step_next, step, alpha, iterations);
    x = std::move(x_next);
    tx = std::move(tx_next);
    step = std::move(step_next);
    if (opt.record_trace) trace.push_back(step);
  }

  // Return the newest iterate; its residual is bounded by (1-alpha)*tol.
  Point solution = tx;
  RandomScalar residual = space.distance(solution, t.apply(solution));
  if (opt.check_contraction) check_step_contraction(residual, step, alpha, iterations + 1);
  return SolveReport{std::move(solution), std::move(residual), iterations, std::move(trace)};
}

Point iterate_power(const RMSpace& space, const PointMap& t, const RandomInteger& power,
                    const Point& x, bool verify_commute) {
  require(t.sigma_stable, "iterate_power requires a sigma-stable operator");
  require(power.atoms() == space.prob_space().atom_count(), "exponent atom count mismatch");
  const int n = space.prob_space().atom_count();
  const int k_max = power.max_value();

  std::vector<Point> iterates;  // iterates[k-1] = T^k(x)
  iterates.reserve(k_max);
  Point y = x;
  for (int k = 1; k <= k_max; ++k) {
    y = t.apply(y);
    iterates.push_back(y);
  }

  std::vector<Event> blocks;
  blocks.reserve(k_max);
  for (int k = 1; k <= k_max; ++k) {
    std::vector<int> members;
    for (int atom = 0; atom < n; ++atom) {
      if (power[atom] == k) members.push_back(atom);
    }
    blocks.push_back(Event(std::move(members)));
  }
  const Partition level_sets{std::move(blocks)};
  const Point result = space.glue(level_sets, iterates);

  if (verify_commute) {
    const Point lhs = iterate_power(space, t, power, t.apply(x), false);
    const Point rhs = t.apply(result);
    if (!within_tol(space.distance(lhs, rhs), kZeroTol)) {
      throw HypothesisViolation(
          "T^L(T(x)) != T(T^L(x)); the operator is not sigma-stable on the level sets of L");
    }
  }
  return result;
}

SolveReport random_power_solve(const RMSpace& space, const PointMap& t, const RandomInteger& power,
                               const ContractionFactor& alpha, const Point& x0,
                               const SolveOptions& opt) {
  const PointMap powered{
      [&space, &t, &power](const Point& p) { return iterate_power(space, t, power, p); },
      true};

  // Solve the powered map a little tighter than requested, so the
  // fixed-under-T verification below is not sensitive to the last step.
  SolveOptions inner = opt;
  inner.tol = opt.tol * 0.25;
  SolveReport report = banach_solve(space, powered, x0, alpha, inner);

  RandomScalar t_residual = space.distance(report.solution, t.apply(report.solution));
  if (!within_tol(t_residual, opt.tol)) {
    // One retry at a much tighter tolerance before declaring failure.
    inner.tol = opt.tol * 1e-4;
    report = banach_solve(space, powered, report.solution, alpha, inner);
    t_residual = space.distance(report.solution, t.apply(report.solution));
    if (!within_tol(t_residual, opt.tol)) {
      std::ostringstream os;
      os << "fixed point of T^L is not fixed under T (residual " << t_residual.max_value()
         << "); T and T^L do not commute, so T is not sigma-stable";
      throw HypothesisViolation(os.str());
    }
  }
  report.residual = std::move(t_residual);
  return report;
}

RandomScalar hausdorff(const SigmaStableSet& g1, const SigmaStableSet& g2) {
  require(g1.space().same_space(g2.space()), "Hausdorff distance needs sets in one space");
  const BaseMetricSpace& base = g1.space().base();
  const int n = g1.space().prob_space().atom_count();

  // Both directed distances per atom; sups over a hull are attained on
  // per-atom section pools because the distance sets are sigma-stable.
  auto directed = [&](const std::vector<BasePoint>& from, const std::vector<BasePoint>& to) {
    double worst = 0.0;
    for (const BasePoint& s : from) {
      double best = base.distance(s, to[0]);
      for (std::size_t j = 1; j < to.size(); ++j) best = std::min(best, base.distance(s, to[j]));
      worst = std::max(worst, best);
    }
    return worst;
  };

  std::vector<double> out(n);
  for (int atom = 0; atom < n; ++atom) {
    const auto& pool1 = g1.sections(atom);
    const auto& pool2 = g2.sections(atom);
    out[atom] = std::max(directed(pool1, pool2), directed(pool2, pool1));
  }
  return RandomScalar(std::move(out));
}

RandomPoint approx_selection(const RandomPoint& g1, const SigmaStableSet& g2,
                             const RandomScalar& eps) {
  require(eps.strictly_positive(), "eps must be > 0 on every atom");
  const SetDistance d = dist_to_set(g1, g2);
  const int n = g1.atoms();
  std::vector<BasePoint> sections(n);
  for (int atom = 0; atom < n; ++atom) {
    sections[atom] = g2.sections(atom)[g2.digit(d.witness[atom], atom)];
  }
  return RandomPoint(std::move(sections));
}

SolveReport nadler_solve(const RMSpace& space, const MultiMap& t, const RandomPoint& x0,
                         const ContractionFactor& alpha, const SolveOptions& opt) {
  require(opt.tol > 0.0, "tol must be positive");
  const int n = space.prob_space().atom_count();
  require(alpha.atoms() == n, "alpha atom count mismatch");

  const RandomScalar lifted = alpha.lifted();
  RandomScalar slack = RandomScalar::ones(n);
  RandomPoint x = x0;
  SigmaStableSet image = t(x);
  int iterations = 0;
  std::vector<RandomScalar> trace;

  while (true) {
    const SetDistance residual = dist_to_set(x, image);
    if (within_tol(residual.value, opt.tol)) {
      return SolveReport{Point(x), residual.value, iterations, std::move(trace)};
    }
    if (iterations >= opt.max_iter) {
      throw MaxIterationsExceeded("nadler_solve did not converge within max_iter");
    }
    RandomPoint x_next = approx_selection(x, image, slack);
    SigmaStableSet image_next = t(x_next);
    const RandomScalar step = space.distance(Point(x), Point(x_next));
    if (opt.check_contraction) {
      const RandomScalar h = hausdorff(image, image_next);
      for (int atom = 0; atom < n; ++atom) {
        if (h[atom] > alpha[atom] * step[atom] + kCheckSlack) {
          std::ostringstream os;
          os << "Hausdorff contraction bound failed at iterate " << iterations << ", atom " << atom
             << ": " << h[atom] << " > " << alpha[atom] << " * " << step[atom];
          throw ContractionViolation(os.str());
        }
      }
    }
    if (opt.record_trace) trace.push_back(step);
    x = std::move(x_next);
    image = std::move(image_next);
    slack = slack * lifted;
    ++iterations;
  }
}

HansConstruction hans_construct(const std::vector<std::vector<ContractionCertificate>>& per_atom) {
  require(!per_atom.empty(), "hans_construct needs at least one atom");
  const int n = static_cast<int>(per_atom.size());
  std::vector<int> powers(n);
  std::vector<double> factors(n);
  for (int atom = 0; atom < n; ++atom) {
    const auto& certs = per_atom[atom];
    if (certs.empty()) {
      std::ostringstream os;
      os << "atom " << atom << " carries no contraction certificate";
      throw InvalidArgument(os.str());
    }
    int best_level = 0;
    for (const ContractionCertificate& c : certs) {
      require(c.power >= 1 && c.level >= 1, "certificates need power >= 1 and level >= 1");
      if (best_level == 0 || c.level < best_level) best_level = c.level;
    }
    // Smallest power certified at the atom's minimal level.
    int best_power = 0;
    for (const ContractionCertificate& c : certs) {
      if (c.level == best_level && (best_power == 0 || c.power < best_power)) {
        best_power = c.power;
      }
    }
    powers[atom] = best_power;
    factors[atom] = 1.0 - 1.0 / best_level;
  }
  return HansConstruction{RandomInteger(std::move(powers)),
                          ContractionFactor(RandomScalar(std::move(factors)))};
}

SolveReport pointwise_operator_solve(const RMSpace& space, const AtomOperator& t,
                                     const ContractionFactor& alpha, const RandomPoint& x0,
                                     const SolveOptions& opt) {
  require(space.is_l0(), "pointwise operator solve requires a section carrier");
  const int n = space.prob_space().atom_count();
  const BaseMetricSpace& base = space.base();

  // Both routes resolve at half tolerance so they agree within opt.tol.
  SolveOptions half = opt;
  half.tol = opt.tol / 2.0;

  const PointMap induced{[&t](const Point& p) {
                           const RandomPoint& x = p.l0();
                           std::vector<BasePoint> out(x.atoms());
                           for (int atom = 0; atom < x.atoms(); ++atom) {
                             out[atom] = t(atom, x.section(atom));
                           }
                           return Point(RandomPoint(std::move(out)));
                         },
                         true};
  SolveReport report = banach_solve(space, induced, Point(x0), alpha, half);

  // Independent route: classical Banach iteration atom by atom.
  std::vector<BasePoint> per_atom(n);
  for (int atom = 0; atom < n; ++atom) {
    BasePoint p = x0.section(atom);
    BasePoint tp = t(atom, p);
    double step = base.distance(p, tp);
    const double ratio = alpha[atom] / (1.0 - alpha[atom]);
    int iter = 1;
    while (step * ratio > half.tol) {
      if (iter >= half.max_iter) {
        throw MaxIterationsExceeded("per-atom iteration did not converge within max_iter");
      }
      p = tp;
      tp = t(atom, p);
      const double next = base.distance(p, tp);
      if (opt.check_contraction && next > alpha[atom] * step + kCheckSlack) {
        std::ostringstream os;
        os << "per-atom contraction bound failed at atom " << atom;
        throw ContractionViolation(os.str());
      }
      step = next;
      ++iter;
    }
    per_atom[atom] = tp;
  }

  const RandomScalar gap = space.distance(report.solution, Point(RandomPoint(std::move(per_atom))));
  if (!within_tol(gap, opt.tol)) {
    std::ostringstream os;
    os << "induced-map and per-atom solutions disagree by " << gap.max_value();
    throw ContractionViolation(os.str());
  }
  return report;
}

}  // namespace rmspace
