#include "rmspace/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace rmspace {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

std::vector<ExtRandomScalar> eval_all(const RandomFunction& f,
                                      std::span<const RandomPoint> points) {
  std::vector<ExtRandomScalar> out;
  out.reserve(points.size());
  for (const RandomPoint& x : points) out.push_back(f.eval(x));
  return out;
}

std::vector<RandomPoint> hull_members(const SigmaStableSet& g) {
  std::vector<RandomPoint> out;
  out.reserve(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out.push_back(g.member(i));
  return out;
}

}  // namespace

bool is_proper(const RandomFunction& f, std::span<const RandomPoint> points) {
  require(!points.empty(), "properness check needs at least one point");
  bool has_finite = false;
  for (const RandomPoint& x : points) {
    const ExtRandomScalar v = f.eval(x);
    for (int atom = 0; atom < v.atoms(); ++atom) {
      if (v[atom] == -kInf) return false;
    }
    if (v.finite_everywhere()) has_finite = true;
  }
  return has_finite;
}

bool is_sigma_stable_fn(const RMSpace& space, const RandomFunction& f,
                        std::span<const RandomPoint> points, std::size_t cap) {
  require(!points.empty(), "stability check needs at least one point");
  const int n = space.prob_space().atom_count();
  const std::size_t count = points.size();

  std::size_t total = 1;
  for (int atom = 0; atom < n; ++atom) {
    if (total > cap / count) throw HullCapExceeded("too many atomwise gluings to enumerate");
    total *= count;
  }

  const std::vector<ExtRandomScalar> values = eval_all(f, points);
  std::vector<std::size_t> choice(n, 0);
  for (std::size_t index = 0; index < total; ++index) {
    std::size_t rest = index;
    for (int atom = n - 1; atom >= 0; --atom) {
      choice[atom] = rest % count;
      rest /= count;
    }
    std::vector<BasePoint> sections(n);
    std::vector<double> expected(n);
    for (int atom = 0; atom < n; ++atom) {
      sections[atom] = points[choice[atom]].section(atom);
      expected[atom] = values[choice[atom]][atom];
    }
    const ExtRandomScalar got = f.eval(RandomPoint(std::move(sections)));
    if (got != ExtRandomScalar(std::move(expected))) return false;
  }
  return true;
}

bool is_stable_fn(const RMSpace& space, const RandomFunction& f,
                  std::span<const RandomPoint> points) {
  require(!points.empty(), "stability check needs at least one point");
  const int n = space.prob_space().atom_count();
  require(n <= 20, "two-block enumeration is limited to 20 atoms");
  const std::vector<ExtRandomScalar> values = eval_all(f, points);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < points.size(); ++j) {
      for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<BasePoint> sections(n);
        std::vector<double> expected(n);
        for (int atom = 0; atom < n; ++atom) {
          const bool in_a = (mask & (1u << atom)) != 0;
          sections[atom] = points[in_a ? i : j].section(atom);
          expected[atom] = values[in_a ? i : j][atom];
        }
        const ExtRandomScalar got = f.eval(RandomPoint(std::move(sections)));
        if (got != ExtRandomScalar(std::move(expected))) return false;
      }
    }
  }
  return true;
}

bool lsc_check(const RMSpace& space, const RandomFunction& f, std::span<const RandomPoint> points,
               const LscOptions& opt) {
  require(!points.empty(), "lsc check needs at least one point");
  require(space.is_l0(), "lsc check requires a section carrier");
  const int n = space.prob_space().atom_count();
  const RMSpace scalar_line = l0_space(space.prob_space(), BaseMetricSpace::euclidean(1));
  const RMSpace product = product_space(space, scalar_line);
  const bool euclidean = !space.base().is_finite();
  const int dim = euclidean ? space.base().dim() : 0;

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  auto as_point = [n](const RandomScalar& r) {
    std::vector<BasePoint> sections(n);
    for (int atom = 0; atom < n; ++atom) sections[atom] = std::vector<double>{r[atom]};
    return RandomPoint(std::move(sections));
  };

  bool lsc = true;
  for (int s = 0; s < opt.sequences; ++s) {
    const RandomPoint& limit = points[s % points.size()];

    std::vector<Point> seq;
    std::vector<double> tail_values;
    bool usable = true;
    RandomPoint last_x = limit;
    for (int k = 0; k < opt.steps; ++k) {
      RandomPoint xk = limit;
      if (euclidean) {
        const double scale = std::ldexp(1.0, -k);  // 2^-k
        std::vector<BasePoint> sections(n);
        for (int atom = 0; atom < n; ++atom) {
          std::vector<double> c = std::get<std::vector<double>>(limit.section(atom));
          for (int i = 0; i < dim; ++i) c[i] += scale * unit(rng) / std::sqrt(double(dim));
          sections[atom] = std::move(c);
        }
        xk = RandomPoint(std::move(sections));
      }
      const ExtRandomScalar fx = f.eval(xk);
      if (!fx.finite_everywhere()) {
        usable = false;  // the sequence left dom(f); nothing to test
        break;
      }
      const RandomScalar rk = fx.to_random() + RandomScalar::constant(n, std::ldexp(1.0, -k));
      seq.emplace_back(Point(xk), Point(as_point(rk)));
      tail_values = rk.values();
      last_x = xk;
    }
    if (!usable) continue;

    // Candidate limit of the epigraph sequence: the carrier point paired
    // with the tail of the r-values.
    const Point limit_pair{Point(limit), Point(as_point(RandomScalar(tail_values)))};
    const auto entry_el = converges_eps_lambda(product, seq, limit_pair, opt.eps, opt.lambda);
    const auto entry_l0 =
        converges_l0(product, seq, limit_pair, RandomScalar::constant(n, opt.eps));
    // At finite scale the two uniformities certify the same convergences.
    if (entry_el.has_value() != entry_l0.has_value()) {
      throw HypothesisViolation("the two uniformities disagreed on a sampled sequence");
    }
    if (!entry_el.has_value()) continue;  // sequence did not settle; skip

    const ExtRandomScalar f_limit = f.eval(limit);
    const ExtRandomScalar bound(RandomScalar(tail_values) +
                                RandomScalar::constant(n, kCheckSlack));
    if (!leq(f_limit, bound)) lsc = false;
  }
  return lsc;
}

namespace {

struct HullObjective {
  std::vector<ExtRandomScalar> values;  // f over hull members, by hull index
};

HullObjective evaluate_hull(const RandomFunction& f, const SigmaStableSet& g) {
  HullObjective out;
  out.values.reserve(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out.values.push_back(f.eval(g.member(i)));
  return out;
}

// Per-atom argmin/argmax of f over a subset of hull indices, glued. Returns
// the hull index of the glued extremizer.
std::size_t glued_argext(const SigmaStableSet& g, const HullObjective& obj,
                         std::span<const std::size_t> candidates, bool minimize) {
  require(!candidates.empty(), "argmin over an empty candidate set");
  const int n = g.space().prob_space().atom_count();
  std::size_t index = 0;
  for (int atom = 0; atom < n; ++atom) {
    std::size_t best = candidates[0];
    for (std::size_t c : candidates) {
      const double v = obj.values[c][atom];
      const double b = obj.values[best][atom];
      if (minimize ? (v < b) : (v > b)) best = c;
    }
    index += g.digit(best, atom) * g.stride(atom);
  }
  return index;
}

NearExtremum near_extremum(const RandomFunction& f, const SigmaStableSet& g,
                           const RandomScalar& eps, bool minimize) {
  require(eps.strictly_positive(), "eps must be > 0 on every atom");
  const int n = g.space().prob_space().atom_count();
  const HullObjective obj = evaluate_hull(f, g);

  for (const ExtRandomScalar& v : obj.values) {
    for (int atom = 0; atom < n; ++atom) {
      if (v[atom] == (minimize ? -kInf : kInf)) {
        throw HypothesisViolation(minimize ? "objective is -inf on the hull (not proper)"
                                           : "objective is +inf-unbounded above on the hull");
      }
    }
  }

  std::vector<std::size_t> all(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) all[i] = i;
  const std::size_t index = glued_argext(g, obj, all, minimize);

  const ExtRandomScalar value = f.eval(g.member(index));
  if (!value.finite_everywhere()) {
    // Every member is infinite somewhere on this atom's slice: empty domain.
    throw HypothesisViolation("dom(f) is empty on the hull");
  }
  return NearExtremum{g.member(index), index, value.to_random()};
}

}  // namespace

NearExtremum near_infimum(const RandomFunction& f, const SigmaStableSet& g,
                          const RandomScalar& eps) {
  return near_extremum(f, g, eps, true);
}

NearExtremum near_supremum(const RandomFunction& f, const SigmaStableSet& g,
                           const RandomScalar& eps) {
  return near_extremum(f, g, eps, false);
}

EkelandCertificate verify_ekeland_conditions(const RMSpace& space, const RandomFunction& f,
                                             const RandomPoint& x0, const RandomScalar& eps,
                                             const RandomScalar& alpha,
                                             std::span<const RandomPoint> carrier,
                                             const RandomPoint& z) {
  const int n = space.prob_space().atom_count();
  EkelandCertificate cert{z, false, false, false, std::nullopt};

  const ExtRandomScalar fz = f.eval(z);
  const ExtRandomScalar fx0 = f.eval(x0);
  const RandomScalar dzx0 = space.distance(Point(z), Point(x0));
  const ExtRandomScalar slack = ExtRandomScalar::constant(n, kZeroTol);

  cert.cond1_ok = leq(fz, fx0 - ExtRandomScalar(alpha * dzx0) + slack);
  cert.cond2_ok = leq(ExtRandomScalar(dzx0), ExtRandomScalar(eps / alpha) + slack);

  // Condition (3): for x != z, f(x) + alpha*d(x,z) - f(z) must be >= 0
  // everywhere and strictly positive somewhere.
  cert.cond3_ok = true;
  for (const RandomPoint& x : carrier) {
    const RandomScalar dxz = space.distance(Point(x), Point(z));
    if (dxz.max_value() <= kZeroTol) continue;  // x == z
    const ExtRandomScalar gap = f.eval(x) + ExtRandomScalar(alpha * dxz) - fz;
    double lo = kInf, hi = -kInf;
    for (int atom = 0; atom < n; ++atom) {
      lo = std::min(lo, gap[atom]);
      hi = std::max(hi, gap[atom]);
    }
    if (lo < -kZeroTol || hi <= kZeroTol) {
      cert.cond3_ok = false;
      cert.cond3_witness = x;
      break;
    }
  }
  return cert;
}

EkelandCertificate ekeland_point(const SigmaStableSet& e, const RandomFunction& f,
                                 const RandomPoint& x0, const RandomScalar& eps,
                                 const RandomScalar& alpha, int max_iter) {
  const RMSpace& space = e.space();
  const int n = space.prob_space().atom_count();
  require(eps.strictly_positive(), "eps must be > 0 on every atom");
  require(alpha.strictly_positive(), "alpha must be > 0 on every atom");

  const auto x0_index = e.find(x0);
  if (!x0_index) throw HypothesisViolation("x0 does not lie in the carrier");

  const HullObjective obj = evaluate_hull(f, e);
  for (const ExtRandomScalar& v : obj.values) {
    for (int atom = 0; atom < n; ++atom) {
      if (v[atom] == -kInf) throw HypothesisViolation("objective is -inf somewhere (not proper)");
    }
  }

  // Start-point hypothesis f(x0) <= inf f + eps, with the pointwise infimum
  // taken over the hull.
  std::vector<double> inf_f(n, kInf);
  for (const ExtRandomScalar& v : obj.values) {
    for (int atom = 0; atom < n; ++atom) inf_f[atom] = std::min(inf_f[atom], v[atom]);
  }
  const ExtRandomScalar& fx0 = obj.values[*x0_index];
  for (int atom = 0; atom < n; ++atom) {
    if (inf_f[atom] == kInf) throw HypothesisViolation("dom(f) is empty on the hull");
    if (!(fx0[atom] <= inf_f[atom] + eps[atom] + kCheckSlack)) {
      throw HypothesisViolation("x0 does not satisfy f(x0) <= inf f + eps");
    }
  }

  std::size_t z = *x0_index;
  for (int k = 0; k < max_iter; ++k) {
    //  S(z) = members whose alpha-perturbed value improves on f(z) pointwise.
    std::vector<std::size_t> s;
    const RandomPoint zp = e.member(z);
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (!obj.values[i].finite_everywhere()) continue;
      const RandomScalar d = space.distance(Point(e.member(i)), Point(zp));
      const ExtRandomScalar lhs = obj.values[i] + ExtRandomScalar(alpha * d);
      if (leq(lhs, obj.values[z] + ExtRandomScalar::constant(n, kCheckSlack))) s.push_back(i);
    }
    if (s.size() == 1 && s[0] == z) break;
    const std::size_t next = glued_argext(e, obj, s, true);
    if (next == z) break;  // marginal members only; z is already minimal
    z = next;
  }

  return verify_ekeland_conditions(space, f, x0, eps, alpha, hull_members(e), e.member(z));
}

EkelandCertificate ekeland_bruteforce(const RMSpace& space, const RandomFunction& f,
                                      const RandomPoint& x0, const RandomScalar& eps,
                                      const RandomScalar& alpha,
                                      std::span<const RandomPoint> carrier) {
  require(!carrier.empty(), "bruteforce search needs a nonempty carrier");
  for (const RandomPoint& z : carrier) {
    EkelandCertificate cert = verify_ekeland_conditions(space, f, x0, eps, alpha, carrier, z);
    if (cert.ok()) return cert;
  }
  throw HypothesisViolation(
      "no carrier point satisfies the variational conclusions; "
      "either a hypothesis fails or the implementation is wrong");
}

RandomPoint caristi_fixed_point(const SigmaStableSet& e, const PointMap& t,
                                const RandomFunction& f) {
  const RMSpace& space = e.space();
  const int n = space.prob_space().atom_count();

  // The descent inequality is checked on the whole (finite) carrier, and
  // every image must stay inside it.
  for (std::size_t i = 0; i < e.size(); ++i) {
    const RandomPoint x = e.member(i);
    const Point tx = t.apply(Point(x));
    if (!in_closure(tx.l0(), e)) {
      throw HypothesisViolation("T maps a carrier point outside the carrier");
    }
    const ExtRandomScalar lhs =
        f.eval(tx.l0()) + ExtRandomScalar(space.distance(tx, Point(x)));
    if (!leq(lhs, f.eval(x) + ExtRandomScalar::constant(n, kCheckSlack))) {
      std::ostringstream os;
      os << "Caristi inequality f(T(x)) + d(T(x),x) <= f(x) fails at hull member " << i;
      throw HypothesisViolation(os.str());
    }
  }

  const RandomScalar one = RandomScalar::ones(n);
  const NearExtremum start = near_infimum(f, e, one);
  const EkelandCertificate cert = ekeland_point(e, f, start.point, one, one);
  if (!cert.ok()) {
    throw HypothesisViolation("variational certificate failed under the Caristi hypotheses");
  }
  const RandomScalar drift = space.distance(t.apply(Point(cert.z)), Point(cert.z));
  if (drift.max_value() > kZeroTol) {
    throw HypothesisViolation("returned point is not fixed; the descent condition must fail");
  }
  return cert.z;
}

}  // namespace rmspace
