#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rmspace/fixpoint.hpp"
#include "support/oracles.hpp"

using namespace rmspace;

namespace {

RandomScalar rs(std::initializer_list<double> v) { return RandomScalar(std::vector<double>(v)); }

RMSpace line(int atoms) { return l0_space(ProbSpace::uniform(atoms), BaseMetricSpace::euclidean(1)); }

// Per-atom scalar affine map x -> a x + b.
PointMap scalar_affine(std::vector<double> a, std::vector<double> b) {
  return PointMap{[a, b](const Point& p) {
                    const RandomPoint& x = p.l0();
                    std::vector<BasePoint> out(x.atoms());
                    for (int atom = 0; atom < x.atoms(); ++atom) {
                      const double v = std::get<std::vector<double>>(x.section(atom))[0];
                      out[atom] = std::vector<double>{a[atom] * v + b[atom]};
                    }
                    return Point(RandomPoint(std::move(out)));
                  },
                  true};
}

double section1(const Point& p, int atom) {
  return std::get<std::vector<double>>(p.l0().section(atom))[0];
}

}  // namespace

TEST_CASE("banach_solve on per-atom affine contractions") {
  const RMSpace space = line(2);
  const PointMap t = scalar_affine({0.5, -0.25}, {1, 1});
  const ContractionFactor alpha{rs({0.5, 0.25})};
  const SolveReport r = banach_solve(space, t, Point(test::euclid_point({0, 0})), alpha);

  // Closed form b/(1-a) per atom.
  CHECK(section1(r.solution, 0) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(section1(r.solution, 1) == doctest::Approx(0.8).epsilon(1e-8));
  CHECK(r.residual.max_value() <= 1e-9);

  // Uniqueness: a second start lands at the same point.
  const SolveReport r2 = banach_solve(space, t, Point(test::euclid_point({40, -17})), alpha);
  CHECK(space.distance(r.solution, r2.solution).max_value() <= 2e-9);
}

TEST_CASE("banach_solve against the dense closed form") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> angle(0, 6.28318);
  std::uniform_real_distribution<double> scale(-0.9, 0.9);
  std::uniform_real_distribution<double> shift(-5, 5);
  const ProbSpace prob = ProbSpace::uniform(2);
  const RMSpace plane = l0_space(prob, BaseMetricSpace::euclidean(2));

  for (int trial = 0; trial < 25; ++trial) {
    // Scaled rotations have operator norm |c| exactly.
    std::vector<std::vector<std::vector<double>>> a(2);
    std::vector<std::vector<double>> b(2);
    std::vector<double> factors(2);
    for (int atom = 0; atom < 2; ++atom) {
      const double th = angle(rng);
      const double c = scale(rng);
      a[atom] = {{c * std::cos(th), -c * std::sin(th)}, {c * std::sin(th), c * std::cos(th)}};
      b[atom] = {shift(rng), shift(rng)};
      factors[atom] = std::abs(c);
    }
    const PointMap t{[a, b](const Point& p) {
                       const RandomPoint& x = p.l0();
                       std::vector<BasePoint> out(2);
                       for (int atom = 0; atom < 2; ++atom) {
                         const auto& v = std::get<std::vector<double>>(x.section(atom));
                         out[atom] = std::vector<double>{
                             a[atom][0][0] * v[0] + a[atom][0][1] * v[1] + b[atom][0],
                             a[atom][1][0] * v[0] + a[atom][1][1] * v[1] + b[atom][1]};
                       }
                       return Point(RandomPoint(std::move(out)));
                     },
                     true};
    const SolveReport r = banach_solve(plane, t, Point(module_zero(2, 2)),
                                       ContractionFactor{RandomScalar(factors)});
    for (int atom = 0; atom < 2; ++atom) {
      const std::vector<double> expect = test::affine_fixed_point(a[atom], b[atom]);
      const auto& got = std::get<std::vector<double>>(r.solution.l0().section(atom));
      CHECK(got[0] == doctest::Approx(expect[0]).epsilon(1e-8));
      CHECK(got[1] == doctest::Approx(expect[1]).epsilon(1e-8));
    }
  }
}

TEST_CASE("banach_solve edge behavior") {
  const RMSpace space = line(1);

  // Constant maps land in one step (alpha = 0 is allowed).
  const PointMap constant{[](const Point&) { return Point(test::euclid_point({7})); }, true};
  const SolveReport r =
      banach_solve(space, constant, Point(test::euclid_point({100})), ContractionFactor{rs({0})});
  CHECK(r.iterations == 1);
  CHECK(section1(r.solution, 0) == 7.0);
  CHECK(r.residual.max_value() == 0.0);

  // A claimed contraction that is actually the identity is detected.
  const PointMap identity{[](const Point& p) { return p; }, true};
  CHECK_THROWS_AS(banach_solve(space, identity, Point(test::euclid_point({1})),
                               ContractionFactor{rs({0.5})}),
                  ContractionViolation);

  // Tiny iteration budgets surface as an explicit error.
  SolveOptions opt;
  opt.max_iter = 3;
  CHECK_THROWS_AS(banach_solve(space, scalar_affine({0.99}, {1}), Point(test::euclid_point({0})),
                               ContractionFactor{rs({0.99})}, opt),
                  MaxIterationsExceeded);
}

TEST_CASE("a-priori bound along banach iterates") {
  const RMSpace space = line(2);
  const std::vector<double> a = {0.6, -0.35};
  const std::vector<double> b = {2, 1};
  const PointMap t = scalar_affine(a, b);
  const ContractionFactor alpha{rs({0.6, 0.35})};
  SolveOptions opt;
  opt.record_trace = true;
  const SolveReport r = banach_solve(space, t, Point(test::euclid_point({0, 0})), alpha, opt);

  // Replay the iteration and compare with the returned reference point.
  Point x = Point(test::euclid_point({0, 0}));
  const RandomScalar first_step = r.trace.front();
  for (int n = 0; n <= r.iterations; ++n) {
    const RandomScalar gap = space.distance(x, r.solution);
    for (int atom = 0; atom < 2; ++atom) {
      const double bound =
          std::pow(alpha[atom], n) / (1.0 - alpha[atom]) * first_step[atom] + opt.tol;
      CHECK(gap[atom] <= bound);
    }
    x = t.apply(x);
  }
  // Steps contract along the trace.
  for (std::size_t n = 0; n + 1 < r.trace.size(); ++n) {
    for (int atom = 0; atom < 2; ++atom) {
      CHECK(r.trace[n + 1][atom] <= alpha[atom] * r.trace[n][atom] + 1e-12);
    }
  }
}

TEST_CASE("iterate_power") {
  const RMSpace space = line(2);
  const PointMap half = scalar_affine({0.5, 0.5}, {0, 0});

  // L == 1 is T itself.
  const Point once = iterate_power(space, half, RandomInteger::constant(2, 1),
                                   Point(test::euclid_point({8, 8})));
  CHECK(space.distance(once, half.apply(Point(test::euclid_point({8, 8})))).max_value() == 0.0);

  // Mixed exponent applies T once on atom 0 and twice on atom 1.
  const Point mixed = iterate_power(space, half, RandomInteger({1, 2}),
                                    Point(test::euclid_point({8, 8})), true);
  CHECK(section1(mixed, 0) == 4.0);
  CHECK(section1(mixed, 1) == 2.0);

  // Constant exponent equals plain composition.
  const Point twice = iterate_power(space, half, RandomInteger::constant(2, 2),
                                    Point(test::euclid_point({8, 8})));
  const Point composed = half.apply(half.apply(Point(test::euclid_point({8, 8}))));
  CHECK(space.distance(twice, composed).max_value() == 0.0);

  // Section identity against direct per-atom composition.
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> a = {0.3, -0.7};
    const std::vector<double> b = {1, 2};
    const PointMap t = scalar_affine(a, b);
    const RandomInteger power({1 + int(rng() % 4), 1 + int(rng() % 4)});
    const double x0 = double(rng() % 9) - 4;
    const Point result = iterate_power(space, t, power, Point(test::euclid_point({x0, x0})), true);
    for (int atom = 0; atom < 2; ++atom) {
      double v = x0;
      for (int k = 0; k < power[atom]; ++k) v = a[atom] * v + b[atom];
      CHECK(section1(result, atom) == doctest::Approx(v).epsilon(1e-12));
    }
  }

  // A non-sigma-stable map is rejected when verification is on: this map
  // reads atom 0's section to decide what happens on atom 1.
  const PointMap tangled{[](const Point& p) {
                           const RandomPoint& x = p.l0();
                           const double v0 = std::get<std::vector<double>>(x.section(0))[0];
                           std::vector<BasePoint> out(x.atoms());
                           out[0] = std::vector<double>{v0 * 0.5};
                           out[1] = std::vector<double>{v0};
                           return Point(RandomPoint(std::move(out)));
                         },
                         true};
  CHECK_THROWS_AS(iterate_power(space, tangled, RandomInteger({1, 2}),
                                Point(test::euclid_point({3, 5})), true),
                  HypothesisViolation);
}

TEST_CASE("random_power_solve on the nilpotent-atom operator") {
  const ProbSpace prob = ProbSpace::uniform(2);
  const RMSpace plane = l0_space(prob, BaseMetricSpace::euclidean(2));

  // Atom 0: plain halving plus shift. Atom 1: T = Mx + b with M^2 = 0, so T
  // itself is not contractive but T^2 is constant.
  const std::vector<std::vector<std::vector<double>>> a = {{{0.5, 0}, {0, 0.5}},
                                                           {{0, 2}, {0, 0}}};
  const std::vector<std::vector<double>> b = {{1, 1}, {1, 1}};
  const PointMap t{[a, b](const Point& p) {
                     const RandomPoint& x = p.l0();
                     std::vector<BasePoint> out(2);
                     for (int atom = 0; atom < 2; ++atom) {
                       const auto& v = std::get<std::vector<double>>(x.section(atom));
                       out[atom] = std::vector<double>{
                           a[atom][0][0] * v[0] + a[atom][0][1] * v[1] + b[atom][0],
                           a[atom][1][0] * v[0] + a[atom][1][1] * v[1] + b[atom][1]};
                     }
                     return Point(RandomPoint(std::move(out)));
                   },
                   true};

  const SolveReport r = random_power_solve(plane, t, RandomInteger({1, 2}),
                                           ContractionFactor{rs({0.5, 0.0})},
                                           Point(module_zero(2, 2)));
  CHECK(r.residual.max_value() <= 1e-9);  // fixed under T itself
  const std::vector<double> fix1 = test::affine_fixed_point(a[1], b[1]);
  const auto& got0 = std::get<std::vector<double>>(r.solution.l0().section(0));
  const auto& got1 = std::get<std::vector<double>>(r.solution.l0().section(1));
  CHECK(got0[0] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(got0[1] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(got1[0] == doctest::Approx(fix1[0]).epsilon(1e-8));
  CHECK(got1[1] == doctest::Approx(fix1[1]).epsilon(1e-8));
  CHECK(fix1[0] == doctest::Approx(3.0));
  CHECK(fix1[1] == doctest::Approx(1.0));
}

TEST_CASE("random_power_solve reductions") {
  const RMSpace space = line(2);
  const PointMap t = scalar_affine({0.5, -0.25}, {1, 1});
  const ContractionFactor alpha{rs({0.5, 0.25})};

  // L == 1 reproduces the plain solver's fixed point.
  const SolveReport direct = banach_solve(space, t, Point(test::euclid_point({0, 0})), alpha);
  const SolveReport powered = random_power_solve(space, t, RandomInteger::constant(2, 1), alpha,
                                                 Point(test::euclid_point({0, 0})));
  CHECK(space.distance(direct.solution, powered.solution).max_value() <= 2e-9);

  // Constant exponent: T(x) = -0.9x has T^3 contraction factor 0.729.
  const PointMap odd = scalar_affine({-0.9, -0.9}, {0, 0});
  const SolveReport cubic = random_power_solve(space, odd, RandomInteger::constant(2, 3),
                                               ContractionFactor{rs({0.729, 0.729})},
                                               Point(test::euclid_point({5, -3})));
  CHECK(std::abs(section1(cubic.solution, 0)) <= 1e-8);
  CHECK(std::abs(section1(cubic.solution, 1)) <= 1e-8);
}

TEST_CASE("hausdorff distance") {
  const RMSpace space = line(2);
  const SigmaStableSet g1 = sigma_hull(space, {test::euclid_point({0, 0}),
                                               test::euclid_point({1, 1})});
  const SigmaStableSet g2 = sigma_hull(space, {test::euclid_point({3, 3})});

  CHECK(hausdorff(g1, g1) == rs({0, 0}));
  CHECK(hausdorff(g1, g2) == rs({3, 3}));
  CHECK(hausdorff(g1, g2) == hausdorff(g2, g1));

  // RM-1/2/4 for the induced metric on sigma-stable sets.
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<SigmaStableSet> sets;
    for (int s = 0; s < 3; ++s) {
      std::vector<RandomPoint> gens;
      for (int i = 0; i < 1 + int(rng() % 3); ++i) {
        gens.push_back(test::euclid_point({double(rng() % 7), double(rng() % 7)}));
      }
      sets.push_back(sigma_hull(space, gens));
    }
    const RandomScalar d01 = hausdorff(sets[0], sets[1]);
    const RandomScalar d10 = hausdorff(sets[1], sets[0]);
    const RandomScalar d02 = hausdorff(sets[0], sets[2]);
    const RandomScalar d12 = hausdorff(sets[1], sets[2]);
    CHECK(hausdorff(sets[0], sets[0]).max_value() == 0.0);
    CHECK(d01 == d10);
    CHECK(d01.all_nonnegative());
    CHECK(leq(d02, d01 + d12 + RandomScalar::constant(2, 1e-12)));
  }
}

TEST_CASE("approx_selection") {
  const RMSpace space = line(2);
  const SigmaStableSet g = sigma_hull(space, {test::euclid_point({0, 0}),
                                              test::euclid_point({4, 4})});
  const RandomScalar eps = rs({0.5, 0.5});

  // Members select themselves.
  const RandomPoint inside = g.member(1);
  CHECK(space.distance(Point(approx_selection(inside, g, eps)), Point(inside)).max_value() == 0.0);

  const RandomPoint picked = approx_selection(test::euclid_point({3, 3}), g, eps);
  CHECK(section1(Point(picked), 0) == 4.0);
  CHECK(section1(Point(picked), 1) == 4.0);
  CHECK(space.distance(Point(test::euclid_point({3, 3})), Point(picked)) == rs({1, 1}));

  // Selection bound re-checked by brute force over the hull.
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 30; ++trial) {
    const RandomPoint probe = test::euclid_point({double(rng() % 11) - 5, double(rng() % 11) - 5});
    const RandomPoint sel = approx_selection(probe, g, eps);
    CHECK(g.find(sel).has_value());
    RandomScalar best = space.distance(Point(probe), Point(g.member(0)));
    for (std::size_t i = 1; i < g.size(); ++i) {
      best = best.pointwise_min(space.distance(Point(probe), Point(g.member(i))));
    }
    CHECK(leq(space.distance(Point(probe), Point(sel)), best + eps));
  }
}

TEST_CASE("nadler_solve on the two-branch map") {
  const RMSpace space = line(2);
  // T(x) = {x/2, x/2 + 1} per atom; fixed points are 0 and 2.
  const MultiMap t = [&space](const RandomPoint& x) {
    std::vector<BasePoint> lo(2), hi(2);
    for (int atom = 0; atom < 2; ++atom) {
      const double v = std::get<std::vector<double>>(x.section(atom))[0];
      lo[atom] = std::vector<double>{v / 2};
      hi[atom] = std::vector<double>{v / 2 + 1};
    }
    return sigma_hull(space, {RandomPoint(lo), RandomPoint(hi)});
  };

  SolveOptions opt;
  opt.tol = 1e-9;
  const SolveReport r = nadler_solve(space, t, test::euclid_point({-1, -1}),
                                     ContractionFactor{rs({0.5, 0.5})}, opt);
  CHECK(r.residual.max_value() <= 1e-6);
  // The lower branch is selected all the way down to the fixed point 0.
  CHECK(std::abs(section1(r.solution, 0)) <= 1e-6);
  CHECK(std::abs(section1(r.solution, 1)) <= 1e-6);

  // Both true fixed points satisfy x in T(x) exactly, by hull enumeration.
  for (double fix : {0.0, 2.0}) {
    const RandomPoint x = test::euclid_point({fix, fix});
    const SigmaStableSet image = t(x);
    bool member = false;
    for (std::size_t i = 0; i < image.size(); ++i) {
      member |= (space.distance(Point(x), Point(image.member(i))).max_value() == 0.0);
    }
    CHECK(member);
  }
}

TEST_CASE("nadler_solve singleton images reduce to banach") {
  const RMSpace space = line(2);
  const PointMap t0 = scalar_affine({0.5, -0.25}, {1, 1});
  const MultiMap t = [&space, &t0](const RandomPoint& x) {
    return sigma_hull(space, {t0.apply(Point(x)).l0()});
  };
  const ContractionFactor alpha{rs({0.5, 0.25})};
  SolveOptions opt;
  const SolveReport multi = nadler_solve(space, t, test::euclid_point({0, 0}), alpha, opt);
  const SolveReport single = banach_solve(space, t0, Point(test::euclid_point({0, 0})), alpha, opt);
  CHECK(space.distance(multi.solution, single.solution).max_value() <= 2 * opt.tol);
}

TEST_CASE("nadler_solve with per-atom multivalued tables on a finite base") {
  // Base {p,q,r} with the path metric; per atom, a multivalued contraction
  // given by tables; the assembled map takes sigma-stable image hulls.
  const BaseMetricSpace base =
      BaseMetricSpace::finite_points({"p", "q", "r"}, {{0, 1, 2}, {1, 0, 1}, {2, 1, 0}});
  const RMSpace space = l0_space(ProbSpace::uniform(2), base);

  // Atom 0 maps everything into {p}; atom 1 maps i to {q} for p,r and {q,r}
  // for q. Images per atom depend only on the section there.
  const auto images = [](int atom, int section) -> std::vector<int> {
    if (atom == 0) return {0};
    return section == 1 ? std::vector<int>{1, 2} : std::vector<int>{1};
  };
  const MultiMap t = [&space, images](const RandomPoint& x) {
    std::vector<std::vector<int>> pools(2);
    for (int atom = 0; atom < 2; ++atom) pools[atom] = images(atom, std::get<int>(x.section(atom)));
    std::vector<RandomPoint> gens;
    for (int i : pools[0]) {
      for (int j : pools[1]) gens.push_back(RandomPoint({BasePoint(i), BasePoint(j)}));
    }
    return sigma_hull(space, gens);
  };

  const SolveReport r = nadler_solve(space, t, RandomPoint({BasePoint(2), BasePoint(0)}),
                                     ContractionFactor{rs({0.5, 0.5})});
  CHECK(r.residual.max_value() == 0.0);
  // Per-atom membership x(atom) in T(atom, x(atom)).
  const RandomPoint& x = r.solution.l0();
  for (int atom = 0; atom < 2; ++atom) {
    const std::vector<int> image = images(atom, std::get<int>(x.section(atom)));
    bool member = false;
    for (int i : image) member |= (i == std::get<int>(x.section(atom)));
    CHECK(member);
  }
}

TEST_CASE("hans_construct") {
  const std::vector<ContractionCertificate> uniform = {{1, 2}};
  const HansConstruction all_same = hans_construct({uniform, uniform});
  CHECK(all_same.power == RandomInteger({1, 1}));
  CHECK(all_same.alpha.alpha() == rs({0.5, 0.5}));

  const HansConstruction mixed = hans_construct({{{1, 2}}, {{2, 10}}});
  CHECK(mixed.power == RandomInteger({1, 2}));
  CHECK(mixed.alpha.alpha() == rs({0.5, 0.9}));

  // Adding a certificate with a larger power at the same or higher level
  // never changes the construction.
  const HansConstruction padded = hans_construct({{{1, 2}, {5, 2}, {3, 7}}, {{2, 10}, {4, 10}}});
  CHECK(padded.power == mixed.power);
  CHECK(padded.alpha.alpha() == mixed.alpha.alpha());

  // The atom's level is its smallest certified one, and the power is the
  // smallest power certified at that exact level.
  const HansConstruction two_levels = hans_construct({{{3, 2}, {1, 5}}});
  CHECK(two_levels.power == RandomInteger({3}));
  CHECK(two_levels.alpha.alpha() == rs({0.5}));

  CHECK_THROWS_AS(hans_construct({{{1, 2}}, {}}), InvalidArgument);  // uncovered atom
  CHECK_THROWS_AS(hans_construct({{{0, 2}}}), InvalidArgument);
}

TEST_CASE("pointwise_operator_solve") {
  const RMSpace space = line(2);
  const AtomOperator t = [](int atom, const BasePoint& p) {
    const double v = std::get<std::vector<double>>(p)[0];
    return BasePoint(std::vector<double>{atom == 0 ? v / 2 + 1 : v / 3});
  };
  const SolveReport r = pointwise_operator_solve(space, t, ContractionFactor{rs({0.5, 1.0 / 3})},
                                                 test::euclid_point({0, 0}));
  CHECK(section1(r.solution, 0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(std::abs(section1(r.solution, 1)) <= 1e-9);

  // An atom-independent operator is classical Banach iteration on the base.
  const AtomOperator flat = [](int, const BasePoint& p) {
    const double v = std::get<std::vector<double>>(p)[0];
    return BasePoint(std::vector<double>{0.25 * v + 3});
  };
  const SolveReport rf = pointwise_operator_solve(space, flat, ContractionFactor{rs({0.25, 0.25})},
                                                  test::euclid_point({0, 0}));
  CHECK(section1(rf.solution, 0) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(section1(rf.solution, 0) == section1(rf.solution, 1));
}

TEST_CASE("map_commutes_with_gluing flags non-local maps") {
  const RMSpace space = line(2);
  const PointMap good = scalar_affine({0.5, 0.25}, {1, 2});
  const std::vector<Point> xs = {Point(test::euclid_point({1, 2})),
                                 Point(test::euclid_point({5, -1}))};
  CHECK(map_commutes_with_gluing(space, good, Partition::two_block(Event{0}, 2), xs));

  const PointMap swap{[](const Point& p) {
                        const RandomPoint& x = p.l0();
                        return Point(RandomPoint({x.section(1), x.section(0)}));
                      },
                      false};
  CHECK_FALSE(map_commutes_with_gluing(space, swap, Partition::two_block(Event{0}, 2), xs));
}
