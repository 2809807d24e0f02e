#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "rmspace/prob.hpp"
#include "support/oracles.hpp"

using namespace rmspace;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

RandomScalar rs(std::initializer_list<double> v) { return RandomScalar(std::vector<double>(v)); }
ExtRandomScalar ext(std::initializer_list<double> v) {
  return ExtRandomScalar(std::vector<double>(v));
}
}  // namespace

TEST_CASE("prob space invariants") {
  CHECK_NOTHROW(ProbSpace({0.5, 0.5}));
  CHECK_THROWS_AS(ProbSpace({0.5, 0.4}), InvalidArgument);  // sums to 0.9
  CHECK_THROWS_AS(ProbSpace({1.5, -0.5}), InvalidArgument);
  CHECK_THROWS_AS(ProbSpace(std::vector<double>{}), InvalidArgument);
  CHECK(ProbSpace::uniform(4).min_prob() == doctest::Approx(0.25));
}

TEST_CASE("indicator") {
  const ProbSpace two = ProbSpace::uniform(2);
  CHECK(indicator(two, Event{0}) == rs({1, 0}));
  CHECK(indicator(two, Event{}) == rs({0, 0}));
  const ProbSpace three = ProbSpace::uniform(3);
  CHECK(indicator(three, Event{0, 2}) == rs({1, 0, 1}));
  CHECK_THROWS_AS(indicator(two, Event{3}), InvalidArgument);
}

TEST_CASE("indicator algebra") {
  const ProbSpace space = ProbSpace::uniform(3);
  const Event a{0, 2};
  CHECK(indicator(space, a) + indicator(space, a.complement(3)) == RandomScalar::ones(3));

  const RandomScalar x = rs({1, 2, 3});
  const RandomScalar y = rs({7, 8, 9});
  const std::vector<RandomScalar> xs = {x, y};
  const RandomScalar glued = glue_scalars(Partition::two_block(a, 3), xs);
  CHECK(glued == indicator(space, a) * x + indicator(space, a.complement(3)) * y);
}

TEST_CASE("glue_scalars") {
  const std::vector<RandomScalar> xs1 = {rs({1, 2}), rs({3, 4})};
  CHECK(glue_scalars(Partition({Event{0}, Event{1}}), xs1) == rs({1, 4}));
  CHECK(glue_scalars(Partition({Event{1}, Event{0}}), xs1) == rs({3, 2}));

  const std::vector<RandomScalar> xs2 = {rs({5, 6}), rs({9, 9})};
  CHECK(glue_scalars(Partition({Event{0, 1}, Event{}}), xs2) == rs({5, 6}));

  // One piece per block, and blocks must not overlap.
  const std::vector<RandomScalar> one = {rs({1, 2})};
  CHECK_THROWS_AS(glue_scalars(Partition({Event{0}, Event{1}}), one), InvalidArgument);
  CHECK_THROWS_AS(Partition({Event{0, 1}, Event{1}}), InvalidArgument);
  // A partition that misses an atom is invalid for this width.
  const std::vector<RandomScalar> xs3 = {rs({1, 2, 3})};
  CHECK_THROWS_AS(glue_scalars(Partition({Event{0, 1}}), xs3), InvalidArgument);
}

TEST_CASE("glue uniqueness: any two candidates agree") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int atoms = 2 + static_cast<int>(rng() % 3);
    std::vector<std::vector<int>> assignment(1 + rng() % 3);
    for (int atom = 0; atom < atoms; ++atom) assignment[rng() % assignment.size()].push_back(atom);
    std::vector<Event> blocks;
    for (auto& b : assignment) blocks.push_back(Event(std::move(b)));
    const Partition pi{blocks};
    std::vector<RandomScalar> xs;
    for (int b = 0; b < pi.block_count(); ++b) xs.push_back(test::random_scalar(rng, atoms, -5, 5));

    const RandomScalar glued = glue_scalars(pi, xs);
    // Second candidate: fold two-block gluings over the blocks.
    RandomScalar composed = xs.back();
    for (int b = pi.block_count() - 2; b >= 0; --b) {
      const std::vector<RandomScalar> pieces = {xs[b], composed};
      composed = glue_scalars(Partition::two_block(pi.blocks()[b], atoms), pieces);
    }
    CHECK(glued == composed);  // exact
    for (int b = 0; b < pi.block_count(); ++b) {
      for (int atom : pi.blocks()[b].members()) CHECK(glued[atom] == xs[b][atom]);
    }
  }
}

TEST_CASE("ess_sup / ess_inf") {
  const std::vector<ExtRandomScalar> pair = {ext({1, 4}), ext({3, 2})};
  CHECK(ess_sup(pair).value == ext({3, 4}));
  CHECK(ess_inf(pair).value == ext({1, 2}));

  const std::vector<ExtRandomScalar> single = {ext({-kInf, 0})};
  CHECK(ess_sup(single).value == ext({-kInf, 0}));
  CHECK(ess_inf(single).value == ext({-kInf, 0}));

  const std::vector<ExtRandomScalar> three = {ext({0, 0}), ext({1, -1}), ext({-1, 1})};
  const EssExtremum sup = ess_sup(three);
  CHECK(sup.value == ext({1, 1}));
  CHECK(sup.witness == std::vector<int>{1, 2});

  CHECK_THROWS_AS(ess_sup(std::span<const ExtRandomScalar>{}), InvalidArgument);
}

TEST_CASE("ess_sup witness agrees with a brute-force scan") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int atoms = 1 + static_cast<int>(rng() % 4);
    std::vector<RandomScalar> xs;
    for (int i = 0; i < 2 + static_cast<int>(rng() % 5); ++i) {
      xs.push_back(test::random_scalar(rng, atoms, -10, 10));
    }
    const EssExtremumFinite sup = ess_sup(std::span<const RandomScalar>(xs));
    for (int atom = 0; atom < atoms; ++atom) {
      double best = xs[0][atom];
      int best_i = 0;
      for (int i = 1; i < static_cast<int>(xs.size()); ++i) {
        if (xs[i][atom] > best) {
          best = xs[i][atom];
          best_i = i;
        }
      }
      CHECK(sup.value[atom] == best);
      CHECK(sup.witness[atom] == best_i);
      CHECK(xs[sup.witness[atom]][atom] == sup.value[atom]);  // witness attains
    }
  }
}

TEST_CASE("ess_sup monotone in the family") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const int atoms = 2;
    std::vector<RandomScalar> h;
    for (int i = 0; i < 6; ++i) h.push_back(test::random_scalar(rng, atoms, -3, 3));
    const std::vector<RandomScalar> g(h.begin(), h.begin() + 3);
    const RandomScalar sup_g = ess_sup(std::span<const RandomScalar>(g)).value;
    const RandomScalar sup_h = ess_sup(std::span<const RandomScalar>(h)).value;
    CHECK(leq(sup_g, sup_h));
  }
}

TEST_CASE("leq and lt_on") {
  CHECK(leq(rs({1, 2}), rs({1, 3})));
  CHECK_FALSE(leq(rs({1, 4}), rs({2, 3})));
  CHECK(lt_on(rs({1, 2}), rs({1, 3}), Event{1}));
  CHECK_FALSE(lt_on(rs({1, 2}), rs({1, 3}), Event{0}));
  CHECK(lt_on(rs({1, 2}), rs({5, 5}), Event{}));  // vacuous
}

TEST_CASE("extended arithmetic conventions") {
  CHECK_THROWS_AS(ext({kInf}) + ext({-kInf}), ExtendedArithmeticError);
  CHECK_THROWS_AS(ext({kInf}) - ext({kInf}), ExtendedArithmeticError);
  CHECK(ext({kInf, 2}) * ext({0, 3}) == ext({0, 6}));
  CHECK(ext({-kInf}) * ext({0}) == ext({0}));
  CHECK(ext({kInf}) + ext({5}) == ext({kInf}));
  CHECK_THROWS_AS(ExtRandomScalar({std::nan("")}), InvalidArgument);
  CHECK_THROWS_AS(ext({kInf}).to_random(), ExtendedArithmeticError);
}

TEST_CASE("is_sigma_stable_scalars") {
  const std::vector<RandomScalar> closed = {rs({1, 4}), rs({3, 2}), rs({1, 2}), rs({3, 4})};
  CHECK(is_sigma_stable_scalars(closed));
  const std::vector<RandomScalar> open = {rs({1, 4}), rs({3, 2})};
  CHECK_FALSE(is_sigma_stable_scalars(open));
  const std::vector<RandomScalar> single = {rs({7, -1, 3})};
  CHECK(is_sigma_stable_scalars(single));
}

TEST_CASE("is_sigma_stable_scalars matches the enumeration oracle") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> value(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const int atoms = 1 + static_cast<int>(rng() % 3);
    std::vector<RandomScalar> g;
    const int count = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < count; ++i) {
      std::vector<double> v(atoms);
      for (double& x : v) x = value(rng);
      g.emplace_back(std::move(v));
    }
    CHECK(is_sigma_stable_scalars(g) == test::sigma_stable_scalars_bruteforce(g));
  }
}

TEST_CASE("near_supremum_witness") {
  const std::vector<RandomScalar> hull = {rs({1, 4}), rs({3, 2}), rs({1, 2}), rs({3, 4})};
  CHECK(near_supremum_witness(hull, rs({0.5, 0.5})) == rs({3, 4}));

  const std::vector<RandomScalar> single = {rs({2.5, 2.5})};
  CHECK(near_supremum_witness(single, rs({1, 1})) == rs({2.5, 2.5}));

  const std::vector<RandomScalar> grid = {rs({0, 1}), rs({1, 0}), rs({0, 0}), rs({1, 1})};
  CHECK(near_supremum_witness(grid, rs({0.1, 0.1})) == rs({1, 1}));

  CHECK(near_infimum_witness(hull, rs({0.5, 0.5})) == rs({1, 2}));

  // A family that is not closed under gluing is rejected either way.
  const std::vector<RandomScalar> open = {rs({0, 1}), rs({1, 0})};
  CHECK_THROWS_AS(near_supremum_witness(open, rs({1, 1})), InvalidArgument);
  CHECK_THROWS_AS(near_supremum_witness(open, rs({1, 1}), true), InvalidArgument);
  CHECK_THROWS_AS(near_supremum_witness(hull, rs({0.0, 0.5})), InvalidArgument);  // eps not > 0
  CHECK_THROWS_AS(near_supremum_witness(std::span<const RandomScalar>{}, rs({1, 1})),
                  InvalidArgument);
}

TEST_CASE("near-extremum certificate on random sigma-stable families") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const int atoms = 1 + static_cast<int>(rng() % 3);
    // Product families are exactly the sigma-stable ones.
    std::vector<std::vector<double>> pools(atoms);
    for (auto& pool : pools) {
      const int k = 1 + static_cast<int>(rng() % 3);
      std::uniform_real_distribution<double> value(-5, 5);
      for (int i = 0; i < k; ++i) pool.push_back(value(rng));
    }
    std::vector<RandomScalar> g;
    std::vector<std::size_t> digit(atoms, 0);
    while (true) {
      std::vector<double> v(atoms);
      for (int a = 0; a < atoms; ++a) v[a] = pools[a][digit[a]];
      g.emplace_back(std::move(v));
      int a = atoms - 1;
      while (a >= 0 && ++digit[a] == pools[a].size()) digit[a--] = 0;
      if (a < 0) break;
    }

    const RandomScalar eps = test::random_scalar(rng, atoms, 0.01, 1.0);
    const RandomScalar sup = ess_sup(std::span<const RandomScalar>(g)).value;
    const RandomScalar got = near_supremum_witness(g, eps, true);

    bool member = false;
    for (const RandomScalar& x : g) member = member || (x == got);
    CHECK(member);
    CHECK(lt_on(sup - eps, got, Event::full(atoms)));

    const RandomScalar inf = ess_inf(std::span<const RandomScalar>(g)).value;
    const RandomScalar low = near_infimum_witness(g, eps, true);
    CHECK(lt_on(low, inf + eps, Event::full(atoms)));
  }
}

TEST_CASE("contraction factor") {
  CHECK_NOTHROW(ContractionFactor(rs({0.0, 0.99})));
  CHECK_THROWS_AS(ContractionFactor(rs({1.0, 0.5})), InvalidArgument);
  CHECK_THROWS_AS(ContractionFactor(rs({-0.1, 0.5})), InvalidArgument);
  CHECK(ContractionFactor(rs({0.0, 0.25})).lifted() == rs({0.5, 0.25}));
}

TEST_CASE("random integer") {
  CHECK_THROWS_AS(RandomInteger({1, 0}), InvalidArgument);
  CHECK(RandomInteger({1, 3, 2}).max_value() == 3);
}
