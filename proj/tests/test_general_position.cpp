#include <random>

#include "cdh/errors.hpp"
#include "cdh/general_position.hpp"
#include "doctest.h"

using namespace cdh;

namespace {

Sequence bits(const std::string& s) { return Sequence(word_from_string(s, true)); }

std::shared_ptr<const ProductSpace> share(ProductSpace s) {
  return std::make_shared<const ProductSpace>(std::move(s));
}

// Pairwise comparison written directly against the coordinate values.
std::size_t brute_collisions(const std::vector<ProductPoint>& pts, std::size_t depth) {
  std::size_t out = 0;
  std::vector<std::vector<FactorPoint>> rows;
  for (const auto& p : pts) rows.push_back(p.eval_prefix(depth));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      for (std::size_t a = 0; a < depth; ++a) {
        const auto& x = rows[i][a];
        const auto& y = rows[j][a];
        if (std::holds_alternative<Sequence>(x) ? as_sequence(x) == as_sequence(y) : as_scalar(x) == as_scalar(y)) ++out;
      }
    }
  }
  return out;
}

// Independent decoding of the box enumeration for Cantor factors: the run
// lengths of zeros in n, and shortlex words.
std::vector<Word> oracle_box(std::size_t n) {
  std::vector<Word> out;
  std::size_t run = 0;
  for (int bit = 0; bit < 64; ++bit) {
    if ((n >> bit) & 1) {
      // shortlex word number `run`: lengths 0, 1, 1, 2, 2, 2, 2, ...
      std::size_t len = 0, first = 0;
      while (first + (std::size_t{1} << len) <= run) first += std::size_t{1} << len++;
      const std::size_t rank = run - first;
      Word w(len);
      for (std::size_t k = 0; k < len; ++k) w[k] = static_cast<Letter>((rank >> (len - 1 - k)) & 1);
      out.push_back(w);
      run = 0;
    } else {
      ++run;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("general position detection") {
  const auto space = share(ProductSpace::power(FactorSpace::cantor(), 3));
  const ProductPoint a(space, {}, {});
  const ProductPoint b(space, {}, {{0, bits("1")}, {1, bits("1")}});
  const auto report = check_general_position({a, b}, 3);
  CHECK_FALSE(report.general_position);
  REQUIRE(report.pairs.size() == 1);
  CHECK(report.pairs[0].agree == std::vector<std::size_t>{2});
  CHECK(report.collisions() == 1);
  CHECK(check_general_position({a}, 3).general_position);
}

TEST_CASE("greedy dense construction") {
  SUBCASE("64 points in the infinite Cantor product") {
    const auto space = share(ProductSpace::infinite({FactorSpace::cantor()}, 64));
    const auto pts = greedy_dense_gp(space, 64);
    REQUIRE(pts.size() == 64);
    CHECK(brute_collisions(pts, 64) == 0);
    CHECK(check_general_position(pts, 64).general_position);
    // Tails are distinct too: compare far beyond the working depth.
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) CHECK_FALSE(pts[i].eval_coordinate(500) == pts[j].eval_coordinate(500));
    }
    for (std::size_t n = 0; n < pts.size(); ++n) {
      CHECK(box_contains(*space, n, pts[n]));
      const auto box = oracle_box(n);
      for (std::size_t a = 0; a < box.size(); ++a) CHECK(as_sequence(pts[n].eval_coordinate(a)).has_prefix(box[a]));
    }
  }
  SUBCASE("one point") {
    const auto space = share(ProductSpace::power(FactorSpace::circle(), 2));
    CHECK(greedy_dense_gp(space, 1).size() == 1);
  }
  SUBCASE("mixed exact factors") {
    const auto space = share(ProductSpace::infinite({FactorSpace::circle(), FactorSpace::baire(), FactorSpace::line()}, 12));
    const auto pts = greedy_dense_gp(space, 40);
    CHECK(brute_collisions(pts, 12) == 0);
    for (std::size_t n = 0; n < pts.size(); ++n) CHECK(box_contains(*space, n, pts[n]));
  }
  SUBCASE("forbidden sets") {
    const auto space = share(ProductSpace::infinite({FactorSpace::cantor()}, 8));
    const ForbiddenSet starts_with_one{"coordinate 0 starts with 1", [](const ProductPoint& p) {
                                         return as_sequence(p.eval_coordinate(0))[0] == 1;
                                       }};
    // Boxes 0..3 leave coordinate 0 free or inside [0]; box 4 asks for [1].
    const auto pts = greedy_dense_gp(space, 4, {starts_with_one});
    for (const auto& p : pts) CHECK(as_sequence(p.eval_coordinate(0))[0] == 0);
    CHECK_THROWS_AS(greedy_dense_gp(space, 5, {starts_with_one}), PreconditionFailure);
    // A nowhere dense set is always avoidable.
    const ForbiddenSet first_candidate{"coordinate 1 is 1000...", [](const ProductPoint& p) {
                                         return as_sequence(p.eval_coordinate(1)) == bits("1");
                                       }};
    for (const auto& p : greedy_dense_gp(space, 40, {first_candidate})) CHECK_FALSE(first_candidate.contains(p));
  }
  SUBCASE("float factors are rejected") {
    CHECK_THROWS_AS(greedy_dense_gp(share(ProductSpace::power(FactorSpace::disc(2), 2)), 3), UnsupportedFactor);
  }
}

TEST_CASE("weak general position transform") {
  const auto space = share(ProductSpace::infinite({FactorSpace::cantor()}, 10));
  std::map<std::size_t, ConvenientPair> pairs;
  for (std::size_t a = 1; a < 10; ++a) pairs.emplace(a, group_pair(FactorSpace::cantor()));

  SUBCASE("singleton") {
    const ProductPoint d(space, {}, {{0, bits("1")}, {3, bits("01")}});
    const auto r = wgpp_transform({d}, pairs, 10);
    CHECK(r.omega.size() == 9);
    for (std::size_t a : r.omega) {
      CHECK(as_sequence(r.image[0].eval_coordinate(a)) == as_sequence(pairs.at(a).s(d.eval_coordinate(a), d.eval_coordinate(0))));
    }
    CHECK_FALSE(r.omega.count(0));
  }
  SUBCASE("agreeing coordinates are separated by xor") {
    const ProductPoint d(space, {}, {{0, bits("1")}});
    const ProductPoint e(space, {}, {{0, bits("01")}, {4, bits("1")}});
    const auto r = wgpp_transform({d, e}, pairs, 10);
    for (std::size_t a = 1; a < 10; ++a) {
      if (r.omega.count(a)) CHECK_FALSE(r.image[0].eval_coordinate(a) == r.image[1].eval_coordinate(a));
    }
    // 4 is the only disagreement, so it is reserved and stays as it was.
    CHECK_FALSE(r.omega.count(4));
    CHECK(as_sequence(r.image[1].eval_coordinate(4)) == bits("1"));
  }
  SUBCASE("random sets: invariants and exact round trip") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<ProductPoint> pts;
      for (int i = 0; i < 6; ++i) {
        std::map<std::size_t, FactorPoint> over;
        over.emplace(0, Sequence(Word{Letter(i & 1), Letter((i >> 1) & 1), Letter((i >> 2) & 1), 1}));
        for (std::size_t a = 1; a < 10; ++a) {
          if (rng() % 3 == 0) over.emplace(a, Sequence(Word{Letter(rng() % 2), 1}));
        }
        pts.emplace_back(space, std::vector<FactorPoint>{}, over);
      }
      const auto r = wgpp_transform(pts, pairs, 10);
      for (const auto& c : r.before.pairs) {
        for (std::size_t a = 1; a < 10; ++a) {
          const bool differ = !(r.image[c.i].eval_coordinate(a) == r.image[c.j].eval_coordinate(a));
          const bool was = std::find(c.disagree.begin(), c.disagree.end(), a) != c.disagree.end();
          if (r.omega.count(a) && !was) CHECK(differ);
          if (!r.omega.count(a) && was) CHECK(differ);
        }
      }
      const auto inv = r.map->inverse();
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto back = r.image[i].then(inv).eval_prefix(10);
        const auto orig = pts[i].eval_prefix(10);
        for (std::size_t a = 0; a < 10; ++a) CHECK(as_sequence(back[a]) == as_sequence(orig[a]));
      }
    }
  }
  SUBCASE("injectivity of the first projection is required") {
    const ProductPoint d(space, {}, {{1, bits("1")}});
    const ProductPoint e(space, {}, {{2, bits("1")}});
    CHECK_THROWS_AS(wgpp_transform({d, e}, pairs, 10), PreconditionFailure);
  }
}

TEST_CASE("block regrouping") {
  const auto space = share(ProductSpace::infinite({FactorSpace::cantor()}, 12));
  SUBCASE("points disagreeing everywhere give singleton blocks") {
    const auto pts = greedy_dense_gp(space, 5);
    const auto plan = block_regroup(pts, 12);
    CHECK(plan.blocks.size() == 12);
    CHECK(audit_plan(plan, pts, 12).empty());
    for (std::size_t b = 0; b < plan.blocks.size(); ++b) {
      for (const auto& [pair, a] : plan.witnesses[b]) CHECK(a == plan.blocks[b].front());
    }
  }
  SUBCASE("disagreement on even indices only") {
    std::map<std::size_t, FactorPoint> over;
    for (std::size_t a = 0; a < 12; a += 2) over.emplace(a, bits("1"));
    const std::vector<ProductPoint> pts = {ProductPoint(space), ProductPoint(space, {}, over)};
    const auto plan = block_regroup(pts, 12);
    CHECK(audit_plan(plan, pts, 12).empty());
    for (const auto& block : plan.blocks) {
      CHECK(std::any_of(block.begin(), block.end(), [](std::size_t a) { return a % 2 == 0; }));
    }
    CHECK(plan.blocks.size() == 6);
  }
  SUBCASE("odd indices as Omega*") {
    const auto pts = greedy_dense_gp(space, 4);
    std::set<std::size_t> odd;
    for (std::size_t a = 1; a < 12; a += 2) odd.insert(a);
    const auto plan = block_regroup(pts, 12, odd, 2);
    CHECK(audit_plan(plan, pts, 12).empty());
    for (const auto& block : plan.blocks) {
      const auto hits = std::count_if(block.begin(), block.end(), [](std::size_t a) { return a % 2 == 1; });
      CHECK((hits == 0 || hits >= 2));
    }
  }
  SUBCASE("inseparable pair") {
    const std::vector<ProductPoint> pts = {ProductPoint(space), ProductPoint(space, {}, {{20, bits("1")}})};
    CHECK_THROWS_AS(block_regroup(pts, 12), PreconditionFailure);
  }
}

namespace {

ProductPoint circle_point(const std::shared_ptr<const ProductSpace>& s, Scalar a, Scalar b, Scalar c) {
  return ProductPoint(s, {}, {{0, a}, {1, b}, {2, c}});
}

void check_repair(const std::vector<ProductPoint>& pts, const RepairResult& r) {
  const std::size_t depth = pts.front().space()->working_depth();
  CHECK(r.final_report.general_position);
  CHECK(brute_collisions(r.image, depth) == 0);
  for (std::size_t k = 1; k < r.collisions_per_round.size(); ++k) {
    CHECK(r.collisions_per_round[k] < r.collisions_per_round[k - 1]);
  }
  Scalar total = 0;
  for (const auto& e : r.ledger) {
    const Scalar allow = e.index == 0 ? Scalar(1) : pow2(-static_cast<long>(e.index) + 1);
    CHECK(e.displacement <= allow);
    CHECK(e.inverse_step <= allow);
    total += e.displacement;
  }
  CHECK(total <= 2);
  // The stored inverses undo every move exactly.
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ProductPoint back = r.image[i];
    for (auto it = r.moves.rbegin(); it != r.moves.rend(); ++it) back = back.then((*it)->inverse());
    const auto got = back.eval_prefix(depth);
    const auto orig = pts[i].eval_prefix(depth);
    for (std::size_t a = 0; a < depth; ++a) CHECK(pts[i].space()->factor(a).same_point(got[a], orig[a]));
  }
}

}  // namespace

TEST_CASE("collision repair on circle products") {
  const auto space = share(ProductSpace::power(FactorSpace::circle(), 3));
  SUBCASE("nothing to repair") {
    const auto r = collision_repair_gpp({circle_point(space, 0, ratio(1, 2), ratio(1, 3)), circle_point(space, ratio(1, 4), 0, ratio(1, 5))});
    CHECK(r.moves.empty());
  }
  SUBCASE("two points equal in coordinate 0") {
    const std::vector<ProductPoint> pts = {circle_point(space, ratio(1, 4), 0, 0),
                                           circle_point(space, ratio(1, 4), ratio(1, 2), ratio(1, 2))};
    const auto r = collision_repair_gpp(pts);
    REQUIRE(r.moves.size() == 1);
    CHECK(r.moves[0]->alpha() == 0);
    CHECK(r.moves[0]->beta() == 1);
    check_repair(pts, r);
    // Displacement is attained at the moved point.
    const auto moved = as_scalar(r.image[0].eval_coordinate(0));
    CHECK(circle_distance(moved, ratio(1, 4)) == r.moves[0]->displacement());
    CHECK(as_scalar(r.image[1].eval_coordinate(0)) == ratio(1, 4));
  }
  SUBCASE("twenty random points") {
    std::mt19937_64 rng(2024);
    std::vector<ProductPoint> pts;
    std::set<std::array<long, 3>> seen;
    while (pts.size() < 20) {
      const std::array<long, 3> c = {static_cast<long>(rng() % 4), static_cast<long>(rng() % 4), static_cast<long>(rng() % 4)};
      if (!seen.insert(c).second) continue;
      pts.push_back(circle_point(space, ratio(c[0], 4), ratio(c[1], 4), ratio(c[2], 4)));
    }
    const auto r = collision_repair_gpp(pts);
    CHECK(r.moves.size() <= 3 * 190);
    CHECK(r.moves.size() > 0);
    check_repair(pts, r);
  }
  SUBCASE("repeated points are rejected") {
    const auto p = circle_point(space, 0, 0, 0);
    CHECK_THROWS_AS(collision_repair_gpp({p, p}), PreconditionFailure);
  }
}

TEST_CASE("fibered moves: displacement and Lipschitz claims against sampling") {
  const auto space = share(ProductSpace::power(FactorSpace::circle(), 3));
  const FiberedMove move(2, 0, FiberedMove::Circle{ratio(1, 3), ratio(1, 32), ratio(1, 8), ratio(1, 5), ratio(1, 16)});
  const auto inv = std::static_pointer_cast<const FiberedMove>(move.inverse());
  std::mt19937_64 rng(5);
  auto rnd = [&] { return ratio(static_cast<long>(rng() % 4096), 4096); };
  auto dstar = [](const std::vector<FactorPoint>& x, const std::vector<FactorPoint>& y) {
    Scalar d = 0;
    for (std::size_t a = 0; a < 3; ++a) d += pow2(-static_cast<long>(a)) * circle_distance(as_scalar(x[a]), as_scalar(y[a]));
    return d;
  };
  auto image = [](const FiberedMove& m, const std::vector<FactorPoint>& x) {
    std::vector<FactorPoint> out;
    for (std::size_t a = 0; a < 3; ++a) out.push_back(m.apply(a, [&](std::size_t b) { return x[b]; }));
    return out;
  };
  Scalar worst = 0;
  for (int t = 0; t < 3000; ++t) {
    std::vector<FactorPoint> x = {rnd(), rnd(), rnd()};
    if (t % 3 == 0) x[0] = ratio(1, 5);
    std::vector<FactorPoint> y = x;
    y[rng() % 3] = rnd();
    const auto hx = image(move, x);
    worst = std::max(worst, dstar(hx, x));
    const auto hy = image(move, y);
    CHECK(dstar(hx, hy) <= move.lipschitz() * dstar(x, y));
    CHECK(dstar(image(*inv, hx), x) == 0);
    CHECK(dstar(image(*inv, x), image(*inv, y)) <= inv->lipschitz() * dstar(x, y));
  }
  CHECK(worst <= move.displacement());
  // The peak: gate exactly met and x(2) at the centre.
  const std::vector<FactorPoint> peak = {ratio(1, 5), 0, ratio(1, 3)};
  CHECK(dstar(image(move, peak), peak) == move.displacement());
}

TEST_CASE("collision repair on Cantor products") {
  const auto space = share(ProductSpace::power(FactorSpace::cantor(), 3));
  std::mt19937_64 rng(31);
  std::vector<ProductPoint> pts;
  std::set<std::array<Word, 3>> seen;
  while (pts.size() < 12) {
    std::array<Word, 3> w;
    for (auto& x : w) x = Word{Letter(rng() % 2), Letter(rng() % 2)};
    if (!seen.insert(w).second) continue;
    pts.emplace_back(space, std::vector<FactorPoint>{}, std::map<std::size_t, FactorPoint>{{0, Sequence(w[0])}, {1, Sequence(w[1])}, {2, Sequence(w[2])}});
  }
  const auto r = collision_repair_gpp(pts);
  check_repair(pts, r);
}

TEST_CASE("boundary chase") {
  const auto space = share(ProductSpace::power(FactorSpace::disc(2), 2));
  auto v = [](double a, double b) {
    Vec x(2);
    x << a, b;
    return x;
  };
  SUBCASE("interior points with injective first projection") {
    const std::vector<ProductPoint> pts = {ProductPoint(space, {}, {{0, v(0.1, 0)}, {1, v(0, 0)}}),
                                           ProductPoint(space, {}, {{0, v(0.2, 0)}, {1, v(0, 0)}})};
    const auto r = boundary_chase(pts);
    CHECK(r.maps.empty());
    CHECK(r.interior);
    CHECK(r.first_projection_injective);
  }
  SUBCASE("boundary point") {
    const std::vector<ProductPoint> pts = {ProductPoint(space, {}, {{0, v(1, 0)}, {1, v(0, 0.5)}})};
    const auto r = boundary_chase(pts, 1.0 / 8);
    CHECK(r.interior);
    CHECK(as_vector(r.image[0].eval_coordinate(0)).norm() <= 1 - 1.0 / 8 + 1e-15);
  }
  SUBCASE("shared first coordinate") {
    const std::vector<ProductPoint> pts = {ProductPoint(space, {}, {{0, v(0.3, 0.1)}, {1, v(0, 0)}}),
                                           ProductPoint(space, {}, {{0, v(0.3, 0.1)}, {1, v(0.5, 0)}}),
                                           ProductPoint(space, {}, {{0, v(0.3, 0.1)}, {1, v(0, 1)}})};
    const auto r = boundary_chase(pts);
    CHECK(r.first_projection_injective);
    CHECK(r.interior);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        CHECK((as_vector(r.image[i].eval_coordinate(0)) - as_vector(r.image[j].eval_coordinate(0))).norm() > 1e-9);
      }
      // The second coordinate is only scaled by the collar.
      ProductPoint back = r.image[i];
      for (auto it = r.maps.rbegin(); it != r.maps.rend(); ++it) back = back.then((*it)->inverse());
      CHECK((as_vector(back.eval_coordinate(0)) - as_vector(pts[i].eval_coordinate(0))).norm() < 1e-12);
    }
  }
}
