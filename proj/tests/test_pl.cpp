#include <random>

#include "cdh/errors.hpp"
#include "cdh/pl_homeo.hpp"
#include "doctest.h"

using namespace cdh;

namespace {

using D = PLHomeo::Domain;

Scalar q(long n, long d = 1) { return ratio(n, d); }

// Grid oracle: sup over x = i/N of the pointwise distance.
Scalar grid_sup(const PLHomeo& a, const PLHomeo& b, long lo, long hi, long n) {
  Scalar best = 0;
  for (long i = lo * n; i <= hi * n; ++i) {
    const Scalar x = ratio(i, n);
    const Scalar d = a.domain() == D::Circle ? circle_distance(a.apply(x), b.apply(x))
                                             : line_distance(a.apply(x), b.apply(x));
    best = std::max(best, d);
  }
  return best;
}

PLHomeo random_circle(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 63);
  std::vector<Scalar> xs, ys;
  for (int i = 0; i < 4; ++i) {
    xs.push_back(q(pick(rng), 64));
    ys.push_back(q(pick(rng), 64));
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  const std::size_t n = std::min(xs.size(), ys.size());
  const int orientation = pick(rng) % 2 ? 1 : -1;
  const std::size_t offset = static_cast<std::size_t>(pick(rng)) % n;
  std::vector<Knot> knots;
  for (std::size_t i = 0; i < n; ++i) {
    // Rotate the value list so the lift is monotone across the wrap.
    const std::size_t j = orientation > 0 ? (i + offset) % n : (offset + n - i) % n;
    Scalar y = ys[j];
    if (orientation > 0 && i + offset >= n) y += 1;
    if (orientation < 0 && j > offset) y -= 1;
    knots.push_back(Knot{xs[i], y});
  }
  return PLHomeo::circle(knots, orientation);
}

}  // namespace

TEST_CASE("line shift on a plateau") {
  const auto h = PLHomeo::line({{0, 0}, {q(1, 4), q(3, 8)}, {q(1, 2), q(5, 8)}, {1, 1}});
  CHECK(h.sup_displacement() == q(1, 8));
  CHECK(h.apply(q(3, 8)) == q(1, 2));
  CHECK(h.apply(q(-5)) == q(-5));
  CHECK(compose(h, h.inverse()).sup_displacement() == 0);
  CHECK(compose(h, h.inverse()).knots().empty());
  CHECK_THROWS_AS(PLHomeo::line({{0, 0}, {q(1, 2), q(1, 4)}, {q(1, 4), 1}}), PreconditionFailure);
}

TEST_CASE("circle bump and rotation") {
  const auto bump = PLHomeo::circle({{0, q(1, 16)}, {q(1, 8), q(1, 8)}, {q(7, 8), q(7, 8)}}, 1);
  CHECK(PLHomeo::circle({{q(7, 8), q(7, 8)}, {0, q(1, 16)}, {q(1, 8), q(1, 8)}}, 1) == bump);
  CHECK(bump.apply(0) == q(1, 16));
  CHECK(bump.apply(q(1, 2)) == q(1, 2));
  CHECK(bump.sup_displacement() == q(1, 16));
  const auto rot = PLHomeo::rotation(q(3, 4));
  CHECK(rot.sup_displacement() == q(1, 4));
  CHECK(rot.apply(q(1, 2)) == q(1, 4));
  const auto flip = PLHomeo::circle({{0, 0}}, -1);
  CHECK(flip.apply(q(1, 4)) == q(3, 4));
  CHECK(flip.sup_displacement() == q(1, 2));
}

TEST_CASE("random circle maps: algebra against the grid oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const auto a = random_circle(rng);
    const auto b = random_circle(rng);
    REQUIRE_FALSE(a.validate().has_value());
    const auto ab = compose(a, b);
    REQUIRE_FALSE(ab.validate().has_value());
    for (int i = 0; i < 64; ++i) {
      const Scalar x = ratio(i, 64);
      CHECK(ab.apply(x) == a.apply(b.apply(x)));
      CHECK(a.inverse().apply(a.apply(x)) == x);
    }
    CHECK(compose(a.inverse(), a).sup_displacement() == 0);
    // Breakpoints and half-integer crossings of the difference have
    // denominators dividing 64^3 here, so the grid attains the supremum.
    const Scalar exact = sup_distance(a, b);
    const Scalar sampled = grid_sup(a, b, 0, 1, 64 * 64 * 8);
    CHECK(sampled <= exact);
    CHECK(exact - sampled <= q(1, 1024));
    CHECK(ab.sup_displacement() <= a.sup_displacement() + b.sup_displacement());
  }
}
