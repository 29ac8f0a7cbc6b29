#include <random>
#include <set>

#include "cdh/errors.hpp"
#include "cdh/homeo.hpp"
#include "doctest.h"

using namespace cdh;

namespace {

Sequence bits(const std::string& s) { return Sequence(word_from_string(s, true)); }

}  // namespace

TEST_CASE("cantor finite bijections") {
  const auto space = FactorSpace::cantor();
  SUBCASE("identity request") {
    const auto h = realize_finite_bijection(space, {{bits("01"), bits("01")}});
    CHECK(h.is_identity());
  }
  SUBCASE("swap of 000... with 1000... is a depth-one swap") {
    const auto h = realize_finite_bijection(space, {{bits(""), bits("1")}, {bits("1"), bits("")}});
    CHECK(as_sequence(h.apply(bits(""))) == bits("1"));
    CHECK(as_sequence(h.apply(bits("1"))) == bits(""));
    CHECK(as_sequence(h.apply(bits("0101"))) == bits("1101"));
    CHECK(h.cylinder().depth() == 1);
    CHECK(h.sup_displacement().value == 1);
  }
  SUBCASE("random bijections are realized exactly") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      std::set<Word> seen;
      std::vector<Sequence> pts;
      while (pts.size() < 12) {
        Word w(1 + rng() % 7);
        for (auto& a : w) a = static_cast<Letter>(rng() % 2);
        if (!seen.insert(Sequence(w).letters()).second) continue;
        pts.emplace_back(w);
      }
      FiniteBijection sigma;
      for (int i = 0; i < 6; ++i) sigma.push_back({pts[i], pts[11 - i]});
      const auto h = realize_finite_bijection(space, sigma);
      CHECK_FALSE(h.cylinder().validate().has_value());
      for (const auto& [a, b] : sigma) CHECK(as_sequence(h.apply(a)) == as_sequence(b));
    }
  }
}

TEST_CASE("order obstructions on the line and the circle") {
  const auto line = FactorSpace::line();
  const auto ok = realize_finite_bijection(line, {{Scalar(0), ratio(1, 3)}, {Scalar(1), Scalar(5)}});
  CHECK(as_scalar(ok.apply(Scalar(0))) == ratio(1, 3));
  CHECK(as_scalar(ok.apply(Scalar(1))) == 5);
  CHECK_THROWS_AS(realize_finite_bijection(line, {{Scalar(0), Scalar(1)}, {Scalar(1), Scalar(0)}}), OrderViolation);
  CHECK_THROWS_AS(realize_finite_bijection(
                      line, {{Scalar(0), Scalar(1)}, {Scalar(1), Scalar(2)}, {Scalar(2), Scalar(0)}}),
                  OrderViolation);

  const auto circle = FactorSpace::circle();
  auto q = [](long n) { return FactorPoint(ratio(n, 8)); };
  // Any three points: rotation or reflection.
  const auto three = realize_finite_bijection(circle, {{q(0), q(3)}, {q(2), q(1)}, {q(5), q(6)}});
  CHECK(as_scalar(three.apply(q(0))) == ratio(3, 8));
  CHECK(as_scalar(three.apply(q(2))) == ratio(1, 8));
  CHECK(as_scalar(three.apply(q(5))) == ratio(6, 8));
  // 0,1,2,3 -> 0,2,1,3 is neither.
  CHECK_THROWS_AS(realize_finite_bijection(circle, {{q(0), q(0)}, {q(1), q(2)}, {q(2), q(1)}, {q(3), q(3)}}),
                  OrderViolation);
  const auto rev = realize_finite_bijection(circle, {{q(0), q(0)}, {q(1), q(7)}, {q(2), q(6)}, {q(3), q(5)}});
  CHECK(rev.pl().orientation() == -1);
  CHECK(as_scalar(rev.apply(q(3))) == ratio(5, 8));
}

TEST_CASE("small ball transporters") {
  const auto cantor = FactorSpace::cantor();
  const auto h = small_ball_transporter(cantor, bits("000"), bits("001"), ratio(1, 2));
  CHECK(as_sequence(h.apply(bits("000"))) == bits("001"));
  CHECK(h.cylinder().depth() == 3);
  CHECK(h.sup_displacement().value == ratio(1, 4));
  CHECK(as_sequence(h.apply(bits("01"))) == bits("01"));
  CHECK(small_ball_transporter(cantor, bits("01"), bits("01"), ratio(1, 8)).is_identity());
  CHECK_THROWS_AS(small_ball_transporter(cantor, bits("0"), bits("1"), Scalar(1)), PreconditionFailure);

  const auto circle = FactorSpace::circle();
  const auto bump = small_ball_transporter(circle, Scalar(0), ratio(1, 16), ratio(1, 8));
  CHECK(as_scalar(bump.apply(Scalar(0))) == ratio(1, 16));
  CHECK(bump.sup_displacement().value == ratio(1, 16));
  for (int i = 0; i < 64; ++i) {
    const Scalar x = ratio(i, 64);
    if (circle_distance(x, 0) >= ratio(1, 8)) CHECK(as_scalar(bump.apply(x)) == x);
  }
  const auto wrap = small_ball_transporter(circle, ratio(31, 32), ratio(1, 32), ratio(1, 8));
  CHECK(as_scalar(wrap.apply(ratio(31, 32))) == ratio(1, 32));

  const auto disc = FactorSpace::disc(2);
  Vec c(2), t(2);
  c << 0.1, 0.2;
  t << 0.15, 0.18;
  const auto f = small_ball_transporter(disc, c, t, Scalar(0.1));
  CHECK((as_vector(f.apply(c)) - t).norm() < 1e-12);
  CHECK((as_vector(f.inverse().apply(t)) - c).norm() < 1e-12);
  CHECK(f.floating().sampled_round_trip() < 1e-9);
  CHECK_FALSE(f.sup_displacement().certified);
}
