#include <random>
#include <set>

#include "cdh/errors.hpp"
#include "cdh/general_position.hpp"
#include "cdh/obstructions.hpp"
#include "doctest.h"

using namespace cdh;

namespace {

// Trailing zeros vanish in a Sequence, so distinct indices need distinct
// points: rows on Baire space, words closed by a 1 on Cantor space.
Sequence distinct_point(const FactorSpace& f, std::size_t i) {
  if (f.kind() == FactorKind::BaireInts) return row_value(i);
  Word w = basic_word(f, i);
  w.push_back(1);
  return Sequence(std::move(w));
}

// Random finite permutation of distinct basic words, realized exactly.
CylinderHomeo random_cylinder(const FactorSpace& f, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, 40);
  std::set<std::size_t> src;
  while (src.size() < 4) src.insert(pick(rng));
  std::vector<std::size_t> a(src.begin(), src.end()), b = a;
  std::shuffle(b.begin(), b.end(), rng);
  FiniteBijection sigma;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sigma.emplace_back(distinct_point(f, a[i]), distinct_point(f, b[i]));
  }
  return realize_finite_bijection(f, sigma).cylinder();
}

Homeo random_piece_map(const FactorSpace& f, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(0, 15);
  const FactorPoint o = f.origin();
  switch (f.kind()) {
    case FactorKind::Circle: return small_ball_transporter(f, o, Scalar(ratio(num(rng), 32)), Scalar(1));
    case FactorKind::Line: return small_ball_transporter(f, o, Scalar(ratio(num(rng) - 7, 4)), Scalar(4));
    default: {
      Vec t = Vec::Zero(f.dimension());
      t(0) = num(rng) / 64.0;
      return small_ball_transporter(f, o, t, ratio(1, 2));
    }
  }
}

SumSpace sample_space(std::size_t depth) {
  return SumSpace({{FactorSpace::circle(), FactorSpace::line()}, {FactorSpace::disc(2), FactorSpace::circle()}}, depth);
}

SumPoint point_with_key(const SumSpace& s, std::vector<int> key) {
  SumPoint p;
  p.pieces = std::move(key);
  for (std::size_t a = 0; a < s.depth(); ++a) p.values.push_back(s.piece(a, p.pieces[a]).origin());
  return p;
}

// Brute oracle: the component of a point is read off its piece labels, one
// coordinate at a time.
std::string brute_key(const SumPoint& p) {
  std::string out;
  for (std::size_t a = 0; a < p.pieces.size(); ++a) out += p.pieces[a] ? '1' : '0';
  return out;
}

std::string as_string(const std::vector<int>& key) {
  std::string out;
  for (int b : key) out += b ? '1' : '0';
  return out;
}

}  // namespace

TEST_CASE("row indexing round-trips") {
  for (std::size_t n = 0; n < 2000; ++n) CHECK(row_of(row_value(n)) == n);
  CHECK(row_value(0).letters().empty());
  CHECK_THROWS_AS(row_of(Sequence(Word{70})), IndexOutOfRange);
}

TEST_CASE("local compactness classifier") {
  const auto row = SymbolicPoint::make_row(3, Sequence(Word{1, 0}));
  const auto lim = SymbolicPoint::make_limit(Sequence(Word{2, 5}), Sequence(Word{}));
  CHECK(classify_local_compactness(row) == LocalCompactness::HasCompactNeighborhood);
  CHECK(classify_local_compactness(lim) == LocalCompactness::No);
  CHECK(to_string(LocalCompactness::No) == "no-compact-neighbourhood");
  CHECK(row.describe().find("q_3") != std::string::npos);
}

TEST_CASE("classifier is invariant under random symbolic homeomorphisms") {
  std::mt19937_64 rng(7);
  std::vector<SymbolicPoint> pts;
  for (std::size_t n = 0; n < 30; ++n) pts.push_back(SymbolicPoint::make_row(n, Sequence(Word{static_cast<Letter>(n % 2)})));
  for (std::size_t n = 0; n < 10; ++n) pts.push_back(SymbolicPoint::make_limit(row_value(n * 3 + 1), Sequence(Word{1})));
  for (int trial = 0; trial < 50; ++trial) {
    SymbolicHomeo h{random_cylinder(FactorSpace::baire(), rng), random_cylinder(FactorSpace::cantor(), rng)};
    for (const auto& p : pts) {
      const auto q = h.apply(p);
      CHECK(classify_local_compactness(q) == classify_local_compactness(p));
      if (q.tag == SymbolicPoint::Tag::Row) CHECK(row_value(q.row) == q.baire);
    }
  }
}

TEST_CASE("compact locus witness") {
  const auto [D, E] = build_compact_locus_witness(5);
  REQUIRE(D.size() == 5);
  REQUIRE(E.size() == 5);
  const auto c = witness_compact_locus(D, E);
  CHECK(c.witness);
  CHECK(c.construction == "compact-locus");
  CHECK(c.facts.size() == 3);
  CHECK(c.facts[1].find("E[4]") != std::string::npos);

  SUBCASE("D with a limit point is not a witness") {
    auto D2 = D;
    D2.push_back(E.back());
    const auto r = witness_compact_locus(D2, E);
    CHECK_FALSE(r.witness);
    CHECK(r.reason.find("D[5]") != std::string::npos);
  }
  SUBCASE("E of rows only is not a witness") {
    const auto r = witness_compact_locus(D, D);
    CHECK_FALSE(r.witness);
    CHECK(r.reason == "every point of E has a compact neighbourhood");
  }
  CHECK_THROWS_AS(build_compact_locus_witness(0), PreconditionFailure);
}

TEST_CASE("component keys") {
  const auto s = sample_space(6);
  CHECK(as_string(component_key(s, point_with_key(s, std::vector<int>(6, 0)))) == "000000");
  const auto p = point_with_key(s, {1, 0, 1, 1, 0, 1});
  CHECK(as_string(component_key(s, p)) == brute_key(p));

  SumPoint bad = p;
  bad.pieces[2] = 2;
  CHECK_THROWS_AS(component_key(s, bad), PreconditionFailure);
  bad = p;
  bad.values.pop_back();
  CHECK_THROWS_AS(component_key(s, bad), PreconditionFailure);
  CHECK_THROWS_AS(SumSpace({{FactorSpace::cantor(), FactorSpace::line()}}, 3), UnsupportedFactor);
}

TEST_CASE("component keys survive perturbation within a piece") {
  const auto s = sample_space(4);
  auto p = point_with_key(s, {0, 1, 1, 0});
  const auto key = component_key(s, p);
  p.values[0] = Scalar(ratio(3, 7));
  p.values[1] = Scalar(ratio(2, 3));
  p.values[2] = Scalar(ratio(-11, 3));
  Vec v(2);
  v << 0.1, -0.2;
  p.values[3] = v;
  CHECK(component_key(s, p) == key);
}

TEST_CASE("components witness and its invariance") {
  const auto s = sample_space(5);
  std::vector<SumPoint> D0 = {point_with_key(s, {0, 0, 0, 0, 0}), point_with_key(s, {0, 1, 0, 0, 0}),
                              point_with_key(s, {1, 1, 0, 1, 0})};
  const auto w = build_component_witness(s, D0);
  CHECK(w.D.size() == 6);
  CHECK(w.E.size() == 7);
  CHECK(as_string(w.z_key) == "10000");
  CHECK(w.certificate.witness);

  // Brute oracle: count E points in z's component and D points everywhere.
  std::map<std::string, int> dc, ec;
  for (const auto& d : w.D) ++dc[brute_key(d)];
  for (const auto& e : w.E) ++ec[brute_key(e)];
  CHECK(ec[brute_key(w.z)] == 1);
  for (const auto& [k, n] : dc) CHECK(n >= 2);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    SumHomeo h;
    for (std::size_t a = 0; a < s.depth(); ++a) {
      h.maps.emplace(a, std::make_pair(random_piece_map(s.piece(a, 0), rng), random_piece_map(s.piece(a, 1), rng)));
    }
    std::vector<SumPoint> hD, hE;
    for (const auto& d : w.D) hD.push_back(h.apply(s, d));
    for (const auto& e : w.E) hE.push_back(h.apply(s, e));
    for (std::size_t i = 0; i < w.D.size(); ++i) CHECK(component_key(s, hD[i]) == component_key(s, w.D[i]));
    CHECK(witness_components(s, hD, hE).witness);
  }

  SUBCASE("a lone point of D defeats the invariant") {
    auto D = w.D;
    D.push_back(w.z);
    CHECK_FALSE(witness_components(s, D, w.E).witness);
  }
  SUBCASE("doubled E has no lone component") {
    const auto r = witness_components(s, w.D, w.D);
    CHECK_FALSE(r.witness);
    CHECK(r.reason == "no component holds exactly one point of E");
  }
}

TEST_CASE("component witness needs a free component") {
  const auto s = sample_space(1);
  std::vector<SumPoint> D = {point_with_key(s, {0}), point_with_key(s, {1})};
  CHECK_THROWS_AS(build_component_witness(s, D), PreconditionFailure);
}
