#include <random>

#include "cdh/errors.hpp"
#include "cdh/product.hpp"
#include "doctest.h"

using namespace cdh;

namespace {

Sequence bits(const std::string& s) { return Sequence(word_from_string(s, true)); }

std::shared_ptr<const ProductSpace> share(ProductSpace s) {
  return std::make_shared<const ProductSpace>(std::move(s));
}

// Bitwise xor written out directly, independent of the factor group code.
Word xor_words(Word a, Word b) {
  const std::size_t n = std::max(a.size(), b.size());
  a.resize(n, 0);
  b.resize(n, 0);
  Word out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] ^ b[i];
  while (!out.empty() && out.back() == 0) out.pop_back();
  return out;
}

Word random_word(std::mt19937_64& rng, std::size_t max_len) {
  Word w(rng() % (max_len + 1));
  for (auto& a : w) a = static_cast<Letter>(rng() % 2);
  return w;
}

}  // namespace

TEST_CASE("coordinate evaluation") {
  const auto space = share(ProductSpace::infinite({FactorSpace::cantor()}, 8));
  SUBCASE("base and overrides") {
    const ProductPoint p(space, {}, {{3, bits("101")}});
    CHECK(as_sequence(p.eval_coordinate(5)) == bits(""));
    CHECK(as_sequence(p.eval_coordinate(3)) == bits("101"));
  }
  SUBCASE("one xor map") {
    const Sequence c0 = bits("1101");
    const auto map = std::make_shared<TranslationMap>(*space, std::map<std::size_t, FactorPoint>{{0, c0}, {2, bits("01")}});
    const ProductPoint p = ProductPoint(space).then(map);
    CHECK(as_sequence(p.eval_coordinate(0)) == c0);
    CHECK(as_sequence(p.eval_coordinate(1)) == bits(""));
    CHECK(as_sequence(p.eval_coordinate(2)) == bits("01"));
  }
  SUBCASE("random xor pipelines against a bitwise oracle") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<Word> expect(6);
      std::map<std::size_t, FactorPoint> over;
      for (std::size_t a = 0; a < 6; ++a) {
        expect[a] = random_word(rng, 6);
        over.emplace(a, Sequence(expect[a]));
      }
      ProductPoint p(space, {}, over);
      for (int k = 0; k < 3; ++k) {
        std::map<std::size_t, FactorPoint> shifts;
        for (std::size_t a = 0; a < 6; ++a) {
          if (rng() % 2) continue;
          const Word c = random_word(rng, 6);
          shifts.emplace(a, Sequence(c));
          expect[a] = xor_words(expect[a], c);
        }
        p = p.then(std::make_shared<TranslationMap>(*space, shifts));
      }
      const auto got = p.eval_prefix(6);
      for (std::size_t a = 0; a < 6; ++a) {
        CHECK(as_sequence(got[a]) == Sequence(expect[a]));
        CHECK(as_sequence(p.eval_coordinate(a)) == as_sequence(got[a]));
      }
    }
  }
  SUBCASE("finite products reject indices out of range") {
    const auto fin = share(ProductSpace::power(FactorSpace::cantor(), 2));
    CHECK_THROWS_AS(ProductPoint(fin).eval_coordinate(2), IndexOutOfRange);
  }
}

TEST_CASE("product distance intervals") {
  SUBCASE("equal points on the infinite Cantor product") {
    const auto space = share(ProductSpace::infinite({FactorSpace::cantor()}, 10));
    const ProductPoint x(space, {}, {{1, bits("011")}});
    for (std::size_t m = 1; m < 8; ++m) {
      const auto d = distance(x, x, m);
      CHECK(d.lower == 0);
      CHECK(d.upper == pow2(-static_cast<long>(m) + 1));
    }
  }
  SUBCASE("differences beyond the depth are invisible") {
    const auto space = share(ProductSpace::infinite({FactorSpace::cantor()}, 10));
    const ProductPoint x(space, {}, {{6, bits("1")}, {7, bits("01")}});
    const ProductPoint y(space);
    const auto d = distance(x, y, 5);
    CHECK(d.lower == 0);
    CHECK(d.upper == ratio(1, 16));
  }
  SUBCASE("hand-summed Cantor squared") {
    // Coordinate 0 first differs at bit 1, coordinate 1 at bit 2:
    // 2^0 * 2^-1 + 2^-1 * 2^-2 = 5/8.
    const auto space = share(ProductSpace::power(FactorSpace::cantor(), 2));
    const ProductPoint x(space, {}, {{0, bits("01")}, {1, bits("110")}});
    const ProductPoint y(space, {}, {{0, bits("00")}, {1, bits("111")}});
    const auto full = distance(x, y, 2);
    CHECK(full.lower == ratio(5, 8));
    CHECK(full.upper == ratio(5, 8));
    const auto half = distance(x, y, 1);
    CHECK(half.lower == ratio(1, 2));
    CHECK(half.upper == 1);
  }
  SUBCASE("mismatched spaces") {
    const auto a = share(ProductSpace::power(FactorSpace::cantor(), 2));
    const auto b = share(ProductSpace::power(FactorSpace::circle(), 2));
    CHECK_THROWS_AS(distance(ProductPoint(a), ProductPoint(b), 2), KindMismatch);
  }
  SUBCASE("intervals nest as depth grows") {
    const auto space = share(ProductSpace::infinite({FactorSpace::cantor(), FactorSpace::circle()}, 12));
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
      std::map<std::size_t, FactorPoint> ox, oy;
      for (std::size_t a = 0; a < 12; ++a) {
        if (a % 2 == 0) {
          ox.emplace(a, Sequence(random_word(rng, 5)));
          oy.emplace(a, Sequence(random_word(rng, 5)));
        } else {
          ox.emplace(a, ratio(static_cast<long>(rng() % 16), 16));
          oy.emplace(a, ratio(static_cast<long>(rng() % 16), 16));
        }
      }
      const ProductPoint x(space, {}, ox), y(space, {}, oy);
      auto prev = distance(x, y, 0);
      for (std::size_t m = 1; m <= 12; ++m) {
        const auto cur = distance(x, y, m);
        CHECK(prev.lower <= cur.lower);
        CHECK(cur.upper <= prev.upper);
        CHECK(cur.upper - cur.lower <= pow2(-static_cast<long>(m) + 1));
        prev = cur;
      }
      // Symmetry.
      const auto back = distance(y, x, 12);
      CHECK(back.lower == prev.lower);
    }
  }
}

TEST_CASE("pipelines are associative") {
  const auto space = share(ProductSpace::finite({FactorSpace::cantor(), FactorSpace::circle()}));
  const CylinderHomeo g0 = CylinderHomeo::prefix_permutation(2, {{{0, 0}, {0, 1}}, {{0, 1}, {1, 0}}, {{1, 0}, {0, 0}}});
  const CylinderHomeo h0 = CylinderHomeo::prefix_permutation(2, {{{0}, {1}}, {{1}, {0}}});
  const PLHomeo g1 = PLHomeo::rotation(ratio(1, 3));
  const PLHomeo h1 = PLHomeo::circle({{0, 0}, {ratio(1, 2), ratio(1, 4)}}, 1);
  const auto g = std::make_shared<CoordinatewiseMap>(std::map<std::size_t, Homeo>{{0, g0}, {1, g1}});
  const auto h = std::make_shared<CoordinatewiseMap>(std::map<std::size_t, Homeo>{{0, h0}, {1, h1}});
  const auto hg = std::make_shared<CoordinatewiseMap>(
      std::map<std::size_t, Homeo>{{0, compose(Homeo(h0), Homeo(g0))}, {1, compose(Homeo(h1), Homeo(g1))}});
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const ProductPoint x(space, {}, {{0, Sequence(random_word(rng, 6))}, {1, ratio(static_cast<long>(rng() % 97), 97)}});
    const auto a = x.then(g).then(h).eval_prefix(2);
    const auto b = x.then(hg).eval_prefix(2);
    CHECK(as_sequence(a[0]) == as_sequence(b[0]));
    CHECK(as_scalar(a[1]) == as_scalar(b[1]));
    // The inverse map undoes the pipeline.
    const auto back = x.then(hg).then(hg->inverse()).eval_prefix(2);
    CHECK(as_sequence(back[0]) == as_sequence(x.eval_coordinate(0)));
    CHECK(as_scalar(back[1]) == as_scalar(x.eval_coordinate(1)));
  }
}

TEST_CASE("tail weights are exact") {
  const auto mixed = ProductSpace::infinite({FactorSpace::cantor(), FactorSpace::circle()}, 6);
  // Pattern diameters 1, 1/2 repeat: sum_{a>=0} = (1 + 1/4) / (1 - 1/4) = 5/3.
  CHECK(mixed.tail_weight(0) == ratio(5, 3));
  CHECK(mixed.tail_weight(1) == ratio(2, 3));
  const auto fin = ProductSpace::finite({FactorSpace::cantor(), FactorSpace::disc(2)});
  CHECK(fin.tail_weight(0) == 2);
  CHECK(fin.tail_weight(2) == 0);
}
