#include <random>

#include "cdh/cylinder_homeo.hpp"
#include "cdh/errors.hpp"
#include "doctest.h"

using namespace cdh;

namespace {

Word bits(const std::string& s) { return word_from_string(s, true); }

// Brute-force oracle: evaluates a map on every cylinder of length `depth`
// followed by a zero tail and by a one tail.
std::vector<Word> table(const CylinderHomeo& h, std::size_t depth, std::size_t out_len) {
  std::vector<Word> out;
  for (std::size_t code = 0; code < (1u << depth); ++code) {
    Word w(depth);
    for (std::size_t i = 0; i < depth; ++i) w[i] = (code >> (depth - 1 - i)) & 1;
    out.push_back(h.apply(Sequence(w)).prefix(out_len));
  }
  return out;
}

Scalar brute_displacement(const CylinderHomeo& h, std::size_t depth) {
  Scalar best = 0;
  for (std::size_t code = 0; code < (1u << depth); ++code) {
    Word w(depth + 2, 1);
    for (std::size_t i = 0; i < depth; ++i) w[i] = (code >> (depth - 1 - i)) & 1;
    for (int tail = 0; tail < 2; ++tail) {
      Word v = w;
      if (tail == 0) v.resize(depth);
      const Sequence x(v);
      best = std::max(best, sequence_distance(h.apply(x), x));
    }
  }
  return best;
}

CylinderHomeo swap(const std::string& a, const std::string& b) {
  return CylinderHomeo::prefix_permutation(2, {{bits(a), bits(b)}, {bits(b), bits(a)}});
}

}  // namespace

TEST_CASE("sequence distance and prefixes") {
  const Sequence x(bits("0010"));
  const Sequence y(bits("0011"));
  CHECK(x.support() == 3);
  CHECK(sequence_distance(x, y) == ratio(1, 8));
  CHECK(sequence_distance(x, x) == 0);
  CHECK(x.prefix(6) == bits("001000"));
  auto tail = std::make_shared<const Word>(bits("0110"));
  const Sequence z(bits("1"), tail, 1);
  CHECK(z.letters() == bits("111"));
  CHECK(z.replace_prefix(bits("0000")).letters() == Word{});
  CHECK(z.replace_prefix(bits("00")).letters() == bits("001"));
  CHECK(word_from_string("3.0.12", false) == Word{3, 0, 12});
  CHECK_THROWS_AS(word_from_string("012", true), ParseError);
}

TEST_CASE("composition of two depth-2 swaps follows the cylinder table") {
  const auto g = swap("00", "01");
  const auto h = swap("01", "10");
  const auto hg = compose(h, g);
  CHECK_FALSE(hg.validate().has_value());
  const auto t = table(hg, 2, 2);
  CHECK(t[0] == bits("10"));
  CHECK(t[1] == bits("00"));
  CHECK(t[2] == bits("01"));
  CHECK(t[3] == bits("11"));
}

TEST_CASE("identity, inverse and displacement") {
  const CylinderHomeo id;
  CHECK(id.sup_displacement() == 0);
  CHECK_FALSE(id.validate().has_value());
  const auto g = swap("0110", "0111");
  CHECK(g.sup_displacement() == ratio(1, 8));
  CHECK(g.sup_displacement() == brute_displacement(g, 6));
  CHECK(compose(g, g.inverse()).sup_displacement() == 0);
  CHECK(compose(id, g) == g);
  CHECK(sup_distance(g, id) == ratio(1, 8));
}

TEST_CASE("random compositions agree with pointwise evaluation") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    auto random_perm = [&](std::size_t len) {
      std::vector<Word> words;
      for (std::size_t code = 0; code < (1u << len); ++code) {
        Word w(len);
        for (std::size_t i = 0; i < len; ++i) w[i] = (code >> (len - 1 - i)) & 1;
        words.push_back(w);
      }
      auto shuffled = words;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      std::map<Word, Word> perm;
      for (std::size_t i = 0; i < words.size(); ++i) perm[words[i]] = shuffled[i];
      return CylinderHomeo::prefix_permutation(2, perm);
    };
    // Embed a small permutation deep inside a cylinder so that holes matter.
    auto a = random_perm(1 + trial % 3);
    auto b = compose(swap("10", "11"), random_perm(2));
    auto c = compose(swap("0101", "0110"), compose(a, b));
    REQUIRE_FALSE(c.validate().has_value());
    REQUIRE_FALSE(c.inverse().validate().has_value());
    const auto direct = table(c, 6, 8);
    std::vector<Word> stepwise;
    for (std::size_t code = 0; code < 64; ++code) {
      Word w(6);
      for (std::size_t i = 0; i < 6; ++i) w[i] = (code >> (5 - i)) & 1;
      Sequence x(w);
      x = b.apply(x);
      x = a.apply(x);
      x = swap("0101", "0110").apply(x);
      stepwise.push_back(x.prefix(8));
    }
    CHECK(direct == stepwise);
    CHECK(c.sup_displacement() == brute_displacement(c, 6));
    CHECK(compose(c.inverse(), c).is_identity());
    CHECK(sup_distance(c, b) == [&] {
      Scalar best = 0;
      for (std::size_t code = 0; code < 256; ++code) {
        Word w(8);
        for (std::size_t i = 0; i < 8; ++i) w[i] = (code >> (7 - i)) & 1;
        best = std::max(best, sequence_distance(c.apply(Sequence(w)), b.apply(Sequence(w))));
      }
      return best;
    }());
  }
}

TEST_CASE("cells with holes") {
  std::vector<Word> holes{bits("00"), bits("01"), bits("1")};
  normalize_holes(holes, 2);
  CHECK(holes == std::vector<Word>{Word{}});
  const Cell a{bits(""), {bits("0110"), bits("1")}};
  const Cell b{bits("01"), {}};
  auto c = intersect_cells(a, b, 2);
  REQUIRE(c);
  CHECK(c->prefix == bits("01"));
  CHECK(c->holes == std::vector<Word>{bits("10")});
  CHECK_FALSE(intersect_cells(a, Cell{bits("10"), {}}, 2));
  CHECK(cell_measure(a, 2) == ratio(7, 16));
}

TEST_CASE("integer sequences") {
  const auto h = CylinderHomeo::prefix_permutation(0, {{Word{5, 0}, Word{0, 7}}, {Word{0, 7}, Word{5, 0}}});
  CHECK_FALSE(h.validate().has_value());
  CHECK(h.apply(Sequence(Word{5, 0, 3})).letters() == Word{0, 7, 3});
  CHECK(h.apply(Sequence(Word{5, 1})).letters() == Word{5, 1});
  CHECK(h.local_modulus(Sequence(Word{5, 1})) == 2);
  CHECK(h.local_modulus(Sequence(Word{4})) == 1);
  CHECK(h.sup_displacement() == 1);
}
