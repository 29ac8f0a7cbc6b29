#include <algorithm>
#include <random>
#include <set>

#include "cdh/engine.hpp"
#include "cdh/errors.hpp"
#include "cdh/general_position.hpp"
#include "doctest.h"

using namespace cdh;

namespace {

std::shared_ptr<const ProductSpace> cantor_power(std::size_t n) {
  return std::make_shared<const ProductSpace>(ProductSpace::power(FactorSpace::cantor(), n));
}

Sequence seq(const ProductPoint& p, std::size_t a) { return as_sequence(p.eval_coordinate(a)); }

Sequence bits(const std::string& s) { return Sequence(word_from_string(s, true)); }

ProductPoint single(std::shared_ptr<const ProductSpace> space, const std::string& s) {
  return ProductPoint(space, {bits("")}, {{0, bits(s)}});
}

// Suffix relation on finite words, written out letter by letter.
bool is_suffix(const Word& a, const Word& b) {
  if (a.size() > b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[a.size() - 1 - i] != b[b.size() - 1 - i]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("coded dense sets: tags are suffix-free and points are in general position") {
  auto space = cantor_power(3);
  CodedDenseSet D(space, 0, "D"), E(space, 1, "E");
  std::vector<Word> tags;
  std::vector<ProductPoint> pts;
  for (std::size_t i = 0; i < 40; ++i) {
    tags.push_back(D.tag(D.key(i)));
    tags.push_back(E.tag(E.key(i)));
    pts.push_back(D.at(i).point);
    pts.push_back(E.at(i).point);
  }
  for (std::size_t i = 0; i < tags.size(); ++i) {
    CHECK(tags[i].back() == 1);
    for (std::size_t j = 0; j < tags.size(); ++j) {
      if (i != j) CHECK_FALSE(is_suffix(tags[i], tags[j]));
    }
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      for (std::size_t a = 0; a < 3; ++a) CHECK(seq(pts[i], a) != seq(pts[j], a));
    }
  }
}

TEST_CASE("coded dense sets: element i lies in its key's box and the locator answers any box") {
  auto space = std::make_shared<const ProductSpace>(ProductSpace::infinite({FactorSpace::cantor()}, 16));
  CodedDenseSet E(space, 1, "E");
  for (std::size_t i = 0; i < 200; ++i) {
    const auto key = E.key(i);
    const auto p = E.at(i).point;
    for (std::size_t a = 0; a < key.size(); ++a) CHECK(seq(p, a).has_prefix(key[a]));
    CHECK(box_contains(*space, i, p));
  }
  Box box{{0, word_from_string("1101", true)}, {5, word_from_string("000000111", true)}};
  std::set<std::string> used;
  for (int k = 0; k < 4; ++k) {
    auto found = E.locate(box, used);
    REQUIRE(found);
    CHECK(box_contains(box, found->point));
    CHECK(seq(found->point, 0).has_prefix(word_from_string("1101", true)));
    CHECK_FALSE(used.count(found->id));
    used.insert(found->id);
  }
}

TEST_CASE("validate_extension: reflexive, new coordinates, and a moved settled image") {
  auto space = cantor_power(2);
  CodedDenseSet D(space, 0, "D"), E(space, 1, "E");
  Condition p = empty_condition(space);
  p = extend_dom(p, D.at(3), E);
  p = extend_coord(p, 0);
  CHECK_FALSE(validate_extension(p, p));
  CHECK_FALSE(check_condition(p));

  Condition q = extend_coord(p, 1);
  CHECK_FALSE(validate_extension(p, q));

  // Move the settled image of d at coordinate 0 by a tiny swap: the bounds
  // accept it, the extension order must not.
  const Sequence settled = as_sequence(p.tuples.at(0).composed().apply(seq(p.sigma[0].d.point, 0)));
  Word near = settled.prefix(40);
  near.back() = 1 - near.back();
  const Homeo g = small_ball_transporter(FactorSpace::cantor(), settled, Sequence(near), pow2(-30));
  Condition bad = p;
  bad.tuples.insert_or_assign(0, p.tuples.at(0).append(g));
  const auto v = validate_extension(p, bad);
  REQUIRE(v);
  CHECK(v->condition == 14);
  CHECK(v->witness.find(point_to_string(settled)) != std::string::npos);

  Condition dropped = q;
  dropped.sigma.clear();
  REQUIRE(validate_extension(p, dropped));
  CHECK(validate_extension(p, dropped)->condition == 13);
  Condition shrunk = q;
  shrunk.coords.erase(0);
  REQUIRE(validate_extension(p, shrunk));
  CHECK(validate_extension(p, shrunk)->condition == 11);
}

TEST_CASE("extend_coord: empty sigma gives the identity, two pairs are realized exactly") {
  auto space = cantor_power(1);
  Condition p = empty_condition(space);
  Condition q = extend_coord(p, 0);
  REQUIRE(q.tuples.at(0).size() == 1);
  CHECK(q.tuples.at(0).stage(0).is_identity());

  ListDenseSet D("D", {single(space, "0011"), single(space, "1")});
  ListDenseSet E("E", {single(space, "01"), single(space, "111")});
  p = extend_dom(p, D.at(0), E);
  p = extend_dom(p, D.at(1), E);
  REQUIRE(p.sigma.size() == 2);
  q = extend_coord(p, 0);
  const Homeo& h = q.tuples.at(0).stage(0);
  for (const auto& s : q.sigma) CHECK(as_sequence(h.apply(seq(s.d.point, 0))) == seq(s.e.point, 0));
  CHECK(q.sigma[0].e.id == "E#0");
  CHECK(as_sequence(h.apply(bits("0011"))) == bits("01"));
  CHECK(as_sequence(h.apply(bits("1"))) == bits("111"));
  CHECK_FALSE(validate_extension(p, q));
}

TEST_CASE("extend_coord: a collision at the coordinate names the pair") {
  auto space = cantor_power(2);
  ListDenseSet D("D", {ProductPoint(space, {bits("")}, {{0, bits("1")}, {1, bits("01")}}),
                       ProductPoint(space, {bits("")}, {{0, bits("11")}, {1, bits("01")}})});
  ListDenseSet E("E", {ProductPoint(space, {bits("")}, {{0, bits("001")}, {1, bits("1")}}),
                       ProductPoint(space, {bits("")}, {{0, bits("0001")}, {1, bits("11")}})});
  Condition p = empty_condition(space);
  p = extend_dom(p, D.at(0), E);
  p = extend_dom(p, D.at(1), E);
  CHECK_NOTHROW(extend_coord(p, 0));
  try {
    extend_coord(p, 1);
    FAIL("collision not detected");
  } catch (const PreconditionFailure& e) {
    const std::string what = e.what();
    CHECK(what.find("D#0") != std::string::npos);
    CHECK(what.find("D#1") != std::string::npos);
  }
}

TEST_CASE("extend_dom: empty F pairs with the first unused element and appends nothing") {
  auto space = cantor_power(2);
  CodedDenseSet D(space, 0, "D"), E(space, 1, "E");
  Condition p = empty_condition(space);
  ExtensionInfo info;
  p = extend_dom(p, D.at(5), E, {}, &info);
  CHECK(p.sigma.back().e.id == E.at(0).id);
  REQUIRE(info.scan_index);
  CHECK(*info.scan_index == 0);
  CHECK(p.tuples.empty());
  p = extend_dom(p, D.at(6), E);
  CHECK(p.sigma.back().e.id == E.at(1).id);
  // Already settled: no-op.
  Condition same = extend_dom(p, D.at(5), E);
  CHECK(same.sigma.size() == p.sigma.size());
}

TEST_CASE("extend_dom on one Cantor factor: transporter inside the delta-ball") {
  auto space = cantor_power(1);
  CodedDenseSet E(space, 1, "E");
  ListDenseSet D("D", {single(space, ""), single(space, "1011")});
  Condition p = extend_coord(empty_condition(space), 0);
  ExtensionInfo info;
  Condition q = extend_dom(p, D.at(0), E, {}, &info);
  REQUIRE(q.sigma.size() == 1);
  const auto& tuple = q.tuples.at(0);
  REQUIRE(tuple.size() == 2);
  const Sequence x = seq(D.at(0).point, 0);
  const Sequence e = seq(q.sigma[0].e.point, 0);
  CHECK(as_sequence(tuple.composed().apply(x)) == e);
  CHECK_FALSE(check_condition(q));

  const auto choice = info.choices.at(0);
  CHECK(choice.eps_length >= 2);  // at least n + 2 with n = 0
  CHECK(choice.delta_length == choice.eps_length + 1);
  const Word ball = x.prefix(choice.delta_length);
  CHECK(e.has_prefix(ball));
  // Support oracle: points off the delta cylinder are fixed, points on it stay.
  const Homeo& h = tuple.stage(1);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    Word w(1 + rng() % 24);
    for (auto& l : w) l = static_cast<Letter>(rng() & 1);
    if (i % 2 == 0) w.insert(w.begin(), ball.begin(), ball.end());
    const Sequence z(w);
    const Sequence hz = as_sequence(h.apply(z));
    if (z.has_prefix(ball)) {
      CHECK(hz.has_prefix(ball));
    } else {
      CHECK(hz == z);
    }
  }
}

TEST_CASE("extend_dom skips partners already in the range") {
  auto space = cantor_power(1);
  ListDenseSet D("D", {single(space, "1"), single(space, "01")});
  ListDenseSet E("E", {single(space, "001"), single(space, "0001")});
  Condition p = extend_dom(empty_condition(space), D.at(0), E);
  CHECK(p.sigma[0].e.id == "E#0");
  p = extend_dom(p, D.at(1), E);
  CHECK(p.sigma[1].e.id == "E#1");
  ListDenseSet E1("E", {single(space, "001")});
  try {
    extend_dom(extend_dom(empty_condition(space), D.at(0), E1), D.at(1), E1);
    FAIL("exhausted enumeration not reported");
  } catch (const PreconditionFailure& e) {
    CHECK(std::string(e.what()).find("after scanning 1") != std::string::npos);
  }
}

TEST_CASE("extend_ran: empty F, a pulled-back box, and a no-op on settled points") {
  auto space = cantor_power(1);
  CodedDenseSet D(space, 0, "D"), E(space, 1, "E");
  Condition p = empty_condition(space);
  p = extend_ran(p, E.at(2), D);
  CHECK(p.sigma.back().d.id == D.at(0).id);

  p = extend_coord(p, 0);
  ExtensionInfo info;
  Condition q = extend_ran(p, E.at(7), D, {}, &info);
  REQUIRE(q.sigma.size() == 2);
  const auto& tuple = q.tuples.at(0);
  const Sequence e = seq(E.at(7).point, 0);
  const Sequence d = seq(q.sigma[1].d.point, 0);
  CHECK(as_sequence(tuple.composed().apply(d)) == e);
  // The box is a cylinder around H^-1(e) for the map before this step.
  const Sequence pulled = as_sequence(p.tuples.at(0).composed_inverse().apply(e));
  CHECK(pulled.has_prefix(info.box.at(0)));
  CHECK(d.has_prefix(info.box.at(0)));
  CHECK_FALSE(validate_extension(p, q));
  CHECK_FALSE(check_condition(q));

  Condition same = extend_ran(q, E.at(7), D);
  CHECK(same.sigma.size() == q.sigma.size());
}

TEST_CASE("run: D = E with Dom tasks only settles each point to itself") {
  auto space = cantor_power(1);
  auto pts = greedy_dense_gp(space, 12);
  ListDenseSet D("X", pts);
  std::vector<DenseTask> sched;
  for (std::size_t j = 0; j < 12; ++j) sched.push_back({DenseTask::Kind::Dom, j});
  auto r = run(D, D, sched, 100);
  REQUIRE(r.condition.sigma.size() == 12);
  for (const auto& s : r.condition.sigma) {
    CHECK(s.d.id == s.e.id);
    CHECK(agree_to_depth(s.d.point.then(r.map), s.d.point, 1));
  }
  CHECK(verify_result(r, 1, 0).passed());
}

TEST_CASE("run: Coord(0) first puts 0 in F after one step") {
  auto space = cantor_power(2);
  CodedDenseSet D(space, 0, "D"), E(space, 1, "E");
  auto r = run(D, E, default_schedule(3), 1);
  CHECK(r.condition.coords == std::set<std::size_t>{0});
  CHECK(r.unmet.size() == 8);
  CHECK(r.steps.size() == 1);
}

TEST_CASE("run on one Cantor factor: 50 tasks settle pairs exactly") {
  auto space = cantor_power(1);
  CodedDenseSet D(space, 0, "D"), E(space, 1, "E");
  auto sched = default_schedule(17);
  sched.resize(50);
  auto r = run(D, E, sched, 50);
  CHECK(r.unmet.empty());
  CHECK(r.condition.sigma.size() >= 16);
  std::size_t skipped = 0;
  for (const auto& s : r.steps) skipped += s.outcome == StepRecord::Outcome::Skipped;
  CHECK(skipped == 16);  // Coord(1), ..., Coord(16)
  for (const auto& s : r.condition.sigma) {
    const Sequence hd = seq(s.d.point.then(r.map), 0);
    const Sequence e = seq(s.e.point, 0);
    CHECK(hd.prefix(48) == e.prefix(48));
    CHECK(hd == e);
  }
  auto rep = verify_result(r, 1, 300);
  CHECK(rep.passed());
  CHECK(rep.injectivity_samples == 300);
  CHECK(rep.mismatches.empty());
}

TEST_CASE("run keeps every settled image fixed by later stages") {
  auto space = cantor_power(2);
  CodedDenseSet D(space, 0, "D"), E(space, 1, "E");
  Condition p = empty_condition(space);
  std::vector<Condition> chain{p};
  for (const auto& t : default_schedule(8)) {
    if (t.kind == DenseTask::Kind::Coord) {
      if (t.index < 2) chain.push_back(extend_coord(chain.back(), t.index));
    } else if (t.kind == DenseTask::Kind::Dom) {
      chain.push_back(extend_dom(chain.back(), D.at(t.index), E));
    } else {
      chain.push_back(extend_ran(chain.back(), E.at(t.index), D));
    }
  }
  for (std::size_t i = 1; i < chain.size(); ++i) {
    CHECK_FALSE(validate_extension(chain[i - 1], chain[i]));
    CHECK_FALSE(check_condition(chain[i]));
    // Every earlier condition, not only the predecessor.
    CHECK_FALSE(validate_extension(chain[0], chain[i]));
    CHECK_FALSE(validate_extension(chain[i / 2], chain[i]));
  }
}

TEST_CASE("verify_result: corrupted ledger and truncation") {
  auto space = std::make_shared<const ProductSpace>(ProductSpace::infinite({FactorSpace::cantor()}, 4));
  CodedDenseSet D(space, 0, "D"), E(space, 1, "E");
  auto r = run(D, E, default_schedule(6), 18);
  auto rep = verify_result(r, 4, 50);
  CHECK(rep.passed());
  CHECK_FALSE(rep.truncated());

  auto deep = verify_result(r, 10, 0);
  CHECK(deep.truncated());
  CHECK(deep.checked_depth == 4);
  CHECK(deep.passed());

  // Edit the recorded displacement of stage 2 at coordinate 1.
  const auto& t = r.condition.tuples.at(1);
  std::vector<Homeo> stages;
  for (std::size_t i = 0; i < t.size(); ++i) stages.push_back(t.stage(i));
  auto ledger = t.ledger();
  REQUIRE(ledger.size() >= 2);
  ledger[1].displacement = ratio(1, 3);
  EngineResult bad = r;
  bad.condition.tuples.insert_or_assign(1, ConvergenceCertificate::restore(t.space(), stages, ledger, true));
  auto flagged = verify_result(bad, 4, 0);
  CHECK_FALSE(flagged.passed());
  REQUIRE(flagged.certificate_failures.size() == 1);
  CHECK(flagged.certificate_failures[0].first == 1);
  CHECK(flagged.certificate_failures[0].second.stage == 2);
}

TEST_CASE("verify_result reports coordinates missing from F") {
  auto space = cantor_power(2);
  CodedDenseSet D(space, 0, "D"), E(space, 1, "E");
  std::vector<DenseTask> sched{{DenseTask::Kind::Coord, 0}, {DenseTask::Kind::Dom, 0}, {DenseTask::Kind::Dom, 1}};
  auto r = run(D, E, sched, 10);
  auto rep = verify_result(r, 2, 0);
  CHECK_FALSE(rep.passed());
  CHECK(rep.mismatches.size() == 2);
  for (const auto& m : rep.mismatches) {
    CHECK(m.coordinate == 1);
    CHECK(m.reason == "coordinate not in F");
  }
}

TEST_CASE("default schedule is round-robin") {
  const auto s = default_schedule(3);
  REQUIRE(s.size() == 9);
  CHECK(s[3] == DenseTask{DenseTask::Kind::Coord, 1});
  CHECK(s[7] == DenseTask{DenseTask::Kind::Dom, 2});
  CHECK(to_string(s[8]) == "Ran(e2)");
}
