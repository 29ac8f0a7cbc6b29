#include "cdh/engine.hpp"

#include <algorithm>
#include <random>

#include "cdh/errors.hpp"
#include "cdh/general_position.hpp"

namespace cdh {

namespace {

Sequence coordinate(const ProductPoint& p, std::size_t alpha) { return as_sequence(p.eval_coordinate(alpha)); }

void require_sequence_factors(const ProductSpace& space) {
  if (!space.all_zero_dimensional()) throw UnsupportedFactor("the engine needs sequence factors");
}

// Elias gamma code of v >= 1.
void put_gamma(Word& out, std::size_t v) {
  int bits = 0;
  for (std::size_t t = v; t > 1; t >>= 1) ++bits;
  for (int i = 0; i < bits; ++i) out.push_back(0);
  for (int i = bits; i >= 0; --i) out.push_back(static_cast<Letter>((v >> i) & 1));
}

bool binary_at(const ProductSpace& space, std::size_t alpha) {
  return !space.has_index(alpha) || space.factor(alpha).kind() == FactorKind::CantorBits;
}

std::string key_text(const ProductSpace& space, const std::vector<Word>& key) {
  // Every word is closed by ';', so keys with trailing empty words differ.
  std::string out;
  for (std::size_t a = 0; a < key.size(); ++a) out += word_to_string(key[a], binary_at(space, a)) + ";";
  return out;
}

}  // namespace

bool box_contains(const Box& box, const ProductPoint& p) {
  for (const auto& [alpha, w] : box) {
    if (!coordinate(p, alpha).has_prefix(w)) return false;
  }
  return true;
}

std::string box_to_string(const Box& box, const ProductSpace& space) {
  std::string out = "{";
  for (const auto& [alpha, w] : box) {
    if (out.size() > 1) out += ", ";
    out += std::to_string(alpha) + ": [" + word_to_string(w, binary_at(space, alpha)) + "]";
  }
  return out + "}";
}

std::optional<DensePoint> DenseSet::locate(const Box&, const std::set<std::string>&) const { return std::nullopt; }

ListDenseSet::ListDenseSet(std::string name, std::vector<ProductPoint> points)
    : name_(std::move(name)), points_(std::move(points)) {
  if (points_.empty()) throw PreconditionFailure("dense set " + name_ + " is empty");
  for (const auto& p : points_) {
    if (!(*p.space() == *points_.front().space())) throw KindMismatch("points of " + name_ + " in different spaces");
  }
  require_sequence_factors(*points_.front().space());
}

std::shared_ptr<const ProductSpace> ListDenseSet::space() const { return points_.front().space(); }

DensePoint ListDenseSet::at(std::size_t i) const {
  if (i >= points_.size()) throw IndexOutOfRange(name_ + " has " + std::to_string(points_.size()) + " points");
  return DensePoint{name_ + "#" + std::to_string(i), points_[i]};
}

CodedDenseSet::CodedDenseSet(std::shared_ptr<const ProductSpace> space, unsigned salt, std::string name)
    : space_(std::move(space)), salt_(salt), name_(std::move(name)) {
  require_sequence_factors(*space_);
}

std::vector<Word> CodedDenseSet::key(std::size_t i) const {
  std::vector<Word> out;
  const auto spec = basic_box(i);
  for (std::size_t a = 0; a < spec.size(); ++a) {
    out.push_back(space_->has_index(a) ? basic_word(space_->factor(a), spec[a])
                                       : basic_word(FactorSpace::cantor(), spec[a]));
  }
  return out;
}

Word CodedDenseSet::tag(const std::vector<Word>& key) const {
  // P = salt . gamma(|K| + 1) . per word gamma(|w| + 1) and its letters;
  // P is prefix-free, so reverse(P) . 1 is suffix-free.
  Word p;
  put_gamma(p, salt_ + 1);
  put_gamma(p, key.size() + 1);
  for (std::size_t a = 0; a < key.size(); ++a) {
    put_gamma(p, key[a].size() + 1);
    const bool binary = binary_at(*space_, a);
    for (Letter l : key[a]) {
      if (binary) {
        p.push_back(l);
      } else {
        put_gamma(p, static_cast<std::size_t>(l) + 1);
      }
    }
  }
  std::reverse(p.begin(), p.end());
  p.push_back(1);
  return p;
}

DensePoint CodedDenseSet::point(const std::vector<Word>& key) const {
  auto t = std::make_shared<const Word>(tag(key));
  const Sequence tail(Word{}, t);
  std::vector<FactorPoint> base(space_->pattern().size(), tail);
  std::map<std::size_t, FactorPoint> overrides;
  for (std::size_t a = 0; a < key.size(); ++a) {
    if (!key[a].empty() && space_->has_index(a)) overrides.emplace(a, Sequence(key[a], t));
  }
  return DensePoint{name_ + ":" + key_text(*space_, key), ProductPoint(space_, std::move(base), std::move(overrides))};
}

DensePoint CodedDenseSet::at(std::size_t i) const { return point(key(i)); }

std::optional<DensePoint> CodedDenseSet::locate(const Box& box, const std::set<std::string>& used) const {
  std::vector<Word> k;
  for (const auto& [alpha, w] : box) {
    if (!space_->has_index(alpha)) throw IndexOutOfRange("box coordinate " + std::to_string(alpha));
    if (k.size() <= alpha) k.resize(alpha + 1);
    k[alpha] = w;
  }
  // Trailing empty words change only the tag, so each box holds infinitely
  // many points.
  for (;;) {
    DensePoint p = point(k);
    if (!used.count(p.id)) return p;
    k.emplace_back();
  }
}

bool Condition::in_domain(const std::string& id) const {
  return std::any_of(sigma.begin(), sigma.end(), [&](const SettledPair& s) { return s.d.id == id; });
}

bool Condition::in_range(const std::string& id) const {
  return std::any_of(sigma.begin(), sigma.end(), [&](const SettledPair& s) { return s.e.id == id; });
}

Condition empty_condition(std::shared_ptr<const ProductSpace> space) {
  require_sequence_factors(*space);
  Condition p;
  p.space = std::move(space);
  return p;
}

std::optional<Violation> check_condition(const Condition& p) {
  if (p.tuples.size() != p.coords.size()) return Violation{8, "", "tuples and F differ in size"};
  for (std::size_t alpha : p.coords) {
    if (!p.space->has_index(alpha)) return Violation{7, std::to_string(alpha), "F holds a missing coordinate"};
    auto it = p.tuples.find(alpha);
    if (it == p.tuples.end()) return Violation{8, std::to_string(alpha), "no tuple at a coordinate of F"};
    if (it->second.empty()) return Violation{8, std::to_string(alpha), "empty tuple"};
  }
  std::set<std::string> dom, ran;
  for (const auto& s : p.sigma) {
    if (!dom.insert(s.d.id).second) return Violation{9, s.d.id, "sigma repeats a domain point"};
    if (!ran.insert(s.e.id).second) return Violation{9, s.e.id, "sigma repeats a range point"};
  }
  for (std::size_t alpha : p.coords) {
    const Homeo& h = p.tuples.at(alpha).composed();
    for (const auto& s : p.sigma) {
      if (as_sequence(h.apply(coordinate(s.d.point, alpha))) != coordinate(s.e.point, alpha)) {
        return Violation{10, s.d.id + " at " + std::to_string(alpha), "H(d(alpha)) differs from sigma(d)(alpha)"};
      }
    }
  }
  return std::nullopt;
}

std::optional<Violation> validate_extension(const Condition& p, const Condition& q) {
  for (std::size_t alpha : p.coords) {
    if (!q.coords.count(alpha)) return Violation{11, std::to_string(alpha), "coordinate dropped from F"};
  }
  for (std::size_t alpha : p.coords) {
    const auto& tp = p.tuples.at(alpha);
    auto it = q.tuples.find(alpha);
    if (it == q.tuples.end()) return Violation{12, std::to_string(alpha), "tuple dropped"};
    const auto& tq = it->second;
    if (tq.size() < tp.size()) return Violation{12, std::to_string(alpha), "tuple shortened"};
    for (std::size_t i = 0; i < tp.size(); ++i) {
      if (&tp.stage(i) == &tq.stage(i)) continue;
      if (tp.stage(i).family() != tq.stage(i).family() || sup_distance(tp.stage(i), tq.stage(i)).value != 0) {
        return Violation{12, std::to_string(alpha) + ":" + std::to_string(i), "stage replaced"};
      }
    }
  }
  for (const auto& s : p.sigma) {
    const bool kept = std::any_of(q.sigma.begin(), q.sigma.end(),
                                  [&](const SettledPair& t) { return t.d.id == s.d.id && t.e.id == s.e.id; });
    if (!kept) return Violation{13, s.d.id, "settled pair dropped or changed"};
  }
  for (std::size_t alpha : p.coords) {
    const auto& tp = p.tuples.at(alpha);
    const auto& tq = q.tuples.at(alpha);
    for (const auto& s : p.sigma) {
      const FactorPoint settled = tp.composed().apply(coordinate(s.d.point, alpha));
      for (std::size_t i = tp.size(); i < tq.size(); ++i) {
        if (as_sequence(tq.stage(i).apply(settled)) != as_sequence(settled)) {
          return Violation{14, "stage " + std::to_string(i) + " at " + std::to_string(alpha) + " moves " +
                                   point_to_string(settled) + " (" + s.d.id + ")",
                           "a later stage moves a settled image"};
        }
      }
    }
  }
  return std::nullopt;
}

// ---- extensions -------------------------------------------------------------

namespace {

// Length L of the eps-ball [x | L] at one coordinate: L >= n + 2 bounds the
// new stage, L >= the modulus of H^-1 at x keeps H^-1 within 2^-(n+2) on the
// ball, and L past every first difference keeps settled images outside.
std::size_t eps_length(const SuitableTuple& tuple, const Sequence& x, std::size_t alpha, const Condition& p) {
  std::size_t len = tuple.size() + 1;
  len = std::max(len, tuple.composed_inverse().cylinder().local_modulus(x));
  for (const auto& s : p.sigma) {
    const auto diff = first_difference(x, coordinate(s.e.point, alpha));
    if (!diff) {
      throw PreconditionFailure("general position fails at coordinate " + std::to_string(alpha) + ": " +
                                s.e.id + " meets the point being settled");
    }
    len = std::max(len, *diff + 1);
  }
  return len;
}

DensePoint find_partner(const Box& box, const DenseSet& set, const std::set<std::string>& used,
                        const EngineOptions& options, const ProductSpace& space, ExtensionInfo& info) {
  std::size_t limit = options.scan_limit;
  if (set.size()) limit = std::min(limit, *set.size());
  for (std::size_t i = 0; i < limit; ++i) {
    DensePoint c = set.at(i);
    if (!used.count(c.id) && box_contains(box, c.point)) {
      info.scan_index = i;
      return c;
    }
  }
  if (auto found = set.locate(box, used)) return *found;
  throw PreconditionFailure("no fresh point of " + set.name() + " in box " + box_to_string(box, space) +
                            " after scanning " + std::to_string(limit) + " elements");
}

Homeo transporter(const ProductSpace& space, std::size_t alpha, const Sequence& from, const Sequence& to,
                  std::size_t eps_len) {
  return small_ball_transporter(space.factor(alpha), from, to, pow2(-static_cast<long>(eps_len)));
}

}  // namespace

Condition extend_coord(const Condition& p, std::size_t alpha) {
  if (!p.space->has_index(alpha)) throw IndexOutOfRange("coordinate " + std::to_string(alpha));
  if (p.coords.count(alpha)) return p;
  const FactorSpace& f = p.space->factor(alpha);
  std::map<Sequence, std::string> seen_d, seen_e;
  FiniteBijection sigma;
  for (const auto& s : p.sigma) {
    Sequence x = coordinate(s.d.point, alpha);
    Sequence y = coordinate(s.e.point, alpha);
    auto [it, fresh] = seen_d.emplace(x, s.d.id);
    if (!fresh) {
      throw PreconditionFailure("general position fails at coordinate " + std::to_string(alpha) + ": " + it->second +
                                " and " + s.d.id + " agree there");
    }
    auto [jt, fresh_e] = seen_e.emplace(y, s.e.id);
    if (!fresh_e) {
      throw PreconditionFailure("general position fails at coordinate " + std::to_string(alpha) + ": " + jt->second +
                                " and " + s.e.id + " agree there");
    }
    sigma.emplace_back(std::move(x), std::move(y));
  }
  Condition q = p;
  q.coords.insert(alpha);
  q.tuples.emplace(alpha, SuitableTuple(f).append(realize_finite_bijection(f, sigma)));
  return q;
}

Condition extend_dom(const Condition& p, const DensePoint& d, const DenseSet& E, const EngineOptions& options,
                     ExtensionInfo* info) {
  ExtensionInfo local;
  ExtensionInfo& out = info ? *info : local;
  out = ExtensionInfo{};
  if (p.in_domain(d.id)) return p;
  std::map<std::size_t, Sequence> x;
  for (std::size_t alpha : p.coords) {
    const auto& tuple = p.tuples.at(alpha);
    x.emplace(alpha, as_sequence(tuple.composed().apply(coordinate(d.point, alpha))));
    const std::size_t len = eps_length(tuple, x.at(alpha), alpha, p);
    out.choices[alpha] = CoordinateChoice{len, len + 1};
    out.box[alpha] = x.at(alpha).prefix(len + 1);
  }
  std::set<std::string> used;
  for (const auto& s : p.sigma) used.insert(s.e.id);
  DensePoint e = find_partner(out.box, E, used, options, *p.space, out);
  out.partner = e.id;

  Condition q = p;
  for (std::size_t alpha : p.coords) {
    const Homeo h = transporter(*p.space, alpha, x.at(alpha), coordinate(e.point, alpha), out.choices[alpha].eps_length);
    q.tuples.insert_or_assign(alpha, p.tuples.at(alpha).append(h));
  }
  q.sigma.push_back(SettledPair{d, std::move(e)});
  return q;
}

Condition extend_ran(const Condition& p, const DensePoint& e, const DenseSet& D, const EngineOptions& options,
                     ExtensionInfo* info) {
  ExtensionInfo local;
  ExtensionInfo& out = info ? *info : local;
  out = ExtensionInfo{};
  if (p.in_range(e.id)) return p;
  std::map<std::size_t, Sequence> x;
  for (std::size_t alpha : p.coords) {
    const auto& tuple = p.tuples.at(alpha);
    x.emplace(alpha, coordinate(e.point, alpha));
    const std::size_t len = eps_length(tuple, x.at(alpha), alpha, p);
    out.choices[alpha] = CoordinateChoice{len, len + 1};
    // A cylinder around H^-1(x) that H maps into [x | len + 1].
    const Sequence y = as_sequence(tuple.composed_inverse().apply(x.at(alpha)));
    const std::size_t m = std::max(len + 1, tuple.composed().cylinder().local_modulus(y));
    out.box[alpha] = y.prefix(m);
  }
  std::set<std::string> used;
  for (const auto& s : p.sigma) used.insert(s.d.id);
  DensePoint d = find_partner(out.box, D, used, options, *p.space, out);
  out.partner = d.id;

  Condition q = p;
  for (std::size_t alpha : p.coords) {
    const auto& tuple = p.tuples.at(alpha);
    const Sequence z = as_sequence(tuple.composed().apply(coordinate(d.point, alpha)));
    const Homeo h = transporter(*p.space, alpha, z, x.at(alpha), out.choices[alpha].eps_length);
    q.tuples.insert_or_assign(alpha, tuple.append(h));
  }
  q.sigma.push_back(SettledPair{std::move(d), e});
  return q;
}

// ---- the run -------------------------------------------------------------------

std::string to_string(const DenseTask& task) {
  switch (task.kind) {
    case DenseTask::Kind::Coord: return "Coord(" + std::to_string(task.index) + ")";
    case DenseTask::Kind::Dom: return "Dom(d" + std::to_string(task.index) + ")";
    case DenseTask::Kind::Ran: return "Ran(e" + std::to_string(task.index) + ")";
  }
  return "?";
}

std::string to_string(StepRecord::Outcome outcome) {
  switch (outcome) {
    case StepRecord::Outcome::Met: return "met";
    case StepRecord::Outcome::AlreadyMet: return "already-met";
    case StepRecord::Outcome::Skipped: return "skipped";
    case StepRecord::Outcome::Failed: return "failed";
  }
  return "?";
}

std::vector<DenseTask> default_schedule(std::size_t rounds) {
  std::vector<DenseTask> out;
  for (std::size_t j = 0; j < rounds; ++j) {
    out.push_back({DenseTask::Kind::Coord, j});
    out.push_back({DenseTask::Kind::Dom, j});
    out.push_back({DenseTask::Kind::Ran, j});
  }
  return out;
}

ProductMapPtr assemble_map(const Condition& p) {
  std::map<std::size_t, Homeo> maps;
  for (const auto& [alpha, tuple] : p.tuples) maps.emplace(alpha, tuple.composed());
  return std::make_shared<CoordinatewiseMap>(std::move(maps), "engine");
}

namespace {

// Exact realization where q differs from p: new coordinates for every pair and
// new pairs at every coordinate. Old pairs at old coordinates are covered by
// the fixed-image check in validate_extension.
std::optional<Violation> check_new_part(const Condition& p, const Condition& q) {
  for (std::size_t alpha : q.coords) {
    const Homeo& h = q.tuples.at(alpha).composed();
    const std::size_t from = p.coords.count(alpha) ? p.sigma.size() : 0;
    for (std::size_t i = from; i < q.sigma.size(); ++i) {
      const auto& s = q.sigma[i];
      if (as_sequence(h.apply(coordinate(s.d.point, alpha))) != coordinate(s.e.point, alpha)) {
        return Violation{10, s.d.id + " at " + std::to_string(alpha), "H(d(alpha)) differs from sigma(d)(alpha)"};
      }
    }
  }
  return std::nullopt;
}

std::optional<DensePoint> element(const DenseSet& set, std::size_t i) {
  if (set.size() && i >= *set.size()) return std::nullopt;
  return set.at(i);
}

}  // namespace

EngineResult run(const DenseSet& D, const DenseSet& E, const std::vector<DenseTask>& schedule, std::size_t budget,
                 const EngineOptions& options) {
  if (!(*D.space() == *E.space())) throw KindMismatch("D and E live in different spaces");
  EngineResult r;
  r.space = D.space();
  Condition p = empty_condition(r.space);
  using Outcome = StepRecord::Outcome;

  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const DenseTask& task = schedule[k];
    if (k >= budget) {
      r.unmet.push_back(task);
      continue;
    }
    StepRecord rec{task, Outcome::Met, "", {}};
    std::optional<Condition> q;
    try {
      switch (task.kind) {
        case DenseTask::Kind::Coord:
          if (!r.space->has_index(task.index) || task.index >= r.space->working_depth()) {
            rec.outcome = Outcome::Skipped;
            rec.detail = "outside the working depth";
          } else if (p.coords.count(task.index)) {
            rec.outcome = Outcome::AlreadyMet;
          } else {
            q = extend_coord(p, task.index);
          }
          break;
        case DenseTask::Kind::Dom:
        case DenseTask::Kind::Ran: {
          const bool dom = task.kind == DenseTask::Kind::Dom;
          auto x = element(dom ? D : E, task.index);
          if (!x) {
            rec.outcome = Outcome::Failed;
            rec.detail = "enumeration has no element " + std::to_string(task.index);
            break;
          }
          rec.info.partner = x->id;
          if (dom ? p.in_domain(x->id) : p.in_range(x->id)) {
            rec.outcome = Outcome::AlreadyMet;
            break;
          }
          q = dom ? extend_dom(p, *x, E, options, &rec.info) : extend_ran(p, *x, D, options, &rec.info);
          rec.detail = x->id + " -> " + rec.info.partner;
          if (!dom) rec.detail = rec.info.partner + " -> " + x->id;
          break;
        }
      }
    } catch (const PreconditionFailure& err) {
      rec.outcome = Outcome::Failed;
      rec.detail = err.what();
    }
    if (rec.outcome == Outcome::Failed) r.unmet.push_back(task);
    if (q) {
      auto v = validate_extension(p, *q);
      if (!v) v = check_new_part(p, *q);
      if (v) {
        throw Error("step " + std::to_string(k) + " (" + to_string(task) + ") broke condition " +
                    std::to_string(v->condition) + ": " + v->message + " at " + v->witness);
      }
      p = std::move(*q);
    }
    r.steps.push_back(std::move(rec));
  }
  for (auto& [alpha, tuple] : p.tuples) tuple = tuple.seal();
  r.map = assemble_map(p);
  r.condition = std::move(p);
  return r;
}

// ---- verification ----------------------------------------------------------------

bool VerifyReport::passed() const {
  return mismatches.empty() && certificate_failures.empty() && injectivity_failures.empty() &&
         bijection_failures.empty() && !condition_failure;
}

VerifyReport verify_result(const EngineResult& result, std::size_t depth, std::size_t sample_budget,
                           unsigned long long seed) {
  const Condition& c = result.condition;
  VerifyReport rep;
  rep.depth = depth;
  rep.checked_depth = std::min(depth, result.space->working_depth());
  rep.pairs = c.sigma.size();

  std::set<std::string> dom, ran;
  for (const auto& s : c.sigma) {
    if (!dom.insert(s.d.id).second) rep.bijection_failures.push_back("domain repeats " + s.d.id);
    if (!ran.insert(s.e.id).second) rep.bijection_failures.push_back("range repeats " + s.e.id);
  }
  rep.condition_failure = check_condition(c);

  for (const auto& s : c.sigma) {
    const auto image = s.d.point.then(result.map).eval_prefix(rep.checked_depth);
    const auto target = s.e.point.eval_prefix(rep.checked_depth);
    for (std::size_t a = 0; a < rep.checked_depth; ++a) {
      if (as_sequence(image[a]) != as_sequence(target[a])) {
        rep.mismatches.push_back(
            {s.d.id, s.e.id, a, c.coords.count(a) ? "h(d) differs from sigma(d)" : "coordinate not in F"});
      }
    }
  }

  for (const auto& [alpha, tuple] : c.tuples) {
    for (auto& f : tuple.reverify()) rep.certificate_failures.emplace_back(alpha, std::move(f));
  }

  if (!c.tuples.empty()) {
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> coords(c.coords.begin(), c.coords.end());
    for (std::size_t i = 0; i < sample_budget; ++i) {
      const std::size_t alpha = coords[i % coords.size()];
      const auto& tuple = c.tuples.at(alpha);
      const bool binary = result.space->factor(alpha).kind() == FactorKind::CantorBits;
      const std::size_t len = 1 + rng() % (tuple.composed().cylinder().depth() + 8);
      Word w(len);
      for (auto& l : w) l = static_cast<Letter>(rng() % (binary ? 2 : 4));
      const Sequence x(w);
      const Sequence y = as_sequence(tuple.composed_inverse().apply(tuple.composed().apply(x)));
      ++rep.injectivity_samples;
      if (y != x) {
        rep.injectivity_failures.push_back("coordinate " + std::to_string(alpha) + ": " +
                                           word_to_string(w, binary) + " does not round-trip");
      }
    }
  }
  return rep;
}

}  // namespace cdh
