#include "cdh/general_position.hpp"

#include <algorithm>

#include "cdh/errors.hpp"

namespace cdh {

namespace {

std::size_t effective_depth(const ProductSpace& space, std::size_t depth) {
  return space.is_infinite() ? depth : std::min(depth, space.working_depth());
}

using Table = std::vector<std::vector<FactorPoint>>;

Table evaluate(const std::vector<ProductPoint>& points, std::size_t n) {
  Table t;
  t.reserve(points.size());
  for (const auto& p : points) t.push_back(p.eval_prefix(n));
  return t;
}

void require_common_space(const std::vector<ProductPoint>& points) {
  for (const auto& p : points) {
    if (!(*p.space() == *points.front().space())) throw KindMismatch("points of different product spaces");
  }
}

}  // namespace

std::size_t CollisionReport::collisions() const {
  std::size_t n = 0;
  for (const auto& p : pairs) n += p.agree.size();
  return n;
}

CollisionReport check_general_position(const std::vector<ProductPoint>& points, std::size_t depth) {
  CollisionReport report;
  if (points.empty()) return report;
  require_common_space(points);
  const ProductSpace& space = *points.front().space();
  const std::size_t n = effective_depth(space, depth);
  report.depth = n;
  const Table t = evaluate(points, n);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      PairCollision c{i, j, {}, {}};
      for (std::size_t a = 0; a < n; ++a) {
        (space.factor(a).same_point(t[i][a], t[j][a]) ? c.agree : c.disagree).push_back(a);
      }
      report.general_position = report.general_position && c.agree.empty();
      report.pairs.push_back(std::move(c));
    }
  }
  return report;
}

// ---- greedy ------------------------------------------------------------------

std::vector<std::size_t> basic_box(std::size_t n) {
  // Reading n from the low bit, each 1 closes an entry whose value is the
  // number of 0s since the previous 1.
  std::vector<std::size_t> out;
  std::size_t zeros = 0;
  for (; n != 0; n >>= 1) {
    if (n & 1) {
      out.push_back(zeros);
      zeros = 0;
    } else {
      ++zeros;
    }
  }
  return out;
}

namespace {

Word cantor_word(std::size_t b) {
  // Shortlex: b + 1 in binary without its leading 1.
  Word w;
  std::size_t v = b + 1;
  while (v > 1) {
    w.push_back(static_cast<Letter>(v & 1));
    v >>= 1;
  }
  std::reverse(w.begin(), w.end());
  return w;
}

Word baire_word(std::size_t b) {
  Word w;
  for (std::size_t x : basic_box(b)) w.push_back(static_cast<Letter>(x));
  return w;
}

struct Interval {
  Scalar left, width;
};

// Dyadic arc or interval number b >= 1.
Interval dyadic_interval(FactorKind kind, std::size_t b) {
  std::size_t offset = 1;
  for (long level = 1;; ++level) {
    const std::size_t per_level = std::size_t{1} << level;
    const std::size_t count = kind == FactorKind::Circle ? per_level : 2 * static_cast<std::size_t>(level) * per_level;
    if (b < offset + count) {
      long a = static_cast<long>(b - offset);
      if (kind == FactorKind::Line) a -= level * static_cast<long>(per_level);
      return Interval{ratio(a, static_cast<long>(per_level)), ratio(1, static_cast<long>(per_level))};
    }
    offset += count;
  }
}

// The j-th dyadic of (0, 1): 1/2, 1/4, 3/4, 1/8, ...
Scalar unit_dyadic(std::size_t j) {
  std::size_t e = 0;
  while ((std::size_t{2} << e) - 1 <= j) ++e;
  const std::size_t k = j - ((std::size_t{1} << e) - 1);
  return ratio(static_cast<long>(2 * k + 1), static_cast<long>(std::size_t{2} << e));
}

void require_exact(const FactorSpace& f) {
  if (!f.is_exact()) throw UnsupportedFactor("no exact pi-base enumeration for " + to_string(f.kind()));
}

// Distinct j give distinct points of basic set b.
FactorPoint candidate(const FactorSpace& f, std::size_t b, std::size_t j) {
  switch (f.kind()) {
    case FactorKind::CantorBits: {
      Word w = cantor_word(b);
      const Word tail = cantor_word(j);
      w.insert(w.end(), tail.begin(), tail.end());
      w.push_back(1);
      return Sequence(w);
    }
    case FactorKind::BaireInts: {
      Word w = baire_word(b);
      w.push_back(static_cast<Letter>(j + 1));
      return Sequence(w);
    }
    case FactorKind::Circle:
    case FactorKind::Line: {
      const Interval iv = b == 0 ? Interval{0, 1} : dyadic_interval(f.kind(), b);
      return Scalar(iv.left + iv.width * unit_dyadic(j));
    }
    default: throw UnsupportedFactor("no exact pi-base enumeration for " + to_string(f.kind()));
  }
}

bool contains_value(const FactorSpace& f, const std::vector<FactorPoint>& used, const FactorPoint& p) {
  return std::any_of(used.begin(), used.end(), [&](const FactorPoint& u) { return f.same_point(u, p); });
}

// First candidate of basic set b at position >= start that avoids `used`.
FactorPoint fresh(const FactorSpace& f, std::size_t b, std::size_t start, const std::vector<FactorPoint>& used) {
  for (std::size_t j = start;; ++j) {
    FactorPoint p = candidate(f, b, j);
    if (!contains_value(f, used, p)) return p;
  }
}

}  // namespace

bool basic_set_contains(const FactorSpace& space, std::size_t index, const FactorPoint& p) {
  require_exact(space);
  space.check_point(p);
  if (index == 0) return true;
  switch (space.kind()) {
    case FactorKind::CantorBits: return as_sequence(p).has_prefix(cantor_word(index));
    case FactorKind::BaireInts: return as_sequence(p).has_prefix(baire_word(index));
    default: {
      const Interval iv = dyadic_interval(space.kind(), index);
      const Scalar& x = as_scalar(p);
      return iv.left < x && x < iv.left + iv.width;
    }
  }
}

Word basic_word(const FactorSpace& space, std::size_t index) {
  switch (space.kind()) {
    case FactorKind::CantorBits: return cantor_word(index);
    case FactorKind::BaireInts: return baire_word(index);
    default: throw UnsupportedFactor("basic words exist on sequence factors only");
  }
}

bool box_contains(const ProductSpace& space, std::size_t n, const ProductPoint& p) {
  const auto spec = basic_box(n);
  for (std::size_t a = 0; a < spec.size(); ++a) {
    if (!space.has_index(a)) break;
    if (!basic_set_contains(space.factor(a), spec[a], p.eval_coordinate(a))) return false;
  }
  return true;
}

std::vector<ProductPoint> greedy_dense_gp(std::shared_ptr<const ProductSpace> space, std::size_t count,
                                          const std::vector<ForbiddenSet>& forbidden, GreedyOptions options) {
  for (const auto& f : space->pattern()) require_exact(f);
  const bool infinite = space->is_infinite();
  const std::size_t period = space->pattern().size();
  std::vector<ProductPoint> out;
  // Values already used at each overridden index, and per pattern slot for tails.
  std::map<std::size_t, std::vector<FactorPoint>> used;
  std::vector<std::vector<FactorPoint>> slot_used(infinite ? period : 0);

  for (std::size_t n = 0; n < count; ++n) {
    const auto spec = basic_box(n);
    const std::size_t explicit_len = infinite ? spec.size() : space->working_depth();
    bool placed = false;
    for (std::size_t attempt = 0; attempt < options.probe_budget && !placed; ++attempt) {
      std::map<std::size_t, FactorPoint> over;
      for (std::size_t a = 0; a < explicit_len; ++a) {
        const FactorSpace& f = space->factor(a);
        std::vector<FactorPoint> avoid = used[a];
        if (infinite) avoid.insert(avoid.end(), slot_used[a % period].begin(), slot_used[a % period].end());
        over.emplace(a, fresh(f, a < spec.size() ? spec[a] : 0, attempt, avoid));
      }
      std::vector<FactorPoint> tags;
      for (std::size_t slot = 0; slot < slot_used.size(); ++slot) {
        std::vector<FactorPoint> avoid = slot_used[slot];
        for (const auto& [a, vals] : used) {
          if (a % period == slot && a >= explicit_len) avoid.insert(avoid.end(), vals.begin(), vals.end());
        }
        tags.push_back(fresh(space->factor(slot), 0, attempt, avoid));
      }
      ProductPoint p(space, tags, over);
      const bool hit = std::any_of(forbidden.begin(), forbidden.end(), [&](const ForbiddenSet& s) { return s.contains(p); });
      if (hit) continue;
      for (const auto& [a, v] : over) used[a].push_back(v);
      for (std::size_t slot = 0; slot < tags.size(); ++slot) slot_used[slot].push_back(tags[slot]);
      out.push_back(std::move(p));
      placed = true;
    }
    if (!placed) {
      std::string names;
      for (const auto& s : forbidden) names += (names.empty() ? "" : ", ") + s.name;
      throw PreconditionFailure("density probe failed: forbidden sets {" + names + "} cover every probed point of box " +
                                std::to_string(n));
    }
  }
  return out;
}

// ---- weak general position ----------------------------------------------------

PairProductMap::PairProductMap(std::set<std::size_t> omega, std::map<std::size_t, ConvenientPair> pairs, bool forward)
    : omega_(std::move(omega)),
      pairs_(std::make_shared<const std::map<std::size_t, ConvenientPair>>(std::move(pairs))),
      forward_(forward) {
  if (omega_.count(0)) throw PreconditionFailure("index 0 carries the second argument and cannot be in Omega");
  for (std::size_t a : omega_) {
    if (!pairs_->count(a)) throw PreconditionFailure("no convenient pair for index " + std::to_string(a));
  }
}

FactorPoint PairProductMap::apply(std::size_t alpha, const CoordinateOracle& input) const {
  if (!omega_.count(alpha)) return input(alpha);
  const ConvenientPair& p = pairs_->at(alpha);
  return forward_ ? p.s(input(alpha), input(0)) : p.t(input(alpha), input(0));
}

ProductMapPtr PairProductMap::inverse() const {
  auto inv = std::make_shared<PairProductMap>(*this);
  inv->forward_ = !forward_;
  return inv;
}

ConstructionRecord PairProductMap::describe() const {
  ConstructionRecord r{forward_ ? "pair-map" : "pair-map-inverse", {}};
  for (std::size_t a : omega_) r.fields.emplace_back(std::to_string(a), pairs_->at(a).provenance);
  return r;
}

WgppResult wgpp_transform(const std::vector<ProductPoint>& points, const std::map<std::size_t, ConvenientPair>& pairs,
                          std::size_t depth) {
  WgppResult result;
  if (points.empty()) {
    result.map = std::make_shared<PairProductMap>(std::set<std::size_t>{}, std::map<std::size_t, ConvenientPair>{});
    return result;
  }
  require_common_space(points);
  const ProductSpace& space = *points.front().space();
  const std::size_t n = effective_depth(space, depth);
  if (n == 0) throw PreconditionFailure("depth must include index 0");
  const Table t = evaluate(points, n);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (space.factor(0).same_point(t[i][0], t[j][0])) {
        throw PreconditionFailure("pi_0 is not injective: points " + std::to_string(j) + " and " + std::to_string(i) +
                                  " share coordinate 0");
      }
    }
  }
  result.before = check_general_position(points, depth);

  // Pairs with disagreements in [1, n), smallest first; each reserves the
  // first, third, ... of its still unassigned indices.
  std::vector<std::vector<std::size_t>> sets;
  for (const auto& c : result.before.pairs) {
    std::vector<std::size_t> s;
    for (std::size_t a : c.disagree) {
      if (a >= 1) s.push_back(a);
    }
    if (!s.empty()) sets.push_back(std::move(s));
  }
  std::stable_sort(sets.begin(), sets.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
  std::set<std::size_t> assigned, reserved;
  for (const auto& s : sets) {
    bool reserve = true;
    for (std::size_t a : s) {
      if (!assigned.insert(a).second) continue;
      if (reserve) reserved.insert(a);
      reserve = !reserve;
    }
  }
  for (std::size_t a = 1; a < n; ++a) {
    if (!reserved.count(a)) result.omega.insert(a);
  }

  std::map<std::size_t, ConvenientPair> used;
  for (std::size_t a : result.omega) {
    const auto it = pairs.find(a);
    if (it == pairs.end()) throw PreconditionFailure("no convenient pair for index " + std::to_string(a));
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!it->second.focus_x(t[i][a]) || !it->second.focus_y(t[i][0])) {
        throw PreconditionFailure("pair at index " + std::to_string(a) + " is not focused on the projections of D");
      }
    }
    used.emplace(a, it->second);
  }
  result.map = std::make_shared<PairProductMap>(result.omega, std::move(used));
  for (const auto& p : points) result.image.push_back(p.then(result.map));
  result.after = check_general_position(result.image, depth);
  return result;
}

// ---- block regrouping ---------------------------------------------------------

PartitionPlan block_regroup(const std::vector<ProductPoint>& points, std::size_t depth,
                            const std::set<std::size_t>& omega_star, std::size_t chunk_size) {
  if (chunk_size == 0) throw PreconditionFailure("chunk size must be positive");
  PartitionPlan plan;
  if (points.empty()) return plan;
  require_common_space(points);
  const ProductSpace& space = *points.front().space();
  const std::size_t n = effective_depth(space, depth);
  const Table t = evaluate(points, n);

  std::map<std::size_t, std::size_t> chunk_of;
  for (std::size_t a : omega_star) {
    if (a >= n) break;
    if (plan.chunks.empty() || plan.chunks.back().size() == chunk_size) plan.chunks.emplace_back();
    plan.chunks.back().push_back(a);
    chunk_of[a] = plan.chunks.size() - 1;
  }

  std::vector<std::pair<std::size_t, std::size_t>> all_pairs;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) all_pairs.emplace_back(i, j);
  }
  auto separates = [&](std::size_t a, std::size_t i, std::size_t j) {
    return !space.factor(a).same_point(t[i][a], t[j][a]);
  };

  std::vector<bool> taken(n, false);
  std::vector<std::size_t> current;
  std::set<std::pair<std::size_t, std::size_t>> open(all_pairs.begin(), all_pairs.end());
  auto add = [&](std::size_t a) {
    taken[a] = true;
    current.push_back(a);
    for (auto it = open.begin(); it != open.end();) it = separates(a, it->first, it->second) ? open.erase(it) : std::next(it);
  };
  for (std::size_t a = 0; a < n; ++a) {
    if (taken[a]) continue;
    const auto c = chunk_of.find(a);
    if (c == chunk_of.end()) {
      add(a);
    } else {
      for (std::size_t b : plan.chunks[c->second]) add(b);
    }
    if (open.empty()) {
      std::sort(current.begin(), current.end());
      plan.blocks.push_back(std::move(current));
      current.clear();
      open = std::set<std::pair<std::size_t, std::size_t>>(all_pairs.begin(), all_pairs.end());
    }
  }
  if (!current.empty()) {
    if (plan.blocks.empty()) {
      const auto [i, j] = *open.begin();
      throw PreconditionFailure("points " + std::to_string(i) + " and " + std::to_string(j) +
                                " cannot be separated within depth " + std::to_string(n));
    }
    auto& last = plan.blocks.back();
    last.insert(last.end(), current.begin(), current.end());
    std::sort(last.begin(), last.end());
  }
  for (const auto& block : plan.blocks) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> w;
    for (const auto& [i, j] : all_pairs) {
      for (std::size_t a : block) {
        if (separates(a, i, j)) {
          w.emplace(std::make_pair(i, j), a);
          break;
        }
      }
    }
    plan.witnesses.push_back(std::move(w));
  }
  return plan;
}

std::string audit_plan(const PartitionPlan& plan, const std::vector<ProductPoint>& points, std::size_t depth) {
  if (points.empty()) return "";
  const ProductSpace& space = *points.front().space();
  const std::size_t n = effective_depth(space, depth);
  const Table t = evaluate(points, n);
  std::vector<int> owner(n, -1);
  for (std::size_t b = 0; b < plan.blocks.size(); ++b) {
    for (std::size_t a : plan.blocks[b]) {
      if (a >= n) return "block " + std::to_string(b) + " uses index " + std::to_string(a) + " beyond the depth";
      if (owner[a] >= 0) return "index " + std::to_string(a) + " lies in two blocks";
      owner[a] = static_cast<int>(b);
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    if (owner[a] < 0) return "index " + std::to_string(a) + " is not covered";
  }
  for (std::size_t b = 0; b < plan.blocks.size(); ++b) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t j = i + 1; j < points.size(); ++j) {
        const bool ok = std::any_of(plan.blocks[b].begin(), plan.blocks[b].end(), [&](std::size_t a) {
          return !space.factor(a).same_point(t[i][a], t[j][a]);
        });
        if (!ok) return "block " + std::to_string(b) + " does not separate points " + std::to_string(i) + " and " + std::to_string(j);
      }
    }
  }
  for (std::size_t c = 0; c < plan.chunks.size(); ++c) {
    const int b = owner[plan.chunks[c].front()];
    for (std::size_t a : plan.chunks[c]) {
      if (owner[a] != b) return "chunk " + std::to_string(c) + " is split between blocks";
    }
  }
  return "";
}

}  // namespace cdh
