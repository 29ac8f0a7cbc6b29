#include "cdh/obstructions.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include "cdh/errors.hpp"
#include "cdh/general_position.hpp"

namespace cdh {

namespace {

std::string key_string(const std::vector<int>& key) {
  std::string out;
  for (int b : key) out += static_cast<char>('0' + b);
  return out;
}

// Another point of the same connected piece.
FactorPoint sibling(const FactorSpace& f, const FactorPoint& p) {
  switch (f.kind()) {
    case FactorKind::Circle: return frac(as_scalar(p) + ratio(1, 2));
    case FactorKind::Line: return Scalar(as_scalar(p) + 1);
    default: {
      Vec v = as_vector(p);
      if (v.norm() > 0.25) return Vec(Vec::Zero(v.size()));
      v(0) += 0.5;
      return v;
    }
  }
}

}  // namespace

// ---- the compact-neighbourhood locus ---------------------------------------------

// Sequences drop trailing zeros, so the last entry of basic_box(n) is bumped
// by one to keep the map injective onto the finite-support points.
Sequence row_value(std::size_t n) {
  Word w = basic_word(FactorSpace::baire(), n);
  if (!w.empty()) ++w.back();
  return Sequence(std::move(w));
}

std::size_t row_of(const Sequence& q) {
  Word w = q.letters();
  if (!w.empty()) --w.back();
  // Each entry w_j contributes w_j zeros and a one, read from the low bit.
  std::size_t n = 0, bit = 0;
  for (Letter l : w) {
    bit += static_cast<std::size_t>(l);
    if (bit >= 64) throw IndexOutOfRange("row index needs more than 64 bits");
    n |= std::size_t{1} << bit;
    ++bit;
  }
  return n;
}

SymbolicPoint SymbolicPoint::make_row(std::size_t n, Sequence cantor) {
  return SymbolicPoint{Tag::Row, n, row_value(n), std::move(cantor)};
}

SymbolicPoint SymbolicPoint::make_limit(Sequence baire, Sequence cantor) {
  return SymbolicPoint{Tag::Limit, 0, std::move(baire), std::move(cantor)};
}

std::string SymbolicPoint::describe() const {
  const std::string c = word_to_string(cantor.letters(), true);
  if (tag == Tag::Row) return "(" + std::to_string(row) + ", q_" + std::to_string(row) + ", " + c + ")";
  return "(omega, " + word_to_string(baire.letters(), false) + ", " + c + ")";
}

std::string to_string(LocalCompactness c) {
  return c == LocalCompactness::HasCompactNeighborhood ? "has-compact-neighbourhood" : "no-compact-neighbourhood";
}

LocalCompactness classify_local_compactness(const SymbolicPoint& p) {
  return p.tag == SymbolicPoint::Tag::Row ? LocalCompactness::HasCompactNeighborhood : LocalCompactness::No;
}

SymbolicPoint SymbolicHomeo::apply(const SymbolicPoint& p) const {
  SymbolicPoint out = p;
  out.baire = baire.apply(p.baire);
  out.cantor = cantor.apply(p.cantor);
  if (p.tag == SymbolicPoint::Tag::Row) out.row = row_of(out.baire);
  return out;
}

ObstructionCertificate witness_compact_locus(const std::vector<SymbolicPoint>& D,
                                             const std::vector<SymbolicPoint>& E) {
  ObstructionCertificate c;
  c.construction = "compact-locus";
  c.invariant = "the set of points with a compact neighbourhood is preserved by homeomorphisms";
  for (std::size_t i = 0; i < D.size(); ++i) {
    if (classify_local_compactness(D[i]) == LocalCompactness::No) {
      c.reason = "D[" + std::to_string(i) + "] = " + D[i].describe() + " has no compact neighbourhood";
      return c;
    }
  }
  auto it = std::find_if(E.begin(), E.end(),
                         [](const SymbolicPoint& e) { return classify_local_compactness(e) == LocalCompactness::No; });
  if (it == E.end()) {
    c.reason = "every point of E has a compact neighbourhood";
    return c;
  }
  const auto k = static_cast<std::size_t>(it - E.begin());
  c.witness = true;
  c.facts.push_back("all " + std::to_string(D.size()) + " points of D are rows: each has a compact neighbourhood");
  c.facts.push_back("E[" + std::to_string(k) + "] = " + it->describe() + " is a limit point: no compact neighbourhood");
  c.facts.push_back("a homeomorphism h with h[D] = E would send some d to E[" + std::to_string(k) +
                    "], carrying a compact neighbourhood of d onto one of E[" + std::to_string(k) + "]");
  return c;
}

std::pair<std::vector<SymbolicPoint>, std::vector<SymbolicPoint>> build_compact_locus_witness(std::size_t count) {
  if (count == 0) throw PreconditionFailure("the witness needs at least one row");
  std::vector<SymbolicPoint> D, E;
  for (std::size_t n = 0; n < count; ++n) {
    auto p = SymbolicPoint::make_row(n, Sequence(basic_word(FactorSpace::cantor(), n)));
    D.push_back(p);
    if (n > 0) E.push_back(p);
  }
  E.push_back(SymbolicPoint::make_limit(row_value(0), Sequence(Word{1})));
  return {std::move(D), std::move(E)};
}

// ---- components of two-piece products --------------------------------------------

SumSpace::SumSpace(std::vector<TwoPieceFactor> pattern, std::size_t depth)
    : pattern_(std::move(pattern)), depth_(depth) {
  if (pattern_.empty()) throw PreconditionFailure("empty factor pattern");
  for (const auto& f : pattern_) {
    for (const FactorSpace* s : {&f.piece0, &f.piece1}) {
      if (s->zero_dimensional()) throw UnsupportedFactor("pieces must be connected");
    }
  }
}

const FactorSpace& SumSpace::piece(std::size_t alpha, int which) const {
  const auto& f = factor(alpha);
  return which == 0 ? f.piece0 : f.piece1;
}

void check_sum_point(const SumSpace& space, const SumPoint& p) {
  if (p.pieces.size() != space.depth() || p.values.size() != space.depth()) {
    throw PreconditionFailure("a point lists one piece and one value per evaluated coordinate");
  }
  for (std::size_t a = 0; a < space.depth(); ++a) {
    if (p.pieces[a] != 0 && p.pieces[a] != 1) throw PreconditionFailure("piece labels are 0 and 1");
    space.piece(a, p.pieces[a]).check_point(p.values[a]);
  }
}

std::vector<int> component_key(const SumSpace& space, const SumPoint& p) {
  check_sum_point(space, p);
  return p.pieces;
}

SumPoint SumHomeo::apply(const SumSpace& space, const SumPoint& p) const {
  check_sum_point(space, p);
  SumPoint out = p;
  for (const auto& [alpha, hs] : maps) {
    if (alpha >= space.depth()) continue;
    out.values[alpha] = (p.pieces[alpha] == 0 ? hs.first : hs.second).apply(p.values[alpha]);
  }
  return out;
}

ObstructionCertificate witness_components(const SumSpace& space, const std::vector<SumPoint>& D,
                                          const std::vector<SumPoint>& E) {
  ObstructionCertificate c;
  c.construction = "components";
  c.invariant = "a homeomorphism permutes components, so the multiset of |D n C| over components is preserved";
  std::map<std::vector<int>, std::size_t> dcount, ecount;
  for (const auto& d : D) ++dcount[component_key(space, d)];
  for (const auto& e : E) ++ecount[component_key(space, e)];
  for (const auto& [k, n] : dcount) {
    if (n == 1) {
      c.reason = "component " + key_string(k) + " holds a single point of D";
      return c;
    }
  }
  auto lone = std::find_if(ecount.begin(), ecount.end(), [](const auto& kv) { return kv.second == 1; });
  if (lone == ecount.end()) {
    c.reason = "no component holds exactly one point of E";
    return c;
  }
  c.witness = true;
  for (const auto& [k, n] : dcount) {
    c.facts.push_back("D populates component " + key_string(k) + " with " + std::to_string(n) + " points");
  }
  c.facts.push_back("E holds exactly one point in component " + key_string(lone->first));
  for (std::size_t i = 0; i < D.size(); ++i) {
    const auto k = component_key(space, D[i]);
    std::size_t a = 0;
    while (a < k.size() && k[a] == lone->first[a]) ++a;
    if (a == k.size()) {
      c.facts.push_back("D[" + std::to_string(i) + "] shares that component");
    } else {
      c.facts.push_back("D[" + std::to_string(i) + "] differs from it at coordinate " + std::to_string(a));
    }
  }
  return c;
}

ComponentWitness build_component_witness(const SumSpace& space, const std::vector<SumPoint>& D) {
  ComponentWitness w;
  std::set<std::vector<int>> populated;
  for (const auto& d : D) {
    populated.insert(component_key(space, d));
    w.D.push_back(d);
    SumPoint twin = d;
    twin.values[0] = sibling(space.piece(0, d.pieces[0]), d.values[0]);
    w.D.push_back(std::move(twin));
  }
  const std::size_t bits = std::min<std::size_t>(space.depth(), 63);
  std::optional<std::vector<int>> free_key;
  for (std::size_t k = 0; k <= D.size() && k < (std::size_t{1} << bits); ++k) {
    std::vector<int> key(space.depth(), 0);
    for (std::size_t a = 0; a < bits; ++a) key[a] = static_cast<int>((k >> a) & 1);
    if (!populated.count(key)) {
      free_key = std::move(key);
      break;
    }
  }
  if (!free_key) throw PreconditionFailure("D populates every component of the truncation");
  w.z_key = *free_key;
  w.z.pieces = *free_key;
  for (std::size_t a = 0; a < space.depth(); ++a) w.z.values.push_back(space.piece(a, w.z.pieces[a]).origin());
  w.E = w.D;
  w.E.push_back(w.z);
  w.certificate = witness_components(space, w.D, w.E);
  return w;
}

}  // namespace cdh
