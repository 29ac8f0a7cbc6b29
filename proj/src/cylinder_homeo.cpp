#include "cdh/cylinder_homeo.hpp"

#include <algorithm>

#include "cdh/errors.hpp"

namespace cdh {

namespace {

bool range_less(Word::const_iterator a0, Word::const_iterator a1, Word::const_iterator b0,
                Word::const_iterator b1) {
  return std::lexicographical_compare(a0, a1, b0, b1);
}

bool word_starts_with(const Word& word, Word::const_iterator p0, Word::const_iterator p1) {
  const auto n = static_cast<std::size_t>(p1 - p0);
  return n <= word.size() && std::equal(p0, p1, word.begin());
}

// Holes are a sorted antichain, so a hole that is a prefix of w must be the
// largest hole not exceeding w.
bool some_hole_is_prefix(const std::vector<Word>& holes, Word::const_iterator w0,
                         Word::const_iterator w1) {
  auto it = std::upper_bound(holes.begin(), holes.end(), 0, [&](int, const Word& h) {
    return range_less(w0, w1, h.begin(), h.end());
  });
  if (it == holes.begin()) return false;
  --it;
  const auto n = static_cast<std::size_t>(w1 - w0);
  return it->size() <= n && std::equal(it->begin(), it->end(), w0);
}

Word concat(const Word& a, Word::const_iterator b0, Word::const_iterator b1) {
  Word out = a;
  out.insert(out.end(), b0, b1);
  return out;
}

Scalar letter_weight(Letter a, int alphabet) {
  if (alphabet == 2) return pow2(-1);
  return pow2(-(static_cast<long>(a) + 1));
}

Scalar word_weight(const Word& w, int alphabet) {
  Scalar out = 1;
  for (Letter a : w) out *= letter_weight(a, alphabet);
  return out;
}

}  // namespace

void normalize_holes(std::vector<Word>& holes, int alphabet) {
  std::sort(holes.begin(), holes.end());
  std::vector<Word> kept;
  kept.reserve(holes.size());
  for (auto& h : holes) {
    if (!kept.empty() && is_prefix(kept.back(), h)) continue;
    kept.push_back(std::move(h));
    // Two complete binary siblings collapse to their parent.
    while (alphabet == 2 && kept.size() >= 2) {
      const Word& a = kept[kept.size() - 2];
      const Word& b = kept.back();
      if (a.empty() || a.size() != b.size() || a.back() != 0 || b.back() != 1 ||
          !std::equal(a.begin(), a.end() - 1, b.begin())) {
        break;
      }
      Word parent(a.begin(), a.end() - 1);
      kept.pop_back();
      kept.pop_back();
      kept.push_back(std::move(parent));
    }
  }
  holes = std::move(kept);
}

std::optional<Cell> intersect_cells(const Cell& a, const Cell& b, int alphabet) {
  const Cell* shorter = &a;
  const Cell* longer = &b;
  if (a.prefix.size() > b.prefix.size()) std::swap(shorter, longer);
  if (!is_prefix(shorter->prefix, longer->prefix)) return std::nullopt;
  const auto w0 = longer->prefix.begin() + static_cast<std::ptrdiff_t>(shorter->prefix.size());
  const auto w1 = longer->prefix.end();
  if (some_hole_is_prefix(shorter->holes, w0, w1)) return std::nullopt;

  Cell out{longer->prefix, longer->holes};
  const auto& hs = shorter->holes;
  auto it = std::lower_bound(hs.begin(), hs.end(), 0, [&](const Word& h, int) {
    return range_less(h.begin(), h.end(), w0, w1);
  });
  const auto wn = static_cast<std::ptrdiff_t>(w1 - w0);
  for (; it != hs.end() && word_starts_with(*it, w0, w1); ++it) {
    out.holes.emplace_back(it->begin() + wn, it->end());
  }
  normalize_holes(out.holes, alphabet);
  if (!out.holes.empty() && out.holes.front().empty()) return std::nullopt;
  return out;
}

bool cell_contains(const Cell& cell, const Sequence& x) {
  if (!x.has_prefix(cell.prefix)) return false;
  const std::size_t base = cell.prefix.size();
  for (const auto& h : cell.holes) {
    bool inside = true;
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (x[base + i] != h[i]) {
        inside = false;
        break;
      }
    }
    if (inside) return false;
  }
  return true;
}

Scalar cell_measure(const Cell& cell, int alphabet) {
  Scalar rest = 1;
  for (const auto& h : cell.holes) rest -= word_weight(h, alphabet);
  return word_weight(cell.prefix, alphabet) * rest;
}

CylinderHomeo::CylinderHomeo(int alphabet) : alphabet_(alphabet) {
  if (alphabet != 0 && alphabet != 2) throw PreconditionFailure("alphabet must be 2 or 0");
  rules_.push_back(CylinderRule{{}, {}, {}});
  reindex();
}

CylinderHomeo CylinderHomeo::from_rules(int alphabet, std::vector<CylinderRule> rules) {
  CylinderHomeo out(alphabet);
  out.rules_.clear();
  for (auto& r : rules) {
    if (r.source.size() != r.target.size()) {
      throw PreconditionFailure("cylinder rule with source and target of different length");
    }
    normalize_holes(r.holes, alphabet);
    if (!r.holes.empty() && r.holes.front().empty()) continue;
    out.rules_.push_back(std::move(r));
  }
  out.reindex();
  return out;
}

CylinderHomeo CylinderHomeo::prefix_permutation(int alphabet, const std::map<Word, Word>& perm) {
  std::vector<CylinderRule> rules;
  std::vector<Word> holes;
  std::vector<Word> targets;
  std::size_t length = perm.empty() ? 0 : perm.begin()->first.size();
  for (const auto& [from, to] : perm) {
    if (from.size() != length || to.size() != length) {
      throw PreconditionFailure("prefix permutation words must share one length");
    }
    targets.push_back(to);
    holes.push_back(from);
    if (from != to) rules.push_back(CylinderRule{from, to, {}});
  }
  std::sort(targets.begin(), targets.end());
  if (targets != holes) throw PreconditionFailure("prefix permutation is not a permutation");
  for (const auto& [from, to] : perm) {
    if (from == to) rules.push_back(CylinderRule{from, from, {}});
  }
  rules.push_back(CylinderRule{{}, {}, holes});
  return from_rules(alphabet, std::move(rules));
}

std::optional<std::size_t> CylinderHomeo::child(std::size_t node, Letter first) const {
  const auto& ch = trie_[node].children;
  auto it = std::lower_bound(ch.begin(), ch.end(), std::pair<Letter, std::size_t>{first, 0});
  if (it == ch.end() || it->first != first) return std::nullopt;
  return it->second;
}

void CylinderHomeo::reindex() {
  trie_.assign(1, Node{});
  for (std::size_t r = 0; r < rules_.size(); ++r) {
    const Word& w = rules_[r].source;
    std::size_t node = 0, pos = 0;
    while (pos < w.size()) {
      auto c = child(node, w[pos]);
      if (!c) {
        trie_.push_back(Node{Word(w.begin() + static_cast<std::ptrdiff_t>(pos), w.end()), {}, {}});
        auto& ch = trie_[node].children;
        const std::pair<Letter, std::size_t> entry{w[pos], trie_.size() - 1};
        ch.insert(std::lower_bound(ch.begin(), ch.end(), entry), entry);
        node = trie_.size() - 1;
        pos = w.size();
        break;
      }
      const Word& label = trie_[*c].label;
      std::size_t k = 0;
      while (k < label.size() && pos + k < w.size() && label[k] == w[pos + k]) ++k;
      if (k < label.size()) {
        // Split the edge after k letters.
        Node mid{Word(label.begin(), label.begin() + static_cast<std::ptrdiff_t>(k)), {}, {}};
        trie_[*c].label.erase(trie_[*c].label.begin(), trie_[*c].label.begin() + static_cast<std::ptrdiff_t>(k));
        mid.children.emplace_back(trie_[*c].label.front(), *c);
        trie_.push_back(std::move(mid));
        for (auto& e : trie_[node].children) {
          if (e.second == *c) e.second = trie_.size() - 1;
        }
        c = trie_.size() - 1;
      }
      node = *c;
      pos += k;
    }
    trie_[node].rules.push_back(r);
  }
}

std::optional<std::size_t> CylinderHomeo::find_node(const Word& word) const {
  std::size_t node = 0, pos = 0;
  while (pos < word.size()) {
    auto c = child(node, word[pos]);
    if (!c) return std::nullopt;
    const Word& label = trie_[*c].label;
    if (pos + label.size() > word.size() ||
        !std::equal(label.begin(), label.end(), word.begin() + static_cast<std::ptrdiff_t>(pos))) {
      return std::nullopt;
    }
    node = *c;
    pos += label.size();
  }
  return node;
}

void CylinderHomeo::collect_subtree(std::size_t node, std::vector<std::size_t>& out) const {
  out.insert(out.end(), trie_[node].rules.begin(), trie_[node].rules.end());
  for (const auto& [l, c] : trie_[node].children) collect_subtree(c, out);
}

std::vector<std::size_t> CylinderHomeo::comparable_sources(const Word& word) const {
  std::vector<std::size_t> out;
  std::size_t node = 0, pos = 0;
  for (;;) {
    if (pos == word.size()) {
      collect_subtree(node, out);
      break;
    }
    out.insert(out.end(), trie_[node].rules.begin(), trie_[node].rules.end());
    auto c = child(node, word[pos]);
    if (!c) break;
    const Word& label = trie_[*c].label;
    const std::size_t n = std::min(label.size(), word.size() - pos);
    if (!std::equal(label.begin(), label.begin() + static_cast<std::ptrdiff_t>(n),
                    word.begin() + static_cast<std::ptrdiff_t>(pos))) {
      break;
    }
    if (n < label.size()) {
      collect_subtree(*c, out);
      break;
    }
    node = *c;
    pos += n;
  }
  return out;
}

std::size_t CylinderHomeo::rule_index(const Sequence& x) const {
  std::size_t node = 0, pos = 0;
  for (;;) {
    for (std::size_t r : trie_[node].rules) {
      bool in_hole = false;
      for (const auto& h : rules_[r].holes) {
        std::size_t k = 0;
        while (k < h.size() && x[pos + k] == h[k]) ++k;
        if (k == h.size()) {
          in_hole = true;
          break;
        }
      }
      if (!in_hole) return r;
    }
    auto c = child(node, x[pos]);
    if (!c) break;
    const Word& label = trie_[*c].label;
    std::size_t k = 0;
    while (k < label.size() && x[pos + k] == label[k]) ++k;
    if (k < label.size()) break;
    node = *c;
    pos += label.size();
  }
  throw PreconditionFailure("cylinder map does not cover the point");
}

Sequence CylinderHomeo::apply(const Sequence& x) const {
  const auto& r = rules_[rule_index(x)];
  if (r.source == r.target) return x;
  return x.replace_prefix(r.target);
}

CylinderHomeo CylinderHomeo::inverse() const {
  std::vector<CylinderRule> rules;
  rules.reserve(rules_.size());
  for (const auto& r : rules_) rules.push_back(CylinderRule{r.target, r.source, r.holes});
  CylinderHomeo out(alphabet_);
  out.rules_ = std::move(rules);
  out.reindex();
  return out;
}

std::size_t CylinderHomeo::depth() const {
  std::size_t out = 0;
  for (const auto& r : rules_) {
    out = std::max(out, r.source.size());
    for (const auto& h : r.holes) out = std::max(out, r.source.size() + h.size());
  }
  return out;
}

Scalar CylinderHomeo::sup_displacement() const {
  Scalar out = 0;
  for (const auto& r : rules_) {
    const auto diff = first_difference(r.source, r.target);
    if (diff) out = std::max(out, pow2(-static_cast<long>(*diff)));
  }
  return out;
}

std::size_t CylinderHomeo::local_modulus(const Sequence& x) const {
  const auto& r = rules_[rule_index(x)];
  std::size_t out = r.source.size();
  const std::size_t base = r.source.size();
  for (const auto& h : r.holes) {
    std::size_t i = 0;
    while (i < h.size() && x[base + i] == h[i]) ++i;
    out = std::max(out, base + i + 1);
  }
  return out;
}

bool CylinderHomeo::is_identity() const {
  return std::all_of(rules_.begin(), rules_.end(),
                     [](const CylinderRule& r) { return r.source == r.target; });
}

std::optional<std::string> CylinderHomeo::validate() const {
  auto letter_ok = [&](Letter a) { return a >= 0 && (alphabet_ == 0 || a < alphabet_); };
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const auto& r = rules_[i];
    if (r.source.size() != r.target.size()) return "rule " + std::to_string(i) + ": length mismatch";
    auto words_ok = std::all_of(r.source.begin(), r.source.end(), letter_ok) &&
                    std::all_of(r.target.begin(), r.target.end(), letter_ok);
    for (const auto& h : r.holes) {
      if (h.empty()) return "rule " + std::to_string(i) + ": empty hole";
      words_ok = words_ok && std::all_of(h.begin(), h.end(), letter_ok);
    }
    if (!words_ok) return "rule " + std::to_string(i) + ": letter outside alphabet";
    auto holes = r.holes;
    normalize_holes(holes, alphabet_);
    if (holes != r.holes) return "rule " + std::to_string(i) + ": holes not normalized";
  }
  for (int side = 0; side < 2; ++side) {
    CylinderHomeo view = side == 0 ? *this : inverse();
    Scalar total = 0;
    for (std::size_t i = 0; i < view.rules_.size(); ++i) {
      const auto& r = view.rules_[i];
      const Cell ci{r.source, r.holes};
      total += cell_measure(ci, alphabet_);
      for (std::size_t j : view.comparable_sources(r.source)) {
        if (j <= i) continue;
        const auto& s = view.rules_[j];
        if (intersect_cells(ci, Cell{s.source, s.holes}, alphabet_)) {
          return std::string(side == 0 ? "source" : "target") + " cells " + std::to_string(i) +
                 " and " + std::to_string(j) + " overlap";
        }
      }
    }
    if (total != 1) {
      return std::string(side == 0 ? "source" : "target") + " cells do not cover the space";
    }
  }
  return std::nullopt;
}

CylinderHomeo compose(const CylinderHomeo& outer, const CylinderHomeo& inner) {
  if (outer.alphabet_ != inner.alphabet_) throw KindMismatch("composing different alphabets");
  std::vector<CylinderRule> rules;
  for (const auto& r : inner.rules_) {
    const Cell image{r.target, r.holes};
    for (std::size_t j : outer.comparable_sources(r.target)) {
      const auto& s = outer.rules_[j];
      auto cell = intersect_cells(image, Cell{s.source, s.holes}, outer.alphabet_);
      if (!cell) continue;
      const Word& q = cell->prefix;
      CylinderRule out;
      out.source = concat(r.source, q.begin() + static_cast<std::ptrdiff_t>(r.target.size()), q.end());
      out.target = concat(s.target, q.begin() + static_cast<std::ptrdiff_t>(s.source.size()), q.end());
      out.holes = std::move(cell->holes);
      rules.push_back(std::move(out));
    }
  }
  CylinderHomeo out(outer.alphabet_);
  out.rules_ = std::move(rules);
  out.reindex();
  return out;
}

Scalar sup_distance(const CylinderHomeo& a, const CylinderHomeo& b) {
  if (a.alphabet_ != b.alphabet_) throw KindMismatch("comparing different alphabets");
  Scalar out = 0;
  for (const auto& r : a.rules_) {
    // Rules shared by both maps agree on their whole cell.
    if (auto node = b.find_node(r.source)) {
      const auto& here = b.trie_[*node].rules;
      if (std::any_of(here.begin(), here.end(), [&](std::size_t j) {
            return b.rules_[j].target == r.target && b.rules_[j].holes == r.holes;
          })) {
        continue;
      }
    }
    const Cell ca{r.source, r.holes};
    for (std::size_t j : b.comparable_sources(r.source)) {
      const auto& s = b.rules_[j];
      auto cell = intersect_cells(ca, Cell{s.source, s.holes}, a.alphabet_);
      if (!cell) continue;
      const Word& q = cell->prefix;
      const Word ia = concat(r.target, q.begin() + static_cast<std::ptrdiff_t>(r.source.size()), q.end());
      const Word ib = concat(s.target, q.begin() + static_cast<std::ptrdiff_t>(s.source.size()), q.end());
      const auto diff = first_difference(ia, ib);
      if (diff) out = std::max(out, pow2(-static_cast<long>(*diff)));
    }
  }
  return out;
}

bool operator==(const CylinderHomeo& a, const CylinderHomeo& b) {
  return a.alphabet_ == b.alphabet_ && sup_distance(a, b) == 0;
}

}  // namespace cdh
