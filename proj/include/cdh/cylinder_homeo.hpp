#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cdh/scalar.hpp"
#include "cdh/sequence.hpp"

namespace cdh {

/// A clopen piece of sequence space: all x with prefix `prefix`, minus the
/// cylinders prefix·u for u in `holes`. Holes are kept as a non-empty
/// antichain; a hole equal to the empty word would make the cell empty.
struct Cell {
  Word prefix;
  std::vector<Word> holes;
};

/// Maps source·w to target·w for every w avoiding the holes. Source and target
/// have equal length.
struct CylinderRule {
  Word source;
  Word target;
  std::vector<Word> holes;
};

/// Homeomorphism of 2^omega (alphabet 2) or omega^omega (alphabet 0, meaning
/// unbounded) that acts on a finite partition into cells by prefix
/// substitution. Every automorphism of 2^omega given by a finite cylinder
/// table has this form.
class CylinderHomeo {
 public:
  explicit CylinderHomeo(int alphabet = 2);

  /// Trusts the rules; call validate() for untrusted input.
  static CylinderHomeo from_rules(int alphabet, std::vector<CylinderRule> rules);

  /// Permutes a finite set of equal-length words (keys and values must be
  /// the same set) and fixes everything outside their cylinders.
  static CylinderHomeo prefix_permutation(int alphabet, const std::map<Word, Word>& perm);

  int alphabet() const { return alphabet_; }
  const std::vector<CylinderRule>& rules() const { return rules_; }

  Sequence apply(const Sequence& x) const;
  CylinderHomeo inverse() const;

  /// Longest source word or hole reached by any rule.
  std::size_t depth() const;

  Scalar sup_displacement() const;

  /// Smallest l such that the cylinder of x of length l lies inside one cell,
  /// so that the map acts on it by a single prefix substitution.
  std::size_t local_modulus(const Sequence& x) const;

  /// Index of the rule whose cell contains x.
  std::size_t rule_index(const Sequence& x) const;

  bool is_identity() const;

  /// Checks that sources and targets both partition the space. Returns a
  /// description of the first problem found.
  std::optional<std::string> validate() const;

  friend CylinderHomeo compose(const CylinderHomeo& outer, const CylinderHomeo& inner);
  friend bool operator==(const CylinderHomeo& a, const CylinderHomeo& b);
  friend Scalar sup_distance(const CylinderHomeo& a, const CylinderHomeo& b);

 private:
  void reindex();
  // Rules whose source prefix is comparable with `word` (one extends the other).
  std::vector<std::size_t> comparable_sources(const Word& word) const;

  int alphabet_ = 2;
  std::vector<CylinderRule> rules_;
  // Path-compressed trie over the rule sources.
  struct Node {
    Word label;  // edge from the parent
    std::vector<std::pair<Letter, std::size_t>> children;
    std::vector<std::size_t> rules;
  };
  std::optional<std::size_t> child(std::size_t node, Letter first) const;
  std::optional<std::size_t> find_node(const Word& word) const;
  void collect_subtree(std::size_t node, std::vector<std::size_t>& out) const;
  std::vector<Node> trie_;
};

/// outer after inner.
CylinderHomeo compose(const CylinderHomeo& outer, const CylinderHomeo& inner);

/// sup over x of d(a(x), b(x)), exact.
Scalar sup_distance(const CylinderHomeo& a, const CylinderHomeo& b);

/// Cell arithmetic, exposed for tests.
std::optional<Cell> intersect_cells(const Cell& a, const Cell& b, int alphabet);
void normalize_holes(std::vector<Word>& holes, int alphabet);
bool cell_contains(const Cell& cell, const Sequence& x);
/// Measure of the cell under the product of the letter weights
/// 1/2 (alphabet 2) or 2^-(a+1) (unbounded alphabet).
Scalar cell_measure(const Cell& cell, int alphabet);

}  // namespace cdh
