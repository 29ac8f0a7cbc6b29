#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cdh/scalar.hpp"

namespace cdh {

using Letter = std::int64_t;
using Word = std::vector<Letter>;

/// A point of 2^omega or omega^omega with finite support: the letters of
/// `head`, then the letters of a shared tail, then zeros forever.
///
/// Points of countable dense sets carry long identifying tails that are the
/// same for every coordinate of the point, so the tail is shared rather than
/// copied. Equality and ordering are by value.
class Sequence {
 public:
  Sequence() = default;
  explicit Sequence(Word letters);
  Sequence(Word head, std::shared_ptr<const Word> tail, std::size_t tail_offset = 0);

  static Sequence constant_prefix(std::size_t length, Letter letter);

  Letter operator[](std::size_t index) const;

  /// One past the last non-zero letter.
  std::size_t support() const { return support_; }

  Word prefix(std::size_t length) const;
  bool has_prefix(const Word& word) const;

  /// Replaces the first `replacement.size()` letters by `replacement`.
  Sequence replace_prefix(const Word& replacement) const;

  /// All letters up to support().
  Word letters() const { return prefix(support_); }

  friend bool operator==(const Sequence& a, const Sequence& b);
  friend bool operator<(const Sequence& a, const Sequence& b);

 private:
  void compute_support();

  Word head_;
  std::shared_ptr<const Word> tail_;
  std::size_t tail_offset_ = 0;
  std::size_t support_ = 0;
};

inline bool operator!=(const Sequence& a, const Sequence& b) { return !(a == b); }

/// First index where the two sequences differ, or nullopt if equal.
std::optional<std::size_t> first_difference(const Sequence& a, const Sequence& b);
std::optional<std::size_t> first_difference(const Word& a, const Word& b);
/// First index where `word` and `seq` differ, limited to |word|.
std::optional<std::size_t> first_difference(const Word& word, const Sequence& seq);

bool is_prefix(const Word& prefix, const Word& word);

/// 2^-min{i : a_i != b_i}, 0 when equal.
Scalar sequence_distance(const Sequence& a, const Sequence& b);

/// Compact text: Cantor words as "0110", others as "3.0.12".
std::string word_to_string(const Word& word, bool binary);
Word word_from_string(const std::string& text, bool binary);

}  // namespace cdh
