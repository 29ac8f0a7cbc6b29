#include "cdh/sequence.hpp"

#include <algorithm>
#include <sstream>

#include "cdh/errors.hpp"

namespace cdh {

Sequence::Sequence(Word letters) : head_(std::move(letters)) { compute_support(); }

Sequence::Sequence(Word head, std::shared_ptr<const Word> tail, std::size_t tail_offset)
    : head_(std::move(head)), tail_(std::move(tail)), tail_offset_(tail_offset) {
  if (tail_ && tail_offset_ >= tail_->size()) {
    tail_.reset();
    tail_offset_ = 0;
  }
  compute_support();
}

Sequence Sequence::constant_prefix(std::size_t length, Letter letter) {
  return Sequence(Word(length, letter));
}

void Sequence::compute_support() {
  if (tail_) {
    std::size_t end = tail_->size();
    while (end > tail_offset_ && (*tail_)[end - 1] == 0) --end;
    if (end > tail_offset_) {
      support_ = head_.size() + (end - tail_offset_);
      return;
    }
    tail_.reset();
    tail_offset_ = 0;
  }
  std::size_t end = head_.size();
  while (end > 0 && head_[end - 1] == 0) --end;
  head_.resize(end);
  support_ = end;
}

Letter Sequence::operator[](std::size_t index) const {
  if (index < head_.size()) return head_[index];
  if (index >= support_) return 0;
  return (*tail_)[tail_offset_ + (index - head_.size())];
}

Word Sequence::prefix(std::size_t length) const {
  Word out(length, 0);
  const std::size_t n = std::min(length, support_);
  for (std::size_t i = 0; i < n; ++i) out[i] = (*this)[i];
  return out;
}

bool Sequence::has_prefix(const Word& word) const {
  for (std::size_t i = 0; i < word.size(); ++i) {
    if ((*this)[i] != word[i]) return false;
  }
  return true;
}

Sequence Sequence::replace_prefix(const Word& replacement) const {
  const std::size_t n = replacement.size();
  if (n <= head_.size()) {
    Word head = replacement;
    head.insert(head.end(), head_.begin() + static_cast<std::ptrdiff_t>(n), head_.end());
    return Sequence(std::move(head), tail_, tail_offset_);
  }
  if (!tail_) return Sequence(replacement);
  return Sequence(replacement, tail_, tail_offset_ + (n - head_.size()));
}

bool operator==(const Sequence& a, const Sequence& b) {
  if (a.support_ != b.support_) return false;
  return !first_difference(a, b).has_value();
}

bool operator<(const Sequence& a, const Sequence& b) {
  const auto diff = first_difference(a, b);
  if (!diff) return false;
  return a[*diff] < b[*diff];
}

std::optional<std::size_t> first_difference(const Sequence& a, const Sequence& b) {
  const std::size_t n = std::max(a.support(), b.support());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] != b[i]) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> first_difference(const Word& a, const Word& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] != b[i]) return i;
  }
  if (a.size() != b.size()) return n;
  return std::nullopt;
}

std::optional<std::size_t> first_difference(const Word& word, const Sequence& seq) {
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (word[i] != seq[i]) return i;
  }
  return std::nullopt;
}

bool is_prefix(const Word& prefix, const Word& word) {
  return prefix.size() <= word.size() && std::equal(prefix.begin(), prefix.end(), word.begin());
}

Scalar sequence_distance(const Sequence& a, const Sequence& b) {
  const auto diff = first_difference(a, b);
  if (!diff) return Scalar(0);
  return pow2(-static_cast<long>(*diff));
}

std::string word_to_string(const Word& word, bool binary) {
  std::string out;
  if (binary) {
    out.reserve(word.size());
    for (Letter l : word) out.push_back(l == 0 ? '0' : '1');
    return out;
  }
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i) out.push_back('.');
    out += std::to_string(word[i]);
  }
  return out;
}

Word word_from_string(const std::string& text, bool binary) {
  Word out;
  if (binary) {
    out.reserve(text.size());
    for (char c : text) {
      if (c != '0' && c != '1') throw ParseError("bad binary word: " + text);
      out.push_back(c - '0');
    }
    return out;
  }
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, '.')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 0) throw ParseError("bad letter: " + item);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw ParseError("bad letter: " + item);
    }
  }
  return out;
}

}  // namespace cdh
