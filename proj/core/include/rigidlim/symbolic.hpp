#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rigidlim/types.hpp"

namespace rigidlim {

/// Finite symbol alphabet I.
struct Alphabet {
  int size;

  explicit Alphabet(int size) : size(size) {
    if (size < 2) throw InvalidWordError("alphabet needs at least two symbols");
  }
};

/// Finite word over an alphabet; the empty word acts as the identity.
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<int> symbols) : symbols_(std::move(symbols)) {}

  static Word empty() { return Word{}; }

  int length() const { return static_cast<int>(symbols_.size()); }
  bool is_empty() const { return symbols_.empty(); }
  int operator[](int k) const { return symbols_[std::size_t(k)]; }
  const std::vector<int>& symbols() const { return symbols_; }

  void append(int symbol) { symbols_.push_back(symbol); }

  bool valid_over(const Alphabet& alphabet) const {
    for (int s : symbols_) {
      if (s < 0 || s >= alphabet.size) return false;
    }
    return true;
  }

  bool is_prefix_of(const Word& other) const {
    if (length() > other.length()) return false;
    for (int k = 0; k < length(); ++k) {
      if (symbols_[std::size_t(k)] != other[k]) return false;
    }
    return true;
  }

  bool operator==(const Word& other) const { return symbols_ == other.symbols_; }
  bool operator<(const Word& other) const { return symbols_ < other.symbols_; }

  /// Dot-separated rendering used by the CSV exports, e.g. "0.2.1".
  std::string to_string() const;

 private:
  std::vector<int> symbols_;
};

/// Juxtaposition i,j of two words.
Word concat(const Word& i, const Word& j);

/// Refuse enumerations beyond this many words; deeper evaluation goes
/// through sampled codes instead.
inline constexpr std::uint64_t kEnumerationCap = 100'000'000;

std::uint64_t count_cylinders(const Alphabet& alphabet, int depth);

/// All of I^n in lexicographic order.
std::vector<Word> cylinders_at_depth(const Alphabet& alphabet, int depth);

/// A seeded random word of the given length.
Word random_word(const Alphabet& alphabet, int length, Rng& rng);

}  // namespace rigidlim
