#include "rigidlim/symbolic.hpp"

#include <cmath>

namespace rigidlim {

std::string Word::to_string() const {
  std::string out;
  for (std::size_t k = 0; k < symbols_.size(); ++k) {
    if (k > 0) out += '.';
    out += std::to_string(symbols_[k]);
  }
  return out;
}

Word concat(const Word& i, const Word& j) {
  std::vector<int> symbols = i.symbols();
  symbols.insert(symbols.end(), j.symbols().begin(), j.symbols().end());
  return Word(std::move(symbols));
}

std::uint64_t count_cylinders(const Alphabet& alphabet, int depth) {
  std::uint64_t n = 1;
  for (int k = 0; k < depth; ++k) {
    if (n > kEnumerationCap / std::uint64_t(alphabet.size)) {
      throw CapacityError("cylinder enumeration exceeds the cap at depth " +
                          std::to_string(depth));
    }
    n *= std::uint64_t(alphabet.size);
  }
  return n;
}

std::vector<Word> cylinders_at_depth(const Alphabet& alphabet, int depth) {
  if (depth < 0) throw InvalidWordError("negative cylinder depth");
  const std::uint64_t total = count_cylinders(alphabet, depth);

  std::vector<Word> out;
  out.reserve(total);
  std::vector<int> current(std::size_t(depth), 0);
  for (std::uint64_t n = 0; n < total; ++n) {
    out.emplace_back(current);
    for (int k = depth - 1; k >= 0; --k) {  // lexicographic increment
      if (++current[std::size_t(k)] < alphabet.size) break;
      current[std::size_t(k)] = 0;
    }
  }
  return out;
}

Word random_word(const Alphabet& alphabet, int length, Rng& rng) {
  std::vector<int> symbols(std::size_t(length), 0);
  for (auto& s : symbols) s = rng.uniform_int(0, alphabet.size - 1);
  return Word(std::move(symbols));
}

}  // namespace rigidlim
