#include <doctest.h>

#include "rigidlim/symbolic.hpp"

using namespace rigidlim;

TEST_CASE("cylinder counting") {
  CHECK(count_cylinders(Alphabet(2), 3) == 8);
  CHECK(count_cylinders(Alphabet(8), 2) == 64);
  CHECK(count_cylinders(Alphabet(2), 0) == 1);
}

TEST_CASE("enumeration order and contents") {
  auto words = cylinders_at_depth(Alphabet(2), 3);
  REQUIRE(words.size() == 8);
  CHECK(words.front() == Word({0, 0, 0}));
  CHECK(words.back() == Word({1, 1, 1}));
  for (std::size_t k = 1; k < words.size(); ++k) CHECK(words[k - 1] < words[k]);

  auto single = cylinders_at_depth(Alphabet(5), 0);
  REQUIRE(single.size() == 1);
  CHECK(single.front().is_empty());
}

TEST_CASE("capacity guard") {
  CHECK_THROWS_AS(count_cylinders(Alphabet(10), 12), CapacityError);
  CHECK_THROWS_AS(cylinders_at_depth(Alphabet(10), 12), CapacityError);
}

TEST_CASE("alphabet needs two symbols") {
  CHECK_THROWS_AS(Alphabet(1), InvalidWordError);
}

TEST_CASE("word basics") {
  Word w({0, 2, 1});
  CHECK(w.length() == 3);
  CHECK(w[1] == 2);
  CHECK(w.to_string() == "0.2.1");
  CHECK(w.valid_over(Alphabet(3)));
  CHECK_FALSE(w.valid_over(Alphabet(2)));

  Word p({0, 2});
  CHECK(p.is_prefix_of(w));
  CHECK_FALSE(w.is_prefix_of(p));
  CHECK(concat(p, Word({1})) == w);
  CHECK(concat(Word::empty(), w) == w);
}

TEST_CASE("random words are seed-deterministic") {
  Rng a(7), b(7), c(8);
  Word wa = random_word(Alphabet(4), 20, a);
  Word wb = random_word(Alphabet(4), 20, b);
  Word wc = random_word(Alphabet(4), 20, c);
  CHECK(wa == wb);
  CHECK(wa.valid_over(Alphabet(4)));
  CHECK(wa.length() == 20);
  CHECK_FALSE(wa == wc);
}
