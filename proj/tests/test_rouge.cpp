#include <doctest.h>

#include <functional>

#include "disco/errors.hpp"
#include "disco/random.hpp"
#include "disco/rouge.hpp"
#include "disco/text.hpp"

using namespace disco;

namespace {

Tokens words(const char* s) { return tokenize(s); }

// Exponential-time LCS straight from the recursive definition.
std::size_t naive_lcs(const Tokens& a, const Tokens& b, std::size_t i = 0,
                      std::size_t j = 0) {
  if (i == a.size() || j == b.size()) return 0;
  if (a[i] == b[j]) return 1 + naive_lcs(a, b, i + 1, j + 1);
  return std::max(naive_lcs(a, b, i + 1, j), naive_lcs(a, b, i, j + 1));
}

Tokens random_tokens(Rng& rng, std::size_t max_len, int vocab) {
  Tokens t(rng.below(max_len + 1));
  for (auto& w : t) w = std::string(1, static_cast<char>('a' + rng.below(static_cast<std::uint64_t>(vocab))));
  return t;
}

}  // namespace

TEST_CASE("f1 convention") {
  CHECK(f1_score(0.0, 0.0) == 0.0);
  CHECK(f1_score(0.5, 1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  const RougeScore s = make_score(0.3, 0.6);
  CHECK(s.f1 == doctest::Approx(2 * 0.3 * 0.6 / 0.9).epsilon(1e-12));
}

TEST_CASE("ngrams") {
  const NgramCounts bi = ngrams({"a", "b", "c"}, 2);
  CHECK(bi.size() == 2);
  CHECK(bi.at({"a", "b"}) == 1);
  CHECK(bi.at({"b", "c"}) == 1);
  CHECK(ngrams({"a", "b"}, 3).empty());
  CHECK(ngrams({"a", "a", "a"}, 1).at({"a"}) == 3);
  CHECK(total_count(ngrams({"a", "a", "a"}, 1)) == 3);
  try {
    ngrams({"a"}, 0);
    FAIL("expected InvalidN");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidN);
  }
}

TEST_CASE("rouge_n hand-counted fixtures") {
  const RougeScore same = rouge_n(words("the cat sat"), words("the cat sat"), 2);
  CHECK(same == RougeScore{1.0, 1.0, 1.0});
  CHECK(rouge_n(words("x y"), words("p q"), 1) == RougeScore{});

  const RougeScore r1 = rouge_n(words("the cat sat"), words("the cat ran fast"), 1);
  CHECK(r1.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(r1.recall == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r1.f1 == doctest::Approx(4.0 / 7.0).epsilon(1e-12));

  // Clipped counts: "the" appears twice in the candidate, once in the reference.
  const RougeScore clip = rouge_n(words("the the cat"), words("the cat"), 1);
  CHECK(clip.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(clip.recall == doctest::Approx(1.0).epsilon(1e-12));

  // Case folding, punctuation kept.
  CHECK(rouge_n(words("The Cat ."), words("the cat ."), 1).f1 == 1.0);
  CHECK(rouge_n({}, words("a b"), 1) == RougeScore{});
  CHECK(rouge_n(words("a"), words("a"), 2) == RougeScore{});
}

TEST_CASE("rouge_l") {
  CHECK(rouge_l(words("a b c"), words("a b c")) == RougeScore{1.0, 1.0, 1.0});
  const RougeScore l = rouge_l(words("a b c d"), words("a c d b"));
  CHECK(lcs_length(words("a b c d"), words("a c d b")) == 3);
  CHECK(l.precision == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(l.recall == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(rouge_l({}, words("a")) == RougeScore{});
}

TEST_CASE("rouge_l LCS equals the recursive definition") {
  Rng rng(7);
  for (int i = 0; i < 300; ++i) {
    const Tokens a = random_tokens(rng, 10, 4);
    const Tokens b = random_tokens(rng, 10, 4);
    CHECK(lcs_length(a, b) == naive_lcs(a, b));
  }
}

TEST_CASE("rouge symmetry and recall monotonicity") {
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const Tokens a = random_tokens(rng, 12, 5);
    const Tokens b = random_tokens(rng, 12, 5);
    for (int n = 1; n <= 3; ++n) {
      CHECK(rouge_n(a, b, n).precision == rouge_n(b, a, n).recall);
    }
    CHECK(rouge_l(a, b).precision == rouge_l(b, a).recall);
    if (b.empty()) continue;
    Tokens longer = a;
    longer.push_back(b[rng.below(b.size())]);
    CHECK(rouge_n(longer, b, 1).recall >= rouge_n(a, b, 1).recall);
    CHECK(rouge_l(longer, b).recall >= rouge_l(a, b).recall);
  }
}

TEST_CASE("selection_prf") {
  const SelectionScore perfect = selection_prf({0, 1, 1}, {0, 1, 1});
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);
  const SelectionScore none = selection_prf({0, 0, 0}, {1, 0, 1});
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  const SelectionScore half = selection_prf({1, 1, 0, 0}, {1, 0, 1, 0});
  CHECK(half.precision == 0.5);
  CHECK(half.recall == 0.5);
  CHECK(half.f1 == 0.5);
  CHECK(half.true_positives == 1);
  try {
    selection_prf({1}, {1, 0});
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LengthMismatch);
  }
}

TEST_CASE("novel n-gram proportions") {
  const Tokens source = words("the storm hit the coast . power was cut");
  CHECK(novel_ngram_proportion(words("the storm hit"), source, 1) == 0.0);
  CHECK(novel_ngram_proportion(words("zebra quartz"), source, 1) == 1.0);
  CHECK(novel_ngram_proportion({}, source, 2) == 0.0);
  // Two source EDUs joined: one new boundary bigram ("coast power").
  const Tokens joined = words("hit the coast power was cut");
  CHECK(novel_ngram_proportion(joined, source, 1) == 0.0);
  // Distinct bigrams: hit-the, the-coast, coast-power, power-was, was-cut.
  CHECK(novel_ngram_proportion(joined, source, 2) == doctest::Approx(1.0 / 5.0).epsilon(1e-12));
}

TEST_CASE("tokenize") {
  CHECK(tokenize("Hello, world.") == Tokens{"Hello", ",", "world", "."});
  CHECK(tokenize("  spaced   out ") == Tokens{"spaced", "out"});
  CHECK(tokenize("").empty());
  CHECK(count_words("one two  three") == 3);
  CHECK(join({"a", "b"}) == "a b");
}
