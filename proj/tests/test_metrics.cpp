#include <doctest.h>

#include <algorithm>
#include <random>

#include "charblock/metrics/metrics.hpp"

using namespace charblock;

TEST_CASE("identical corpora score BLEU 100") {
  std::vector<std::string> text = {"the cat sat on the mat", "a b c d e"};
  auto r = corpus_bleu(text, text);
  CHECK(r.value == doctest::Approx(100.0));
  CHECK(r.brevity_penalty == doctest::Approx(1.0));
  for (double p : r.precisions) CHECK(p == doctest::Approx(1.0));
}

TEST_CASE("clipping: 'the the the' against 'the cat' has unigram precision 1/3") {
  auto r = corpus_bleu({"the the the"}, {"the cat"});
  CHECK(r.precisions[0] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("no overlap gives a near-zero score") {
  std::vector<std::string> hyps(20, "x y z w v u t s"), refs(20, "a b c d e f g h");
  auto r = corpus_bleu(hyps, refs);
  CHECK(r.value < 1.0);
  CHECK(r.value >= 0.0);
  // floored, not zero: smoothing keeps the geometric mean defined
  CHECK(r.precisions[0] == doctest::Approx(1.0 / (2.0 * 160.0)));
}

TEST_CASE("brevity penalty kicks in for short hypotheses") {
  auto r = corpus_bleu({"the cat"}, {"the cat sat on the mat"});
  CHECK(r.brevity_penalty == doctest::Approx(std::exp(1.0 - 6.0 / 2.0)));
  CHECK(r.value < 100.0 * r.brevity_penalty + 1e-9);
}

TEST_CASE("corpus BLEU errors") {
  CHECK_THROWS_AS(corpus_bleu({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(corpus_bleu({"a"}, {"a", "b"}), std::invalid_argument);
}

namespace {

std::vector<std::string> random_corpus(std::mt19937& rng, int sentences, bool match_len,
                                       const std::vector<std::string>* refs = nullptr) {
  const char* words[] = {"a", "b", "c", "d", "e", "f", "g"};
  std::vector<std::string> out;
  for (int i = 0; i < sentences; ++i) {
    int len;
    if (match_len && refs) {
      len = 1 + static_cast<int>(std::count((*refs)[i].begin(), (*refs)[i].end(), ' '));
    } else {
      len = 1 + static_cast<int>(rng() % 8);
    }
    std::string s;
    for (int w = 0; w < len; ++w) {
      if (w) s += ' ';
      s += words[rng() % 7];
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("BLEU is invariant under corpus permutation") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto refs = random_corpus(rng, 6, false);
    auto hyps = random_corpus(rng, 6, false);
    const double base = corpus_bleu(hyps, refs).value;
    std::vector<int> order = {3, 1, 5, 0, 4, 2};
    std::vector<std::string> hp, rp;
    for (int i : order) {
      hp.push_back(hyps[i]);
      rp.push_back(refs[i]);
    }
    CHECK(corpus_bleu(hp, rp).value == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("BLEU never decreases when a hypothesis is replaced by its reference") {
  // Length-matched corpora (the regime where the brevity penalty cannot
  // move against the replacement).
  std::mt19937 rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    auto refs = random_corpus(rng, 5, false);
    auto hyps = random_corpus(rng, 5, true, &refs);
    const double base = corpus_bleu(hyps, refs).value;
    for (int i = 0; i < 5; ++i) {
      auto improved = hyps;
      improved[i] = refs[i];
      const double better = corpus_bleu(improved, refs).value;
      CHECK(better >= base - 1e-9);
    }
  }
}

TEST_CASE("char accuracy: positional matches over the longer length") {
  // one wrong char in one of 10 equal-length pairs of length 10
  std::vector<std::string> refs(10, "abcdefghij");
  std::vector<std::string> hyps = refs;
  hyps[3][5] = 'X';
  auto c = char_accuracy(hyps, refs);
  CHECK(c.value == 99.0 / 100.0);
  CHECK(c.correct == 99);
  CHECK(c.total == 100);
  auto s = sequence_accuracy(hyps, refs);
  CHECK(s.value == 9.0 / 10.0);
}

TEST_CASE("accuracy: identical and disjoint corpora") {
  std::vector<std::string> a = {"abc", "de"};
  CHECK(char_accuracy(a, a).value == 1.0);
  CHECK(sequence_accuracy(a, a).value == 1.0);
  std::vector<std::string> b = {"xyz", "qw"};
  CHECK(char_accuracy(b, a).value == 0.0);
  CHECK(sequence_accuracy(b, a).value == 0.0);
}

TEST_CASE("length mismatches count as wrong positions") {
  auto c = char_accuracy({"abcd"}, {"ab"});
  CHECK(c.correct == 2);
  CHECK(c.total == 4);
  CHECK(c.value == 0.5);
}

TEST_CASE("accuracy values are exact ratios of integer counts") {
  std::vector<std::string> refs = {"aaa", "bbb", "ccc"};
  std::vector<std::string> hyps = {"aaa", "bbx", "yyy"};
  auto c = char_accuracy(hyps, refs);
  CHECK(c.value == static_cast<double>(c.correct) / static_cast<double>(c.total));
  CHECK(c.correct == 5);
  CHECK(c.total == 9);
}
