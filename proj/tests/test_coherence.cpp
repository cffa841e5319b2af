#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "onom/coherence.hpp"
#include "onom/error.hpp"

namespace {

onom::TopicWords topics_of(std::vector<std::vector<std::string>> lists) {
  onom::TopicWords out;
  int id = 0;
  for (auto& l : lists) {
    onom::TopicTerms t{id++, 0, {}};
    for (auto& w : l) t.words.push_back({w, 1.0});
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

TEST_CASE("npmi reference values") {
  CHECK(std::abs(onom::npmi(100, 50, 50, 25)) <= 1e-9);
  CHECK(onom::npmi(100, 25, 25, 25) == doctest::Approx(1.0).epsilon(1e-6));
  const double hand = std::log(0.2 / (0.4 * 0.3)) / -std::log(0.2);
  CHECK(std::abs(onom::npmi(100, 40, 30, 20) - hand) <= 1e-6);
  CHECK(std::abs(onom::npmi(100, 40, 30, 20) - 0.31739380551401475) <= 1e-6);
}

TEST_CASE("npmi edge cases") {
  CHECK(onom::npmi(10, 10, 10, 10) == 1.0);
  const double disjoint = onom::npmi(100, 50, 50, 0);
  CHECK(disjoint >= -1.0);
  CHECK(disjoint < -0.9);
  CHECK_THROWS_AS(onom::npmi(100, 0, 5, 0), onom::Error);
  CHECK_THROWS_AS(onom::npmi(100, 5, 5, 6), onom::Error);
}

TEST_CASE("npmi is symmetric, bounded and invariant under document duplication") {
  onom::Rng rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + rng.below(200);
    const std::size_t cx = 1 + rng.below(n);
    const std::size_t cy = 1 + rng.below(n);
    const std::size_t lo = cx + cy > n ? cx + cy - n : 0;
    const std::size_t joint = lo + rng.below(std::min(cx, cy) - lo + 1);
    const double v = onom::npmi(n, cx, cy, joint);
    CHECK(v == onom::npmi(n, cy, cx, joint));
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
    if (joint > 0) CHECK(onom::npmi(2 * n, 2 * cx, 2 * cy, 2 * joint) == doctest::Approx(v).epsilon(1e-9));
  }
}

TEST_CASE("co-occurrence counts are boolean per document") {
  const onom::TokenizedCorpus corpus({{"a", "a", "b"}, {"a"}, {"b", "c"}, {}});
  const onom::CooccurrenceCounts counts(corpus);
  CHECK(counts.n_docs() == 4);
  CHECK(counts.count("a") == 2);
  CHECK(counts.count("zzz") == 0);
  CHECK(counts.joint("a", "b") == 1);
  CHECK(counts.joint("b", "a") == 1);
  CHECK(counts.joint("a", "c") == 0);
}

TEST_CASE("topic npmi averages") {
  const onom::TokenizedCorpus corpus({{"x", "y"}, {"x", "y"}, {"p"}, {"q"}, {"p", "q"}, {"z"}});
  CHECK(onom::topic_npmi(topics_of({{"x", "y"}}), corpus) == doctest::Approx(1.0).epsilon(1e-6));
  // p and q: N=6, counts 2, 2, joint 1 -> independence would be 4/36; here 1/6.
  const double pq = onom::npmi(6, 2, 2, 1);
  CHECK(onom::topic_npmi(topics_of({{"x", "y"}, {"p", "q"}}), corpus) ==
        doctest::Approx((1.0 + pq) / 2.0));
  // Unknown words are skipped, and a topic left with one word is ignored.
  CHECK(onom::topic_npmi(topics_of({{"x", "nope", "y"}, {"z", "nope"}}), corpus) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_WITH_AS(onom::topic_npmi(topics_of({{"z"}, {"nope", "none"}}), corpus),
                       doctest::Contains("coherence undefined"), onom::Error);
}

TEST_CASE("topic npmi of one perfect and one independent topic is one half") {
  // a/b always together; c/d independent (N=4, counts 2, joint 1).
  const onom::TokenizedCorpus corpus({{"a", "b", "c", "d"}, {"a", "b"}, {"c"}, {"d"}});
  const double ab = onom::npmi(4, 2, 2, 2);
  const double cd = onom::npmi(4, 2, 2, 1);
  CHECK(std::abs(cd) <= 1e-9);
  CHECK(onom::topic_npmi(topics_of({{"a", "b"}, {"c", "d"}}), corpus) ==
        doctest::Approx(0.5 * (ab + cd)));
}

TEST_CASE("top_n limits the scored words") {
  const onom::TokenizedCorpus corpus({{"x", "y"}, {"x", "y"}, {"w"}, {"v"}});
  CHECK(onom::topic_npmi(topics_of({{"x", "y", "w", "v"}}), corpus, 2) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(onom::topic_npmi(topics_of({{"x", "y", "w", "v"}}), corpus, 4) < 0.5);
}

TEST_CASE("planted topics score above random assignments") {
  const auto planted = fixture::planted_topics(4, 30, 8, 21);
  const auto good = onom::top_topic_words(onom::ctfidf(planted.tokens, planted.truth));
  const double planted_score = onom::topic_npmi(good, planted.tokens);
  onom::Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> shuffled = planted.truth;
    rng.shuffle(shuffled.begin(), shuffled.end());
    const auto random = onom::top_topic_words(onom::ctfidf(planted.tokens, shuffled));
    CHECK(planted_score > onom::topic_npmi(random, planted.tokens));
  }
}
