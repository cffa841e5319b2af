#pragma once

// Synthetic corpora with known ground truth.

#include <optional>
#include <string>
#include <vector>

#include "onom/corpus.hpp"
#include "onom/rng.hpp"

namespace fixture {

struct PlantedCorpus {
  onom::EmbeddedCorpus corpus;
  onom::TokenizedCorpus tokens;
  std::vector<int> truth;
};

/// Topic t owns words "t<t>w<i>"; each document draws words_per_doc words from
/// its topic plus two shared filler words. Vectors are a per-topic random
/// direction plus isotropic noise.
inline PlantedCorpus planted_topics(std::size_t n_topics, std::size_t docs_per_topic,
                                    std::size_t dim, std::uint64_t seed,
                                    std::size_t topic_vocab = 8, std::size_t words_per_doc = 5,
                                    double noise = 0.15) {
  onom::Rng rng(seed);
  std::vector<std::vector<double>> centers(n_topics, std::vector<double>(dim));
  for (auto& c : centers) {
    for (auto& v : c) v = rng.normal();
  }
  PlantedCorpus out;
  const std::size_t n = n_topics * docs_per_topic;
  out.corpus.vectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  std::vector<std::vector<std::string>> docs;
  for (std::size_t t = 0; t < n_topics; ++t) {
    for (std::size_t k = 0; k < docs_per_topic; ++k) {
      const auto row = static_cast<Eigen::Index>(out.truth.size());
      for (std::size_t d = 0; d < dim; ++d) {
        out.corpus.vectors(row, static_cast<Eigen::Index>(d)) = centers[t][d] + noise * rng.normal();
      }
      std::vector<std::string> words;
      for (std::size_t w = 0; w < words_per_doc; ++w) {
        words.push_back("t" + std::to_string(t) + "w" + std::to_string(rng.below(topic_vocab)));
      }
      words.push_back("filler" + std::to_string(rng.below(20)));
      words.push_back("filler" + std::to_string(rng.below(20)));
      docs.push_back(std::move(words));
      out.corpus.docs.push_back({"d" + std::to_string(row), std::nullopt, std::nullopt, std::nullopt});
      out.truth.push_back(static_cast<int>(t));
    }
  }
  out.tokens = onom::TokenizedCorpus(std::move(docs));
  return out;
}

}  // namespace fixture

namespace fixture {

/// Two far-apart sense blobs of per_sense instances each; sense 1 instances
/// carry object lemmas from a different pool than sense 0.
struct SenseCorpus {
  onom::EmbeddedCorpus corpus;
  std::vector<int> truth;
  std::vector<std::optional<std::string>> objects;
};

inline SenseCorpus two_senses(std::size_t per_sense, std::size_t dim, std::uint64_t seed) {
  onom::Rng rng(seed);
  SenseCorpus out;
  out.corpus.vectors.resize(static_cast<Eigen::Index>(2 * per_sense), static_cast<Eigen::Index>(dim));
  const char* pools[2][3] = {{"shou", "yan", "wei"}, {"xin", "ganqing", "zizun"}};
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t i = 0; i < per_sense; ++i) {
      const auto row = static_cast<Eigen::Index>(out.truth.size());
      for (std::size_t d = 0; d < dim; ++d) {
        const double center = d == 0 ? (s == 0 ? -5.0 : 5.0) : 0.0;
        out.corpus.vectors(row, static_cast<Eigen::Index>(d)) = center + rng.normal();
      }
      out.corpus.docs.push_back({"i" + std::to_string(row), std::nullopt, std::nullopt, std::nullopt});
      out.truth.push_back(static_cast<int>(s));
      const auto pick = rng.below(4);
      out.objects.push_back(pick == 3 ? std::nullopt : std::optional<std::string>(pools[s][pick]));
    }
  }
  return out;
}

}  // namespace fixture
