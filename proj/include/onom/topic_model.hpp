#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "onom/corpus.hpp"
#include "onom/density_cluster.hpp"
#include "onom/distance.hpp"
#include "onom/matrix.hpp"

namespace onom {

struct TopicParams {
  std::size_t n_neighbors = 15;
  std::size_t n_components = 5;
  std::size_t min_cluster_size = 10;
  std::optional<std::size_t> min_samples;  // defaults to min_cluster_size
  Metric metric = Metric::cosine;
  std::size_t n_epochs = 200;
};

/// UMAP reduction followed by HDBSCAN. Labels are topic ids, -1 for outliers.
/// A corpus of identical vectors is a single topic with no outliers.
ClusterLabels cluster_documents(const EmbeddedCorpus& corpus, const TopicParams& params,
                                std::uint64_t seed);

/// Class-based TF-IDF: one class document per topic, outliers excluded.
struct ClassTermMatrix {
  std::vector<int> topics;               // ascending topic ids
  std::vector<std::size_t> topic_sizes;  // documents per topic
  std::vector<std::string> terms;        // lexicographic; only terms seen in some topic
  Matrix tf;                             // topics x terms raw counts
  Matrix weights;                        // topics x terms
  std::vector<double> class_tokens;      // tokens per topic
  std::vector<double> term_frequency;    // f(t) over all topics
  double average_tokens = 0.0;           // A
};

/// W(t,c) = tf(t,c) * ln(1 + A / f(t)). With normalize, tf is divided by the
/// class token count first.
ClassTermMatrix ctfidf(const TokenizedCorpus& tokens, std::span<const int> assignment,
                       bool normalize = false);

struct WeightedTerm {
  std::string term;
  double weight;
};

struct TopicTerms {
  int topic;
  std::size_t size;
  std::vector<WeightedTerm> words;  // descending weight, ties lexicographic
};

using TopicWords = std::vector<TopicTerms>;

/// Highest-weight terms per topic; zero-weight terms are never listed.
TopicWords top_topic_words(const ClassTermMatrix& matrix, std::size_t top_n = 10);

/// [{"topic", "size", "words": [{"term", "weight"}]}]
std::string topic_words_json(const TopicWords& words);

struct TopicModel {
  ClusterLabels clusters;
  ClassTermMatrix matrix;
  TopicWords words;
};

TopicModel fit_topics(const EmbeddedCorpus& corpus, const TokenizedCorpus& tokens,
                      const TopicParams& params, std::uint64_t seed, std::size_t top_n = 10);

}  // namespace onom
