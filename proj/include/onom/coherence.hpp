#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "onom/corpus.hpp"
#include "onom/topic_model.hpp"

namespace onom {

inline constexpr double kNpmiEps = 1e-12;

/// Boolean document co-occurrence counts backed by sorted posting lists.
class CooccurrenceCounts {
 public:
  explicit CooccurrenceCounts(const TokenizedCorpus& corpus);

  std::size_t n_docs() const { return n_docs_; }
  /// Documents containing the term (0 if absent).
  std::size_t count(const std::string& term) const;
  /// Documents containing both terms.
  std::size_t joint(const std::string& x, const std::string& y) const;

 private:
  std::size_t n_docs_ = 0;
  std::unordered_map<std::string, std::vector<std::uint32_t>> postings_;
};

/// NPMI from raw counts, clamped to [-1, 1]. A pair present in every document
/// scores 1.
double npmi(std::size_t n, std::size_t count_x, std::size_t count_y, std::size_t joint,
            double eps = kNpmiEps);

double npmi_pair(const CooccurrenceCounts& counts, const std::string& x, const std::string& y,
                 double eps = kNpmiEps);

/// Mean over topics of the mean pairwise NPMI of each topic's first top_n
/// words that occur in the corpus. Topics with fewer than 2 such words are
/// skipped; throws "coherence undefined" when none remain.
double topic_npmi(const TopicWords& topics, const CooccurrenceCounts& counts,
                  std::size_t top_n = 10, double eps = kNpmiEps);
double topic_npmi(const TopicWords& topics, const TokenizedCorpus& corpus, std::size_t top_n = 10,
                  double eps = kNpmiEps);

}  // namespace onom
