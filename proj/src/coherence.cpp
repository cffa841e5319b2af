#include "onom/coherence.hpp"

#include <algorithm>
#include <cmath>

#include "onom/error.hpp"

namespace onom {

CooccurrenceCounts::CooccurrenceCounts(const TokenizedCorpus& corpus) : n_docs_(corpus.size()) {
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (const auto& w : corpus.docs()[d]) {
      auto& list = postings_[w];
      if (list.empty() || list.back() != d) list.push_back(static_cast<std::uint32_t>(d));
    }
  }
}

std::size_t CooccurrenceCounts::count(const std::string& term) const {
  const auto it = postings_.find(term);
  return it == postings_.end() ? 0 : it->second.size();
}

std::size_t CooccurrenceCounts::joint(const std::string& x, const std::string& y) const {
  const auto ix = postings_.find(x);
  const auto iy = postings_.find(y);
  if (ix == postings_.end() || iy == postings_.end()) return 0;
  const auto& a = ix->second;
  const auto& b = iy->second;
  std::size_t i = 0, j = 0, both = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++both;
      ++i;
      ++j;
    }
  }
  return both;
}

double npmi(std::size_t n, std::size_t count_x, std::size_t count_y, std::size_t joint,
            double eps) {
  if (n == 0 || count_x == 0 || count_y == 0) throw Error("npmi needs positive term counts");
  if (joint > std::min(count_x, count_y) || std::max(count_x, count_y) > n) {
    throw Error("inconsistent co-occurrence counts");
  }
  if (joint == n) return 1.0;
  const double nn = static_cast<double>(n);
  const double px = static_cast<double>(count_x) / nn;
  const double py = static_cast<double>(count_y) / nn;
  const double pxy = static_cast<double>(joint) / nn + eps;
  const double value = std::log(pxy / (px * py)) / -std::log(pxy);
  return std::clamp(value, -1.0, 1.0);
}

double npmi_pair(const CooccurrenceCounts& counts, const std::string& x, const std::string& y,
                 double eps) {
  return npmi(counts.n_docs(), counts.count(x), counts.count(y), counts.joint(x, y), eps);
}

double topic_npmi(const TopicWords& topics, const CooccurrenceCounts& counts, std::size_t top_n,
                  double eps) {
  if (counts.n_docs() == 0) throw Error("coherence undefined: empty corpus");
  double sum = 0.0;
  std::size_t scored = 0;
  for (const auto& topic : topics) {
    std::vector<const std::string*> words;
    for (std::size_t i = 0; i < topic.words.size() && i < top_n; ++i) {
      if (counts.count(topic.words[i].term) > 0) words.push_back(&topic.words[i].term);
    }
    if (words.size() < 2) continue;
    double topic_sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < words.size(); ++i) {
      for (std::size_t j = i + 1; j < words.size(); ++j) {
        topic_sum += npmi_pair(counts, *words[i], *words[j], eps);
        ++pairs;
      }
    }
    sum += topic_sum / static_cast<double>(pairs);
    ++scored;
  }
  if (scored == 0) throw Error("coherence undefined: no topic has 2 scoreable words");
  return std::clamp(sum / static_cast<double>(scored), -1.0, 1.0);
}

double topic_npmi(const TopicWords& topics, const TokenizedCorpus& corpus, std::size_t top_n,
                  double eps) {
  return topic_npmi(topics, CooccurrenceCounts(corpus), top_n, eps);
}

}  // namespace onom
