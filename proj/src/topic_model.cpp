#include "onom/topic_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "onom/error.hpp"
#include "onom/manifold.hpp"
#include "onom/parallel.hpp"

namespace onom {

namespace {

bool all_rows_equal(const Matrix& m) {
  for (Eigen::Index i = 1; i < m.rows(); ++i) {
    if (m.row(i) != m.row(0)) return false;
  }
  return true;
}

}  // namespace

ClusterLabels cluster_documents(const EmbeddedCorpus& corpus, const TopicParams& params,
                                std::uint64_t seed) {
  const std::size_t n = corpus.size();
  if (n == 0) throw Error("empty corpus");
  if (params.min_cluster_size < 2) throw Error("min_cluster_size must be at least 2");
  if (params.n_neighbors < 2) throw Error("n_neighbors must be at least 2");
  if (n < params.n_neighbors + 1) {
    throw Error("corpus of " + std::to_string(n) + " documents is too small for n_neighbors=" +
                std::to_string(params.n_neighbors));
  }
  if (all_rows_equal(corpus.vectors)) {
    ClusterLabels out;
    out.labels.assign(n, 0);
    out.membership.assign(n, 1.0);
    out.n_clusters = 1;
    out.cluster_nodes = {0};
    return out;
  }
  LayoutConfig cfg;
  cfg.n_components = params.n_components;
  cfg.n_epochs = params.n_epochs;
  cfg.seed = seed;
  const Matrix reduced = umap_reduce(corpus.vectors, params.n_neighbors, cfg, params.metric);
  return hdbscan(reduced, {params.min_cluster_size, params.min_samples});
}

ClassTermMatrix ctfidf(const TokenizedCorpus& tokens, std::span<const int> assignment,
                       bool normalize) {
  if (assignment.size() != tokens.size()) {
    throw Error("assignment has " + std::to_string(assignment.size()) + " entries for " +
                std::to_string(tokens.size()) + " documents");
  }
  ClassTermMatrix out;
  std::map<int, std::size_t> topic_row;
  for (int t : assignment) {
    if (t >= 0) topic_row.emplace(t, 0);
  }
  if (topic_row.empty()) throw Error("no non-outlier documents");
  for (auto& [topic, row] : topic_row) {
    row = out.topics.size();
    out.topics.push_back(topic);
  }
  std::map<std::string, std::size_t> term_col;
  for (std::size_t d = 0; d < tokens.size(); ++d) {
    if (assignment[d] < 0) continue;
    for (const auto& w : tokens.docs()[d]) term_col.emplace(w, 0);
  }
  for (auto& [term, col] : term_col) {
    col = out.terms.size();
    out.terms.push_back(term);
  }
  const auto k = static_cast<Eigen::Index>(out.topics.size());
  const auto v = static_cast<Eigen::Index>(out.terms.size());
  out.tf = Matrix::Zero(k, v);
  out.topic_sizes.assign(out.topics.size(), 0);
  out.class_tokens.assign(out.topics.size(), 0.0);
  out.term_frequency.assign(out.terms.size(), 0.0);
  for (std::size_t d = 0; d < tokens.size(); ++d) {
    if (assignment[d] < 0) continue;
    const std::size_t row = topic_row.at(assignment[d]);
    ++out.topic_sizes[row];
    for (const auto& w : tokens.docs()[d]) {
      const std::size_t col = term_col.at(w);
      out.tf(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) += 1.0;
      out.class_tokens[row] += 1.0;
      out.term_frequency[col] += 1.0;
    }
  }
  double total = 0.0;
  for (double c : out.class_tokens) total += c;
  out.average_tokens = total / static_cast<double>(out.topics.size());

  std::vector<double> idf(out.terms.size());
  for (std::size_t t = 0; t < idf.size(); ++t) {
    idf[t] = std::log(1.0 + out.average_tokens / out.term_frequency[t]);
  }
  out.weights = Matrix::Zero(k, v);
  parallel_for(0, out.topics.size(), [&](std::size_t r) {
    const auto row = static_cast<Eigen::Index>(r);
    const double scale = normalize && out.class_tokens[r] > 0.0 ? 1.0 / out.class_tokens[r] : 1.0;
    for (Eigen::Index c = 0; c < v; ++c) {
      out.weights(row, c) = out.tf(row, c) * scale * idf[static_cast<std::size_t>(c)];
    }
  });
  return out;
}

TopicWords top_topic_words(const ClassTermMatrix& matrix, std::size_t top_n) {
  if (top_n < 1) throw Error("top_n must be at least 1");
  TopicWords out;
  for (std::size_t r = 0; r < matrix.topics.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < matrix.terms.size(); ++c) {
      if (matrix.weights(row, static_cast<Eigen::Index>(c)) > 0.0) cols.push_back(c);
    }
    // Columns are already lexicographic, so a stable sort keeps ties in term order.
    std::stable_sort(cols.begin(), cols.end(), [&](std::size_t a, std::size_t b) {
      return matrix.weights(row, static_cast<Eigen::Index>(a)) >
             matrix.weights(row, static_cast<Eigen::Index>(b));
    });
    if (cols.size() > top_n) cols.resize(top_n);
    TopicTerms topic{matrix.topics[r], matrix.topic_sizes[r], {}};
    for (auto c : cols) {
      topic.words.push_back({matrix.terms[c], matrix.weights(row, static_cast<Eigen::Index>(c))});
    }
    out.push_back(std::move(topic));
  }
  return out;
}

std::string topic_words_json(const TopicWords& words) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& t : words) {
    nlohmann::ordered_json entry;
    entry["topic"] = t.topic;
    entry["size"] = t.size;
    entry["words"] = nlohmann::ordered_json::array();
    for (const auto& w : t.words) {
      entry["words"].push_back({{"term", w.term}, {"weight", w.weight}});
    }
    out.push_back(std::move(entry));
  }
  return out.dump(2) + "\n";
}

TopicModel fit_topics(const EmbeddedCorpus& corpus, const TokenizedCorpus& tokens,
                      const TopicParams& params, std::uint64_t seed, std::size_t top_n) {
  if (tokens.size() != corpus.size()) {
    throw Error("token documents (" + std::to_string(tokens.size()) +
                ") do not match vector documents (" + std::to_string(corpus.size()) + ")");
  }
  TopicModel model;
  model.clusters = cluster_documents(corpus, params, seed);
  model.matrix = ctfidf(tokens, model.clusters.labels);
  model.words = top_topic_words(model.matrix, top_n);
  return model;
}

}  // namespace onom
