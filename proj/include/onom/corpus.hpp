#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "onom/matrix.hpp"

namespace onom {

struct Document {
  std::string id;
  std::optional<std::string> text;
  std::optional<std::string> lang;
  std::optional<std::vector<std::string>> tokens;

  bool operator==(const Document&) const = default;
};

/// Documents paired row-for-row with fixed-dimension vectors.
struct EmbeddedCorpus {
  std::vector<Document> docs;
  Matrix vectors;  // docs.size() x dim

  std::size_t size() const { return docs.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }
};

enum class VectorFormat { jsonl, binary };

/// Picks binary for ".bin"/".onomvec" extensions, JSONL otherwise.
VectorFormat format_for_path(const std::filesystem::path& path);

/// Reads a vector file. Errors name the offending 1-based record.
EmbeddedCorpus load_corpus(const std::filesystem::path& path, VectorFormat format);
EmbeddedCorpus parse_corpus_jsonl(std::string_view content);
EmbeddedCorpus parse_corpus_binary(std::string_view content);

void save_corpus(const EmbeddedCorpus& corpus, const std::filesystem::path& path,
                 VectorFormat format);
std::string corpus_to_jsonl(const EmbeddedCorpus& corpus);
/// Vectors are narrowed to f32; text, lang and tokens are not stored.
std::string corpus_to_binary(const EmbeddedCorpus& corpus);

/// Plain document collection (JSONL with "id" plus "text" and/or "tokens").
std::vector<Document> load_documents(const std::filesystem::path& path);

/// Splits on sentence terminators. Latin . ! ? end a sentence when followed
/// by whitespace or end of text; CJK 。！？ end one immediately. Runs of
/// terminators stay with the sentence they close. Ids are parent_id-N.
std::vector<Document> split_sentences(std::string_view text, std::string_view lang,
                                      std::string_view parent_id = "doc");

using StopwordSet = std::unordered_set<std::string>;
using LemmaMap = std::unordered_map<std::string, std::string>;

/// Lowercases (ASCII), strips punctuation, maps through lemma_map and drops
/// stopwords (checked on both the surface form and the lemma). Word-internal
/// apostrophes and hyphens are kept. Uses doc.tokens verbatim (after lemma and
/// stopword filtering) when the document already carries tokens.
std::vector<std::string> tokenize(const Document& doc, const StopwordSet& stopwords,
                                  const LemmaMap& lemma_map);

StopwordSet load_stopwords(const std::filesystem::path& path);
/// TSV "surface<TAB>lemma" per line.
LemmaMap load_lemma_map(const std::filesystem::path& path);

class TokenizedCorpus {
 public:
  TokenizedCorpus() = default;
  explicit TokenizedCorpus(std::vector<std::vector<std::string>> docs);

  const std::vector<std::vector<std::string>>& docs() const { return docs_; }
  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }

  /// Term ids follow lexicographic term order.
  const std::map<std::string, std::size_t>& vocabulary() const { return vocabulary_; }
  /// Number of documents containing the term (0 if absent).
  std::size_t doc_freq(const std::string& term) const;

 private:
  std::vector<std::vector<std::string>> docs_;
  std::map<std::string, std::size_t> vocabulary_;
  std::vector<std::size_t> doc_freq_;  // by term id
};

/// Target-name -> lemma set.
using TargetSets = std::map<std::string, std::set<std::string>>;

/// Raw counts, one row per corpus partition and one column per target set.
struct FrequencyTable {
  std::vector<std::string> partitions;
  std::vector<std::string> targets;
  std::vector<std::vector<std::uint64_t>> counts;  // [partition][target]

  std::uint64_t at(std::string_view partition, std::string_view target) const;
};

FrequencyTable count_targets(const TokenizedCorpus& corpus, const TargetSets& targets,
                             std::string partition = "all");

struct Keyword {
  std::string term;
  double keyness;
  std::size_t target_docs;
  std::size_t reference_docs;
};

/// Signed log-likelihood G2 on the 2x2 document-frequency table: positive when
/// the term is proportionally more frequent in the target corpus.
double g2_keyness(std::size_t target_docs, std::size_t target_total, std::size_t reference_docs,
                  std::size_t reference_total);

/// Target-corpus terms ranked by document-frequency G2 keyness. Terms found in
/// fewer than min_doc_ratio of the target documents are dropped.
std::vector<Keyword> extract_keywords(const TokenizedCorpus& target,
                                      const TokenizedCorpus& reference, double min_doc_ratio);

}  // namespace onom
