#include "onom/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "onom/error.hpp"

namespace onom {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr char kMagic[8] = {'O', 'N', 'O', 'M', 'V', 'E', 'C', '1'};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string at_record(std::size_t index) { return " at record " + std::to_string(index); }

// Calls fn(line, 1-based record number) for each nonblank line.
template <class Fn>
void for_each_jsonl_record(std::string_view content, Fn&& fn) {
  std::size_t record = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    ++record;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error("malformed JSON" + at_record(record) + ": " + e.what());
    } catch (const json::out_of_range&) {
      // The parser rejects literals beyond double range.
      throw Error("non-finite vector component" + at_record(record));
    }
    if (!obj.is_object()) throw Error("expected a JSON object" + at_record(record));
    fn(obj, record);
  }
}

Document document_from_json(const json& obj, std::size_t record) {
  Document doc;
  const auto id = obj.find("id");
  if (id == obj.end() || !id->is_string() || id->get<std::string>().empty()) {
    throw Error("missing or empty \"id\"" + at_record(record));
  }
  doc.id = id->get<std::string>();
  if (auto it = obj.find("text"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw Error("\"text\" must be a string" + at_record(record));
    doc.text = it->get<std::string>();
  }
  if (auto it = obj.find("lang"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw Error("\"lang\" must be a string" + at_record(record));
    doc.lang = it->get<std::string>();
  }
  if (auto it = obj.find("tokens"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw Error("\"tokens\" must be an array" + at_record(record));
    std::vector<std::string> tokens;
    for (const auto& t : *it) {
      if (!t.is_string() || t.get<std::string>().empty()) {
        throw Error("tokens must be nonempty strings" + at_record(record));
      }
      tokens.push_back(t.get<std::string>());
    }
    doc.tokens = std::move(tokens);
  }
  return doc;
}

void check_unique_ids(const std::vector<Document>& docs) {
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!seen.insert(docs[i].id).second) {
      throw Error("duplicate id '" + docs[i].id + "'" + at_record(i + 1));
    }
  }
}

template <class T>
T read_le(std::string_view bytes, std::size_t& pos, std::size_t record) {
  if (pos + sizeof(T) > bytes.size()) {
    throw Error(record == 0 ? "truncated header" : "truncated file" + at_record(record));
  }
  T value{};
  // Little-endian on disk; every supported target is little-endian.
  std::memcpy(&value, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

template <class T>
void write_le(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

// UTF-8 decoding helpers for splitting and tokenizing.
struct CodePoint {
  char32_t value;
  std::size_t length;
};

CodePoint decode_utf8(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t k) -> char32_t {
    if (pos + k >= s.size()) return 0;
    return static_cast<unsigned char>(s[pos + k]) & 0x3F;
  };
  if (b0 < 0x80) return {b0, 1};
  if ((b0 >> 5) == 0x6 && pos + 1 < s.size()) return {((b0 & 0x1FU) << 6) | cont(1), 2};
  if ((b0 >> 4) == 0xE && pos + 2 < s.size()) {
    return {((b0 & 0x0FU) << 12) | (cont(1) << 6) | cont(2), 3};
  }
  if ((b0 >> 3) == 0x1E && pos + 3 < s.size()) {
    return {((b0 & 0x07U) << 18) | (cont(1) << 12) | (cont(2) << 6) | cont(3), 4};
  }
  return {b0, 1};  // invalid byte: pass through as a single unit
}

bool is_latin_terminator(char32_t c) { return c == U'.' || c == U'!' || c == U'?'; }
bool is_cjk_terminator(char32_t c) { return c == U'。' || c == U'！' || c == U'？'; }

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' ||
         c == U' ' || c == U'　';
}

bool is_punctuation(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  }
  return (c >= 0x00A1 && c <= 0x00BF) || (c >= 0x2000 && c <= 0x206F) ||
         (c >= 0x3000 && c <= 0x303F) || (c >= 0xFF01 && c <= 0xFF0F) ||
         (c >= 0xFF1A && c <= 0xFF20) || (c >= 0xFF3B && c <= 0xFF40) ||
         (c >= 0xFF5B && c <= 0xFF65);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\n' ||
                        s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

VectorFormat format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".bin" || ext == ".onomvec") ? VectorFormat::binary : VectorFormat::jsonl;
}

EmbeddedCorpus parse_corpus_jsonl(std::string_view content) {
  std::vector<Document> docs;
  std::vector<std::vector<double>> rows;
  std::size_t dim = 0;
  for_each_jsonl_record(content, [&](const json& obj, std::size_t record) {
    Document doc = document_from_json(obj, record);
    const auto vec = obj.find("vector");
    if (vec == obj.end() || !vec->is_array()) {
      throw Error("missing \"vector\" array" + at_record(record));
    }
    std::vector<double> row;
    row.reserve(vec->size());
    for (const auto& v : *vec) {
      if (!v.is_number()) throw Error("non-numeric vector component" + at_record(record));
      const double x = v.get<double>();
      if (!std::isfinite(x)) throw Error("non-finite vector component" + at_record(record));
      row.push_back(x);
    }
    if (row.empty()) throw Error("empty vector" + at_record(record));
    if (dim == 0) {
      dim = row.size();
    } else if (row.size() != dim) {
      throw Error("dimension mismatch" + at_record(record) + " (expected " + std::to_string(dim) +
                  ", got " + std::to_string(row.size()) + ")");
    }
    docs.push_back(std::move(doc));
    rows.push_back(std::move(row));
  });
  if (docs.empty()) throw Error("empty corpus");
  check_unique_ids(docs);
  EmbeddedCorpus corpus;
  corpus.docs = std::move(docs);
  corpus.vectors.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].begin(), rows[i].end(), row_span(corpus.vectors, static_cast<Eigen::Index>(i)).begin());
  }
  return corpus;
}

EmbeddedCorpus parse_corpus_binary(std::string_view content) {
  if (content.empty()) throw Error("empty corpus");
  if (content.size() < sizeof(kMagic) || std::memcmp(content.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error("bad magic: not an ONOMVEC1 file");
  }
  std::size_t pos = sizeof(kMagic);
  const auto count = read_le<std::uint32_t>(content, pos, 0);
  const auto dim = read_le<std::uint32_t>(content, pos, 0);
  if (count == 0) throw Error("empty corpus");
  if (dim == 0) throw Error("dimension must be positive");
  EmbeddedCorpus corpus;
  corpus.docs.reserve(count);
  corpus.vectors.resize(count, dim);
  for (std::uint32_t r = 0; r < count; ++r) {
    const std::size_t record = r + 1;
    const auto id_len = read_le<std::uint16_t>(content, pos, record);
    if (pos + id_len > content.size()) throw Error("truncated file" + at_record(record));
    Document doc;
    doc.id.assign(content.substr(pos, id_len));
    pos += id_len;
    if (doc.id.empty()) throw Error("missing or empty \"id\"" + at_record(record));
    for (std::uint32_t k = 0; k < dim; ++k) {
      const auto x = read_le<float>(content, pos, record);
      if (!std::isfinite(x)) throw Error("non-finite vector component" + at_record(record));
      corpus.vectors(r, k) = static_cast<double>(x);
    }
    corpus.docs.push_back(std::move(doc));
  }
  if (pos != content.size()) throw Error("trailing bytes after record " + std::to_string(count));
  check_unique_ids(corpus.docs);
  return corpus;
}

EmbeddedCorpus load_corpus(const std::filesystem::path& path, VectorFormat format) {
  const std::string content = read_file(path);
  return format == VectorFormat::binary ? parse_corpus_binary(content)
                                        : parse_corpus_jsonl(content);
}

std::string corpus_to_jsonl(const EmbeddedCorpus& corpus) {
  std::string out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Document& doc = corpus.docs[i];
    ordered_json obj;
    obj["id"] = doc.id;
    if (doc.text) obj["text"] = *doc.text;
    if (doc.lang) obj["lang"] = *doc.lang;
    if (doc.tokens) obj["tokens"] = *doc.tokens;
    const auto row = row_span(corpus.vectors, static_cast<Eigen::Index>(i));
    obj["vector"] = std::vector<double>(row.begin(), row.end());
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::string corpus_to_binary(const EmbeddedCorpus& corpus) {
  std::string out(kMagic, sizeof(kMagic));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(corpus.size()));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(corpus.dim()));
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::string& id = corpus.docs[i].id;
    if (id.size() > 0xFFFF) throw Error("id too long for binary format: '" + id.substr(0, 32) + "...'");
    write_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
    out += id;
    for (double x : row_span(corpus.vectors, static_cast<Eigen::Index>(i))) {
      write_le<float>(out, static_cast<float>(x));
    }
  }
  return out;
}

void save_corpus(const EmbeddedCorpus& corpus, const std::filesystem::path& path,
                 VectorFormat format) {
  write_file(path, format == VectorFormat::binary ? corpus_to_binary(corpus)
                                                  : corpus_to_jsonl(corpus));
}

std::vector<Document> load_documents(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  std::vector<Document> docs;
  for_each_jsonl_record(content, [&](const json& obj, std::size_t record) {
    docs.push_back(document_from_json(obj, record));
  });
  check_unique_ids(docs);
  return docs;
}

std::vector<Document> split_sentences(std::string_view text, std::string_view lang,
                                      std::string_view parent_id) {
  std::vector<Document> out;
  auto emit = [&](std::size_t from, std::size_t to) {
    const std::string_view piece = trim(text.substr(from, to - from));
    if (piece.empty()) return;
    Document doc;
    doc.id = std::string(parent_id) + "-" + std::to_string(out.size());
    doc.text = std::string(piece);
    if (!lang.empty()) doc.lang = std::string(lang);
    out.push_back(std::move(doc));
  };

  std::size_t start = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const CodePoint cp = decode_utf8(text, pos);
    const bool latin = is_latin_terminator(cp.value);
    const bool cjk = is_cjk_terminator(cp.value);
    if (!latin && !cjk) {
      pos += cp.length;
      continue;
    }
    // Absorb the whole run of terminators ("?!", "...", "！！").
    bool run_has_cjk = cjk;
    std::size_t end = pos + cp.length;
    while (end < text.size()) {
      const CodePoint next = decode_utf8(text, end);
      if (is_cjk_terminator(next.value)) {
        run_has_cjk = true;
      } else if (!is_latin_terminator(next.value)) {
        break;
      }
      end += next.length;
    }
    const bool at_boundary = end >= text.size() || is_space(decode_utf8(text, end).value);
    if (run_has_cjk || at_boundary) {
      emit(start, end);
      start = end;
    }
    pos = end;
  }
  emit(start, text.size());
  return out;
}

std::vector<std::string> tokenize(const Document& doc, const StopwordSet& stopwords,
                                  const LemmaMap& lemma_map) {
  std::vector<std::string> raw;
  if (doc.tokens) {
    raw = *doc.tokens;
  } else if (doc.text) {
    const std::string_view text = *doc.text;
    std::string current;
    std::size_t pos = 0;
    while (pos < text.size()) {
      const CodePoint cp = decode_utf8(text, pos);
      const bool joiner = cp.value == U'\'' || cp.value == U'-';
      bool keep = !is_space(cp.value) && !is_punctuation(cp.value);
      if (joiner && !current.empty() && pos + 1 < text.size()) {
        const CodePoint next = decode_utf8(text, pos + 1);
        keep = !is_space(next.value) && !is_punctuation(next.value);
      }
      if (keep) {
        if (cp.length == 1) {
          current += static_cast<char>(std::tolower(static_cast<unsigned char>(text[pos])));
        } else {
          current.append(text.substr(pos, cp.length));
        }
      } else if (!current.empty()) {
        raw.push_back(std::move(current));
        current.clear();
      }
      pos += cp.length;
    }
    if (!current.empty()) raw.push_back(std::move(current));
  }

  std::vector<std::string> out;
  out.reserve(raw.size());
  for (std::string& surface : raw) {
    if (surface.empty() || stopwords.contains(surface)) continue;
    const auto lemma = lemma_map.find(surface);
    std::string term = lemma == lemma_map.end() ? std::move(surface) : lemma->second;
    if (term.empty() || stopwords.contains(term)) continue;
    out.push_back(std::move(term));
  }
  return out;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string());
  StopwordSet out;
  std::string line;
  while (std::getline(in, line)) {
    const auto word = trim(line);
    if (!word.empty() && word.front() != '#') out.emplace(word);
  }
  return out;
}

LemmaMap load_lemma_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string());
  LemmaMap out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    const auto tab = content.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected surface<TAB>lemma");
    }
    out[std::string(trim(content.substr(0, tab)))] = std::string(trim(content.substr(tab + 1)));
  }
  return out;
}

TokenizedCorpus::TokenizedCorpus(std::vector<std::vector<std::string>> docs)
    : docs_(std::move(docs)) {
  for (const auto& doc : docs_) {
    for (const auto& t : doc) {
      if (t.empty()) throw Error("tokens must be nonempty strings");
      vocabulary_.emplace(t, 0);
    }
  }
  std::size_t next = 0;
  for (auto& [term, id] : vocabulary_) id = next++;
  doc_freq_.assign(vocabulary_.size(), 0);
  std::vector<std::size_t> ids;
  for (const auto& doc : docs_) {
    ids.clear();
    for (const auto& t : doc) ids.push_back(vocabulary_.at(t));
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (auto id : ids) ++doc_freq_[id];
  }
}

std::size_t TokenizedCorpus::doc_freq(const std::string& term) const {
  const auto it = vocabulary_.find(term);
  return it == vocabulary_.end() ? 0 : doc_freq_[it->second];
}

std::uint64_t FrequencyTable::at(std::string_view partition, std::string_view target) const {
  const auto p = std::find(partitions.begin(), partitions.end(), partition);
  const auto t = std::find(targets.begin(), targets.end(), target);
  if (p == partitions.end() || t == targets.end()) {
    throw Error("no cell for (" + std::string(partition) + ", " + std::string(target) + ")");
  }
  return counts[static_cast<std::size_t>(p - partitions.begin())]
               [static_cast<std::size_t>(t - targets.begin())];
}

FrequencyTable count_targets(const TokenizedCorpus& corpus, const TargetSets& targets,
                             std::string partition) {
  FrequencyTable table;
  table.partitions.push_back(std::move(partition));
  std::unordered_map<std::string, std::vector<std::size_t>> lemma_to_targets;
  for (const auto& [name, lemmas] : targets) {
    if (lemmas.empty()) throw Error("target set '" + name + "' is empty");
    for (const auto& lemma : lemmas) lemma_to_targets[lemma].push_back(table.targets.size());
    table.targets.push_back(name);
  }
  std::vector<std::uint64_t> row(table.targets.size(), 0);
  for (const auto& doc : corpus.docs()) {
    for (const auto& t : doc) {
      if (const auto it = lemma_to_targets.find(t); it != lemma_to_targets.end()) {
        for (auto idx : it->second) ++row[idx];
      }
    }
  }
  table.counts.push_back(std::move(row));
  return table;
}

double g2_keyness(std::size_t target_docs, std::size_t target_total, std::size_t reference_docs,
                  std::size_t reference_total) {
  if (target_total == 0 || reference_total == 0) throw Error("keyness needs nonempty corpora");
  if (target_docs > target_total || reference_docs > reference_total) {
    throw Error("document frequency exceeds corpus size");
  }
  // Integer cross-multiplication decides the sign and exact ties.
  const auto lhs = static_cast<unsigned __int128>(target_docs) * reference_total;
  const auto rhs = static_cast<unsigned __int128>(reference_docs) * target_total;
  if (lhs == rhs) return 0.0;

  // Evaluate in a canonical argument order so swapping corpora flips only the
  // sign, bit for bit.
  const bool swap = std::pair{target_docs, target_total} > std::pair{reference_docs, reference_total};
  const double a = static_cast<double>(swap ? reference_docs : target_docs);
  const double b = static_cast<double>(swap ? target_docs : reference_docs);
  const double n1 = static_cast<double>(swap ? reference_total : target_total);
  const double n2 = static_cast<double>(swap ? target_total : reference_total);
  const double n = n1 + n2;
  const double observed[4] = {a, n1 - a, b, n2 - b};
  const double expected[4] = {n1 * (a + b) / n, n1 * (n - a - b) / n, n2 * (a + b) / n,
                              n2 * (n - a - b) / n};
  double g2 = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (observed[k] > 0.0) g2 += observed[k] * std::log(observed[k] / expected[k]);
  }
  g2 = std::max(0.0, 2.0 * g2);
  return lhs > rhs ? g2 : -g2;
}

std::vector<Keyword> extract_keywords(const TokenizedCorpus& target,
                                      const TokenizedCorpus& reference, double min_doc_ratio) {
  if (target.empty() || reference.empty()) throw Error("keyword extraction needs nonempty corpora");
  if (!(min_doc_ratio >= 0.0 && min_doc_ratio <= 1.0)) {
    throw Error("min_doc_ratio must lie in [0, 1]");
  }
  std::vector<Keyword> out;
  for (const auto& [term, id] : target.vocabulary()) {
    const std::size_t a = target.doc_freq(term);
    if (static_cast<double>(a) < min_doc_ratio * static_cast<double>(target.size())) continue;
    const std::size_t b = reference.doc_freq(term);
    out.push_back({term, g2_keyness(a, target.size(), b, reference.size()), a, b});
  }
  std::stable_sort(out.begin(), out.end(), [](const Keyword& x, const Keyword& y) {
    if (x.keyness != y.keyness) return x.keyness > y.keyness;
    return x.term < y.term;
  });
  return out;
}

}  // namespace onom
