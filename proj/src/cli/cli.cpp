#include "onom/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "onom/behavioral_profile.hpp"
#include "onom/coherence.hpp"
#include "onom/corpus.hpp"
#include "onom/error.hpp"
#include "onom/hyperopt.hpp"
#include "onom/parallel.hpp"
#include "onom/sense_induction.hpp"
#include "onom/topic_model.hpp"

namespace fs = std::filesystem;

namespace onom {

namespace {

// Bad or unreadable input; exit code 2.
struct InputError : Error {
  using Error::Error;
};

// A pipeline stage failed; exit code 1.
struct StageError : Error {
  StageError(std::string stage_name, const std::string& what)
      : Error(what), stage(std::move(stage_name)) {}
  std::string stage;
};

template <class F>
auto load(F&& f) {
  try {
    return f();
  } catch (const IoError& e) {
    throw InputError(e.what());
  } catch (const Error& e) {
    throw InputError(e.what());
  }
}

template <class F>
auto stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

struct Global {
  std::uint64_t seed = 42;
  std::size_t threads = 1;
  std::string out_dir = "out";
};

void write_file(const Global& g, const std::string& name, const std::string& content) {
  const fs::path path = fs::path(g.out_dir) / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError(path.string(), "failed writing '" + path.string() + "'");
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

struct TokenInputs {
  std::string stopwords;
  std::string lemmas;
};

void add_token_options(CLI::App* app, TokenInputs& t) {
  app->add_option("--stopwords", t.stopwords, "stopword list, one word per line")->check(CLI::ExistingFile);
  app->add_option("--lemmas", t.lemmas, "lemma map, surface<TAB>lemma per line")->check(CLI::ExistingFile);
}

TokenizedCorpus tokenize_documents(const std::vector<Document>& docs, const TokenInputs& in) {
  const StopwordSet stop = in.stopwords.empty() ? StopwordSet{} : load([&] { return load_stopwords(in.stopwords); });
  const LemmaMap lemmas = in.lemmas.empty() ? LemmaMap{} : load([&] { return load_lemma_map(in.lemmas); });
  std::vector<std::vector<std::string>> tokens;
  for (const auto& d : docs) {
    if (!d.tokens && !d.text) throw InputError("document '" + d.id + "' has neither text nor tokens");
    if (!d.tokens && in.stopwords.empty()) {
      throw InputError("document '" + d.id + "' needs tokenizing: pass a stopword list with --stopwords");
    }
    tokens.push_back(tokenize(d, stop, lemmas));
  }
  return TokenizedCorpus(std::move(tokens));
}

// Token lists aligned with the vector records, taken from a separate document
// file when given, otherwise from the vector file's own text/tokens fields.
TokenizedCorpus aligned_tokens(const EmbeddedCorpus& corpus, const std::string& docs_path,
                               const TokenInputs& in) {
  if (docs_path.empty()) return tokenize_documents(corpus.docs, in);
  const auto docs = load([&] { return load_documents(docs_path); });
  std::map<std::string, const Document*> by_id;
  for (const auto& d : docs) by_id[d.id] = &d;
  std::vector<Document> aligned;
  for (const auto& d : corpus.docs) {
    const auto it = by_id.find(d.id);
    if (it == by_id.end()) throw InputError("vector record '" + d.id + "' has no entry in " + docs_path);
    aligned.push_back(*it->second);
  }
  return tokenize_documents(aligned, in);
}

EmbeddedCorpus load_vectors(const std::string& path) {
  return load([&] { return load_corpus(path, format_for_path(path)); });
}

// ---- topics / optimize ----------------------------------------------------

struct TopicsArgs {
  std::string vectors;
  std::string docs;
  TokenInputs tokens;
  TopicParams params;
  std::string metric = "cosine";
  int min_samples = 0;
  std::size_t top_n = 10;
};

void add_topic_options(CLI::App* app, TopicsArgs& a, bool with_params) {
  app->add_option("--vectors", a.vectors, "vector file (.jsonl, or .bin/.onomvec)")->required();
  app->add_option("--docs", a.docs, "document JSONL with text or tokens, matched by id");
  add_token_options(app, a.tokens);
  app->add_option("--metric", a.metric, "UMAP metric: cosine or euclidean")->capture_default_str();
  app->add_option("--epochs", a.params.n_epochs, "UMAP epochs")->capture_default_str();
  app->add_option("--top-n", a.top_n, "topic words per topic")->capture_default_str();
  if (with_params) {
    app->add_option("--n-neighbors", a.params.n_neighbors)->capture_default_str();
    app->add_option("--n-components", a.params.n_components)->capture_default_str();
    app->add_option("--min-cluster-size", a.params.min_cluster_size)->capture_default_str();
    app->add_option("--min-samples", a.min_samples, "defaults to min-cluster-size");
  }
}

struct TopicRun {
  TopicModel model;
  double npmi;
};

TopicRun run_topics(const EmbeddedCorpus& corpus, const TokenizedCorpus& tokens,
                    const CooccurrenceCounts& counts, const TopicParams& params, std::size_t top_n,
                    std::uint64_t seed) {
  TopicRun run;
  run.model.clusters = stage("cluster", [&] { return cluster_documents(corpus, params, seed); });
  run.model.matrix = stage("ctfidf", [&] { return ctfidf(tokens, run.model.clusters.labels); });
  run.model.words = stage("ctfidf", [&] { return top_topic_words(run.model.matrix, top_n); });
  run.npmi = stage("coherence", [&] { return topic_npmi(run.model.words, counts, top_n); });
  return run;
}

int cmd_topics(const Global& g, TopicsArgs a, std::ostream& out) {
  a.params.metric = load([&] { return parse_metric(a.metric); });
  if (a.min_samples > 0) a.params.min_samples = static_cast<std::size_t>(a.min_samples);
  const auto corpus = load_vectors(a.vectors);
  const auto tokens = aligned_tokens(corpus, a.docs, a.tokens);
  const CooccurrenceCounts counts(tokens);
  const TopicRun run = run_topics(corpus, tokens, counts, a.params, a.top_n, g.seed);

  std::vector<std::string> ids;
  for (const auto& d : corpus.docs) ids.push_back(d.id);
  write_file(g, "topics.json", topic_words_json(run.model.words));
  write_file(g, "assignments.tsv", cluster_labels_tsv(ids, run.model.clusters));
  write_file(g, "coherence.txt", fmt("%.17g", run.npmi) + "\n");
  const auto outliers = std::count(run.model.clusters.labels.begin(), run.model.clusters.labels.end(), -1);
  out << "topics\t" << run.model.clusters.n_clusters << "\n"
      << "outliers\t" << outliers << "\n"
      << "npmi\t" << fmt("%.6f", run.npmi) << "\n";
  return 0;
}

struct OptimizeArgs {
  TopicsArgs topics;
  std::size_t budget = 150;
  std::size_t n_init = 10;
  bool resume = false;
  std::string n_neighbors = "5:50";
  std::string n_components = "2:20";
  std::string min_cluster_size = "5:100";
  std::string min_samples = "1:100";
};

IntRange parse_range(const std::string& s, const std::string& name) {
  const auto colon = s.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(s);
    std::size_t used_lo = 0, used_hi = 0;
    const std::string lo_s = s.substr(0, colon), hi_s = s.substr(colon + 1);
    const int lo = std::stoi(lo_s, &used_lo);
    const int hi = std::stoi(hi_s, &used_hi);
    if (used_lo != lo_s.size() || used_hi != hi_s.size()) throw std::invalid_argument(s);
    return {lo, hi};
  } catch (const std::exception&) {
    throw InputError("--" + name + " expects LOW:HIGH, got '" + s + "'");
  }
}

int cmd_optimize(const Global& g, OptimizeArgs a, std::ostream& out) {
  auto& t = a.topics;
  t.params.metric = load([&] { return parse_metric(t.metric); });
  SearchSpace space;
  space.n_neighbors = parse_range(a.n_neighbors, "n-neighbors");
  space.n_components = parse_range(a.n_components, "n-components");
  space.min_cluster_size = parse_range(a.min_cluster_size, "min-cluster-size");
  space.min_samples = parse_range(a.min_samples, "min-samples");
  load([&] {
    space.validate();
    if (a.n_init < 2 || a.budget < a.n_init) throw Error("need budget >= n-init >= 2");
    return 0;
  });
  const auto corpus = load_vectors(t.vectors);
  const auto tokens = aligned_tokens(corpus, t.docs, t.tokens);
  const CooccurrenceCounts counts(tokens);

  const fs::path history_path = fs::path(g.out_dir) / "history.jsonl";
  std::vector<Trial> history;
  if (a.resume && fs::exists(history_path)) history = load([&] { return load_history(history_path); });
  {
    std::ofstream reset(history_path, std::ios::binary | std::ios::trunc);
    if (!reset) throw IoError(history_path.string(), "cannot write '" + history_path.string() + "'");
    for (const auto& trial : history) reset << trial_to_json(trial) << "\n";
  }
  std::ofstream log(history_path, std::ios::binary | std::ios::app);

  const Objective objective = [&](const HyperParams& p) {
    TopicParams params = t.params;
    params.n_neighbors = static_cast<std::size_t>(p.n_neighbors);
    params.n_components = static_cast<std::size_t>(p.n_components);
    params.min_cluster_size = static_cast<std::size_t>(p.min_cluster_size);
    params.min_samples = static_cast<std::size_t>(p.min_samples);
    return run_topics(corpus, tokens, counts, params, t.top_n, g.seed).npmi;
  };
  const std::size_t resumed = history.size();
  const auto result = stage("optimize", [&] {
    return optimize(objective, space, a.budget, a.n_init, g.seed, history, [&](const Trial& trial) {
      log << trial_to_json(trial) << "\n";
      log.flush();
    });
  });

  nlohmann::ordered_json best;
  best["index"] = result.best.index;
  best["params"] = nlohmann::ordered_json::parse(trial_to_json(result.best))["params"];
  best["score"] = result.best.score;
  write_file(g, "best.json", best.dump(2) + "\n");
  const auto& p = result.best.params;
  out << "trials\t" << result.history.size() << " (" << result.history.size() - resumed << " new)\n"
      << "best\t" << result.best.index << "\tn_neighbors=" << p.n_neighbors
      << " n_components=" << p.n_components << " min_cluster_size=" << p.min_cluster_size
      << " min_samples=" << p.min_samples << "\n"
      << "npmi\t" << fmt("%.6f", result.best.score) << "\n";
  return 0;
}

// ---- senses ---------------------------------------------------------------

struct SensesArgs {
  std::string vectors;
  std::string objects;
  SenseParams params;
  std::string metric = "euclidean";
  std::size_t top_n = 5;
};

std::map<std::string, std::string> load_objects(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::map<std::string, std::string> out;
  const auto rows = parse_delimited(ss.str(), '\t');
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (i == 0 && r.size() >= 1 && r[0] == "id") continue;
    if (r.size() != 2) throw Error(path + ":" + std::to_string(i + 1) + ": expected id<TAB>object");
    if (!r[1].empty()) out[r[0]] = r[1];
  }
  return out;
}

int cmd_senses(const Global& g, SensesArgs a, std::ostream& out) {
  a.params.metric = load([&] { return parse_metric(a.metric); });
  a.params.layout.parallel = g.threads > 1;
  const auto corpus = load_vectors(a.vectors);
  std::optional<std::map<std::string, std::string>> objects;
  if (!a.objects.empty()) objects = load([&] { return load_objects(a.objects); });

  const SenseModel model = stage("senses", [&] { return induce_senses(corpus, a.params, g.seed); });
  write_file(g, "senses.tsv", sense_points_tsv(model));
  write_file(g, "senses.json", sense_model_json(model));
  write_file(g, "senses.svg", sense_scatter_svg(model));

  std::vector<std::optional<std::string>> per_instance;
  for (const auto& id : model.ids) {
    if (objects) {
      const auto it = objects->find(id);
      per_instance.push_back(it == objects->end() ? std::nullopt : std::optional<std::string>(it->second));
    } else {
      per_instance.push_back(std::nullopt);
    }
  }
  const auto profile = stage("profile", [&] { return profile_clusters(model.labels, per_instance, a.top_n); });
  if (objects) write_file(g, "profile.json", object_profile_json(profile));
  for (const auto& c : profile) {
    out << "cluster " << c.label << "\t" << c.percent << "%\tn=" << c.size;
    for (const auto& [lemma, count] : c.objects) out << "\t" << lemma << ":" << count;
    out << "\n";
  }
  return 0;
}

// ---- profile --------------------------------------------------------------

struct ProfileArgs {
  std::string table;
  MoonStyle style;
};

std::string ca_json(const CaResult& ca) {
  auto matrix = [](const Matrix& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::ordered_json j;
  j["rows"] = ca.row_names;
  j["columns"] = ca.col_names;
  j["total_inertia"] = ca.total_inertia;
  j["sigma"] = vec(ca.sigma);
  j["inertia_share"] = vec(ca.inertia_share);
  j["row_mass"] = vec(ca.row_mass);
  j["col_mass"] = vec(ca.col_mass);
  j["row_principal"] = matrix(ca.row_principal);
  j["row_standard"] = matrix(ca.row_standard);
  j["col_principal"] = matrix(ca.col_principal);
  j["col_standard"] = matrix(ca.col_standard);
  return j.dump(2) + "\n";
}

int cmd_profile(const Global& g, const ProfileArgs& a, std::ostream& out) {
  const auto table = load([&] { return load_profile_table(a.table); });
  const auto ca = stage("ca", [&] { return correspondence_analysis(table); });
  const auto report = inertia_report(ca);
  write_file(g, "ca.json", ca_json(ca));
  write_file(g, "inertia.tsv", inertia_report_tsv(report));
  out << "total inertia\t" << fmt("%.10f", ca.total_inertia) << "\n";
  if (report.empty()) {
    out << "no positive dimension: the table shows no association, moon plot omitted\n";
    return 0;
  }
  for (const auto& r : report) {
    out << "dim " << r.dim << "\tsigma " << fmt("%.6f", r.sigma) << "\tshare " << fmt("%.2f", 100.0 * r.share)
        << "%\tcumulative " << fmt("%.2f", 100.0 * r.cumulative) << "%\n";
  }
  std::string nearest = "feature\tangle\tnearest\n";
  for (std::size_t i = 0; i < ca.row_names.size(); ++i) {
    nearest += ca.row_names[i] + "\t" + fmt("%.2f", feature_angle(ca, i)) + "\t" +
               ca.col_names[nearest_word(ca, i)] + "\n";
  }
  write_file(g, "nearest.tsv", nearest);
  write_file(g, "moon.svg", stage("moon-plot", [&] { return moon_plot_svg(ca, a.style); }));
  return 0;
}

// ---- count / keywords / frames / split ------------------------------------

struct CountArgs {
  std::vector<std::string> inputs;
  std::string targets;
  TokenInputs tokens;
};

TargetSets load_targets(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(path + ": " + e.what());
  }
  if (!j.is_object() || j.empty()) throw Error(path + ": expected an object of target name -> lemma list");
  TargetSets out;
  for (const auto& [name, lemmas] : j.items()) {
    if (!lemmas.is_array()) throw Error(path + ": target '" + name + "' must be a list of lemmas");
    auto& set = out[name];
    for (const auto& l : lemmas) {
      if (!l.is_string() || l.get<std::string>().empty()) throw Error(path + ": target '" + name + "' has a non-string lemma");
      set.insert(l.get<std::string>());
    }
    if (set.empty()) throw Error("target set '" + name + "' is empty");
  }
  return out;
}

int cmd_count(const Global& g, const CountArgs& a, std::ostream& out) {
  const TargetSets targets = load([&] { return load_targets(a.targets); });
  std::vector<std::pair<std::string, std::string>> inputs;
  for (const auto& entry : a.inputs) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      inputs.emplace_back(fs::path(entry).stem().string(), entry);
    } else {
      inputs.emplace_back(entry.substr(0, eq), entry.substr(eq + 1));
    }
    if (inputs.back().first.empty()) throw InputError("empty partition label in '" + entry + "'");
  }
  std::vector<FrequencyTable> tables;
  for (const auto& [label, path] : inputs) {
    const auto docs = load([&] { return load_documents(path); });
    const auto tokens = tokenize_documents(docs, a.tokens);
    tables.push_back(stage("count", [&] { return count_targets(tokens, targets, label); }));
  }
  std::string csv = "target";
  for (const auto& t : tables) csv += "," + t.partitions.front();
  csv += "\n";
  const auto& names = tables.front().targets;
  for (std::size_t k = 0; k < names.size(); ++k) {
    csv += names[k];
    for (const auto& t : tables) csv += "," + std::to_string(t.counts.front()[k]);
    csv += "\n";
  }
  write_file(g, "counts.csv", csv);
  out << csv;
  return 0;
}

struct KeywordsArgs {
  std::string target;
  std::string reference;
  TokenInputs tokens;
  double min_doc_ratio = 0.0;
  std::size_t top = 50;
};

int cmd_keywords(const Global& g, const KeywordsArgs& a, std::ostream& out) {
  if (a.min_doc_ratio < 0.0 || a.min_doc_ratio > 1.0) throw InputError("--min-doc-ratio must lie in [0, 1]");
  const auto target = tokenize_documents(load([&] { return load_documents(a.target); }), a.tokens);
  const auto reference = tokenize_documents(load([&] { return load_documents(a.reference); }), a.tokens);
  auto keywords = stage("keywords", [&] { return extract_keywords(target, reference, a.min_doc_ratio); });
  if (keywords.size() > a.top) keywords.resize(a.top);
  std::string tsv = "term\tkeyness\ttarget_docs\treference_docs\n";
  for (const auto& k : keywords) {
    tsv += k.term + "\t" + fmt("%.6f", k.keyness) + "\t" + std::to_string(k.target_docs) + "\t" +
           std::to_string(k.reference_docs) + "\n";
  }
  write_file(g, "keywords.tsv", tsv);
  out << tsv;
  return 0;
}

int cmd_frames(const Global& g, const std::string& annotations, std::ostream& out) {
  const auto ann = load([&] { return load_annotations(annotations); });
  const auto tally = stage("frames", [&] { return frame_tally(ann); });
  write_file(g, "frames.tsv", frame_tally_tsv(tally));
  write_file(g, "frames.svg", frame_tally_svg(tally));
  for (const auto& lang : tally.languages) out << lang << "\t" << tally.totals.at(lang) << " annotations\n";
  return 0;
}

int cmd_split(const Global& g, const std::string& input, const std::string& lang, std::ostream& out) {
  const auto docs = load([&] { return load_documents(input); });
  nlohmann::ordered_json line;
  std::string jsonl, tsv;
  std::size_t count = 0;
  for (const auto& d : docs) {
    if (!d.text) throw InputError("document '" + d.id + "' has no text to split");
    const std::string l = d.lang.value_or(lang);
    for (const auto& s : split_sentences(*d.text, l, d.id)) {
      nlohmann::ordered_json j;
      j["id"] = s.id;
      j["text"] = *s.text;
      if (s.lang) j["lang"] = *s.lang;
      jsonl += j.dump() + "\n";
      std::string flat = *s.text;
      std::replace(flat.begin(), flat.end(), '\t', ' ');
      std::replace(flat.begin(), flat.end(), '\n', ' ');
      tsv += s.id + "\t" + flat + "\n";
      ++count;
    }
  }
  write_file(g, "sentences.jsonl", jsonl);
  write_file(g, "sentences.tsv", tsv);
  out << "sentences\t" << count << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"onom: corpus-semantics pipeline toolkit"};
  app.set_config("--config", "", "read options from an INI/TOML file");
  Global g;
  app.add_option("--seed", g.seed, "seed for every random stage")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads; 1 gives byte-identical reruns")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "directory for output files")->capture_default_str();
  app.require_subcommand(1);

  TopicsArgs topics;
  auto* c_topics = app.add_subcommand("topics", "cluster documents into topics and score coherence");
  add_topic_options(c_topics, topics, true);

  OptimizeArgs optimize_args;
  auto* c_opt = app.add_subcommand("optimize", "Bayesian search over the topic hyperparameters");
  add_topic_options(c_opt, optimize_args.topics, false);
  c_opt->add_option("--budget", optimize_args.budget, "total trials")->capture_default_str();
  c_opt->add_option("--n-init", optimize_args.n_init, "quasi-random trials before the GP takes over")->capture_default_str();
  c_opt->add_flag("--resume", optimize_args.resume, "continue from out-dir/history.jsonl");
  c_opt->add_option("--n-neighbors", optimize_args.n_neighbors, "LOW:HIGH")->capture_default_str();
  c_opt->add_option("--n-components", optimize_args.n_components, "LOW:HIGH")->capture_default_str();
  c_opt->add_option("--min-cluster-size", optimize_args.min_cluster_size, "LOW:HIGH")->capture_default_str();
  c_opt->add_option("--min-samples", optimize_args.min_samples, "LOW:HIGH")->capture_default_str();

  SensesArgs senses;
  auto* c_senses = app.add_subcommand("senses", "induce word senses from instance vectors");
  c_senses->add_option("--vectors", senses.vectors, "instance vector file")->required();
  c_senses->add_option("--objects", senses.objects, "TSV id<TAB>object lemma");
  c_senses->add_option("--k", senses.params.k, "number of senses")->capture_default_str();
  c_senses->add_option("--n-neighbors", senses.params.n_neighbors)->capture_default_str();
  c_senses->add_option("--metric", senses.metric, "UMAP metric: euclidean or cosine")->capture_default_str();
  c_senses->add_option("--epochs", senses.params.layout.n_epochs, "UMAP epochs")->capture_default_str();
  c_senses->add_option("--top-n", senses.top_n, "objects listed per cluster")->capture_default_str();

  ProfileArgs profile;
  auto* c_profile = app.add_subcommand("profile", "correspondence analysis and moon plot of a profile table");
  c_profile->add_option("--table", profile.table, "CSV tag_type,id_tag,<word>,...")->required();
  c_profile->add_option("--min-pt", profile.style.min_pt, "smallest feature font size")->capture_default_str();
  c_profile->add_option("--max-pt", profile.style.max_pt, "largest feature font size")->capture_default_str();

  CountArgs count;
  auto* c_count = app.add_subcommand("count", "raw frequencies of target lemma sets");
  c_count->add_option("--input", count.inputs, "LABEL=documents.jsonl (repeatable)")->required();
  c_count->add_option("--targets", count.targets, "JSON object: target name -> lemma list")->required();
  add_token_options(c_count, count.tokens);

  KeywordsArgs keywords;
  auto* c_kw = app.add_subcommand("keywords", "document-frequency G2 keywords of a target corpus");
  c_kw->add_option("--target", keywords.target, "target documents JSONL")->required();
  c_kw->add_option("--reference", keywords.reference, "reference documents JSONL")->required();
  add_token_options(c_kw, keywords.tokens);
  c_kw->add_option("--min-doc-ratio", keywords.min_doc_ratio, "drop terms in fewer target documents")->capture_default_str();
  c_kw->add_option("--top", keywords.top, "keywords to report")->capture_default_str();

  std::string annotations;
  auto* c_frames = app.add_subcommand("frames", "tally frame annotations per language");
  c_frames->add_option("--annotations", annotations, "TSV language, lu, frame, instance_id")->required();

  std::string split_input, split_lang;
  auto* c_split = app.add_subcommand("split", "split review documents into sentence documents");
  c_split->add_option("--input", split_input, "documents JSONL with text")->required();
  c_split->add_option("--lang", split_lang, "language tag for documents without one");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    set_thread_count(g.threads);
    std::error_code ec;
    fs::create_directories(g.out_dir, ec);
    if (ec || !fs::is_directory(g.out_dir)) throw IoError(g.out_dir, "cannot create output directory '" + g.out_dir + "'");
    if (c_topics->parsed()) return cmd_topics(g, topics, out);
    if (c_opt->parsed()) return cmd_optimize(g, optimize_args, out);
    if (c_senses->parsed()) return cmd_senses(g, senses, out);
    if (c_profile->parsed()) return cmd_profile(g, profile, out);
    if (c_count->parsed()) return cmd_count(g, count, out);
    if (c_kw->parsed()) return cmd_keywords(g, keywords, out);
    if (c_frames->parsed()) return cmd_frames(g, annotations, out);
    if (c_split->parsed()) return cmd_split(g, split_input, split_lang, out);
  } catch (const InputError& e) {
    err << "[load] " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    err << "[io] " << e.what() << "\n";
    return 2;
  } catch (const StageError& e) {
    err << "[" << e.stage << "] " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "[run] " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"onom"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace onom
