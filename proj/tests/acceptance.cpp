// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <Eigen/SVD>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "cli_fixture.hpp"
#include "onom/behavioral_profile.hpp"
#include "onom/coherence.hpp"
#include "onom/density_cluster.hpp"
#include "onom/hyperopt.hpp"
#include "onom/sense_induction.hpp"
#include "onom/topic_model.hpp"
#include "oracles.hpp"

using onom::Matrix;
using fixture::run;
using fixture::slurp;
using fixture::TempDir;

namespace {

const std::string kFixture = std::string(ONOM_DATA_DIR) + "/appendix_profile.csv";

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* pattern, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

onom::ProfileTable table_of(const Matrix& values) {
  onom::ProfileTable t;
  for (Eigen::Index i = 0; i < values.rows(); ++i) t.rows.emplace_back("T", "r" + std::to_string(i));
  for (Eigen::Index j = 0; j < values.cols(); ++j) t.columns.push_back("c" + std::to_string(j));
  t.values = values;
  return t;
}

std::vector<std::string> read_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) return out;
    start = tab + 1;
  }
}

// ---- correspondence analysis ---------------------------------------------

Outcome ca_fixture() {
  TempDir dir("acc-ca");
  const auto start = std::chrono::steady_clock::now();
  const auto r = run({"--out-dir", dir / "out", "profile", "--table", kFixture});
  const double secs = seconds_since(start);
  if (r.code != 0) return {false, "profile exited " + std::to_string(r.code) + ": " + r.err};
  const auto ca = nlohmann::json::parse(slurp(dir / "out/ca.json"));
  const auto sigma = ca["sigma"];
  std::size_t positive = 0;
  for (const auto& s : sigma) positive += s.get<double>() > 0.0;
  const auto lines = read_lines(slurp(dir / "out/inertia.tsv"));
  // Header then one row per dimension; cumulative share is the last column.
  const double cumulative2 = lines.size() >= 3 ? std::stod(split_tabs(lines[2]).back()) : -1.0;
  const bool ok = positive == 2 && sigma.size() == 2 && std::abs(cumulative2 - 1.0) <= 1e-9 && secs < 1.0;
  return {ok, std::to_string(positive) + " positive singular values, cumulative share at dim 2 = " +
                  fmt("%.12f", cumulative2) + ", " + fmt("%.3f", secs) + " s"};
}

Outcome ca_hand() {
  Matrix x(2, 2);
  x << 2, 1, 1, 2;
  const auto ca = onom::correspondence_analysis(table_of(x));
  double chi2 = 0.0;
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) chi2 += (x(i, j) - 1.5) * (x(i, j) - 1.5) / 1.5;
  const bool ok = ca.dims() == 1 && std::abs(ca.sigma(0) - 1.0 / 3.0) <= 1e-12 &&
                  std::abs(ca.total_inertia - 1.0 / 9.0) <= 1e-12 && std::abs(chi2 - 2.0 / 3.0) <= 1e-12 &&
                  std::abs(x.sum() * ca.total_inertia - chi2) <= 1e-12;
  return {ok, "sigma1 = " + fmt("%.15f", ca.sigma(0)) + ", inertia = " + fmt("%.15f", ca.total_inertia) +
                  ", n*inertia = " + fmt("%.15f", x.sum() * ca.total_inertia) + " vs chi2 " + fmt("%.15f", chi2)};
}

double circular_gap(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 2 * std::numbers::pi);
  return std::min(d, 2 * std::numbers::pi - d);
}

// Nearest word by angle using Eigen's SVD of the standardized residuals.
Outcome moon_association() {
  const auto table = onom::load_profile_table(kFixture);
  const Eigen::MatrixXd p = table.values / table.values.sum();
  const Eigen::VectorXd r = p.rowwise().sum();
  const Eigen::VectorXd c = p.colwise().sum().transpose();
  Eigen::MatrixXd s(p.rows(), p.cols());
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j) s(i, j) = (p(i, j) - r(i) * c(j)) / std::sqrt(r(i) * c(j));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::MatrixXd row_std = r.cwiseSqrt().cwiseInverse().asDiagonal() * svd.matrixU();
  const Eigen::MatrixXd col_pc =
      c.cwiseSqrt().cwiseInverse().asDiagonal() * svd.matrixV() * svd.singularValues().asDiagonal();

  const auto ca = onom::correspondence_analysis(table);
  auto check = [&](const std::string& feature, const std::string& expected, std::string& detail) {
    const auto it = std::find(ca.row_names.begin(), ca.row_names.end(), feature);
    if (it == ca.row_names.end()) return false;
    const auto row = static_cast<Eigen::Index>(it - ca.row_names.begin());
    const double fa = std::atan2(row_std(row, 1), row_std(row, 0));
    std::vector<std::pair<double, std::string>> gaps;
    for (Eigen::Index j = 0; j < col_pc.rows(); ++j) {
      gaps.emplace_back(circular_gap(fa, std::atan2(col_pc(j, 1), col_pc(j, 0))),
                        ca.col_names[static_cast<std::size_t>(j)]);
    }
    std::sort(gaps.begin(), gaps.end());
    const auto ours = ca.col_names[onom::nearest_word(ca, static_cast<std::size_t>(row))];
    detail += feature + " -> " + ours + " (oracle " + gaps[0].second + ", gap " + fmt("%.2f", gaps[0].first * 180 / std::numbers::pi) +
              " vs " + fmt("%.2f", gaps[1].first * 180 / std::numbers::pi) + " deg)";
    return ours == expected && gaps[0].second == expected && gaps[0].first < gaps[1].first;
  };
  std::string detail;
  const bool a = check("Theme: self-care", "shang", detail);
  detail += "; ";
  const bool b = check("Theme: social issue", "harm", detail);
  return {a && b, detail};
}

// ---- HDBSCAN ---------------------------------------------------------------

Matrix grouped_points(onom::Rng& rng, std::size_t n, std::size_t dim) {
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  const std::size_t groups = 1 + rng.below(4);
  std::vector<std::vector<double>> centers(groups, std::vector<double>(dim));
  for (auto& center : centers) {
    for (auto& v : center) v = 10.0 * rng.uniform();
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& center = centers[rng.below(groups)];
    for (std::size_t d = 0; d < dim; ++d) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = center[d] + rng.normal();
    }
  }
  return m;
}

std::vector<double> recompute_stability(const onom::CondensedTree& t) {
  std::vector<double> s(t.nodes.size(), 0.0);
  for (std::size_t p = 0; p < t.n_points; ++p) s[t.point_node[p]] += t.point_lambda[p] - t.nodes[t.point_node[p]].lambda_birth;
  for (const auto& node : t.nodes) {
    for (auto child : node.children) {
      s[node.id] += static_cast<double>(t.nodes[child].size) * (t.nodes[child].lambda_birth - node.lambda_birth);
    }
  }
  return s;
}

Outcome hdbscan_oracles() {
  onom::Rng rng(2025);
  std::size_t mst_equal = 0, trees = 0, trees_equal = 0;
  double worst = 0.0;
  const std::size_t instances = 200;
  for (std::size_t t = 0; t < instances; ++t) {
    const std::size_t n = 3 + rng.below(48);
    const std::size_t dim = 1 + rng.below(3);
    const Matrix x = grouped_points(rng, n, dim);
    const std::size_t ms = 1 + rng.below(std::min<std::uint64_t>(n - 1, 6));
    const std::size_t mcs = 2 + rng.below(5);
    const auto core = onom::core_distances(x, ms);
    const auto mst = onom::mutual_reachability_mst(x, core);
    const auto want = oracle::kruskal_weights(x, oracle::core_distances(x, ms));
    double want_total = 0.0;
    for (double w : want) want_total += w;
    const double got_total = mst.total_weight();
    worst = std::max(worst, std::abs(got_total - want_total));
    mst_equal += got_total == want_total;

    const auto tree = onom::condense_tree(mst, mcs);
    if (tree.nodes.size() > 12) continue;
    ++trees;
    const auto stability = recompute_stability(tree);
    std::vector<long> parent;
    std::vector<bool> allowed;
    for (const auto& node : tree.nodes) {
      parent.push_back(node.parent ? static_cast<long>(*node.parent) : -1);
      allowed.push_back(node.size >= mcs);
    }
    const auto selected = onom::select_clusters(tree);
    double total = 0.0;
    for (std::size_t i = 0; i < selected.size(); ++i) total += selected[i] ? stability[i] : 0.0;
    const double best = oracle::best_antichain(parent, stability, allowed);
    trees_equal += std::abs(total - best) <= 1e-9 * std::max(1.0, std::abs(best));
  }
  const bool ok = mst_equal == instances && trees > 0 && trees_equal == trees;
  return {ok, "MST total weight equal on " + std::to_string(mst_equal) + "/" + std::to_string(instances) +
                  " (max |diff| " + fmt("%.3g", worst) + "), stability optimum on " + std::to_string(trees_equal) +
                  "/" + std::to_string(trees) + " trees with <= 12 nodes"};
}

// ---- NPMI and c-TF-IDF -----------------------------------------------------

Outcome npmi_cases() {
  const double independent = onom::npmi(100, 50, 50, 25);
  const double perfect = onom::npmi(100, 25, 25, 25);
  const double hand = onom::npmi(100, 40, 30, 20);
  const double hand_ref = std::log(0.2 / (0.4 * 0.3)) / -std::log(0.2);
  bool bounded = true;
  onom::Rng rng(5);
  for (int i = 0; i < 20000; ++i) {
    const std::size_t n = 1 + rng.below(200);
    const std::size_t cx = 1 + rng.below(n), cy = 1 + rng.below(n);
    const std::size_t lo = cx + cy > n ? cx + cy - n : 0;
    const std::size_t joint = lo + rng.below(std::min(cx, cy) - lo + 1);
    const double v = onom::npmi(n, cx, cy, joint);
    bounded = bounded && std::isfinite(v) && v >= -1.0 && v <= 1.0;
  }
  const bool ok = std::abs(independent) <= 1e-6 && std::abs(perfect - 1.0) <= 1e-6 &&
                  std::abs(hand - hand_ref) <= 1e-6 && std::abs(hand - 0.3174) <= 1e-4 && bounded;
  return {ok, "independent " + fmt("%.9f", independent) + ", perfect " + fmt("%.9f", perfect) + ", hand " +
                  fmt("%.9f", hand) + ", 20000 random count tuples within [-1, 1]: " + (bounded ? "yes" : "no")};
}

Outcome ctfidf_cases() {
  const onom::TokenizedCorpus tokens({{"t", "a"}, {"t", "b"}, {"a", "b", "c"}, {"c", "a", "b"}});
  const auto m = onom::ctfidf(tokens, std::vector<int>{0, 0, 1, 1});
  const auto col = std::find(m.terms.begin(), m.terms.end(), "t") - m.terms.begin();
  const double w = m.weights(0, col);

  const auto planted = fixture::planted_topics(4, 15, 4, 3);
  const auto base = onom::ctfidf(planted.tokens, planted.truth);
  onom::Rng rng(17);
  bool invariant = true;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> perm(planted.truth.size());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm.begin(), perm.end());
    std::vector<std::vector<std::string>> docs;
    std::vector<int> labels;
    for (auto p : perm) {
      auto doc = planted.tokens.docs()[p];
      rng.shuffle(doc.begin(), doc.end());
      docs.push_back(std::move(doc));
      labels.push_back(planted.truth[p]);
    }
    const auto shuffled = onom::ctfidf(onom::TokenizedCorpus(docs), labels);
    invariant = invariant && shuffled.terms == base.terms && shuffled.topics == base.topics &&
                (shuffled.weights - base.weights).cwiseAbs().maxCoeff() <= 1e-12;
  }
  const bool ok = std::abs(w - 2.0 * std::log(3.5)) <= 1e-9 && invariant;
  return {ok, "weight " + fmt("%.12f", w) + " vs 2 ln 3.5 = " + fmt("%.12f", 2.0 * std::log(3.5)) +
                  ", 20 document/token permutations invariant: " + (invariant ? "yes" : "no")};
}

// ---- k-means ---------------------------------------------------------------

Outcome kmeans_oracle() {
  onom::Rng rng(31);
  const int trials = 500;
  int matches = 0;
  std::size_t steps = 0, monotone = 0;
  for (int t = 0; t < trials; ++t) {
    const std::size_t n = 2 + rng.below(11);
    const std::size_t dim = 1 + rng.below(2);
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = 10.0 * rng.uniform();
    const auto r = onom::kmeans(x, 2, static_cast<std::uint64_t>(1000 + t));
    for (std::size_t i = 1; i < r.sse_history.size(); ++i) {
      ++steps;
      monotone += r.sse_history[i] <= r.sse_history[i - 1] * (1.0 + 1e-12);
    }
    matches += std::abs(r.sse - oracle::best_two_partition_sse(x)) <= 1e-9;
  }
  const bool ok = matches * 100 >= trials * 95 && monotone == steps;
  return {ok, std::to_string(matches) + "/" + std::to_string(trials) + " runs at the exhaustive optimum, SSE non-increasing on " +
                  std::to_string(monotone) + "/" + std::to_string(steps) + " iterations"};
}

// ---- Bayesian optimization -------------------------------------------------

Outcome bayesian_optimization() {
  const onom::HyperParams opt{23, 11, 47, 19};
  const auto objective = [&](const onom::HyperParams& p) {
    const auto a = p.values(), b = opt.values();
    double s = 0.0;
    for (std::size_t i = 0; i < 4; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return -s;
  };
  int hits = 0;
  double slowest = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto start = std::chrono::steady_clock::now();
    const auto result = onom::optimize(objective, onom::SearchSpace{}, 150, 10, seed);
    slowest = std::max(slowest, seconds_since(start));
    const auto b = result.best.params.values(), o = opt.values();
    bool near = true;
    for (std::size_t i = 0; i < 4; ++i) near = near && std::abs(b[i] - o[i]) <= 2;
    hits += near;
  }
  return {hits >= 9 && slowest < 60.0, std::to_string(hits) + "/10 seeds within 2 steps, slowest run " + fmt("%.2f", slowest) + " s"};
}

// ---- end to end ------------------------------------------------------------

Outcome topic_recovery() {
  TempDir dir("acc-topics");
  const auto planted = fixture::planted_topics(4, 50, 16, 77);
  fixture::write_planted(planted, dir / "v.jsonl");
  const auto r = run({"--out-dir", dir / "out", "topics", "--vectors", dir / "v.jsonl"});
  if (r.code != 0) return {false, "topics exited " + std::to_string(r.code) + ": " + r.err};
  std::vector<int> labels;
  const auto lines = read_lines(slurp(dir / "out/assignments.tsv"));
  for (std::size_t i = 1; i < lines.size(); ++i) labels.push_back(std::stoi(split_tabs(lines[i])[1]));
  const double ari = oracle::adjusted_rand(labels, planted.truth);
  const double npmi = std::stod(slurp(dir / "out/coherence.txt"));

  // Random assignments with the same topic sizes and outliers.
  onom::Rng rng(4);
  double best_random = -1.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> shuffled = labels;
    rng.shuffle(shuffled.begin(), shuffled.end());
    const auto words = onom::top_topic_words(onom::ctfidf(planted.tokens, shuffled));
    best_random = std::max(best_random, onom::topic_npmi(words, planted.tokens));
  }
  return {ari >= 0.9 && npmi > best_random,
          "ARI " + fmt("%.4f", ari) + ", NPMI " + fmt("%.4f", npmi) + " vs best of 10 size-matched random " + fmt("%.4f", best_random)};
}

Outcome sense_recovery() {
  TempDir dir("acc-senses");
  const auto senses = fixture::two_senses(100, 16, 8);
  fixture::write_senses(senses, dir / "v.jsonl", dir / "objects.tsv");
  const auto r = run({"--out-dir", dir / "out", "senses", "--vectors", dir / "v.jsonl", "--objects", dir / "objects.tsv"});
  if (r.code != 0) return {false, "senses exited " + std::to_string(r.code) + ": " + r.err};
  const auto model = nlohmann::json::parse(slurp(dir / "out/senses.json"));
  const auto lines = read_lines(slurp(dir / "out/senses.tsv"));
  std::vector<int> labels;
  std::size_t agree = 0;
  const auto w = model["boundary"]["w"];
  const double b = model["boundary"]["b"].get<double>();
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_tabs(lines[i]);
    const int label = std::stoi(f[3]);
    labels.push_back(label);
    const double decision = w[0].get<double>() * std::stod(f[1]) + w[1].get<double>() * std::stod(f[2]) + b;
    agree += (decision > 0) == (label == 1);
  }
  const double purity = oracle::purity(labels, senses.truth);
  const double agreement = static_cast<double>(agree) / static_cast<double>(labels.size());
  const auto profile = nlohmann::json::parse(slurp(dir / "out/profile.json"));
  bool format = !profile.empty();
  std::string shares;
  for (const auto& c : profile) {
    const auto pct = c["percent"].get<std::string>();
    const bool digits = pct.size() >= 2 && pct.back() == '%' &&
                        std::all_of(pct.begin(), pct.end() - 1, [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); });
    format = format && digits && std::stoi(pct) == static_cast<int>(std::lround(100.0 * c["share"].get<double>()));
    shares += (shares.empty() ? "" : " ") + pct;
  }
  return {purity >= 0.95 && agreement >= 0.95 && format,
          "purity " + fmt("%.3f", purity) + ", boundary agreement " + fmt("%.3f", agreement) + ", shares " + shares};
}

Outcome determinism() {
  TempDir dir("acc-det");
  fixture::write_planted(fixture::planted_topics(3, 30, 8, 12), dir / "topics.jsonl");
  const auto senses = fixture::two_senses(40, 8, 2);
  fixture::write_senses(senses, dir / "senses.jsonl", dir / "objects.tsv");
  fixture::spit(dir / "a.jsonl", R"({"id":"1","text":"Shang hurts. Harm is harm!"})" "\n" R"({"id":"2","text":"the cream helps"})" "\n");
  fixture::spit(dir / "b.jsonl", R"({"id":"1","text":"harm the skin"})" "\n" R"({"id":"2","text":"nothing here"})" "\n");
  fixture::spit(dir / "stop.txt", "the\nis\n");
  fixture::spit(dir / "targets.json", R"({"harm":["harm"],"shang":["shang"]})");
  fixture::spit(dir / "ann.tsv", "zh\tshang\tCause_harm\t1\nen\tharm\tCause_harm\t2\nen\tharm\tDamaging\t3\n");

  const std::vector<std::vector<std::string>> commands{
      {"topics", "--vectors", dir / "topics.jsonl", "--n-neighbors", "10", "--min-cluster-size", "8"},
      {"optimize", "--vectors", dir / "topics.jsonl", "--budget", "5", "--n-init", "3", "--epochs", "50",
       "--n-neighbors", "5:12", "--min-cluster-size", "5:15", "--min-samples", "1:10"},
      {"senses", "--vectors", dir / "senses.jsonl", "--objects", dir / "objects.tsv"},
      {"profile", "--table", kFixture},
      {"count", "--input", "a=" + (dir / "a.jsonl"), "--input", "b=" + (dir / "b.jsonl"), "--targets",
       dir / "targets.json", "--stopwords", dir / "stop.txt"},
      {"keywords", "--target", dir / "a.jsonl", "--reference", dir / "b.jsonl", "--stopwords", dir / "stop.txt"},
      {"frames", "--annotations", dir / "ann.tsv"},
      {"split", "--input", dir / "a.jsonl", "--lang", "en"},
  };
  std::size_t files = 0, identical = 0;
  std::string mismatches;
  for (const auto& cmd : commands) {
    std::vector<std::filesystem::path> outs;
    for (int rep = 0; rep < 2; ++rep) {
      const auto out = dir.path() / (cmd[0] + "-" + std::to_string(rep));
      std::vector<std::string> args{"--threads", "1", "--seed", "7", "--out-dir", out.string()};
      args.insert(args.end(), cmd.begin(), cmd.end());
      const auto r = run(args);
      if (r.code != 0) return {false, cmd[0] + " exited " + std::to_string(r.code) + ": " + r.err};
      outs.push_back(out);
    }
    for (const auto& entry : std::filesystem::directory_iterator(outs[0])) {
      ++files;
      const auto name = entry.path().filename();
      if (slurp(entry.path()) == slurp(outs[1] / name)) {
        ++identical;
      } else {
        mismatches += " " + cmd[0] + "/" + name.string();
      }
    }
  }
  return {files > 0 && identical == files,
          std::to_string(identical) + "/" + std::to_string(files) + " output files byte-identical across 8 commands" +
              (mismatches.empty() ? "" : "; differ:" + mismatches)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"CA fixture reproduction", ca_fixture},
      {"CA hand oracle", ca_hand},
      {"Moon-plot association", moon_association},
      {"HDBSCAN oracle equivalence", hdbscan_oracles},
      {"NPMI correctness", npmi_cases},
      {"c-TF-IDF correctness", ctfidf_cases},
      {"k-means oracle", kmeans_oracle},
      {"Bayesian optimization", bayesian_optimization},
      {"End-to-end topic recovery", topic_recovery},
      {"Sense-induction recovery", sense_recovery},
      {"Determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
