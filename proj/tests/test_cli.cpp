#include <doctest.h>

#include <json.hpp>

#include "cli_fixture.hpp"
#include "oracles.hpp"

using fixture::run;
using fixture::slurp;
using fixture::spit;
using fixture::TempDir;

namespace {

std::vector<int> assignment_labels(const std::string& tsv) {
  std::istringstream in(tsv);
  std::string line;
  std::getline(in, line);
  std::vector<int> labels;
  while (std::getline(in, line)) {
    const auto a = line.find('\t');
    const auto b = line.find('\t', a + 1);
    labels.push_back(std::stoi(line.substr(a + 1, b - a - 1)));
  }
  return labels;
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"topics"}).code == 2);
  CHECK(run({"--threads", "0", "frames", "--annotations", "x"}).code == 2);
}

TEST_CASE("topics writes assignments, words and coherence") {
  TempDir dir("cli-topics");
  const auto planted = fixture::planted_topics(3, 40, 8, 5);
  fixture::write_planted(planted, dir / "vectors.jsonl");
  const auto r = run({"--out-dir", dir / "out", "topics", "--vectors", dir / "vectors.jsonl",
                      "--n-neighbors", "10", "--min-cluster-size", "8"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("topics\t3\n") != std::string::npos);
  const auto labels = assignment_labels(slurp(dir / "out/assignments.tsv"));
  CHECK(oracle::adjusted_rand(labels, planted.truth) >= 0.9);
  const auto words = nlohmann::json::parse(slurp(dir / "out/topics.json"));
  CHECK(words.size() == 3);
  const double npmi = std::stod(slurp(dir / "out/coherence.txt"));
  CHECK(npmi > 0.0);
  CHECK(npmi <= 1.0);
}

TEST_CASE("topics on raw text requires a stopword list") {
  TempDir dir("cli-text");
  std::string jsonl;
  for (int i = 0; i < 20; ++i) {
    jsonl += R"({"id":"d)" + std::to_string(i) + R"(","text":"the cat sat","vector":[)" +
             std::to_string(i % 2) + ".0," + std::to_string(i) + ".0]}\n";
  }
  spit(dir / "v.jsonl", jsonl);
  const auto r = run({"--out-dir", dir / "out", "topics", "--vectors", dir / "v.jsonl"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--stopwords") != std::string::npos);
}

TEST_CASE("load errors name the file and exit 2") {
  TempDir dir("cli-load");
  spit(dir / "bad.jsonl", "{\"id\":\"a\",\"vector\":[1,2]}\n{\"id\":\"b\",\"vector\":[1]}\n");
  const auto r = run({"--out-dir", dir / "out", "senses", "--vectors", dir / "bad.jsonl"});
  CHECK(r.code == 2);
  CHECK(r.err.rfind("[load]", 0) == 0);
  const auto missing = run({"--out-dir", dir / "out", "profile", "--table", dir / "nope.csv"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("nope.csv") != std::string::npos);
}

TEST_CASE("stage failures exit 1 with the stage name") {
  TempDir dir("cli-stage");
  const auto planted = fixture::planted_topics(2, 5, 4, 1);
  fixture::write_planted(planted, dir / "vectors.jsonl");
  const auto r = run({"--out-dir", dir / "out", "topics", "--vectors", dir / "vectors.jsonl"});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("[cluster]", 0) == 0);
}

TEST_CASE("senses writes points, plot and object profile") {
  TempDir dir("cli-senses");
  const auto senses = fixture::two_senses(40, 6, 3);
  fixture::write_senses(senses, dir / "v.jsonl", dir / "objects.tsv");
  const auto r = run({"--out-dir", dir / "out", "senses", "--vectors", dir / "v.jsonl", "--objects",
                      dir / "objects.tsv", "--epochs", "100"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("50%") != std::string::npos);
  const auto profile = nlohmann::json::parse(slurp(dir / "out/profile.json"));
  REQUIRE(profile.size() == 2);
  CHECK(profile[0]["percent"] == "50%");
  CHECK(slurp(dir / "out/senses.svg").find("<svg") != std::string::npos);
  CHECK(!slurp(dir / "out/senses.tsv").empty());
}

TEST_CASE("profile on the appendix table") {
  TempDir dir("cli-profile");
  const auto r = run({"--out-dir", dir / "out", "profile", "--table", ONOM_DATA_DIR "/appendix_profile.csv"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("cumulative 100.00%") != std::string::npos);
  const auto nearest = slurp(dir / "out/nearest.tsv");
  CHECK(nearest.find("Theme: self-care\t") != std::string::npos);
  CHECK(slurp(dir / "out/moon.svg").find("</svg>") != std::string::npos);
  const auto ca = nlohmann::json::parse(slurp(dir / "out/ca.json"));
  CHECK(ca["sigma"].size() == 2);
}

TEST_CASE("profile without association omits the plot") {
  TempDir dir("cli-flat");
  spit(dir / "t.csv", "tag_type,id_tag,a,b\nf,x,1,2\nf,y,2,4\n");
  const auto r = run({"--out-dir", dir / "out", "profile", "--table", dir / "t.csv"});
  CHECK(r.code == 0);
  CHECK(r.out.find("omitted") != std::string::npos);
  CHECK(!std::filesystem::exists(dir / "out/moon.svg"));
}

TEST_CASE("count and keywords") {
  TempDir dir("cli-count");
  spit(dir / "a.jsonl", R"({"id":"1","tokens":["shang","xin","shang"]})" "\n" R"({"id":"2","tokens":["harm","x"]})" "\n");
  spit(dir / "b.jsonl", R"({"id":"1","tokens":["x","y"]})" "\n" R"({"id":"2","tokens":["harm","y"]})" "\n");
  spit(dir / "targets.json", R"({"shang":["shang"],"harm":["harm","hurt"]})");
  const auto r = run({"--out-dir", dir / "out", "count", "--input", "zh=" + (dir / "a.jsonl"), "--input",
                      "en=" + (dir / "b.jsonl"), "--targets", dir / "targets.json"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(slurp(dir / "out/counts.csv") == "target,zh,en\nharm,1,1\nshang,2,0\n");

  spit(dir / "empty.json", R"({"shang":[]})");
  CHECK(run({"--out-dir", dir / "out", "count", "--input", dir / "a.jsonl", "--targets", dir / "empty.json"}).code == 2);

  const auto k = run({"--out-dir", dir / "out", "keywords", "--target", dir / "a.jsonl", "--reference", dir / "b.jsonl"});
  REQUIRE_MESSAGE(k.code == 0, k.err);
  CHECK(slurp(dir / "out/keywords.tsv").rfind("term\tkeyness\ttarget_docs\treference_docs\n", 0) == 0);
}

TEST_CASE("frames and split") {
  TempDir dir("cli-frames");
  spit(dir / "ann.tsv", "language\tlu\tframe\tinstance_id\nzh\tshang\tCause_harm\t1\nzh\tshang\tExperience_bodily_harm\t2\nen\tharm\tCause_harm\t3\n");
  const auto r = run({"--out-dir", dir / "out", "frames", "--annotations", dir / "ann.tsv"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(slurp(dir / "out/frames.tsv").find("zh\tCause_harm\tshang\t1\t0.500000") != std::string::npos);

  spit(dir / "reviews.jsonl", R"({"id":"r1","text":"It hurt. I cried!","lang":"en"})" "\n");
  const auto s = run({"--out-dir", dir / "out", "split", "--input", dir / "reviews.jsonl"});
  REQUIRE_MESSAGE(s.code == 0, s.err);
  CHECK(s.out == "sentences\t2\n");
  CHECK(slurp(dir / "out/sentences.tsv").find("\tI cried!\n") != std::string::npos);
}

TEST_CASE("optimize resumes to the same history as an uninterrupted run") {
  TempDir dir("cli-opt");
  const auto planted = fixture::planted_topics(3, 20, 6, 8);
  fixture::write_planted(planted, dir / "v.jsonl");
  auto args = [&](const std::string& out, const std::string& budget) {
    return std::vector<std::string>{"--out-dir", dir / out, "optimize", "--vectors", dir / "v.jsonl",
                                    "--budget", budget, "--n-init", "3", "--epochs", "50",
                                    "--n-neighbors", "5:12", "--n-components", "2:4",
                                    "--min-cluster-size", "5:15", "--min-samples", "1:10"};
  };
  const auto full = run(args("full", "6"));
  REQUIRE_MESSAGE(full.code == 0, full.err);
  REQUIRE(run(args("part", "4")).code == 0);
  auto resumed = args("part", "6");
  resumed.push_back("--resume");
  REQUIRE(run(resumed).code == 0);
  CHECK(slurp(dir / "full/history.jsonl") == slurp(dir / "part/history.jsonl"));
  CHECK(slurp(dir / "full/best.json") == slurp(dir / "part/best.json"));
  const auto best = nlohmann::json::parse(slurp(dir / "full/best.json"));
  CHECK(best["params"]["n_neighbors"].get<int>() >= 5);
}
