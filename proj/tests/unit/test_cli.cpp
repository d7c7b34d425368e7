#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "reference_corpus.hpp"
#include "pdfcorpus/analytics.hpp"
#include "pdfcorpus/corpus_model.hpp"
#include "pdfcorpus/embeddings.hpp"
#include "pdfcorpus/projection.hpp"
#include "pdfcorpus/random.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pdfcorpus;

namespace {

struct Run {
  int status = -1;
  std::string out, err;
  json as_json() const { return json::parse(out); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Runs the CLI with `args` (already shell-quoted where needed).
Run cli(const fixtures::TempDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd =
      std::string(PDFCORPUS_CLI_PATH) + " " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

const char* const kTopicA[] = {"court", "judge", "filing", "appeal", "docket", "2019"};
const char* const kTopicB[] = {"budget", "appropriation", "revenue", "deficit", "treasury", "2019"};

/// The synthetic 1,000-document manifest, page text for 60 of its documents
/// (two disjoint topics by parity, all on house.gov for the first 30) and
/// page rasters for 12 of them.
struct Workspace {
  fixtures::TempDir dir{"cli"};
  CorpusManifest manifest = fixtures::reference_manifest();
  fs::path manifest_path = dir / "reference.manifest.jsonl";
  std::vector<DocumentId> text_docs;

  Workspace() {
    write_manifest(manifest, manifest_path);
    Rng rng(11);
    std::size_t house = 0, other = 0;
    for (const auto& r : manifest.records) {
      const bool on_house = r.base_url == "house.gov";
      if (on_house ? house >= 30 : other >= 30) continue;
      (on_house ? house : other)++;
      const auto& topic = text_docs.size() % 2 == 0 ? kTopicA : kTopicB;
      text_docs.push_back(r.id);
      fs::create_directories(dir.path() / "text" / r.id.hex());
      for (int page = 0; page < 2; ++page) {
        std::string text;
        for (int w = 0; w < 20; ++w) text += std::string(topic[uniform_index(rng, 6)]) + " ";
        fixtures::write_file(dir.path() / "text" / r.id.hex() / ("page-" + std::to_string(page) + ".txt"), text);
      }
    }
    for (std::size_t i = 0; i < 12; ++i) {
      const auto d = dir.path() / "rasters" / text_docs[i].hex();
      fs::create_directories(d);
      fs::copy_file(fixtures::data_dir() / "raster" / (i % 2 ? "rgb.png" : "gray.png"), d / "page-0.png");
      fs::copy_file(fixtures::data_dir() / "raster" / "flat.jpg", d / "page-1.jpg");
    }
  }
};

Workspace& ws() {
  static Workspace w;
  return w;
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  fixtures::TempDir dir;
  CHECK(cli(dir, "").status == 1);
  CHECK(cli(dir, "frobnicate").status == 1);
  const auto k0 = cli(dir, "cluster --manifest " + q(ws().manifest_path) + " --text x --k 0");
  CHECK(k0.status == 1);
  CHECK_FALSE(k0.err.empty());
  CHECK(cli(dir, "stats --manifest " + q(dir / "missing.jsonl")).status == 1);
  CHECK(cli(dir, "stats --manifest " + q(ws().manifest_path) + " --facet color").status == 1);
  CHECK(cli(dir, "project --store " + q(ws().manifest_path) + " --out x --iterations 100").status == 1);
  CHECK(cli(dir, "--help").status == 0);
}

TEST_CASE("data errors exit 2") {
  fixtures::TempDir dir;
  fixtures::write_file(dir / "bad.manifest.jsonl", "{\"id\": 5}\n");
  const auto bad = cli(dir, "stats --manifest " + q(dir / "bad.manifest.jsonl"));
  CHECK(bad.status == 2);
  CHECK(bad.err.rfind("error: ", 0) == 0);

  fs::create_directories(dir / "empty");
  CHECK(cli(dir, "ingest --corpus-dir " + q(dir / "empty") + " --out " + q(dir / "m.jsonl")).status == 2);
  CHECK(cli(dir, "featurize-text --manifest " + q(ws().manifest_path) + " --text-dir " + q(dir / "empty") +
                     " --out " + q(dir / "t"))
            .status == 2);
  CHECK(cli(dir, "terms --manifest " + q(ws().manifest_path) + " --text " + q(dir / "nope")).status == 2);
  CHECK(cli(dir, "project --store " + q(ws().manifest_path) + " --out " + q(dir / "p.json")).status == 2);
}

TEST_CASE("ingest writes a manifest for the fixture corpus") {
  fixtures::TempDir dir;
  const auto data = fixtures::data_dir();
  const auto r = cli(dir, "--format json ingest --corpus-dir " + q(data / "corpus") + " --cdx " +
                              q(data / "corpus.cdx") + " --out " + q(dir / "c.manifest.jsonl"));
  REQUIRE(r.status == 0);
  const auto j = r.as_json();
  CHECK(j["documents"] == 4);
  CHECK(j["ok"] == 2);
  CHECK(j["encrypted"] == 1);
  CHECK(j["malformed"] == 1);
  const auto manifest = read_manifest(dir / "c.manifest.jsonl");
  CHECK(manifest.corpus_id.hex() == j["corpus_id"]);

  const auto first = slurp(dir / "c.manifest.jsonl");
  REQUIRE(cli(dir, "ingest --corpus-dir " + q(data / "corpus") + " --cdx " + q(data / "corpus.cdx") + " --out " +
                       q(dir / "c.manifest.jsonl"))
              .status == 0);
  CHECK(slurp(dir / "c.manifest.jsonl") == first);
}

TEST_CASE("stats reproduce the reference counts") {
  fixtures::TempDir dir;
  const auto r = cli(dir, "--format json stats --manifest " + q(ws().manifest_path) + " --top 20");
  REQUIRE(r.status == 0);
  const auto j = r.as_json();
  CHECK(j["documents"] == 1000);
  const auto& top = fixtures::top_base_urls();
  REQUIRE(j["base_url"]["buckets"].size() == 21);
  for (std::size_t i = 0; i < top.size(); ++i) {
    CHECK(j["base_url"]["buckets"][i]["label"] == top[i].first);
    CHECK(j["base_url"]["buckets"][i]["count"] == top[i].second);
  }
  CHECK(j["base_url"]["buckets"][20]["label"] == "(other)");
  CHECK(j["base_url"]["buckets"][20]["count"] == fixtures::kOtherBaseUrlCount);
  CHECK(j["base_url"]["top_share"] == 0.62);
  const auto& rows = fixtures::page_bucket_rows();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(j["page_count"]["buckets"][i]["count"] == rows[i].documents);
    CHECK(j["page_totals"]["buckets"][i]["pages"] == rows[i].pages);
  }
  CHECK(j["page_totals"]["overall"] == 12744);

  const auto text = cli(dir, "stats --manifest " + q(ws().manifest_path) + " --facet page_count");
  REQUIRE(text.status == 0);
  for (const char* n : {"327", "394", "176", "62", "28", "13", "12744"}) CHECK(text.out.find(n) != std::string::npos);
  CHECK(text.out.find("house.gov") == std::string::npos);

  const auto base = cli(dir, "stats --manifest " + q(ws().manifest_path) + " --facet base_url --top 20");
  CHECK(base.out.find("house.gov") != std::string::npos);
  CHECK(base.out.find("(62.0%)") != std::string::npos);
}

TEST_CASE("text pipeline: featurize, terms and clustering") {
  auto& w = ws();
  const auto prefix = w.dir / "text-out";
  const auto text_dir = w.dir.path() / "text";
  const auto feat = cli(w.dir, "--format json featurize-text --manifest " + q(w.manifest_path) + " --text-dir " +
                                   q(text_dir) + " --out " + q(prefix));
  REQUIRE(feat.status == 0);
  CHECK(feat.as_json()["documents"] == 60);
  CHECK(feat.as_json()["terms"] == 11);
  const auto vocab_bytes = slurp(prefix.string() + ".vocab.jsonl");
  const auto tfidf_bytes = slurp(prefix.string() + ".tfidf.jsonl");
  REQUIRE(cli(w.dir, "featurize-text --manifest " + q(w.manifest_path) + " --text-dir " + q(text_dir) + " --out " +
                         q(prefix) + " --threads 1")
              .status == 0);
  CHECK(slurp(prefix.string() + ".vocab.jsonl") == vocab_bytes);
  CHECK(slurp(prefix.string() + ".tfidf.jsonl") == tfidf_bytes);

  const std::string common = " --manifest " + q(w.manifest_path) + " --text " + q(prefix);
  const auto terms = cli(w.dir, "--format json terms" + common + " --top-k 10 --prune");
  REQUIRE(terms.status == 0);
  const auto tj = terms.as_json();
  CHECK(tj["terms"].size() == 10);
  CHECK(tj["pruned"] == true);
  for (const auto& t : tj["terms"]) CHECK(t["term"] != "2019");
  const auto unpruned = cli(w.dir, "--format json terms" + common + " --top-k 11").as_json();
  CHECK(unpruned["terms"].size() == 11);

  const auto house = cli(w.dir, "--format json terms" + common + " --base-url house.gov --top-k 3").as_json();
  CHECK(house["documents"] == 30);
  CHECK(house["group_key"] == "house.gov");
  CHECK(cli(w.dir, "terms" + common).out.find("documents: 60") != std::string::npos);

  const auto cl = cli(w.dir, "--format json cluster" + common + " --k 2 --seed 3 --out " + q(w.dir / "c1.json"));
  REQUIRE(cl.status == 0);
  const auto cj = cl.as_json();
  CHECK(cj["sizes"] == json::array({30, 30}));
  const auto& assign = cj["assignments"];
  for (std::size_t i = 0; i < w.text_docs.size(); ++i) {
    CHECK((assign[w.text_docs[i].hex()] == assign[w.text_docs[0].hex()]) == (i % 2 == 0));
  }
  REQUIRE(cli(w.dir, "cluster" + common + " --k 2 --seed 3 --threads 1 --out " + q(w.dir / "c2.json")).status == 0);
  CHECK(slurp(w.dir / "c1.json") == slurp(w.dir / "c2.json"));
  CHECK(json::parse(slurp(w.dir / "c1.json")) == cj);

  const auto too_many = cli(w.dir, "cluster" + common + " --k 61");
  CHECK(too_many.status == 2);
  CHECK(cli(w.dir, "cluster" + common + " --k 2 --base-url nowhere.example").status == 2);
}

TEST_CASE("visual pipeline: featurize, import and project") {
  auto& w = ws();
  const auto store = w.dir / "visual.emb";
  const auto r = cli(w.dir, "--format json featurize-visual --manifest " + q(w.manifest_path) + " --raster-dir " +
                                q(w.dir.path() / "rasters") + " --out " + q(store));
  REQUIRE(r.status == 0);
  CHECK(r.as_json()["dim"] == 128);
  CHECK(r.as_json()["rows"] == 24);
  CHECK(r.as_json()["blank_skipped"] == 0);
  const auto all_pages = fixtures::read_file(store);
  CHECK(read_store(store).rows() == 24);

  REQUIRE(cli(w.dir, "featurize-visual --front-pages-only --threads 1 --manifest " + q(w.manifest_path) +
                         " --raster-dir " + q(w.dir.path() / "rasters") + " --out " + q(store))
              .status == 0);
  const auto s = read_store(store);
  CHECK(s.rows() == 12);
  for (std::size_t i = 0; i < s.rows(); ++i) CHECK(s.row_ids()[i].page_index == 0);
  REQUIRE(cli(w.dir, "featurize-visual --threads 1 --manifest " + q(w.manifest_path) + " --raster-dir " +
                         q(w.dir.path() / "rasters") + " --out " + q(store))
              .status == 0);
  CHECK(fixtures::read_file(store) == all_pages);

  // external vectors: 40 pages in two well separated groups
  std::string lines;
  Rng rng(2);
  for (std::size_t i = 0; i < 40; ++i) {
    json v = json::array();
    for (int d = 0; d < 16; ++d) v.push_back((d == 0 ? (i < 20 ? 10.0 : -10.0) : 0.0) + standard_normal(rng));
    lines += json{{"doc_id", w.text_docs[i].hex()}, {"page_index", 0}, {"vector", v}}.dump() + "\n";
  }
  fixtures::write_file(w.dir / "vectors.jsonl", lines);
  const auto imp = cli(w.dir, "--format json import-embeddings --input " + q(w.dir / "vectors.jsonl") +
                                  " --manifest " + q(w.manifest_path) + " --out " + q(w.dir / "ext.emb"));
  REQUIRE(imp.status == 0);
  CHECK(imp.as_json()["rows"] == 40);
  CHECK(imp.as_json()["dim"] == 16);
  CHECK(read_store(w.dir / "ext.emb").rows() == 40);

  fixtures::write_file(w.dir / "dup.jsonl", lines + lines.substr(0, lines.find('\n') + 1));
  CHECK(cli(w.dir, "import-embeddings --input " + q(w.dir / "dup.jsonl") + " --out " + q(w.dir / "d.emb")).status ==
        2);
  fixtures::write_file(w.dir / "short.jsonl", lines + json{{"doc_id", w.text_docs[50].hex()}, {"page_index", 0},
                                                           {"vector", {1.0, 2.0}}}.dump() + "\n");
  CHECK(cli(w.dir, "import-embeddings --input " + q(w.dir / "short.jsonl") + " --out " + q(w.dir / "d.emb")).status ==
        2);

  const std::string args =
      "project --store " + q(w.dir / "ext.emb") + " --perplexity 8 --iterations 1000 --seed 4 --out ";
  const auto p = cli(w.dir, "--format json " + args + q(w.dir / "p1.json"));
  REQUIRE(p.status == 0);
  CHECK(p.as_json()["rows"] == 40);
  CHECK(p.as_json()["final_kl"].get<double>() < p.as_json()["exaggeration_end_kl"].get<double>());
  REQUIRE(cli(w.dir, "--threads 1 " + args + q(w.dir / "p2.json")).status == 0);
  CHECK(slurp(w.dir / "p1.json") == slurp(w.dir / "p2.json"));
  const auto proj = read_projection(w.dir / "p1.json");
  CHECK(proj.refs.size() == 40);
  CHECK(proj.projection.params.seed == 4);

  const auto sampled = cli(w.dir, "--format json " + args + q(w.dir / "p3.json") + " --sample 30");
  REQUIRE(sampled.status == 0);
  CHECK(read_projection(w.dir / "p3.json").refs.size() == 30);
  CHECK(cli(w.dir, "project --store " + q(w.dir / "ext.emb") + " --perplexity 40 --out " + q(w.dir / "p4.json"))
            .status == 2);
}

TEST_CASE("serve refuses inconsistent artifacts") {
  fixtures::TempDir dir;
  fixtures::write_file(dir / "broken.json", "{");
  const auto r = cli(dir, "serve --port 0 --manifest " + q(ws().manifest_path) + " --projection " +
                              q(dir / "broken.json"));
  CHECK(r.status == 2);
  CHECK(r.err.find("broken.json") != std::string::npos);
}
