// pdfcorpus: batch pipeline driver and service launcher.
//
// Exit status: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>

#include <algorithm>
#include <csignal>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <set>

#include "pdfcorpus/analytics.hpp"
#include "pdfcorpus/embeddings.hpp"
#include "pdfcorpus/error.hpp"
#include "pdfcorpus/ingest.hpp"
#include "pdfcorpus/learner.hpp"
#include "pdfcorpus/parallel.hpp"
#include "pdfcorpus/projection.hpp"
#include "pdfcorpus/random.hpp"
#include "pdfcorpus/service.hpp"
#include "pdfcorpus/text_features.hpp"

namespace fs = std::filesystem;
using namespace pdfcorpus;
using nlohmann::ordered_json;

namespace {

struct Common {
  int threads = 0;
  std::string format = "text";
  bool json() const { return format == "json"; }
};

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

fs::path vocab_path(const std::string& prefix) { return prefix + ".vocab.jsonl"; }
fs::path tfidf_path(const std::string& prefix) { return prefix + ".tfidf.jsonl"; }

struct TextArtifacts {
  Vocabulary vocab;
  DocumentVectors docs;
};

TextArtifacts load_text(const std::string& prefix) {
  TextArtifacts t;
  t.vocab = read_vocabulary(vocab_path(prefix));
  t.docs = read_tfidf(tfidf_path(prefix), static_cast<std::uint32_t>(t.vocab.size()));
  return t;
}

/// TF-IDF rows of manifest documents on `base_url` (all when empty), manifest order.
std::pair<std::vector<DocumentId>, std::vector<SparseVector>> select_rows(const CorpusManifest& manifest,
                                                                          const TextArtifacts& text,
                                                                          const std::string& base_url) {
  std::map<DocumentId, std::size_t> row;
  for (std::size_t i = 0; i < text.docs.ids.size(); ++i) row.emplace(text.docs.ids[i], i);
  std::pair<std::vector<DocumentId>, std::vector<SparseVector>> out;
  for (const auto& r : manifest.records) {
    if (!base_url.empty() && r.base_url != base_url) continue;
    auto it = row.find(r.id);
    if (it == row.end()) continue;
    out.first.push_back(r.id);
    out.second.push_back(text.docs.vectors[it->second]);
  }
  return out;
}

// --- subcommands -------------------------------------------------------------

struct IngestArgs {
  std::string corpus_dir, cdx, out;
};

void run_ingest(const IngestArgs& args, const Common& common) {
  IngestOptions options;
  if (!args.cdx.empty()) options.cdx_path = args.cdx;
  const auto manifest = build_manifest(args.corpus_dir, options);
  write_manifest(manifest, fs::path(args.out));
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& r : manifest.records) ++counts[static_cast<int>(r.status)];
  if (common.json()) {
    std::cout << ordered_json{{"manifest", args.out},
                              {"corpus_id", manifest.corpus_id.hex()},
                              {"documents", manifest.records.size()},
                              {"ok", counts[0]},
                              {"encrypted", counts[1]},
                              {"malformed", counts[2]}}
                     .dump(1)
              << '\n';
  } else {
    std::cout << "wrote " << args.out << ": " << manifest.records.size() << " documents (" << counts[0] << " ok, "
              << counts[1] << " encrypted, " << counts[2] << " malformed)\ncorpus_id " << manifest.corpus_id.hex()
              << '\n';
  }
}

struct FeaturizeTextArgs {
  std::string manifest, text_dir, out;
  std::uint32_t min_df = 1;
};

void run_featurize_text(const FeaturizeTextArgs& args, const Common& common) {
  const auto manifest = read_manifest(fs::path(args.manifest));
  std::vector<DocumentId> ids;
  std::vector<TermList> docs;
  for (const auto& r : manifest.records) {
    auto terms = tokenize(read_document_text(args.text_dir, r.id));
    if (terms.empty()) continue;
    ids.push_back(r.id);
    docs.push_back(std::move(terms));
  }
  if (docs.empty()) throw Error(ErrorCode::EmptyCorpus, "no document has text under " + args.text_dir);
  const auto vocab = build_vocabulary(docs, args.min_df);
  DocumentVectors vectors{ids, featurize_corpus(docs, vocab)};
  write_vocabulary(vocab, vocab_path(args.out));
  write_tfidf(vectors, tfidf_path(args.out));
  if (common.json()) {
    std::cout << ordered_json{{"vocab", vocab_path(args.out).string()},
                              {"tfidf", tfidf_path(args.out).string()},
                              {"documents", ids.size()},
                              {"terms", vocab.size()}}
                     .dump(1)
              << '\n';
  } else {
    std::cout << "wrote " << vocab_path(args.out).string() << " (" << vocab.size() << " terms) and "
              << tfidf_path(args.out).string() << " (" << ids.size() << " documents)\n";
  }
}

struct FeaturizeVisualArgs {
  std::string manifest, raster_dir, out;
  bool front_pages_only = false;
};

void run_featurize_visual(const FeaturizeVisualArgs& args, const Common& common) {
  const auto manifest = read_manifest(fs::path(args.manifest));
  const std::regex page_name(R"(page-(\d+)\.(png|jpg|jpeg))", std::regex::icase);
  std::vector<std::pair<PageRef, fs::path>> pages;
  for (const auto& r : manifest.records) {
    const auto dir = fs::path(args.raster_dir) / r.id.hex();
    if (!fs::is_directory(dir)) continue;
    std::map<std::uint32_t, fs::path> found;
    for (const auto& entry : fs::directory_iterator(dir)) {
      std::smatch m;
      const auto name = entry.path().filename().string();
      if (!std::regex_match(name, m, page_name)) continue;
      const auto index = static_cast<std::uint32_t>(std::stoul(m[1].str()));
      if (args.front_pages_only && index != 0) continue;
      if (!found.emplace(index, entry.path()).second) {
        throw Error(ErrorCode::BadFormat, "two rasters for page " + std::to_string(index) + " in " + dir.string());
      }
    }
    for (auto& [index, path] : found) pages.push_back({{r.id, index}, path});
  }
  if (pages.empty()) throw Error(ErrorCode::EmptyCorpus, "no page rasters under " + args.raster_dir);

  std::vector<PageFeatures> features(pages.size());
  std::vector<std::exception_ptr> failures(pages.size());
  const auto n = static_cast<std::ptrdiff_t>(pages.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      features[i] = builtin_page_features(load_raster(pages[i].second));
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  StoreWriter writer(args.out, kBuiltinFeatureDim);
  std::size_t written = 0, blank = 0;
  for (std::size_t i = 0; i < pages.size(); ++i) {
    if (features[i].blank) {
      ++blank;
      continue;
    }
    writer.append(pages[i].first, features[i].values);
    ++written;
  }
  writer.finish();
  if (common.json()) {
    std::cout << ordered_json{{"store", args.out}, {"rows", written}, {"dim", kBuiltinFeatureDim}, {"blank_skipped", blank}}
                     .dump(1)
              << '\n';
  } else {
    std::cout << "wrote " << args.out << ": " << written << " rows x " << kBuiltinFeatureDim << " (" << blank
              << " blank pages skipped)\n";
  }
}

struct ImportArgs {
  std::string input, manifest, out;
  std::uint32_t dim = 0;
};

void run_import(const ImportArgs& args, const Common& common) {
  std::optional<CorpusManifest> manifest;
  if (!args.manifest.empty()) manifest = read_manifest(fs::path(args.manifest));
  std::ifstream in(args.input, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + args.input);
  std::optional<StoreWriter> writer;
  std::uint32_t dim = args.dim;
  std::set<PageRef> seen;
  std::string line;
  std::size_t line_no = 0;
  std::vector<float> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = args.input + ":" + std::to_string(line_no);
    PageRef ref;
    try {
      const auto j = nlohmann::json::parse(line);
      ref = {DocumentId::from_hex(j.at("doc_id").get<std::string>()), j.at("page_index").get<std::uint32_t>()};
      values = j.at("vector").get<std::vector<float>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::BadFormat, where + ": " + e.what());
    }
    if (dim == 0) dim = static_cast<std::uint32_t>(values.size());
    if (values.size() != dim || dim == 0) {
      throw Error(ErrorCode::DimMismatch, where + ": expected " + std::to_string(dim) + " values, got " +
                                              std::to_string(values.size()));
    }
    if (!std::all_of(values.begin(), values.end(), [](float v) { return std::isfinite(v); })) {
      throw Error(ErrorCode::NonFiniteValue, where);
    }
    if (!l2_normalize(values)) throw Error(ErrorCode::ZeroVector, where);
    if (manifest && !manifest->find(ref.doc_id)) {
      throw Error(ErrorCode::InvalidArgument, where + ": document " + ref.doc_id.hex() + " is not in the manifest");
    }
    if (!seen.insert(ref).second) throw Error(ErrorCode::InvalidArgument, where + ": duplicate page");
    if (!writer) writer.emplace(args.out, dim);
    writer->append(ref, values);
  }
  if (!writer) throw Error(ErrorCode::EmptyCorpus, args.input + " holds no vectors");
  writer->finish();
  if (common.json()) {
    std::cout << ordered_json{{"store", args.out}, {"rows", seen.size()}, {"dim", dim}}.dump(1) << '\n';
  } else {
    std::cout << "wrote " << args.out << ": " << seen.size() << " rows x " << dim << '\n';
  }
}

struct StatsArgs {
  std::string manifest, facet = "all";
  std::size_t top = 0;
};

FacetTable with_other_row(FacetTable table, std::size_t top) {
  if (top == 0 || table.buckets.size() <= top) return table;
  std::uint64_t other = 0;
  for (std::size_t i = top; i < table.buckets.size(); ++i) other += table.buckets[i].count;
  table.buckets.resize(top);
  table.buckets.push_back({"(other)", other});
  return table;
}

void run_stats(const StatsArgs& args, const Common& common) {
  const auto manifest = read_manifest(fs::path(args.manifest));
  const bool base = args.facet == "all" || args.facet == "base_url";
  const bool pages = args.facet == "all" || args.facet == "page_count";
  ordered_json j;
  j["corpus_id"] = manifest.corpus_id.hex();
  j["documents"] = manifest.records.size();
  std::string text = "corpus " + manifest.corpus_id.hex() + ", " + std::to_string(manifest.records.size()) +
                     " documents\n";
  if (base) {
    const auto full = facet_histogram(manifest, Facet::base_url);
    std::uint64_t top_count = 0;
    for (std::size_t i = 0; i < std::min(args.top ? args.top : full.buckets.size(), full.buckets.size()); ++i) {
      top_count += full.buckets[i].count;
    }
    const auto table = with_other_row(full, args.top);
    j["base_url"] = to_json(table);
    j["base_url"]["distinct"] = full.buckets.size();
    if (args.top) j["base_url"]["top_share"] = full.total ? double(top_count) / double(full.total) : 0.0;
    text += "\n" + render_text(table);
    text += std::to_string(full.buckets.size()) + " distinct base URLs";
    if (args.top && full.total) {
      char share[32];
      std::snprintf(share, sizeof share, "%.1f%%", 100.0 * double(top_count) / double(full.total));
      text += "; top " + std::to_string(args.top) + " hold " + std::to_string(top_count) + " (" + share + ")";
    }
    text += "\n";
  }
  if (pages) {
    const auto table = facet_histogram(manifest, Facet::page_count_bucket);
    const auto totals = corpus_page_totals(manifest);
    j["page_count"] = to_json(table);
    j["page_totals"] = to_json(totals);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < table.buckets.size(); ++i) {
      rows.push_back({table.buckets[i].label, std::to_string(table.buckets[i].count),
                      std::to_string(totals.buckets[i].count)});
    }
    rows.push_back({"total", std::to_string(table.total), std::to_string(totals.overall)});
    text += "\n" + render_table({"pages", "documents", "total pages"}, rows);
  }
  std::cout << (common.json() ? j.dump(1) + "\n" : text);
}

struct TermsArgs {
  std::string manifest, text, base_url;
  std::size_t top_k = 10;
  bool prune = false;
};

void run_terms(const TermsArgs& args, const Common& common) {
  const auto manifest = read_manifest(fs::path(args.manifest));
  const auto text = load_text(args.text);
  const auto rows = select_rows(manifest, text, args.base_url);
  const auto report =
      group_centroid_terms(rows.second, text.vocab, args.top_k, args.prune, args.base_url.empty() ? "*" : args.base_url);
  if (common.json()) {
    auto j = to_json(report);
    j["documents"] = rows.second.size();
    j["pruned"] = args.prune;
    std::cout << j.dump(1) << '\n';
  } else {
    std::cout << "documents: " << rows.second.size() << (args.prune ? ", pruned" : "") << '\n' << render_text(report);
  }
}

struct ClusterArgs {
  std::string manifest, text, base_url, out;
  std::uint32_t k = 0, max_iter = 300;
  std::uint64_t seed = 0;
  std::size_t top_k = 10;
};

void run_cluster(const ClusterArgs& args, const Common& common) {
  const auto manifest = read_manifest(fs::path(args.manifest));
  const auto text = load_text(args.text);
  const auto rows = select_rows(manifest, text, args.base_url);
  if (rows.second.empty()) throw Error(ErrorCode::EmptyGroup, "no documents with text match the filter");
  const auto result = kmeans(densify(rows.second), text.vocab.size(), args.k, args.seed, args.max_iter);
  const auto terms = cluster_terms(rows.second, text.vocab, result, args.top_k, true);
  auto j = to_json(result, rows.first);
  j.erase("centroids");
  j["base_url"] = args.base_url.empty() ? ordered_json(nullptr) : ordered_json(args.base_url);
  auto& jt = j["cluster_terms"] = ordered_json::array();
  for (const auto& t : terms) jt.push_back(to_json(t));
  if (!args.out.empty()) write_text_file(args.out, j.dump(1) + "\n");
  if (common.json()) {
    std::cout << j.dump(1) << '\n';
    return;
  }
  std::cout << "# seed " << args.seed << ", max_iter " << args.max_iter << '\n' << render_text(result);
  std::vector<std::size_t> sizes(result.k, 0);
  for (auto a : result.assignments) ++sizes[a];
  std::vector<std::vector<std::string>> table;
  for (std::uint32_t c = 0; c < result.k; ++c) {
    std::string joined;
    for (const auto& t : terms[c].terms) joined += (joined.empty() ? "" : ", ") + t.term;
    table.push_back({std::to_string(c), std::to_string(sizes[c]), joined});
  }
  std::cout << '\n' << render_table({"cluster", "size", "top terms"}, table);
}

struct ProjectArgs {
  std::string store, out;
  TsneParams params;
  bool front_pages_only = false;
  std::size_t sample = 0;
};

inline constexpr std::size_t kProjectionRowCap = 5000;

void run_project(const ProjectArgs& args, const Common& common) {
  auto store = read_store(args.store, StoreValidation::full);
  if (args.front_pages_only) store = front_page_rows(store);
  std::vector<std::size_t> rows(store.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  if (args.sample && args.sample < rows.size()) {
    Rng rng(args.params.seed);
    for (std::size_t i = rows.size() - 1; i > 0; --i) std::swap(rows[i], rows[uniform_index(rng, i + 1)]);
    rows.resize(args.sample);
    std::sort(rows.begin(), rows.end());
  }
  if (rows.size() > kProjectionRowCap) {
    throw Error(ErrorCode::InvalidArgument, std::to_string(rows.size()) + " rows exceed the exact t-SNE cap of " +
                                                std::to_string(kProjectionRowCap) + "; pass --sample");
  }
  std::vector<double> matrix;
  std::vector<PageRef> refs;
  matrix.reserve(rows.size() * store.dim());
  for (auto r : rows) {
    const auto v = store.row(r);
    matrix.insert(matrix.end(), v.begin(), v.end());
    refs.push_back(store.row_ids()[r]);
  }
  const auto projection = tsne(std::span<const double>(matrix), store.dim(), args.params);
  write_projection(projection, refs, args.out);
  if (common.json()) {
    std::cout << ordered_json{{"projection", args.out},
                              {"rows", refs.size()},
                              {"seed", args.params.seed},
                              {"exaggeration_end_kl", projection.exaggeration_end_kl},
                              {"final_kl", projection.final_kl}}
                     .dump(1)
              << '\n';
  } else {
    std::cout << "# seed " << args.params.seed << ", perplexity " << args.params.perplexity << ", iterations "
              << args.params.iterations << '\n'
              << "wrote " << args.out << ": " << refs.size() << " points, KL " << projection.exaggeration_end_kl
              << " after exaggeration, " << projection.final_kl << " final\n";
  }
}

Service* g_service = nullptr;

extern "C" void handle_signal(int) {
  if (g_service) g_service->stop();
}

struct ServeArgs {
  ServiceConfig config;
  std::string manifest, text, store, projection, raster_dir, session_dir;
};

void run_serve(ServeArgs args, const Common&) {
  auto& cfg = args.config;
  cfg.manifest = args.manifest;
  if (!args.text.empty()) {
    cfg.vocab = vocab_path(args.text);
    cfg.tfidf = tfidf_path(args.text);
  }
  if (!args.store.empty()) cfg.store = args.store;
  if (!args.projection.empty()) cfg.projection = args.projection;
  if (!args.raster_dir.empty()) cfg.raster_dir = args.raster_dir;
  if (!args.session_dir.empty()) cfg.session_dir = args.session_dir;
  Service service(load_artifacts(cfg), cfg);
  const int port = service.bind();
  std::cerr << "serving on http://" << cfg.host << ":" << port << '\n';
  g_service = &service;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  service.listen();
  g_service = nullptr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Index, analyze and search corpora of web-archived PDFs"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  Common common;
  app.add_option("--threads", common.threads, "Worker threads (0 = all logical cores)")
      ->envname("PDFCORPUS_THREADS")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--format", common.format, "Report format")
      ->envname("PDFCORPUS_FORMAT")
      ->check(CLI::IsMember({"text", "json"}));

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Scan a directory of PDFs into a manifest");
  c_ingest->add_option("--corpus-dir", ingest.corpus_dir, "Directory of PDF files")
      ->required()
      ->envname("PDFCORPUS_CORPUS_DIR")
      ->check(CLI::ExistingDirectory);
  c_ingest->add_option("--cdx", ingest.cdx, "CDX index giving source URLs")->check(CLI::ExistingFile);
  c_ingest->add_option("--out", ingest.out, "Manifest to write (.manifest.jsonl)")->required();

  FeaturizeTextArgs ftext;
  auto* c_ftext = app.add_subcommand("featurize-text", "Build vocabulary and TF-IDF vectors from page text");
  c_ftext->add_option("--manifest", ftext.manifest)->required()->envname("PDFCORPUS_MANIFEST")->check(CLI::ExistingFile);
  c_ftext->add_option("--text-dir", ftext.text_dir, "Holds <doc_id>/page-<n>.txt")
      ->required()
      ->check(CLI::ExistingDirectory);
  c_ftext->add_option("--out", ftext.out, "Output prefix for .vocab.jsonl and .tfidf.jsonl")->required();
  c_ftext->add_option("--min-df", ftext.min_df, "Minimum document frequency")->check(CLI::PositiveNumber);

  FeaturizeVisualArgs fvis;
  auto* c_fvis = app.add_subcommand("featurize-visual", "Built-in 128-dim features from page rasters");
  c_fvis->add_option("--manifest", fvis.manifest)->required()->envname("PDFCORPUS_MANIFEST")->check(CLI::ExistingFile);
  c_fvis->add_option("--raster-dir", fvis.raster_dir, "Holds <doc_id>/page-<n>.png|jpg")
      ->required()
      ->envname("PDFCORPUS_RASTER_DIR")
      ->check(CLI::ExistingDirectory);
  c_fvis->add_option("--out", fvis.out, "EMB1 store to write")->required();
  c_fvis->add_flag("--front-pages-only", fvis.front_pages_only, "Only page 0 of each document");

  ImportArgs import;
  auto* c_import = app.add_subcommand("import-embeddings", "Convert external vectors (JSONL) to an EMB1 store");
  c_import->add_option("--input", import.input, "Lines of {doc_id, page_index, vector}")
      ->required()
      ->check(CLI::ExistingFile);
  c_import->add_option("--manifest", import.manifest, "Reject documents missing from this manifest")
      ->envname("PDFCORPUS_MANIFEST")
      ->check(CLI::ExistingFile);
  c_import->add_option("--dim", import.dim, "Expected dimension (default: first row)");
  c_import->add_option("--out", import.out, "EMB1 store to write")->required();

  StatsArgs stats;
  auto* c_stats = app.add_subcommand("stats", "Base URL and page count reports");
  c_stats->add_option("--manifest", stats.manifest)->required()->envname("PDFCORPUS_MANIFEST")->check(CLI::ExistingFile);
  c_stats->add_option("--facet", stats.facet)->check(CLI::IsMember({"all", "base_url", "page_count"}));
  c_stats->add_option("--top", stats.top, "Show the top N base URLs and fold the rest into (other)");

  TermsArgs terms;
  auto* c_terms = app.add_subcommand("terms", "Top centroid TF-IDF terms of a base URL group");
  c_terms->add_option("--manifest", terms.manifest)->required()->envname("PDFCORPUS_MANIFEST")->check(CLI::ExistingFile);
  c_terms->add_option("--text", terms.text, "Prefix given to featurize-text --out")
      ->required()
      ->envname("PDFCORPUS_TEXT");
  c_terms->add_option("--base-url", terms.base_url, "Group (default: whole corpus)");
  c_terms->add_option("--top-k", terms.top_k)->check(CLI::PositiveNumber);
  c_terms->add_flag("--prune", terms.prune, "Drop numbers, single characters and shared stems");

  ClusterArgs cluster;
  auto* c_cluster = app.add_subcommand("cluster", "k-means over TF-IDF vectors");
  c_cluster->add_option("--manifest", cluster.manifest)
      ->required()
      ->envname("PDFCORPUS_MANIFEST")
      ->check(CLI::ExistingFile);
  c_cluster->add_option("--text", cluster.text)->required()->envname("PDFCORPUS_TEXT");
  c_cluster->add_option("--base-url", cluster.base_url);
  c_cluster->add_option("--k", cluster.k)->required()->check(CLI::PositiveNumber);
  c_cluster->add_option("--seed", cluster.seed, "k-means++ seed")->capture_default_str()->envname("PDFCORPUS_SEED");
  c_cluster->add_option("--max-iter", cluster.max_iter)->capture_default_str()->check(CLI::PositiveNumber);
  c_cluster->add_option("--top-k", cluster.top_k, "Terms listed per cluster")->check(CLI::PositiveNumber);
  c_cluster->add_option("--out", cluster.out, "Also write the JSON report here");

  ProjectArgs project;
  auto* c_project = app.add_subcommand("project", "Exact t-SNE of an embedding store to 2-D");
  c_project->add_option("--store", project.store)->required()->envname("PDFCORPUS_STORE")->check(CLI::ExistingFile);
  c_project->add_option("--out", project.out, ".projection.json to write")->required();
  c_project->add_option("--perplexity", project.params.perplexity)->capture_default_str()->check(CLI::PositiveNumber);
  c_project->add_option("--iterations", project.params.iterations)->capture_default_str()->check(CLI::Range(250u, 100000u));
  c_project->add_option("--learning-rate", project.params.learning_rate)->capture_default_str()->check(CLI::PositiveNumber);
  c_project->add_option("--seed", project.params.seed)->capture_default_str()->envname("PDFCORPUS_SEED");
  c_project->add_flag("--front-pages-only", project.front_pages_only);
  c_project->add_option("--sample", project.sample, "Project a seeded random subset of this many rows");

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("serve", "HTTP JSON API over the corpus artifacts");
  c_serve->add_option("--manifest", serve.manifest)->required()->envname("PDFCORPUS_MANIFEST")->check(CLI::ExistingFile);
  c_serve->add_option("--text", serve.text, "Prefix given to featurize-text --out")->envname("PDFCORPUS_TEXT");
  c_serve->add_option("--store", serve.store)->envname("PDFCORPUS_STORE")->check(CLI::ExistingFile);
  c_serve->add_option("--projection", serve.projection)->envname("PDFCORPUS_PROJECTION")->check(CLI::ExistingFile);
  c_serve->add_option("--raster-dir", serve.raster_dir)->envname("PDFCORPUS_RASTER_DIR")->check(CLI::ExistingDirectory);
  c_serve->add_option("--session-dir", serve.session_dir, "Save and restore .session.json snapshots here")
      ->envname("PDFCORPUS_SESSION_DIR");
  c_serve->add_option("--host", serve.config.host)->capture_default_str()->envname("PDFCORPUS_HOST");
  c_serve->add_option("--port", serve.config.port)->capture_default_str()->envname("PDFCORPUS_PORT")->check(CLI::Range(0, 65535));
  c_serve->add_option("--cluster-row-cap", serve.config.cluster_row_cap)
      ->capture_default_str()
      ->envname("PDFCORPUS_CLUSTER_ROW_CAP");
  c_serve->add_option("--cors-origin", serve.config.cors_origin)->capture_default_str()->envname("PDFCORPUS_CORS_ORIGIN");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    set_thread_count(common.threads);
    if (*c_ingest) run_ingest(ingest, common);
    if (*c_ftext) run_featurize_text(ftext, common);
    if (*c_fvis) run_featurize_visual(fvis, common);
    if (*c_import) run_import(import, common);
    if (*c_stats) run_stats(stats, common);
    if (*c_terms) run_terms(terms, common);
    if (*c_cluster) run_cluster(cluster, common);
    if (*c_project) run_project(project, common);
    if (*c_serve) run_serve(serve, common);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
