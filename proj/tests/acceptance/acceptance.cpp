// Acceptance run: one PASS/FAIL line per criterion, with the measured values
// and runtimes next to their bounds. Exits 1 when any criterion misses.
//
// Environment:
//   PDFCORPUS_SCRATCH_DIR   where the large throughput stores are written
//   PDFCORPUS_REAL_CORPUS   directory of the 1,000 real PDFs (criterion 8)
//   PDFCORPUS_REAL_CDX      CDX index for that corpus (optional)
//   PDFCORPUS_REAL_TEXT     extracted page text, <doc_id>/page-<n>.txt

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "reference_corpus.hpp"
#include "pdfcorpus/analytics.hpp"
#include "pdfcorpus/embeddings.hpp"
#include "pdfcorpus/error.hpp"
#include "pdfcorpus/ingest.hpp"
#include "pdfcorpus/learner.hpp"
#include "pdfcorpus/parallel.hpp"
#include "pdfcorpus/projection.hpp"
#include "pdfcorpus/random.hpp"
#include "pdfcorpus/text_features.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace pdfcorpus;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Accumulates named checks; the first few failures are kept for the report.
struct Checks {
  std::vector<std::string> notes;
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok && failures.size() == 5) failures.push_back("...");
  }
  void note(const std::string& s) { notes.push_back(s); }
  bool ok() const { return failures.empty(); }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int g_failures = 0;

void report(const std::string& id, const std::string& title, const Checks& c) {
  std::string line = (c.ok() ? "PASS " : "FAIL ") + id + " " + title;
  for (const auto& n : c.notes) line += "; " + n;
  for (const auto& f : c.failures) line += "; MISSED " + f;
  std::puts(line.c_str());
  std::fflush(stdout);
  if (!c.ok()) ++g_failures;
}

/// Runs `body` and checks its wall time against `bound` seconds.
void criterion(const std::string& id, const std::string& title, double bound, const std::function<void(Checks&)>& body) {
  Checks c;
  const auto t0 = Clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  const double t = seconds_since(t0);
  if (bound > 0) {
    c.note("runtime " + fmt("%.3f", t) + " s (bound " + fmt("%g", bound) + " s)");
    c.expect(t < bound, "runtime bound");
  }
  report(id, title, c);
}

// --- 1: facet golden tables ------------------------------------------------------

void facets(Checks& c) {
  const auto manifest = fixtures::reference_manifest();
  const auto base = facet_histogram(manifest, Facet::base_url);
  c.expect(!base.buckets.empty() && base.buckets[0].label == "house.gov" && base.buckets[0].count == 179,
           "house.gov 179 first");
  const auto& top = fixtures::top_base_urls();
  std::uint64_t top_sum = 0;
  for (std::size_t i = 0; i < top.size() && i < base.buckets.size(); ++i) {
    c.expect(base.buckets[i].label == top[i].first && base.buckets[i].count == std::uint64_t(top[i].second),
             "top base URL row " + std::to_string(i + 1));
    top_sum += base.buckets[i].count;
  }
  c.expect(top_sum * 100 == 62 * base.total, "top-20 share 62%");
  c.note("house.gov " + std::to_string(base.buckets[0].count) + ", top-20 share " +
         fmt("%.1f%%", 100.0 * double(top_sum) / double(base.total)));

  const auto pages = facet_histogram(manifest, Facet::page_count_bucket);
  const auto totals = corpus_page_totals(manifest);
  const std::uint64_t docs[] = {327, 394, 176, 62, 28, 13};
  const std::uint64_t page_totals[] = {327, 1074, 1755, 2761, 6827};
  std::string shown;
  for (std::size_t i = 0; i < 6; ++i) {
    c.expect(pages.buckets[i].count == docs[i], "bucket " + pages.buckets[i].label + " documents");
    shown += (i ? "/" : "") + std::to_string(pages.buckets[i].count);
  }
  for (std::size_t i = 0; i < 5; ++i) c.expect(totals.buckets[i].count == page_totals[i], "bucket page total");
  c.note("page buckets " + shown + ", pages " + std::to_string(totals.overall));
}

// --- 2: TF-IDF -----------------------------------------------------------------------

void tfidf(Checks& c) {
  {
    const std::vector<TermList> docs = {tokenize("court court filed"), tokenize("farm")};
    const auto vocab = build_vocabulary(docs);
    const auto v = featurize_tfidf(docs[0], vocab);
    double court = 0, filed = 0;
    for (std::size_t i = 0; i < v.indices.size(); ++i) {
      if (vocab.term(v.indices[i]) == "court") court = v.values[i];
      if (vocab.term(v.indices[i]) == "filed") filed = v.values[i];
    }
    c.expect(std::abs(court - 2 / std::sqrt(5.0)) <= 1e-9, "court = 2/sqrt5");
    c.expect(std::abs(filed - 1 / std::sqrt(5.0)) <= 1e-9, "filed = 1/sqrt5");
    c.note("court " + fmt("%.12f", court) + ", filed " + fmt("%.12f", filed));
  }
  Rng rng(2024);
  double worst_norm = 0.0;
  std::size_t queries = 0;
  for (int corpus = 0; corpus < 25; ++corpus) {
    std::vector<TermList> docs(100);
    for (auto& d : docs) {
      const auto len = 1 + uniform_index(rng, 40);
      for (std::size_t t = 0; t < len; ++t) d.push_back("w" + std::to_string(uniform_index(rng, 60)));
    }
    const auto vocab = build_vocabulary(docs);
    const auto vecs = featurize_corpus(docs, vocab);
    for (const auto& v : vecs) worst_norm = std::max(worst_norm, std::abs(v.norm() - 1.0));
    std::vector<std::vector<double>> dense(vecs.size(), std::vector<double>(vocab.size(), 0.0));
    for (std::size_t d = 0; d < vecs.size(); ++d)
      for (std::size_t i = 0; i < vecs[d].indices.size(); ++i) dense[d][vecs[d].indices[i]] = vecs[d].values[i];
    const InvertedIndex index(vocab, vecs);
    for (int qn = 0; qn < 8; ++qn, ++queries) {
      std::set<std::int64_t> terms;
      std::string query;
      for (std::size_t t = 0, n = 1 + uniform_index(rng, 4); t < n; ++t) {
        const auto w = "w" + std::to_string(uniform_index(rng, 70));  // some out of vocabulary
        query += w + " ";
        terms.insert(vocab.index_of(w));
      }
      std::vector<std::pair<double, std::uint32_t>> brute;
      for (std::uint32_t d = 0; d < dense.size(); ++d) {
        double s = 0.0;
        for (auto t : terms)
          if (t >= 0) s += dense[d][static_cast<std::size_t>(t)];
        if (s > 0) brute.push_back({s, d});
      }
      std::stable_sort(brute.begin(), brute.end(), [](auto& a, auto& b) { return a.first > b.first; });
      const auto hits = keyword_search(index, query, dense.size());
      bool same = hits.size() == brute.size();
      for (std::size_t i = 0; same && i < hits.size(); ++i) {
        same = hits[i].doc == brute[i].second && std::abs(hits[i].score - brute[i].first) <= 1e-12;
      }
      c.expect(same, "search order for query '" + query + "'");
    }
  }
  c.expect(worst_norm <= 1e-9, "unit norms");
  c.note("max |norm-1| " + fmt("%.2e", worst_norm) + ", " + std::to_string(queries) + " queries vs brute force");
}

// --- 3: k-means ----------------------------------------------------------------------

void clustering(Checks& c) {
  {
    const std::vector<double> pts = {0, 1, 10, 11};
    bool all = true;
    for (std::uint64_t seed = 0; seed < 20; ++seed) all = all && kmeans(pts, 1, 2, seed).inertia == 1.0;
    c.expect(all, "{0,1,10,11} inertia 1.0");
  }
  {
    Rng rng(64);
    std::vector<double> pts(1000 * 64);
    for (auto& v : pts) v = standard_normal(rng);
    const auto r = kmeans(pts, 64, 10, 5);
    bool mono = true;
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i)
      mono = mono && r.inertia_history[i] <= r.inertia_history[i - 1];
    c.expect(mono, "inertia non-increasing");
    c.note(std::to_string(r.iterations) + " Lloyd iterations on 1000x64");

    bool reproducible = true;
    for (int threads : {1, 2, 4}) {
      set_thread_count(threads);
      const auto again = kmeans(pts, 64, 10, 5);
      reproducible = reproducible && again.assignments == r.assignments && again.inertia == r.inertia &&
                     std::memcmp(again.centroids.data(), r.centroids.data(), r.centroids.size() * 8) == 0;
    }
    set_thread_count(0);
    c.expect(reproducible, "bit-reproducible across threads");
  }
  {
    // two planted topics that share a pool of common words
    Rng rng(7);
    std::vector<TermList> docs(200);
    std::vector<int> truth(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
      truth[i] = static_cast<int>(i % 2);
      const std::string prefix = truth[i] ? "motion" : "grant";
      for (std::size_t t = 0, n = 15 + uniform_index(rng, 20); t < n; ++t) {
        docs[i].push_back(uniform01(rng) < 0.4 ? "common" + std::to_string(uniform_index(rng, 30))
                                               : prefix + std::to_string(uniform_index(rng, 40)));
      }
    }
    const auto vocab = build_vocabulary(docs);
    const auto dense = densify(featurize_corpus(docs, vocab));
    double worst = 1.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto r = kmeans(dense, vocab.size(), 2, seed);
      std::size_t same = 0;
      for (std::size_t i = 0; i < truth.size(); ++i) same += static_cast<int>(r.assignments[i]) == truth[i];
      const double n = double(truth.size());
      worst = std::min(worst, std::max(double(same), n - double(same)) / n);
    }
    c.expect(worst >= 0.9, "planted agreement >= 0.9");
    c.note("worst planted agreement over 20 seeds " + fmt("%.3f", worst));
  }
}

// --- 4: t-SNE --------------------------------------------------------------------------

double silhouette(const std::vector<Point2>& pts, const std::vector<int>& labels, int k) {
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<double> sum(k, 0.0);
    std::vector<int> count(k, 0);
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      sum[labels[j]] += std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
      ++count[labels[j]];
    }
    const double a = sum[labels[i]] / count[labels[i]];
    double b = INFINITY;
    for (int g = 0; g < k; ++g)
      if (g != labels[i]) b = std::min(b, sum[g] / count[g]);
    total += (b - a) / std::max(a, b);
  }
  return total / double(pts.size());
}

void projection_checks(Checks& c) {
  Rng rng(4);
  {
    const std::size_t n = 200, dim = 10;
    std::vector<double> x(n * dim);
    for (auto& v : x) v = standard_normal(rng);
    std::vector<double> d2(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < dim; ++k) d2[i * n + j] += std::pow(x[i * dim + k] - x[j * dim + k], 2);
    double worst_perp = 0.0, worst_sum = 0.0;
    for (double target : {5.0, 30.0, 60.0}) {
      std::vector<Calibration> cal;
      const auto p = conditional_affinities(d2, n, target, &cal);
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0, h = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          s += p[i * n + j];
          if (p[i * n + j] > 0) h -= p[i * n + j] * std::log(p[i * n + j]);
        }
        worst_sum = std::max(worst_sum, std::abs(s - 1.0));
        // perplexity recomputed from the returned row, not from the calibrator
        worst_perp = std::max(worst_perp, std::abs(std::exp(h) - target));
        c.expect(cal[i].converged, "row converged");
      }
    }
    c.expect(worst_perp <= 1e-5, "perplexity within 1e-5");
    c.expect(worst_sum <= 1e-9, "rows sum to 1");
    c.note("max perplexity error " + fmt("%.3e", worst_perp) + ", max |row sum-1| " + fmt("%.1e", worst_sum));
  }
  {
    const std::size_t dim = 50, per = 20;
    std::vector<double> x;
    std::vector<int> labels;
    for (int b = 0; b < 3; ++b) {
      for (std::size_t i = 0; i < per; ++i) {
        for (std::size_t d = 0; d < dim; ++d) x.push_back((d == std::size_t(b) ? 15.0 : 0.0) + standard_normal(rng));
        labels.push_back(b);
      }
    }
    TsneParams params;
    params.perplexity = 10;
    params.seed = 42;
    set_thread_count(1);
    const auto a = tsne(std::span<const double>(x), dim, params);
    set_thread_count(0);
    const auto b = tsne(std::span<const double>(x), dim, params);
    const double s = silhouette(a.points, labels, 3);
    c.expect(s > 0.5, "three-blob silhouette > 0.5");
    c.expect(a.points == b.points && a.final_kl == b.final_kl, "fixed-seed bit reproducibility");
    c.note("three-blob silhouette " + fmt("%.3f", s));
  }
  {
    std::vector<double> x(1000 * 128);
    for (auto& v : x) v = standard_normal(rng);
    TsneParams params;
    params.seed = 1;
    const auto t0 = Clock::now();
    const auto p = tsne(std::span<const double>(x), 128, params);
    const double t = seconds_since(t0);
    c.expect(t < 60.0 && std::isfinite(p.final_kl), "1000x128 under 60 s");
    c.note("1000x128 t-SNE " + fmt("%.2f", t) + " s on " + std::to_string(thread_count()) + " thread(s)");
  }
}

// --- 5: learner -------------------------------------------------------------------------

void learner_checks(Checks& c) {
  Rng rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = 16, n = 10 + uniform_index(rng, 30);
    std::vector<double> x(n * dim), y(n), w(dim), gw(dim);
    for (auto& v : x) v = standard_normal(rng);
    for (auto& v : y) v = uniform01(rng) < 0.5 ? 0.0 : 1.0;
    for (auto& v : w) v = 0.5 * standard_normal(rng);
    const double b = standard_normal(rng), lambda = 0.01;
    double gb = 0.0;
    loss_gradient(x, y, w, b, lambda, gw, gb);
    gw.push_back(gb);
    double num = 0.0, den = 0.0;
    for (std::size_t d = 0; d <= dim; ++d) {
      auto wp = w, wm = w;
      double bp = b, bm = b;
      const double h = 1e-6;
      if (d < dim) {
        wp[d] += h;
        wm[d] -= h;
      } else {
        bp += h;
        bm -= h;
      }
      const double fd = (regularized_loss(x, y, wp, bp, lambda) - regularized_loss(x, y, wm, bm, lambda)) / (2 * h);
      num += (gw[d] - fd) * (gw[d] - fd);
      den += fd * fd;
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  c.expect(worst <= 1e-5, "gradient relative error <= 1e-5");
  c.note("worst gradient relative error " + fmt("%.1e", worst));

  // separable: three pages near +e1, three near -e1, plus random pages
  const std::uint32_t dim = 16;
  std::vector<float> m;
  std::vector<PageRef> ids;
  for (std::size_t r = 0; r < 206; ++r) {
    std::vector<float> row(dim);
    for (auto& v : row) v = static_cast<float>(0.1 * standard_normal(rng));
    if (r < 6) row[0] = r < 3 ? 1.0f : -1.0f;
    l2_normalize(row);
    m.insert(m.end(), row.begin(), row.end());
    ids.push_back({fixtures::synthetic_id("acc-learner", r), 0});
  }
  const EmbeddingStore store(dim, m, ids);
  auto s = create_session();
  for (std::size_t r = 0; r < 6; ++r) add_label(s, store, ids[r], r < 3 ? Label::positive : Label::negative);
  const auto& model = train(s, store);
  const auto scores = score_all(model, store);
  bool separated = true;
  for (std::size_t p = 0; p < 3; ++p)
    for (std::size_t q = 3; q < 6; ++q) separated = separated && scores[p] > scores[q];
  c.expect(separated, "positives above negatives");
  bool mono = true;
  for (std::size_t i = 1; i < model.loss_trace.size(); ++i) mono = mono && model.loss_trace[i] <= model.loss_trace[i - 1];
  c.expect(mono, "loss monotone per accepted step");

  bool invariant = true;
  const auto big = fixtures::random_store(20000, 64, 9);
  ModelState wm;
  for (std::size_t d = 0; d < 64; ++d) wm.weights.push_back(standard_normal(rng));
  wm.bias = -0.3;
  set_thread_count(1);
  const auto ref = score_all(wm, big, 1);
  for (int threads : {1, 2, 4}) {
    set_thread_count(threads);
    for (std::size_t chunk : {7u, 4096u, 50000u}) {
      const auto got = score_all(wm, big, chunk);
      invariant = invariant && std::memcmp(got.data(), ref.data(), ref.size() * sizeof(double)) == 0;
    }
  }
  set_thread_count(0);
  c.expect(invariant, "score_all chunk/thread invariance");
}

// --- 6: throughput ------------------------------------------------------------------------

/// Writes `rows` random unit rows of `dim` floats, four pages per document.
void write_synthetic_store(const fs::path& path, std::size_t rows, std::uint32_t dim) {
  Rng rng(rows ^ dim);
  StoreWriter writer(path, dim);
  std::vector<float> row(dim);
  for (std::size_t r = 0; r < rows; ++r) {
    for (auto& v : row) v = static_cast<float>(uniform01(rng) - 0.5);
    l2_normalize(row);
    writer.append({fixtures::synthetic_id("throughput", r / 4), static_cast<std::uint32_t>(r % 4)}, row);
  }
  writer.finish();
}

void throughput(Checks& c, std::uint32_t dim, double bound) {
  const fs::path dir = std::getenv("PDFCORPUS_SCRATCH_DIR") ? std::getenv("PDFCORPUS_SCRATCH_DIR") : PDFCORPUS_SCRATCH_DIR;
  fs::create_directories(dir);
  const auto path = dir / ("throughput-" + std::to_string(dim) + ".emb");
  const std::size_t rows = 1000000;
  const auto t_write = Clock::now();
  write_synthetic_store(path, rows, dim);
  c.note("store " + fmt("%.1f", double(rows) * dim * 4 / 1e9) + " GB written in " + fmt("%.1f", seconds_since(t_write)) +
         " s");
  struct Cleanup {
    fs::path p;
    ~Cleanup() {
      std::error_code ec;
      fs::remove(p, ec);
      fs::remove(sidecar_path(p), ec);
    }
  } cleanup{path};

  const auto store = read_store(path, StoreValidation::structure_only);
  auto session = create_session();
  for (std::size_t i = 0; i < 50; ++i) {
    add_label(session, store, store.row_ids()[i * 19997], i % 2 ? Label::positive : Label::negative);
  }
  const auto t0 = Clock::now();
  const auto& model = train(session, store);
  const auto scores = score_all(model, store);
  const double t = seconds_since(t0);
  c.expect(scores.size() == rows && std::all_of(scores.begin(), scores.end(), [](double s) { return std::isfinite(s); }),
           "scores finite");
  c.expect(t < bound, std::to_string(dim) + "-dim train+score under " + fmt("%g", bound) + " s");
  c.note(std::to_string(dim) + "-dim train+score " + fmt("%.2f", t) + " s (bound " + fmt("%g", bound) + " s) on " +
         std::to_string(thread_count()) + " thread(s)");
}

// --- 7: store and PDF robustness ------------------------------------------------------------

template <typename F>
bool typed_failure(F&& f) {
  try {
    f();
    return false;
  } catch (const Error&) {
    return true;
  }
}

void robustness(Checks& c) {
  fixtures::TempDir dir("acceptance");
  const auto store = fixtures::random_store(64, 24, 3, 2);
  const auto path = dir / "s.emb";
  write_store(store, path);
  c.expect(read_store(path) == store, "round trip equality");
  const auto back = read_store(path);
  c.expect(std::memcmp(back.matrix().data(), store.matrix().data(), store.matrix().size_bytes()) == 0,
           "round trip bit-exact");
  const auto bytes = fixtures::read_file(path);
  write_store(back, dir / "again.emb");
  c.expect(fixtures::read_file(dir / "again.emb") == bytes, "rewrite byte-identical");

  auto put = [&](const std::vector<std::uint8_t>& b) {
    std::ofstream out(dir / "m.emb", std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(b.data()), std::streamsize(b.size()));
    out.close();
    fs::copy_file(sidecar_path(path), sidecar_path(dir / "m.emb"), fs::copy_options::overwrite_existing);
  };
  std::size_t truncations = 0;
  for (std::size_t len = 0; len < bytes.size(); len += 1 + len / 16, ++truncations) {
    put({bytes.begin(), bytes.begin() + std::ptrdiff_t(len)});
    c.expect(typed_failure([&] { read_store(dir / "m.emb"); }), "truncation to " + std::to_string(len) + " bytes");
  }
  Rng rng(77);
  std::size_t rejected = 0, accepted = 0;
  for (int trial = 0; trial < 500; ++trial) {
    auto b = bytes;
    for (std::size_t k = 0, n = 1 + uniform_index(rng, 8); k < n; ++k) b[uniform_index(rng, b.size())] ^= 1 + rng() % 255;
    put(b);
    try {
      read_store(dir / "m.emb");
      ++accepted;  // e.g. a flipped low mantissa bit that stays within the norm tolerance
    } catch (const Error&) {
      ++rejected;
    } catch (const std::exception& e) {
      c.expect(false, std::string("untyped error: ") + e.what());
    }
  }
  c.note(std::to_string(truncations) + " truncations rejected; mutations " + std::to_string(rejected) + " rejected, " +
         std::to_string(accepted) + " benign");

  // PDF metadata extraction over random bytes and mutated fixtures; a crash
  // ends the process, so finishing the loop is the check.
  std::vector<std::vector<std::uint8_t>> seeds;
  for (const auto& e : fs::directory_iterator(fixtures::data_dir() / "pdf")) seeds.push_back(fixtures::read_file(e.path()));
  std::size_t with_pages = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<std::uint8_t> b;
    if (trial % 2 == 0) {
      b.resize(uniform_index(rng, 4096));
      for (auto& v : b) v = static_cast<std::uint8_t>(rng());
      if (trial % 4 == 0 && b.size() > 8) std::memcpy(b.data(), "%PDF-1.4", 8);
    } else {
      b = seeds[uniform_index(rng, seeds.size())];
      for (std::size_t k = 0, n = 1 + uniform_index(rng, 16); k < n && !b.empty(); ++k) {
        switch (rng() % 3) {
          case 0: b[uniform_index(rng, b.size())] = static_cast<std::uint8_t>(rng()); break;
          case 1: b.resize(uniform_index(rng, b.size())); break;
          default: b.insert(b.begin() + std::ptrdiff_t(uniform_index(rng, b.size())), static_cast<std::uint8_t>(rng()));
        }
      }
    }
    const auto meta = extract_pdf_metadata(b);
    with_pages += meta.page_count.has_value();
    c.expect(meta.file_size == b.size(), "file_size recorded");
  }
  c.note("10000 PDF fuzz cases, 0 crashes, " + std::to_string(with_pages) + " still yielded a page count");
}

// --- 8: real data -------------------------------------------------------------------------------

void real_data() {
  const char* corpus = std::getenv("PDFCORPUS_REAL_CORPUS");
  const char* text = std::getenv("PDFCORPUS_REAL_TEXT");
  if (!corpus || !text) {
    std::puts("SKIP 8 real-data smoke; set PDFCORPUS_REAL_CORPUS and PDFCORPUS_REAL_TEXT to run it");
    return;
  }
  criterion("8", "real-data smoke", 0, [&](Checks& c) {
    IngestOptions options;
    if (const char* cdx = std::getenv("PDFCORPUS_REAL_CDX")) options.cdx_path = cdx;
    const auto manifest = build_manifest(corpus, options);
    const auto table = facet_histogram(manifest, Facet::page_count_bucket);
    const auto& reference = fixtures::page_bucket_rows();
    std::string shown;
    for (std::size_t i = 0; i < reference.size(); ++i) {
      const double want = double(reference[i].documents), got = double(table.buckets[i].count);
      c.expect(std::abs(got - want) <= 0.03 * want, "bucket " + reference[i].label + " within 3%");
      shown += (i ? "/" : "") + std::to_string(table.buckets[i].count);
    }
    c.note("page buckets " + shown);

    std::vector<TermList> docs;
    std::vector<DocumentId> ids;
    for (const auto& r : manifest.records) {
      auto terms = tokenize(read_document_text(text, r.id));
      if (terms.empty()) continue;
      ids.push_back(r.id);
      docs.push_back(std::move(terms));
    }
    const auto vocab = build_vocabulary(docs);
    const auto vecs = featurize_corpus(docs, vocab);
    std::vector<SparseVector> group;
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (manifest.find(ids[i])->base_url == "uscourts.gov") group.push_back(vecs[i]);
    const auto report = group_centroid_terms(group, vocab, 10, true, "uscourts.gov");
    const std::set<std::string> expected = {"court", "motion", "filed", "case", "district"};
    std::size_t found = 0;
    for (const auto& t : report.terms) found += expected.count(t.term);
    c.expect(found >= 3, "uscourts.gov terms");
    c.note(std::to_string(found) + " of 5 expected uscourts.gov terms in the top 10");
  });
}

}  // namespace

int main() {
  std::printf("# %d worker thread(s)\n", thread_count());
  criterion("1", "facet tables from reference counts", 1.0, facets);
  criterion("2", "TF-IDF and keyword search", 5.0, tfidf);
  criterion("3", "k-means", 10.0, clustering);
  criterion("4", "t-SNE", 0, projection_checks);
  criterion("5", "interactive learner", 0, learner_checks);
  criterion("6a", "throughput 1M x 128", 0, [](Checks& c) { throughput(c, 128, 2.0); });
  criterion("6b", "throughput 1M x 2048", 0, [](Checks& c) { throughput(c, 2048, 15.0); });
  criterion("7", "embedding store and PDF parser robustness", 0, robustness);
  real_data();
  std::printf("# %d criterion line(s) failed\n", g_failures);
  return g_failures ? 1 : 0;
}
