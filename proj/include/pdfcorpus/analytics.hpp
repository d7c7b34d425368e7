#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pdfcorpus/corpus_model.hpp"
#include "pdfcorpus/text_features.hpp"

namespace pdfcorpus {

// ---------------------------------------------------------------------------
// Facets

enum class Facet { base_url, page_count_bucket };

std::string_view to_string(Facet facet);
Facet parse_facet(std::string_view text);

struct FacetBucket {
  std::string label;
  std::uint64_t count = 0;
  bool operator==(const FacetBucket&) const = default;
};

struct FacetTable {
  std::string facet;
  std::vector<FacetBucket> buckets;
  std::uint64_t total = 0;
};

inline constexpr std::array<std::string_view, 6> kPageCountBuckets = {"1", "2-5", "6-20", "21-100", "100+", "null"};

/// "1", "2-5", "6-20", "21-100" (100 inclusive), "100+" (101 and up), "null".
std::string_view page_count_bucket(std::optional<std::uint32_t> page_count);

/// base_url buckets: count descending, label ascending. page_count buckets:
/// the fixed six, in order, zeros included.
FacetTable facet_histogram(const CorpusManifest& manifest, Facet facet);

struct PageTotals {
  std::vector<FacetBucket> buckets;  // same labels as kPageCountBuckets; "null" is always 0
  std::uint64_t overall = 0;
};

PageTotals corpus_page_totals(const CorpusManifest& manifest);

// ---------------------------------------------------------------------------
// Centroid terms

struct TermWeight {
  std::string term;
  double weight = 0.0;
  bool operator==(const TermWeight&) const = default;
};

struct TermReport {
  std::string group_key;
  std::vector<TermWeight> terms;
};

/// Suffix-strip stem: first of "ing", "ed", "es", "s" that leaves >= 3 code points.
std::string prune_stem(std::string_view term);

/// Drops all-digit terms and single characters, then keeps the first
/// (highest-ranked) term of every stem.
std::vector<std::string> prune_terms(std::span<const std::string> ranked);
std::vector<TermWeight> prune_terms(std::span<const TermWeight> ranked);

/// Mean of the group's vectors; the top_k terms by weight, ties by term.
TermReport group_centroid_terms(std::span<const SparseVector> vectors, const Vocabulary& vocab, std::size_t top_k,
                                bool prune, std::string group_key = {});

// ---------------------------------------------------------------------------
// k-means

struct ClusteringResult {
  std::uint32_t k = 0;
  std::size_t dim = 0;
  std::vector<std::uint32_t> assignments;
  std::vector<double> centroids;  // k x dim, row-major
  double inertia = 0.0;
  std::uint32_t iterations = 0;
  std::uint64_t seed = 0;
  std::vector<double> inertia_history;  // after each assignment step

  std::span<const double> centroid(std::size_t c) const { return {centroids.data() + c * dim, dim}; }
};

/// k-means++ seeding from mt19937_64(seed), then Lloyd iterations until the
/// assignment is stable or max_iter updates have run. An empty cluster is
/// moved onto the point farthest from its current centroid.
ClusteringResult kmeans(std::span<const double> points, std::size_t dim, std::uint32_t k, std::uint64_t seed,
                        std::uint32_t max_iter = 300);

/// Centroid terms of each cluster's members; group_key is the cluster id.
/// Empty clusters yield an empty report.
std::vector<TermReport> cluster_terms(std::span<const SparseVector> vectors, const Vocabulary& vocab,
                                      const ClusteringResult& result, std::size_t top_k, bool prune);

/// Row-major dense copy of sparse vectors.
std::vector<double> densify(std::span<const SparseVector> vectors);

// ---------------------------------------------------------------------------
// Reports

nlohmann::ordered_json to_json(const FacetTable& table);
nlohmann::ordered_json to_json(const PageTotals& totals);
nlohmann::ordered_json to_json(const TermReport& report);
/// Assignments keyed by document id, in the order given.
nlohmann::ordered_json to_json(const ClusteringResult& result, std::span<const DocumentId> ids);

/// Left-aligned first column, right-aligned others, two-space gutters.
std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);

std::string render_text(const FacetTable& table);
std::string render_text(const PageTotals& totals);
std::string render_text(const TermReport& report);
std::string render_text(const ClusteringResult& result);

}  // namespace pdfcorpus
