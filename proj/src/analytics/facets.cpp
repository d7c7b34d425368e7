#include <algorithm>
#include <map>

#include "pdfcorpus/analytics.hpp"
#include "pdfcorpus/error.hpp"

namespace pdfcorpus {

std::string_view to_string(Facet facet) {
  return facet == Facet::base_url ? "base_url" : "page_count";
}

Facet parse_facet(std::string_view text) {
  if (text == "base_url") return Facet::base_url;
  if (text == "page_count" || text == "page_count_bucket") return Facet::page_count_bucket;
  throw Error(ErrorCode::InvalidArgument, "unknown facet '" + std::string(text) + "'");
}

std::string_view page_count_bucket(std::optional<std::uint32_t> page_count) {
  if (!page_count) return kPageCountBuckets[5];
  const auto n = *page_count;
  if (n <= 1) return kPageCountBuckets[0];
  if (n <= 5) return kPageCountBuckets[1];
  if (n <= 20) return kPageCountBuckets[2];
  if (n <= 100) return kPageCountBuckets[3];
  return kPageCountBuckets[4];
}

namespace {

std::size_t bucket_slot(std::optional<std::uint32_t> page_count) {
  const auto label = page_count_bucket(page_count);
  return static_cast<std::size_t>(std::find(kPageCountBuckets.begin(), kPageCountBuckets.end(), label) -
                                  kPageCountBuckets.begin());
}

std::vector<FacetBucket> empty_page_buckets() {
  std::vector<FacetBucket> buckets;
  for (auto label : kPageCountBuckets) buckets.push_back({std::string(label), 0});
  return buckets;
}

}  // namespace

FacetTable facet_histogram(const CorpusManifest& manifest, Facet facet) {
  FacetTable table;
  table.facet = std::string(to_string(facet));
  table.total = manifest.records.size();
  if (facet == Facet::page_count_bucket) {
    table.buckets = empty_page_buckets();
    for (const auto& r : manifest.records) ++table.buckets[bucket_slot(r.page_count)].count;
    return table;
  }
  std::map<std::string, std::uint64_t> counts;
  for (const auto& r : manifest.records) ++counts[r.base_url];
  for (auto& [label, count] : counts) table.buckets.push_back({label, count});
  std::stable_sort(table.buckets.begin(), table.buckets.end(),
                   [](const FacetBucket& a, const FacetBucket& b) { return a.count > b.count; });
  return table;
}

PageTotals corpus_page_totals(const CorpusManifest& manifest) {
  PageTotals totals;
  totals.buckets = empty_page_buckets();
  for (const auto& r : manifest.records) {
    if (!r.page_count) continue;
    totals.buckets[bucket_slot(r.page_count)].count += *r.page_count;
    totals.overall += *r.page_count;
  }
  return totals;
}

}  // namespace pdfcorpus
