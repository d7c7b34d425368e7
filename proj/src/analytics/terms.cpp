#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "pdfcorpus/analytics.hpp"
#include "pdfcorpus/error.hpp"

namespace pdfcorpus {

namespace {

std::size_t code_points(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool prunable(std::string_view term) { return all_digits(term) || code_points(term) <= 1; }

template <typename T, typename Key>
std::vector<T> prune_ranked(std::span<const T> ranked, Key key) {
  std::vector<T> out;
  std::unordered_set<std::string> seen;
  for (const auto& item : ranked) {
    const std::string_view term = key(item);
    if (prunable(term)) continue;
    if (seen.insert(prune_stem(term)).second) out.push_back(item);
  }
  return out;
}

}  // namespace

std::string prune_stem(std::string_view term) {
  for (std::string_view suffix : {"ing", "ed", "es", "s"}) {
    if (term.size() > suffix.size() && term.substr(term.size() - suffix.size()) == suffix) {
      auto stem = term.substr(0, term.size() - suffix.size());
      if (code_points(stem) >= 3) return std::string(stem);
    }
  }
  return std::string(term);
}

std::vector<std::string> prune_terms(std::span<const std::string> ranked) {
  return prune_ranked(ranked, [](const std::string& t) -> std::string_view { return t; });
}

std::vector<TermWeight> prune_terms(std::span<const TermWeight> ranked) {
  return prune_ranked(ranked, [](const TermWeight& t) -> std::string_view { return t.term; });
}

TermReport group_centroid_terms(std::span<const SparseVector> vectors, const Vocabulary& vocab, std::size_t top_k,
                                bool prune, std::string group_key) {
  if (vectors.empty()) throw Error(ErrorCode::EmptyGroup, "group '" + group_key + "' has no vectors");
  const std::uint32_t dim = vectors.front().dim;
  if (dim != vocab.size()) throw Error(ErrorCode::DimMismatch, "vectors do not match the vocabulary");
  std::vector<double> centroid(dim, 0.0);
  for (const auto& v : vectors) {
    if (v.dim != dim) throw Error(ErrorCode::DimMismatch, "group vectors differ in dimension");
    for (std::size_t i = 0; i < v.indices.size(); ++i) centroid[v.indices[i]] += v.values[i];
  }
  const double inv = 1.0 / static_cast<double>(vectors.size());
  std::vector<std::uint32_t> order;
  for (std::uint32_t t = 0; t < dim; ++t) {
    centroid[t] *= inv;
    if (centroid[t] > 0.0) order.push_back(t);
  }
  // vocabulary indices are in term order, so index order breaks ties lexicographically
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return centroid[a] > centroid[b]; });

  TermReport report;
  report.group_key = std::move(group_key);
  if (!prune) {
    for (std::size_t i = 0; i < std::min(top_k, order.size()); ++i) {
      report.terms.push_back({vocab.term(order[i]), centroid[order[i]]});
    }
    return report;
  }
  std::vector<TermWeight> ranked;
  ranked.reserve(order.size());
  for (auto t : order) ranked.push_back({vocab.term(t), centroid[t]});
  report.terms = prune_terms(std::span<const TermWeight>(ranked));
  if (report.terms.size() > top_k) report.terms.resize(top_k);
  return report;
}

}  // namespace pdfcorpus

namespace pdfcorpus {

std::vector<TermReport> cluster_terms(std::span<const SparseVector> vectors, const Vocabulary& vocab,
                                      const ClusteringResult& result, std::size_t top_k, bool prune) {
  std::vector<std::vector<SparseVector>> members(result.k);
  for (std::size_t i = 0; i < result.assignments.size() && i < vectors.size(); ++i) {
    members[result.assignments[i]].push_back(vectors[i]);
  }
  std::vector<TermReport> reports;
  for (std::uint32_t c = 0; c < result.k; ++c) {
    if (members[c].empty()) {
      reports.push_back({std::to_string(c), {}});
    } else {
      reports.push_back(group_centroid_terms(members[c], vocab, top_k, prune, std::to_string(c)));
    }
  }
  return reports;
}

}  // namespace pdfcorpus
