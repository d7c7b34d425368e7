#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pdfcorpus/corpus_model.hpp"

namespace pdfcorpus {

using TermList = std::vector<std::string>;

/// Lowercased maximal word-character runs of at least two code points. Word
/// characters are ASCII alphanumerics plus letters of the common non-ASCII
/// scripts; case folding covers Latin-1, Greek and Cyrillic.
TermList tokenize(std::string_view text);

class Vocabulary {
 public:
  Vocabulary() = default;
  /// `terms` sorted and unique; `doc_freq` aligned with it.
  Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> doc_freq, std::uint32_t n_docs);

  std::size_t size() const noexcept { return terms_.size(); }
  std::uint32_t n_docs() const noexcept { return n_docs_; }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const std::vector<std::uint32_t>& doc_freq() const noexcept { return doc_freq_; }
  const std::string& term(std::size_t index) const { return terms_.at(index); }

  /// Position of `term`, or -1 when out of vocabulary.
  std::int64_t index_of(std::string_view term) const;

  /// Smoothed inverse document frequency ln((1 + n) / (1 + df)) + 1.
  double idf(std::size_t index) const;

  bool operator==(const Vocabulary& other) const {
    return terms_ == other.terms_ && doc_freq_ == other.doc_freq_ && n_docs_ == other.n_docs_;
  }

 private:
  std::vector<std::string> terms_;
  std::vector<std::uint32_t> doc_freq_;
  std::uint32_t n_docs_ = 0;
  std::unordered_map<std::string, std::uint32_t> index_;
};

Vocabulary build_vocabulary(std::span<const TermList> docs, std::uint32_t min_df = 1);

struct SparseVector {
  std::uint32_t dim = 0;
  std::vector<std::uint32_t> indices;  // strictly increasing
  std::vector<double> values;          // positive

  double norm() const;
  bool empty() const noexcept { return indices.empty(); }
  bool operator==(const SparseVector&) const = default;
};

/// Raw-count tf times smoothed idf, L2-normalized; OOV terms are dropped.
SparseVector featurize_tfidf(const TermList& doc, const Vocabulary& vocab);

/// Featurizes every document in parallel; output order follows `docs`.
std::vector<SparseVector> featurize_corpus(std::span<const TermList> docs, const Vocabulary& vocab);

struct Posting {
  std::uint32_t doc = 0;
  double weight = 0.0;
};

class InvertedIndex {
 public:
  InvertedIndex(const Vocabulary& vocab, std::span<const SparseVector> vectors);

  std::span<const Posting> postings(std::size_t term) const { return postings_.at(term); }
  std::size_t doc_count() const noexcept { return doc_count_; }
  const Vocabulary& vocabulary() const noexcept { return *vocab_; }

 private:
  const Vocabulary* vocab_;
  std::vector<std::vector<Posting>> postings_;
  std::size_t doc_count_;
};

struct SearchHit {
  std::uint32_t doc = 0;
  double score = 0.0;
  bool operator==(const SearchHit&) const = default;
};

/// Sums the query terms' weights per document (each distinct term once),
/// descending score, ties by ordinal, zero scores omitted.
std::vector<SearchHit> keyword_search(const InvertedIndex& index, std::string_view query, std::size_t limit);

// --- artifacts -------------------------------------------------------------

void write_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary read_vocabulary(const std::filesystem::path& path);

struct DocumentVectors {
  std::vector<DocumentId> ids;
  std::vector<SparseVector> vectors;
};

void write_tfidf(const DocumentVectors& docs, const std::filesystem::path& path);
DocumentVectors read_tfidf(const std::filesystem::path& path, std::uint32_t dim);

/// Concatenates `<text_dir>/<docid>/page-<n>.txt` in page order (missing
/// pages contribute nothing).
std::string read_document_text(const std::filesystem::path& text_dir, const DocumentId& id);

}  // namespace pdfcorpus
