#include "pdfcorpus/text_features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>

#include "json.hpp"
#include "pdfcorpus/error.hpp"

namespace pdfcorpus {

namespace {

// Decodes one UTF-8 code point at `pos`; returns false on an invalid sequence
// (the lead byte is then skipped as a separator).
bool decode_utf8(std::string_view s, std::size_t& pos, std::uint32_t& cp, std::size_t& len) {
  auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    cp = b0;
    len = 1;
    return true;
  }
  int extra = (b0 >= 0xF0 && b0 < 0xF5) ? 3 : (b0 >= 0xE0) ? 2 : (b0 >= 0xC2 && b0 < 0xE0) ? 1 : -1;
  if (extra < 0 || pos + static_cast<std::size_t>(extra) >= s.size()) return false;
  cp = b0 & (0x3F >> extra);
  for (int i = 1; i <= extra; ++i) {
    auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return false;
    cp = (cp << 6) | (b & 0x3F);
  }
  len = static_cast<std::size_t>(extra) + 1;
  return true;
}

bool is_word_codepoint(std::uint32_t cp) {
  if (cp < 0x80) return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  if (cp >= 0x00C0 && cp <= 0x024F) return cp != 0x00D7 && cp != 0x00F7;
  return (cp >= 0x0370 && cp <= 0x03FF) || (cp >= 0x0400 && cp <= 0x04FF) || (cp >= 0x0590 && cp <= 0x06FF) ||
         (cp >= 0x0900 && cp <= 0x0DFF) || (cp >= 0x3040 && cp <= 0x30FF) || (cp >= 0x4E00 && cp <= 0x9FFF) ||
         (cp >= 0xAC00 && cp <= 0xD7AF);
}

std::uint32_t fold_case(std::uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;
  if (cp >= 0x0391 && cp <= 0x03A9) return cp + 0x20;
  if (cp >= 0x0410 && cp <= 0x042F) return cp + 0x20;
  if (cp >= 0x0400 && cp <= 0x040F) return cp + 0x50;
  return cp;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

}  // namespace

TermList tokenize(std::string_view text) {
  TermList out;
  std::string current;
  std::size_t codepoints = 0;
  auto flush = [&] {
    if (codepoints >= 2) out.push_back(current);
    current.clear();
    codepoints = 0;
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::uint32_t cp = 0;
    std::size_t len = 1;
    if (decode_utf8(text, pos, cp, len) && is_word_codepoint(cp)) {
      append_utf8(current, fold_case(cp));
      ++codepoints;
    } else {
      flush();
    }
    pos += len;
  }
  flush();
  return out;
}

// ---------------------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> doc_freq, std::uint32_t n_docs)
    : terms_(std::move(terms)), doc_freq_(std::move(doc_freq)), n_docs_(n_docs) {
  if (terms_.size() != doc_freq_.size()) throw Error(ErrorCode::InvalidArgument, "terms/doc_freq length mismatch");
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i > 0 && !(terms_[i - 1] < terms_[i])) throw Error(ErrorCode::InvalidArgument, "terms must be sorted unique");
    if (doc_freq_[i] < 1 || doc_freq_[i] > n_docs_) {
      throw Error(ErrorCode::InvalidArgument, "doc_freq out of range for term " + terms_[i]);
    }
    index_.emplace(terms_[i], static_cast<std::uint32_t>(i));
  }
}

std::int64_t Vocabulary::index_of(std::string_view term) const {
  auto it = index_.find(std::string(term));
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

double Vocabulary::idf(std::size_t index) const {
  return std::log((1.0 + n_docs_) / (1.0 + doc_freq_.at(index))) + 1.0;
}

Vocabulary build_vocabulary(std::span<const TermList> docs, std::uint32_t min_df) {
  if (docs.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot build a vocabulary from zero documents");
  if (min_df < 1) throw Error(ErrorCode::InvalidArgument, "min_df must be at least 1");
  std::vector<std::vector<std::string>> unique(docs.size());
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto& u = unique[i];
    u = docs[i];
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
  }
  std::map<std::string, std::uint32_t> df;
  for (const auto& u : unique) {
    for (const auto& t : u) ++df[t];
  }
  std::vector<std::string> terms;
  std::vector<std::uint32_t> freq;
  for (auto& [t, f] : df) {
    if (f >= min_df) {
      terms.push_back(t);
      freq.push_back(f);
    }
  }
  return Vocabulary(std::move(terms), std::move(freq), static_cast<std::uint32_t>(docs.size()));
}

// ---------------------------------------------------------------------------

double SparseVector::norm() const {
  double sq = 0.0;
  for (double v : values) sq += v * v;
  return std::sqrt(sq);
}

SparseVector featurize_tfidf(const TermList& doc, const Vocabulary& vocab) {
  SparseVector vec;
  vec.dim = static_cast<std::uint32_t>(vocab.size());
  std::vector<std::uint32_t> hits;
  hits.reserve(doc.size());
  for (const auto& t : doc) {
    auto idx = vocab.index_of(t);
    if (idx >= 0) hits.push_back(static_cast<std::uint32_t>(idx));
  }
  std::sort(hits.begin(), hits.end());
  for (std::size_t i = 0; i < hits.size();) {
    std::size_t j = i;
    while (j < hits.size() && hits[j] == hits[i]) ++j;
    vec.indices.push_back(hits[i]);
    vec.values.push_back(static_cast<double>(j - i) * vocab.idf(hits[i]));
    i = j;
  }
  const double norm = vec.norm();
  if (norm > 0.0) {
    for (double& v : vec.values) v /= norm;
  }
  return vec;
}

std::vector<SparseVector> featurize_corpus(std::span<const TermList> docs, const Vocabulary& vocab) {
  std::vector<SparseVector> out(docs.size());
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = featurize_tfidf(docs[i], vocab);
  return out;
}

// ---------------------------------------------------------------------------

InvertedIndex::InvertedIndex(const Vocabulary& vocab, std::span<const SparseVector> vectors)
    : vocab_(&vocab), postings_(vocab.size()), doc_count_(vectors.size()) {
  for (std::size_t d = 0; d < vectors.size(); ++d) {
    const auto& v = vectors[d];
    if (v.dim != vocab.size()) throw Error(ErrorCode::DimMismatch, "vector dim does not match vocabulary");
    for (std::size_t k = 0; k < v.indices.size(); ++k) {
      postings_[v.indices[k]].push_back(Posting{static_cast<std::uint32_t>(d), v.values[k]});
    }
  }
}

std::vector<SearchHit> keyword_search(const InvertedIndex& index, std::string_view query, std::size_t limit) {
  if (limit < 1) throw Error(ErrorCode::InvalidArgument, "limit must be at least 1");
  std::vector<std::uint32_t> terms;
  for (const auto& t : tokenize(query)) {
    auto idx = index.vocabulary().index_of(t);
    if (idx >= 0) terms.push_back(static_cast<std::uint32_t>(idx));
  }
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  if (terms.empty()) return {};

  // accumulate in ascending term order so sums match a dense dot product
  std::vector<double> scores(index.doc_count(), 0.0);
  for (auto t : terms) {
    for (const auto& p : index.postings(t)) scores[p.doc] += p.weight;
  }
  std::vector<SearchHit> hits;
  for (std::size_t d = 0; d < scores.size(); ++d) {
    if (scores[d] > 0.0) hits.push_back({static_cast<std::uint32_t>(d), scores[d]});
  }
  auto by_rank = [](const SearchHit& a, const SearchHit& b) {
    return a.score != b.score ? a.score > b.score : a.doc < b.doc;
  };
  const std::size_t keep = std::min(limit, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), by_rank);
  hits.resize(keep);
  return hits;
}

// ---------------------------------------------------------------------------

void write_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    nlohmann::ordered_json j;
    j["term"] = vocab.terms()[i];
    j["index"] = i;
    j["doc_freq"] = vocab.doc_freq()[i];
    j["n_docs"] = vocab.n_docs();
    out << j.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

Vocabulary read_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::vector<std::string> terms;
  std::vector<std::uint32_t> freq;
  std::uint32_t n_docs = 0;
  std::string line;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto j = nlohmann::json::parse(line);
      if (j.at("index").get<std::size_t>() != terms.size()) {
        throw Error(ErrorCode::BadFormat, "vocabulary indices must be consecutive from 0");
      }
      terms.push_back(j.at("term").get<std::string>());
      freq.push_back(j.at("doc_freq").get<std::uint32_t>());
      n_docs = j.at("n_docs").get<std::uint32_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadFormat, path.string() + ": " + e.what());
  }
  return Vocabulary(std::move(terms), std::move(freq), n_docs);
}

void write_tfidf(const DocumentVectors& docs, const std::filesystem::path& path) {
  if (docs.ids.size() != docs.vectors.size()) throw Error(ErrorCode::InvalidArgument, "ids/vectors length mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  for (std::size_t i = 0; i < docs.ids.size(); ++i) {
    nlohmann::ordered_json j;
    j["doc_id"] = docs.ids[i].hex();
    j["indices"] = docs.vectors[i].indices;
    j["values"] = docs.vectors[i].values;
    out << j.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

DocumentVectors read_tfidf(const std::filesystem::path& path, std::uint32_t dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  DocumentVectors docs;
  std::string line;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto j = nlohmann::json::parse(line);
      docs.ids.push_back(DocumentId::from_hex(j.at("doc_id").get<std::string>()));
      SparseVector v;
      v.dim = dim;
      v.indices = j.at("indices").get<std::vector<std::uint32_t>>();
      v.values = j.at("values").get<std::vector<double>>();
      if (v.indices.size() != v.values.size()) throw Error(ErrorCode::BadFormat, "indices/values length mismatch");
      for (std::size_t k = 0; k < v.indices.size(); ++k) {
        if (v.indices[k] >= dim || (k > 0 && v.indices[k] <= v.indices[k - 1]) || !(v.values[k] > 0.0)) {
          throw Error(ErrorCode::BadFormat, "malformed sparse vector for " + docs.ids.back().hex());
        }
      }
      docs.vectors.push_back(std::move(v));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadFormat, path.string() + ": " + e.what());
  }
  return docs;
}

std::string read_document_text(const std::filesystem::path& text_dir, const DocumentId& id) {
  namespace fs = std::filesystem;
  fs::path dir = text_dir / id.hex();
  std::vector<std::pair<std::uint64_t, fs::path>> pages;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return {};
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (!name.starts_with("page-") || !name.ends_with(".txt")) continue;
    std::string_view num(name.data() + 5, name.size() - 9);
    std::uint64_t n = 0;
    auto [ptr, err] = std::from_chars(num.data(), num.data() + num.size(), n);
    if (err != std::errc{} || ptr != num.data() + num.size()) continue;
    pages.emplace_back(n, entry.path());
  }
  std::sort(pages.begin(), pages.end());
  std::string text;
  for (const auto& [n, p] : pages) {
    std::ifstream in(p, std::ios::binary);
    text.append(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    text.push_back('\n');
  }
  return text;
}

}  // namespace pdfcorpus
