#include <algorithm>
#include <cctype>
#include <exception>
#include <fstream>
#include <iterator>
#include <map>

#include "pdfcorpus/error.hpp"
#include "pdfcorpus/ingest.hpp"

namespace pdfcorpus {

namespace fs = std::filesystem;

namespace {

struct FileResult {
  DocumentRecord record;
  std::exception_ptr error;
};

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool is_pdf_path(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pdf";
}

std::optional<std::string> read_sidecar_url(const fs::path& pdf) {
  fs::path candidates[] = {fs::path(pdf).replace_extension(".url"), fs::path(pdf.string() + ".url")};
  for (const auto& c : candidates) {
    std::ifstream in(c);
    if (!in) continue;
    std::string line;
    std::getline(in, line);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    std::size_t lead = 0;
    while (lead < line.size() && std::isspace(static_cast<unsigned char>(line[lead]))) ++lead;
    if (lead < line.size()) return line.substr(lead);
  }
  return std::nullopt;
}

std::string url_filename(const std::string& url) {
  std::string path = url.substr(0, url.find_first_of("?#"));
  auto slash = path.rfind('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

std::string normalize_digest(std::string digest) {
  for (const char* prefix : {"sha1:", "sha256:", "SHA1:", "SHA256:"}) {
    if (digest.starts_with(prefix)) {
      digest.erase(0, std::char_traits<char>::length(prefix));
      break;
    }
  }
  std::transform(digest.begin(), digest.end(), digest.begin(), [](unsigned char c) { return std::toupper(c); });
  return digest;
}

class CdxIndex {
 public:
  explicit CdxIndex(std::vector<CdxRecord> records) : records_(std::move(records)) {
    std::sort(records_.begin(), records_.end(), [](const CdxRecord& a, const CdxRecord& b) {
      return std::tie(a.timestamp, a.original_url) < std::tie(b.timestamp, b.original_url);
    });
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const auto& r = records_[i];
      if (r.digest) by_digest_.emplace(normalize_digest(*r.digest), i);
      by_filename_.emplace(url_filename(r.original_url), i);
    }
  }

  // Equal keys keep insertion order, so lower_bound is the earliest capture.
  const CdxRecord* match(const std::string& sha1_b32, const std::string& sha256, const std::string& filename) const {
    for (const auto& key : {normalize_digest(sha1_b32), normalize_digest(sha256)}) {
      if (auto it = by_digest_.lower_bound(key); it != by_digest_.end() && it->first == key) {
        return &records_[it->second];
      }
    }
    if (auto it = by_filename_.lower_bound(filename); it != by_filename_.end() && it->first == filename) {
      return &records_[it->second];
    }
    return nullptr;
  }

 private:
  std::vector<CdxRecord> records_;
  std::multimap<std::string, std::size_t> by_digest_;
  std::multimap<std::string, std::size_t> by_filename_;
};

DocumentRecord ingest_file(const fs::path& path, const CdxIndex* cdx) {
  auto bytes = read_bytes(path);
  DocumentRecord rec;
  rec.id = derive_document_id(bytes);
  PdfMeta meta = extract_pdf_metadata(bytes);
  rec.file_size = meta.file_size;
  rec.status = status_from_meta(meta);
  if (rec.status == DocumentStatus::ok) rec.page_count = meta.page_count;

  const CdxRecord* hit = cdx ? cdx->match(sha1_base32(bytes), rec.id.hex(), path.filename().string()) : nullptr;
  if (hit) {
    rec.source_url = hit->original_url;
    rec.fetch_timestamp = hit->timestamp;
  } else if (auto sidecar = read_sidecar_url(path)) {
    rec.source_url = *sidecar;
  } else {
    throw Error(ErrorCode::MissingUrlProvenance, "no CDX match or .url sidecar for " + path.string());
  }
  try {
    rec.base_url = derive_base_url(rec.source_url);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
  return rec;
}

}  // namespace

CorpusManifest build_manifest(const fs::path& corpus_dir, const IngestOptions& options) {
  if (!fs::is_directory(corpus_dir)) throw Error(ErrorCode::IoFailure, "not a directory: " + corpus_dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(corpus_dir)) {
    if (entry.is_regular_file() && is_pdf_path(entry.path())) files.push_back(entry.path());
  }
  if (files.empty()) throw Error(ErrorCode::EmptyCorpus, "no *.pdf files under " + corpus_dir.string());
  std::sort(files.begin(), files.end());

  std::optional<CdxIndex> cdx;
  if (options.cdx_path) cdx.emplace(read_cdx_file(*options.cdx_path, options.cdx_field_order));

  std::vector<FileResult> results(files.size());
  const auto n = static_cast<std::ptrdiff_t>(files.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      results[i].record = ingest_file(files[i], cdx ? &*cdx : nullptr);
    } catch (...) {
      results[i].error = std::current_exception();
    }
  }

  std::vector<DocumentRecord> records;
  std::map<DocumentId, std::size_t> seen;
  for (auto& r : results) {
    if (r.error) std::rethrow_exception(r.error);
    // identical bytes harvested twice collapse onto the first path in sorted order
    if (seen.emplace(r.record.id, records.size()).second) records.push_back(std::move(r.record));
  }
  return make_manifest(std::move(records));
}

}  // namespace pdfcorpus
