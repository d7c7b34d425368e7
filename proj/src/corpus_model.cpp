#include "pdfcorpus/corpus_model.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "pdfcorpus/error.hpp"
#include "pdfcorpus/ingest.hpp"

namespace pdfcorpus {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

template <std::size_t N>
std::array<std::uint8_t, N> evp_digest(const EVP_MD* md, std::span<const std::uint8_t> bytes) {
  std::array<std::uint8_t, N> out{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, md, nullptr) != 1 || len != N) {
    throw Error(ErrorCode::IoFailure, "digest computation failed");
  }
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0xF]);
  }
  return out;
}

bool is_timestamp(std::string_view ts) {
  return ts.size() == 14 && std::all_of(ts.begin(), ts.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

DocumentId DocumentId::from_hex(std::string_view hex) {
  if (hex.size() != 64) throw Error(ErrorCode::BadFormat, "document id must be 64 hex chars: " + std::string(hex));
  Digest d{};
  for (std::size_t i = 0; i < 32; ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::BadFormat, "non-hex character in document id: " + std::string(hex));
    d[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return DocumentId(d);
}

std::string DocumentId::hex() const { return to_hex(digest_); }

DocumentId derive_document_id(std::span<const std::uint8_t> bytes) {
  return DocumentId(evp_digest<32>(EVP_sha256(), bytes));
}

DocumentId derive_document_id(std::string_view bytes) {
  return derive_document_id(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  return to_hex(evp_digest<32>(EVP_sha256(), bytes));
}

std::string sha1_base32(std::span<const std::uint8_t> bytes) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ234567";
  auto digest = evp_digest<20>(EVP_sha1(), bytes);
  std::string out;
  std::uint32_t buffer = 0;
  int bits = 0;
  for (auto b : digest) {
    buffer = (buffer << 8) | b;
    bits += 8;
    while (bits >= 5) {
      out.push_back(kAlphabet[(buffer >> (bits - 5)) & 0x1F]);
      bits -= 5;
    }
  }
  if (bits > 0) out.push_back(kAlphabet[(buffer << (5 - bits)) & 0x1F]);
  return out;
}

std::string_view to_string(DocumentStatus status) {
  switch (status) {
    case DocumentStatus::ok: return "ok";
    case DocumentStatus::encrypted: return "encrypted";
    case DocumentStatus::malformed: return "malformed";
  }
  return "malformed";
}

DocumentStatus parse_document_status(std::string_view text) {
  if (text == "ok") return DocumentStatus::ok;
  if (text == "encrypted") return DocumentStatus::encrypted;
  if (text == "malformed") return DocumentStatus::malformed;
  throw Error(ErrorCode::BadFormat, "unknown document status: " + std::string(text));
}

void validate_record(const DocumentRecord& r) {
  if (r.page_count.has_value() != (r.status == DocumentStatus::ok)) {
    throw Error(ErrorCode::InvalidArgument, "page_count must be present iff status is ok (" + r.id.hex() + ")");
  }
  if (r.page_count && *r.page_count == 0) {
    throw Error(ErrorCode::InvalidArgument, "page_count must be positive (" + r.id.hex() + ")");
  }
  if (r.fetch_timestamp && !is_timestamp(*r.fetch_timestamp)) {
    throw Error(ErrorCode::InvalidArgument, "fetch_timestamp must be 14 digits (" + r.id.hex() + ")");
  }
  std::string host = url_host(r.source_url);
  if (!(host == r.base_url ||
        (host.size() > r.base_url.size() && host.ends_with(r.base_url) &&
         host[host.size() - r.base_url.size() - 1] == '.'))) {
    throw Error(ErrorCode::InvalidArgument, "base_url " + r.base_url + " is not a suffix of host " + host);
  }
}

std::size_t PageRefHash::operator()(const PageRef& ref) const noexcept {
  return DocumentIdHash{}(ref.doc_id) * 31u + ref.page_index;
}

std::size_t DocumentIdHash::operator()(const DocumentId& id) const noexcept {
  std::size_t h = 0;
  for (int i = 0; i < 8; ++i) h = (h << 8) | id.digest()[i];
  return h;
}

const DocumentRecord* CorpusManifest::find(const DocumentId& id) const {
  auto it = std::lower_bound(records.begin(), records.end(), id,
                             [](const DocumentRecord& r, const DocumentId& key) { return r.id < key; });
  return (it != records.end() && it->id == id) ? &*it : nullptr;
}

DocumentId compute_corpus_id(std::span<const DocumentRecord> sorted_records) {
  std::string joined;
  joined.reserve(sorted_records.size() * 65);
  for (const auto& r : sorted_records) {
    joined += r.id.hex();
    joined.push_back('\n');
  }
  return derive_document_id(joined);
}

CorpusManifest make_manifest(std::vector<DocumentRecord> records) {
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].id == records[i - 1].id) {
      throw Error(ErrorCode::InvalidArgument, "duplicate document id " + records[i].id.hex());
    }
  }
  CorpusManifest m;
  m.corpus_id = compute_corpus_id(records);
  for (const auto& r : records) {
    if (r.fetch_timestamp && (!m.created_at || *r.fetch_timestamp > *m.created_at)) m.created_at = r.fetch_timestamp;
  }
  m.records = std::move(records);
  return m;
}

nlohmann::ordered_json record_to_json(const DocumentRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id.hex();
  j["source_url"] = r.source_url;
  j["base_url"] = r.base_url;
  j["agency"] = r.agency ? nlohmann::ordered_json(*r.agency) : nlohmann::ordered_json(nullptr);
  j["file_size"] = r.file_size;
  j["page_count"] = r.page_count ? nlohmann::ordered_json(*r.page_count) : nlohmann::ordered_json(nullptr);
  j["status"] = std::string(to_string(r.status));
  j["fetch_timestamp"] =
      r.fetch_timestamp ? nlohmann::ordered_json(*r.fetch_timestamp) : nlohmann::ordered_json(nullptr);
  return j;
}

namespace {

template <typename T>
std::optional<T> optional_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

DocumentRecord record_from_json(const nlohmann::json& j) {
  static constexpr const char* kFields[] = {"id",        "source_url", "base_url", "agency",
                                            "file_size", "page_count", "status",   "fetch_timestamp"};
  if (!j.is_object() || j.size() != std::size(kFields)) {
    throw Error(ErrorCode::BadFormat, "manifest line must be an object with exactly the record fields");
  }
  for (const char* f : kFields) {
    if (!j.contains(f)) throw Error(ErrorCode::BadFormat, std::string("manifest line missing field ") + f);
  }
  DocumentRecord r;
  r.id = DocumentId::from_hex(j.at("id").get<std::string>());
  r.source_url = j.at("source_url").get<std::string>();
  r.base_url = j.at("base_url").get<std::string>();
  r.agency = optional_field<std::string>(j, "agency");
  r.file_size = j.at("file_size").get<std::uint64_t>();
  r.page_count = optional_field<std::uint32_t>(j, "page_count");
  r.status = parse_document_status(j.at("status").get<std::string>());
  r.fetch_timestamp = optional_field<std::string>(j, "fetch_timestamp");
  return r;
}

}  // namespace

void write_manifest(const CorpusManifest& manifest, std::ostream& out) {
  for (const auto& r : manifest.records) out << record_to_json(r).dump() << '\n';
}

void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  write_manifest(manifest, out);
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

CorpusManifest read_manifest(std::istream& in) {
  std::vector<DocumentRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::BadFormat, "manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return make_manifest(std::move(records));
}

CorpusManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return read_manifest(in);
}

}  // namespace pdfcorpus
