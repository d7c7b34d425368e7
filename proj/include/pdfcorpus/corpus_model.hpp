#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace pdfcorpus {

/// Content address of a PDF: SHA-256 of the file bytes. Held as raw digest
/// bytes; the canonical text form is 64 lowercase hex characters.
class DocumentId {
 public:
  using Digest = std::array<std::uint8_t, 32>;

  DocumentId() = default;
  explicit DocumentId(const Digest& digest) : digest_(digest) {}

  /// Throws Error(BadFormat) unless `hex` is exactly 64 hex characters.
  static DocumentId from_hex(std::string_view hex);

  std::string hex() const;
  const Digest& digest() const noexcept { return digest_; }

  auto operator<=>(const DocumentId&) const = default;

 private:
  Digest digest_{};
};

DocumentId derive_document_id(std::span<const std::uint8_t> bytes);
DocumentId derive_document_id(std::string_view bytes);

enum class DocumentStatus { ok, encrypted, malformed };

std::string_view to_string(DocumentStatus status);
DocumentStatus parse_document_status(std::string_view text);

struct DocumentRecord {
  DocumentId id;
  std::string source_url;
  std::string base_url;
  std::optional<std::string> agency;
  std::uint64_t file_size = 0;
  std::optional<std::uint32_t> page_count;
  DocumentStatus status = DocumentStatus::malformed;
  std::optional<std::string> fetch_timestamp;

  bool operator==(const DocumentRecord&) const = default;
};

/// Throws Error(InvalidArgument) when a record breaks its invariants
/// (page_count present iff status ok, base_url a host suffix, timestamp shape).
void validate_record(const DocumentRecord& record);

struct PageRef {
  DocumentId doc_id;
  std::uint32_t page_index = 0;

  auto operator<=>(const PageRef&) const = default;
};

struct PageRefHash {
  std::size_t operator()(const PageRef& ref) const noexcept;
};

struct DocumentIdHash {
  std::size_t operator()(const DocumentId& id) const noexcept;
};

struct CorpusManifest {
  std::vector<DocumentRecord> records;  // sorted by id, ids unique
  DocumentId corpus_id;
  std::optional<std::string> created_at;

  bool operator==(const CorpusManifest&) const = default;

  const DocumentRecord* find(const DocumentId& id) const;
};

/// Sorts records by id, rejects duplicates, and derives corpus_id and
/// created_at (the latest fetch timestamp, so the snapshot is reproducible).
CorpusManifest make_manifest(std::vector<DocumentRecord> records);

DocumentId compute_corpus_id(std::span<const DocumentRecord> sorted_records);

/// One manifest line: the DocumentRecord fields, absent optionals as null.
nlohmann::ordered_json record_to_json(const DocumentRecord& record);

void write_manifest(const CorpusManifest& manifest, std::ostream& out);
void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);
CorpusManifest read_manifest(std::istream& in);
CorpusManifest read_manifest(const std::filesystem::path& path);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
/// Base32 (RFC 4648, no padding) SHA-1, the digest form used in CDX indexes.
std::string sha1_base32(std::span<const std::uint8_t> bytes);

}  // namespace pdfcorpus
