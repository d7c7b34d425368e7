#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pdfcorpus/corpus_model.hpp"

namespace pdfcorpus {

// ---------------------------------------------------------------------------
// CDX index lines
// ---------------------------------------------------------------------------

struct CdxRecord {
  std::string url_key;
  std::string timestamp;  // 14 digits
  std::string original_url;
  std::string mime_type;
  std::optional<int> status_code;
  std::optional<std::string> digest;

  bool operator==(const CdxRecord&) const = default;
};

/// Field names understood positionally: url_key, timestamp, original_url,
/// mime_type, status_code, digest. Any other name is accepted and skipped.
using CdxFieldOrder = std::vector<std::string>;

/// Field order for the common 11-column layout (N b a m s k r M S V g).
CdxFieldOrder default_cdx_field_order();

/// Parses a " CDX N b a m ..." legend line into field names.
CdxFieldOrder parse_cdx_header(std::string_view header_line);

/// Tokens are split on runs of spaces; "-" means absent.
CdxRecord parse_cdx_line(std::string_view line, const CdxFieldOrder& field_order);

/// Reads a CDX file; a leading " CDX" legend, when present, overrides
/// `field_order`. Blank lines are skipped.
std::vector<CdxRecord> read_cdx_file(const std::filesystem::path& path, const CdxFieldOrder& field_order);

// ---------------------------------------------------------------------------
// URLs
// ---------------------------------------------------------------------------

/// Lowercased host of an absolute URL (userinfo and port removed).
std::string url_host(std::string_view url);

/// Last two host labels, lowercased: "https://lofgren.house.gov/x" -> "house.gov".
std::string derive_base_url(std::string_view url);

// ---------------------------------------------------------------------------
// PDF structure
// ---------------------------------------------------------------------------

struct PdfMeta {
  std::optional<std::uint32_t> page_count;
  bool encrypted = false;
  std::uint64_t file_size = 0;
  std::optional<std::string> producer;

  bool operator==(const PdfMeta&) const = default;
};

/// Never throws on malformed input; a missing page count is the failure signal.
PdfMeta extract_pdf_metadata(std::span<const std::uint8_t> bytes) noexcept;

DocumentStatus status_from_meta(const PdfMeta& meta);

// ---------------------------------------------------------------------------
// Manifest assembly
// ---------------------------------------------------------------------------

struct IngestOptions {
  std::optional<std::filesystem::path> cdx_path;
  CdxFieldOrder cdx_field_order = default_cdx_field_order();
};

CorpusManifest build_manifest(const std::filesystem::path& corpus_dir, const IngestOptions& options = {});

}  // namespace pdfcorpus
