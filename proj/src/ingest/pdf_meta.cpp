#include <string_view>

#include "pdf_objects.hpp"
#include "pdfcorpus/ingest.hpp"

namespace pdfcorpus {

namespace {

using pdf::Document;
using pdf::Object;
using pdf::ParseFailure;

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

// PDF text strings: UTF-16BE with a BOM, otherwise treated as Latin-1.
std::string text_string_to_utf8(const std::string& raw) {
  std::string out;
  if (raw.size() >= 2 && static_cast<unsigned char>(raw[0]) == 0xFE && static_cast<unsigned char>(raw[1]) == 0xFF) {
    for (std::size_t i = 2; i + 1 < raw.size(); i += 2) {
      std::uint32_t unit = static_cast<unsigned char>(raw[i]) << 8 | static_cast<unsigned char>(raw[i + 1]);
      if (unit >= 0xD800 && unit < 0xDC00 && i + 3 < raw.size()) {
        std::uint32_t low = static_cast<unsigned char>(raw[i + 2]) << 8 | static_cast<unsigned char>(raw[i + 3]);
        if (low >= 0xDC00 && low < 0xE000) {
          append_utf8(out, 0x10000 + ((unit - 0xD800) << 10) + (low - 0xDC00));
          i += 2;
          continue;
        }
      }
      if (unit >= 0xD800 && unit < 0xE000) unit = 0xFFFD;
      append_utf8(out, unit);
    }
    return out;
  }
  for (char c : raw) append_utf8(out, static_cast<unsigned char>(c));
  return out;
}

std::optional<std::uint32_t> page_tree_count(Document& doc) {
  try {
    const Object* root_ref = pdf::dict_get(doc.trailer(), "Root");
    if (!root_ref) return std::nullopt;
    Object root = doc.resolve(*root_ref);
    if (!root.dict()) return std::nullopt;
    const Object* pages_ref = pdf::dict_get(*root.dict(), "Pages");
    if (!pages_ref) return std::nullopt;
    Object pages = doc.resolve(*pages_ref);
    if (!pages.dict()) return std::nullopt;
    const Object* count_ref = pdf::dict_get(*pages.dict(), "Count");
    if (!count_ref) return std::nullopt;
    Object count = doc.resolve(*count_ref);
    if (!count.integer() || *count.integer() < 1 || *count.integer() > UINT32_MAX) return std::nullopt;
    return static_cast<std::uint32_t>(*count.integer());
  } catch (const ParseFailure&) {
    return std::nullopt;
  }
}

std::optional<std::string> producer(Document& doc) {
  try {
    const Object* info_ref = pdf::dict_get(doc.trailer(), "Info");
    if (!info_ref) return std::nullopt;
    Object info = doc.resolve(*info_ref);
    if (!info.dict()) return std::nullopt;
    const Object* prod_ref = pdf::dict_get(*info.dict(), "Producer");
    if (!prod_ref) return std::nullopt;
    Object prod = doc.resolve(*prod_ref);
    if (!prod.string()) return std::nullopt;
    return text_string_to_utf8(*prod.string());
  } catch (const ParseFailure&) {
    return std::nullopt;
  }
}

bool has_pdf_header(std::span<const std::uint8_t> bytes) {
  std::string_view head(reinterpret_cast<const char*>(bytes.data()), std::min<std::size_t>(bytes.size(), 1024));
  return head.find("%PDF-") != std::string_view::npos;
}

}  // namespace

PdfMeta extract_pdf_metadata(std::span<const std::uint8_t> bytes) noexcept {
  PdfMeta meta;
  meta.file_size = bytes.size();
  try {
    if (!has_pdf_header(bytes)) return meta;
    Document doc(bytes);
    if (!doc.load_xref()) doc.reconstruct();
    meta.encrypted = pdf::dict_get(doc.trailer(), "Encrypt") != nullptr;
    if (meta.encrypted) return meta;

    auto count = page_tree_count(doc);
    if (!count && !doc.reconstructed()) {
      doc.reconstruct();
      meta.encrypted = pdf::dict_get(doc.trailer(), "Encrypt") != nullptr;
      if (meta.encrypted) return meta;
      count = page_tree_count(doc);
    }
    if (!count) {
      std::size_t scanned = doc.count_page_objects();
      if (scanned > 0 && scanned <= UINT32_MAX) count = static_cast<std::uint32_t>(scanned);
    }
    meta.page_count = count;
    meta.producer = producer(doc);
  } catch (...) {
    meta.page_count.reset();
  }
  return meta;
}

DocumentStatus status_from_meta(const PdfMeta& meta) {
  if (meta.encrypted) return DocumentStatus::encrypted;
  return meta.page_count ? DocumentStatus::ok : DocumentStatus::malformed;
}

}  // namespace pdfcorpus
