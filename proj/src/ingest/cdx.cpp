#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>

#include "pdfcorpus/error.hpp"
#include "pdfcorpus/ingest.hpp"

namespace pdfcorpus {

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size()) break;
    std::size_t j = line.find(' ', i);
    if (j == std::string_view::npos) j = line.size();
    tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

std::string_view trim_line_end(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n' || line.back() == '\t')) line.remove_suffix(1);
  return line;
}

}  // namespace

CdxFieldOrder default_cdx_field_order() {
  return {"url_key", "timestamp", "original_url", "mime_type", "status_code", "digest",
          "redirect", "meta_tags", "length", "offset", "filename"};
}

CdxFieldOrder parse_cdx_header(std::string_view header_line) {
  static const std::map<std::string_view, std::string> kLegend = {
      {"N", "url_key"},   {"b", "timestamp"}, {"a", "original_url"}, {"m", "mime_type"},
      {"s", "status_code"}, {"k", "digest"},  {"r", "redirect"},     {"M", "meta_tags"},
      {"S", "length"},    {"V", "offset"},    {"g", "filename"},
  };
  auto tokens = split_spaces(trim_line_end(header_line));
  if (tokens.empty() || tokens.front() != "CDX") {
    throw Error(ErrorCode::BadFormat, "CDX legend line must start with ' CDX'");
  }
  CdxFieldOrder order;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    auto it = kLegend.find(tokens[i]);
    order.push_back(it != kLegend.end() ? it->second : "ignored_" + std::string(tokens[i]));
  }
  return order;
}

CdxRecord parse_cdx_line(std::string_view line, const CdxFieldOrder& field_order) {
  for (const char* required : {"url_key", "timestamp", "original_url", "mime_type"}) {
    if (std::find(field_order.begin(), field_order.end(), required) == field_order.end()) {
      throw Error(ErrorCode::InvalidArgument, std::string("CDX field order lacks ") + required);
    }
  }
  auto tokens = split_spaces(trim_line_end(line));
  if (tokens.size() != field_order.size()) {
    throw Error(ErrorCode::ArityMismatch, "expected " + std::to_string(field_order.size()) + " fields, got " +
                                              std::to_string(tokens.size()));
  }
  CdxRecord rec;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& name = field_order[i];
    std::string_view tok = tokens[i];
    bool absent = tok == "-";
    if (name == "url_key") {
      rec.url_key = absent ? "" : std::string(tok);
    } else if (name == "timestamp") {
      if (tok.size() != 14 || !std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        throw Error(ErrorCode::BadTimestamp, "timestamp must be 14 digits: " + std::string(tok));
      }
      rec.timestamp = std::string(tok);
    } else if (name == "original_url") {
      if (absent) throw Error(ErrorCode::BadField, "original_url must be present");
      rec.original_url = std::string(tok);
    } else if (name == "mime_type") {
      rec.mime_type = absent ? "" : std::string(tok);
    } else if (name == "status_code") {
      if (!absent) {
        int code = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), code);
        if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
          throw Error(ErrorCode::BadField, "status code is not an integer: " + std::string(tok));
        }
        rec.status_code = code;
      }
    } else if (name == "digest") {
      if (!absent) rec.digest = std::string(tok);
    }
  }
  return rec;
}

std::vector<CdxRecord> read_cdx_file(const std::filesystem::path& path, const CdxFieldOrder& field_order) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open CDX file " + path.string());
  CdxFieldOrder order = field_order;
  std::vector<CdxRecord> out;
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim_line_end(line);
    if (first) {
      first = false;
      if (view.starts_with(" CDX") || view.starts_with("CDX ")) {
        order = parse_cdx_header(view);
        continue;
      }
    }
    if (view.find_first_not_of(' ') == std::string_view::npos) continue;
    try {
      out.push_back(parse_cdx_line(view, order));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace pdfcorpus
