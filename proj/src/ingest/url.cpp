#include <algorithm>
#include <cctype>

#include "pdfcorpus/error.hpp"
#include "pdfcorpus/ingest.hpp"

namespace pdfcorpus {

std::string url_host(std::string_view url) {
  auto sep = url.find("://");
  if (sep == std::string_view::npos || sep == 0) {
    throw Error(ErrorCode::UnparsableUrl, "not an absolute URL: " + std::string(url));
  }
  std::string_view scheme = url.substr(0, sep);
  if (!std::isalpha(static_cast<unsigned char>(scheme.front())) ||
      !std::all_of(scheme.begin(), scheme.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
      })) {
    throw Error(ErrorCode::UnparsableUrl, "bad URL scheme: " + std::string(url));
  }
  std::string_view authority = url.substr(sep + 3);
  authority = authority.substr(0, authority.find_first_of("/?#"));
  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
  if (auto colon = authority.find(':'); colon != std::string_view::npos) authority = authority.substr(0, colon);
  if (!authority.empty() && authority.back() == '.') authority.remove_suffix(1);
  if (authority.empty()) throw Error(ErrorCode::UnparsableUrl, "URL has no host: " + std::string(url));

  std::string host;
  host.reserve(authority.size());
  for (char c : authority) {
    auto uc = static_cast<unsigned char>(c);
    if (!(std::isalnum(uc) || c == '-' || c == '.' || c == '_' || uc >= 0x80)) {
      throw Error(ErrorCode::UnparsableUrl, "invalid character in host: " + std::string(url));
    }
    host.push_back(static_cast<char>(std::tolower(uc)));
  }
  if (host.front() == '.' || host.find("..") != std::string::npos) {
    throw Error(ErrorCode::UnparsableUrl, "empty host label: " + std::string(url));
  }
  return host;
}

std::string derive_base_url(std::string_view url) {
  std::string host = url_host(url);
  auto last = host.rfind('.');
  if (last == std::string::npos) throw Error(ErrorCode::SingleLabelHost, "host has a single label: " + host);
  auto prev = host.rfind('.', last - 1);
  return prev == std::string::npos ? host : host.substr(prev + 1);
}

}  // namespace pdfcorpus
