#include <algorithm>
#include <cstdio>
#include <sstream>

#include "pdfcorpus/analytics.hpp"

namespace pdfcorpus {

namespace {

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

std::size_t display_width(const std::string& s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

}  // namespace

nlohmann::ordered_json to_json(const FacetTable& table) {
  nlohmann::ordered_json j;
  j["facet"] = table.facet;
  j["total"] = table.total;
  j["buckets"] = nlohmann::ordered_json::array();
  for (const auto& b : table.buckets) j["buckets"].push_back({{"label", b.label}, {"count", b.count}});
  return j;
}

nlohmann::ordered_json to_json(const PageTotals& totals) {
  nlohmann::ordered_json j;
  j["buckets"] = nlohmann::ordered_json::array();
  for (const auto& b : totals.buckets) j["buckets"].push_back({{"label", b.label}, {"pages", b.count}});
  j["overall"] = totals.overall;
  return j;
}

nlohmann::ordered_json to_json(const TermReport& report) {
  nlohmann::ordered_json j;
  j["group_key"] = report.group_key;
  j["terms"] = nlohmann::ordered_json::array();
  for (const auto& t : report.terms) j["terms"].push_back({{"term", t.term}, {"weight", t.weight}});
  return j;
}

nlohmann::ordered_json to_json(const ClusteringResult& result, std::span<const DocumentId> ids) {
  nlohmann::ordered_json j;
  j["k"] = result.k;
  j["seed"] = result.seed;
  j["iterations"] = result.iterations;
  j["inertia"] = result.inertia;
  j["sizes"] = nlohmann::ordered_json::array();
  std::vector<std::size_t> sizes(result.k, 0);
  for (auto a : result.assignments) ++sizes[a];
  for (auto s : sizes) j["sizes"].push_back(s);
  auto& assignments = j["assignments"] = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < result.assignments.size() && i < ids.size(); ++i) {
    assignments[ids[i].hex()] = result.assignments[i];
  }
  j["centroids"] = nlohmann::ordered_json::array();
  for (std::uint32_t c = 0; c < result.k; ++c) {
    auto row = result.centroid(c);
    j["centroids"].push_back(std::vector<double>(row.begin(), row.end()));
  }
  return j;
}

std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths(header.size(), 0);
  auto widen = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size() && c < widths.size(); ++c) {
      widths[c] = std::max(widths[c], display_width(row[c]));
    }
  };
  widen(header);
  for (const auto& row : rows) widen(row);

  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < widths.size(); ++c) {
      const std::string cell = c < row.size() ? row[c] : std::string();
      const std::string pad(widths[c] - display_width(cell), ' ');
      if (c > 0) out << "  ";
      if (c == 0) {
        out << cell;
        if (widths.size() > 1) out << pad;
      } else {
        out << pad << cell;
      }
    }
    out << '\n';
  };
  emit(header);
  std::vector<std::string> rule;
  for (auto w : widths) rule.emplace_back(w, '-');
  emit(rule);
  for (const auto& row : rows) emit(row);
  return out.str();
}

std::string render_text(const FacetTable& table) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& b : table.buckets) {
    const double share = table.total ? 100.0 * static_cast<double>(b.count) / static_cast<double>(table.total) : 0.0;
    rows.push_back({b.label, std::to_string(b.count), fixed(share, 1) + "%"});
  }
  rows.push_back({"total", std::to_string(table.total), table.total ? "100.0%" : "0.0%"});
  return render_table({table.facet, "count", "share"}, rows);
}

std::string render_text(const PageTotals& totals) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& b : totals.buckets) rows.push_back({b.label, std::to_string(b.count)});
  rows.push_back({"total", std::to_string(totals.overall)});
  return render_table({"bucket", "pages"}, rows);
}

std::string render_text(const TermReport& report) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < report.terms.size(); ++i) {
    rows.push_back({std::to_string(i + 1), report.terms[i].term, fixed(report.terms[i].weight, 6)});
  }
  std::string title = report.group_key.empty() ? "" : "group: " + report.group_key + "\n";
  return title + render_table({"rank", "term", "weight"}, rows);
}

std::string render_text(const ClusteringResult& result) {
  std::vector<std::size_t> sizes(result.k, 0);
  for (auto a : result.assignments) ++sizes[a];
  std::vector<std::vector<std::string>> rows;
  for (std::uint32_t c = 0; c < result.k; ++c) rows.push_back({std::to_string(c), std::to_string(sizes[c])});
  return "k = " + std::to_string(result.k) + ", seed = " + std::to_string(result.seed) +
         ", iterations = " + std::to_string(result.iterations) + ", inertia = " + fixed(result.inertia, 6) + "\n" +
         render_table({"cluster", "size"}, rows);
}

}  // namespace pdfcorpus
