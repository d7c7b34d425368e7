#include <cmath>
#include <fstream>

#include <json.hpp>

#include "pdfcorpus/error.hpp"
#include "pdfcorpus/projection.hpp"

namespace pdfcorpus {

using nlohmann::ordered_json;

ordered_json projection_to_json(const Projection2D& projection, std::span<const PageRef> refs) {
  if (refs.size() != projection.points.size()) {
    throw Error(ErrorCode::InvalidArgument, "projection has " + std::to_string(projection.points.size()) +
                                                " points but " + std::to_string(refs.size()) + " refs");
  }
  const auto& p = projection.params;
  ordered_json j;
  j["params"] = {{"perplexity", p.perplexity},
                 {"iterations", p.iterations},
                 {"early_exaggeration", p.early_exaggeration},
                 {"exaggeration_iterations", p.exaggeration_iterations},
                 {"learning_rate", p.learning_rate},
                 {"initial_momentum", p.initial_momentum},
                 {"final_momentum", p.final_momentum},
                 {"seed", p.seed}};
  j["final_kl"] = projection.final_kl;
  j["exaggeration_end_kl"] = projection.exaggeration_end_kl;
  auto& points = j["points"] = ordered_json::array();
  for (std::size_t i = 0; i < refs.size(); ++i) {
    points.push_back({{"doc_id", refs[i].doc_id.hex()},
                      {"page_index", refs[i].page_index},
                      {"x", projection.points[i].x},
                      {"y", projection.points[i].y}});
  }
  return j;
}

void write_projection(const Projection2D& projection, std::span<const PageRef> refs,
                      const std::filesystem::path& path) {
  const auto j = projection_to_json(projection, refs);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

ProjectionArtifact read_projection(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  ProjectionArtifact artifact;
  try {
    const auto j = nlohmann::json::parse(in);
    const auto& jp = j.at("params");
    auto& p = artifact.projection.params;
    p.perplexity = jp.at("perplexity").get<double>();
    p.iterations = jp.at("iterations").get<std::uint32_t>();
    p.early_exaggeration = jp.at("early_exaggeration").get<double>();
    p.exaggeration_iterations = jp.at("exaggeration_iterations").get<std::uint32_t>();
    p.learning_rate = jp.at("learning_rate").get<double>();
    p.initial_momentum = jp.at("initial_momentum").get<double>();
    p.final_momentum = jp.at("final_momentum").get<double>();
    p.seed = jp.at("seed").get<std::uint64_t>();
    artifact.projection.final_kl = j.at("final_kl").get<double>();
    artifact.projection.exaggeration_end_kl = j.value("exaggeration_end_kl", 0.0);
    for (const auto& pt : j.at("points")) {
      artifact.refs.push_back(
          {DocumentId::from_hex(pt.at("doc_id").get<std::string>()), pt.at("page_index").get<std::uint32_t>()});
      artifact.projection.points.push_back({pt.at("x").get<double>(), pt.at("y").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadFormat, path.string() + ": " + e.what());
  }
  for (const auto& pt : artifact.projection.points) {
    if (!std::isfinite(pt.x) || !std::isfinite(pt.y)) {
      throw Error(ErrorCode::NonFiniteValue, path.string() + ": non-finite coordinate");
    }
  }
  return artifact;
}

}  // namespace pdfcorpus
