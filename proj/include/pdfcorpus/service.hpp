#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdfcorpus/corpus_model.hpp"
#include "pdfcorpus/embeddings.hpp"
#include "pdfcorpus/projection.hpp"
#include "pdfcorpus/text_features.hpp"

namespace pdfcorpus {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path manifest;
  std::optional<std::filesystem::path> vocab;
  std::optional<std::filesystem::path> tfidf;
  std::optional<std::filesystem::path> store;
  std::optional<std::filesystem::path> projection;
  std::optional<std::filesystem::path> raster_dir;    // <dir>/<doc_id>/page-<n>.png|jpg
  std::optional<std::filesystem::path> session_dir;   // snapshots written after every change
  std::size_t cluster_row_cap = 2000;
  std::uint32_t cluster_max_iter = 300;
  std::string cors_origin = "*";
};

/// Immutable corpus state shared by every request.
struct CorpusArtifacts {
  CorpusManifest manifest;
  std::optional<Vocabulary> vocab;
  DocumentVectors tfidf;
  std::optional<EmbeddingStore> store;
  std::optional<ProjectionArtifact> projection;
  std::optional<std::filesystem::path> raster_dir;
};

/// Reads and cross-checks the configured artifacts; any failure is rethrown
/// as ArtifactValidationFailed naming the file.
CorpusArtifacts load_artifacts(const ServiceConfig& config);

struct ApiError {
  std::string code;  // bad_request, unknown_document, unknown_session, unknown_page,
                     // not_found, need_both_classes, no_model, too_large, internal
  std::string message;
  int http_status = 500;
};

nlohmann::ordered_json to_json(const ApiError& error);

class Service {
 public:
  Service(CorpusArtifacts artifacts, ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket; returns the bound port. Throws BindFailed.
  int bind();
  /// Serves until stop(); call after bind().
  void listen();
  void stop();
  /// Blocks until the server accepts connections.
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pdfcorpus
