#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "pdfcorpus/analytics.hpp"
#include "pdfcorpus/error.hpp"
#include "pdfcorpus/learner.hpp"
#include "pdfcorpus/service.hpp"

namespace pdfcorpus {

using nlohmann::ordered_json;

nlohmann::ordered_json to_json(const ApiError& error) {
  return {{"error", {{"code", error.code}, {"message", error.message}, {"status", error.http_status}}}};
}

namespace {

struct ApiException {
  ApiError error;
};

[[noreturn]] void fail(int status, std::string code, std::string message) {
  throw ApiException{{std::move(code), std::move(message), status}};
}

ApiError map_error(const Error& e) {
  switch (e.code()) {
    case ErrorCode::UnknownPage:
      return {"unknown_page", e.what(), 404};
    case ErrorCode::NeedBothClasses:
      return {"need_both_classes", e.what(), 409};
    case ErrorCode::NoModel:
      return {"no_model", e.what(), 409};
    case ErrorCode::EmptyGroup:
      return {"not_found", e.what(), 404};
    case ErrorCode::InvalidArgument:
    case ErrorCode::BadFormat:
    case ErrorCode::KTooLarge:
    case ErrorCode::DegenerateInput:
    case ErrorCode::DimMismatch:
      return {"bad_request", e.what(), 400};
    default:
      return {"internal", e.what(), 500};
  }
}

void send_json(httplib::Response& res, const ordered_json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

std::string param(const httplib::Request& req, const char* name, std::string fallback = {}) {
  return req.has_param(name) ? req.get_param_value(name) : fallback;
}

std::uint64_t uint_param(const httplib::Request& req, const char* name, std::uint64_t fallback,
                         std::uint64_t max = UINT64_MAX) {
  if (!req.has_param(name) || req.get_param_value(name).empty()) return fallback;
  const auto text = req.get_param_value(name);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value > max) {
    fail(400, "bad_request", std::string("parameter '") + name + "' must be an integer in [0, " +
                                 std::to_string(max) + "]");
  }
  return value;
}

bool bool_param(const httplib::Request& req, const char* name, bool fallback) {
  if (!req.has_param(name)) return fallback;
  const auto v = req.get_param_value(name);
  if (v == "true" || v == "1" || v.empty()) return true;
  if (v == "false" || v == "0") return false;
  fail(400, "bad_request", std::string("parameter '") + name + "' must be true or false");
}

ordered_json parse_body(const httplib::Request& req) {
  try {
    auto j = ordered_json::parse(req.body.empty() ? std::string("{}") : req.body);
    if (!j.is_object()) fail(400, "bad_request", "request body must be a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    fail(400, "bad_request", std::string("malformed JSON body: ") + e.what());
  }
}

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

struct SessionSlot {
  std::mutex mutex;
  LabelSession session;
};

}  // namespace

CorpusArtifacts load_artifacts(const ServiceConfig& config) {
  CorpusArtifacts a;
  auto guard = [](const std::filesystem::path& path, auto&& load) {
    try {
      return load();
    } catch (const std::exception& e) {
      throw Error(ErrorCode::ArtifactValidationFailed, path.string() + ": " + e.what());
    }
  };
  a.manifest = guard(config.manifest, [&] { return read_manifest(config.manifest); });
  if (config.vocab.has_value() != config.tfidf.has_value()) {
    throw Error(ErrorCode::ArtifactValidationFailed, "vocabulary and tfidf artifacts must be given together");
  }
  if (config.vocab) {
    a.vocab = guard(*config.vocab, [&] { return read_vocabulary(*config.vocab); });
    a.tfidf = guard(*config.tfidf, [&] { return read_tfidf(*config.tfidf, static_cast<std::uint32_t>(a.vocab->size())); });
    for (const auto& id : a.tfidf.ids) {
      if (!a.manifest.find(id)) {
        throw Error(ErrorCode::ArtifactValidationFailed, config.tfidf->string() + ": document " + id.hex() +
                                                             " is not in the manifest");
      }
    }
  }
  if (config.store) {
    a.store = guard(*config.store, [&] { return read_store(*config.store, StoreValidation::full); });
    for (const auto& ref : a.store->row_ids()) {
      if (!a.manifest.find(ref.doc_id)) {
        throw Error(ErrorCode::ArtifactValidationFailed, config.store->string() + ": document " +
                                                             ref.doc_id.hex() + " is not in the manifest");
      }
    }
  }
  if (config.projection) a.projection = guard(*config.projection, [&] { return read_projection(*config.projection); });
  if (config.raster_dir) {
    if (!std::filesystem::is_directory(*config.raster_dir)) {
      throw Error(ErrorCode::ArtifactValidationFailed, config.raster_dir->string() + " is not a directory");
    }
    a.raster_dir = config.raster_dir;
  }
  return a;
}

struct Service::Impl {
  Impl(CorpusArtifacts artifacts, ServiceConfig config) : a(std::move(artifacts)), cfg(std::move(config)) {
    if (a.vocab) index.emplace(*a.vocab, a.tfidf.vectors);
    for (std::size_t i = 0; i < a.tfidf.ids.size(); ++i) tfidf_row.emplace(a.tfidf.ids[i], i);
    facet_base_url = to_json(facet_histogram(a.manifest, Facet::base_url)).dump();
    facet_page_count = to_json(facet_histogram(a.manifest, Facet::page_count_bucket)).dump();
    summary = build_summary().dump();
    if (a.projection) projection = projection_to_json(a.projection->projection, a.projection->refs).dump();
    load_snapshots();
    routes();
  }

  // --- artifacts -----------------------------------------------------------

  ordered_json build_summary() const {
    ordered_json j;
    j["corpus_id"] = a.manifest.corpus_id.hex();
    j["created_at"] = a.manifest.created_at ? ordered_json(*a.manifest.created_at) : ordered_json(nullptr);
    j["documents"] = a.manifest.records.size();
    std::size_t counts[3] = {0, 0, 0};
    for (const auto& r : a.manifest.records) ++counts[static_cast<int>(r.status)];
    j["status"] = {{"ok", counts[0]}, {"encrypted", counts[1]}, {"malformed", counts[2]}};
    j["page_totals"] = to_json(corpus_page_totals(a.manifest));
    j["text"] = a.vocab ? ordered_json{{"vocabulary_size", a.vocab->size()}, {"documents", a.tfidf.ids.size()}}
                        : ordered_json(nullptr);
    j["store"] = a.store ? ordered_json{{"rows", a.store->rows()}, {"dim", a.store->dim()}} : ordered_json(nullptr);
    j["projection"] = a.projection.has_value();
    return j;
  }

  const DocumentRecord& document(const std::string& hex) const {
    try {
      if (const auto* r = a.manifest.find(DocumentId::from_hex(hex))) return *r;
    } catch (const Error&) {
    }
    fail(404, "unknown_document", "no document with id '" + hex + "'");
  }

  void require_text() const {
    if (!index) fail(404, "not_found", "no text artifacts are loaded");
  }

  /// TF-IDF rows of the documents passing `keep`, in manifest order.
  std::pair<std::vector<DocumentId>, std::vector<SparseVector>> text_rows(
      const std::function<bool(const DocumentRecord&)>& keep) const {
    std::pair<std::vector<DocumentId>, std::vector<SparseVector>> out;
    for (const auto& r : a.manifest.records) {
      if (!keep(r)) continue;
      auto it = tfidf_row.find(r.id);
      if (it == tfidf_row.end()) continue;
      out.first.push_back(r.id);
      out.second.push_back(a.tfidf.vectors[it->second]);
    }
    return out;
  }

  // --- sessions ------------------------------------------------------------

  std::shared_ptr<SessionSlot> session(const std::string& id) {
    std::shared_lock lock(sessions_mutex);
    auto it = sessions.find(id);
    if (it == sessions.end()) fail(404, "unknown_session", "no session '" + id + "'");
    return it->second;
  }

  void load_snapshots() {
    if (!cfg.session_dir || !std::filesystem::is_directory(*cfg.session_dir)) return;
    for (const auto& entry : std::filesystem::directory_iterator(*cfg.session_dir)) {
      const auto name = entry.path().filename().string();
      if (name.size() <= 13 || name.substr(name.size() - 13) != ".session.json") continue;
      auto slot = std::make_shared<SessionSlot>();
      slot->session = load_session(entry.path());
      sessions.emplace(slot->session.session_id, slot);
    }
  }

  void snapshot(const LabelSession& s) const {
    if (!cfg.session_dir) return;
    std::filesystem::create_directories(*cfg.session_dir);
    save_session(s, *cfg.session_dir / (s.session_id + ".session.json"));
  }

  ordered_json ranking_json(const LabelSession& s, const Ranking& ranking) const {
    ordered_json j;
    j["session_id"] = s.session_id;
    j["excluded_labeled"] = ranking.excluded_labeled;
    auto& entries = j["entries"] = ordered_json::array();
    for (const auto& e : ranking.entries) {
      const auto label = s.labels.find(e.page);
      const auto* record = a.manifest.find(e.page.doc_id);
      entries.push_back({{"doc_id", e.page.doc_id.hex()},
                         {"page_index", e.page.page_index},
                         {"score", e.score},
                         {"probability", sigmoid(e.score)},
                         {"label", label == s.labels.end() ? ordered_json(nullptr)
                                                           : ordered_json(std::string(to_string(label->second)))},
                         {"base_url", record ? ordered_json(record->base_url) : ordered_json(nullptr)}});
    }
    return j;
  }

  // --- routing -------------------------------------------------------------

  template <typename F>
  httplib::Server::Handler guarded(F handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const ApiException& e) {
        send_json(res, to_json(e.error), e.error.http_status);
      } catch (const Error& e) {
        const auto err = map_error(e);
        send_json(res, to_json(err), err.http_status);
      } catch (const std::exception& e) {
        send_json(res, to_json(ApiError{"internal", e.what(), 500}), 500);
      }
    };
  }

  void routes() {
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.set_post_routing_handler([this](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", cfg.cors_origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      const int status = res.status == 404 ? 404 : (res.status >= 500 ? 500 : 400);
      const std::string code = status == 404 ? "not_found" : status == 500 ? "internal" : "bad_request";
      send_json(res, to_json(ApiError{code, "no route for " + req.method + " " + req.path, status}), status);
    });

    server.Get("/api/health", guarded([this](const auto&, auto& res) {
      send_json(res, {{"status", "ok"}, {"corpus_id", a.manifest.corpus_id.hex()}});
    }));
    server.Get("/api/summary", guarded([this](const auto&, auto& res) {
      res.set_content(summary, "application/json");
    }));

    server.Get("/api/documents", guarded([this](const httplib::Request& req, auto& res) {
      const auto base_url = param(req, "base_url");
      const auto bucket = param(req, "bucket");
      if (!bucket.empty() &&
          std::find(kPageCountBuckets.begin(), kPageCountBuckets.end(), bucket) == kPageCountBuckets.end()) {
        fail(400, "bad_request", "unknown bucket '" + bucket + "'");
      }
      const auto offset = uint_param(req, "offset", 0);
      const auto limit = uint_param(req, "limit", 50, 1000);
      ordered_json j;
      auto docs = ordered_json::array();
      std::uint64_t matched = 0;
      for (const auto& r : a.manifest.records) {
        if (!base_url.empty() && r.base_url != base_url) continue;
        if (!bucket.empty() && page_count_bucket(r.page_count) != bucket) continue;
        if (matched >= offset && matched - offset < limit) docs.push_back(record_to_json(r));
        ++matched;
      }
      j["total"] = matched;
      j["offset"] = offset;
      j["limit"] = limit;
      j["documents"] = std::move(docs);
      send_json(res, j);
    }));
    server.Get(R"(/api/documents/([^/]+))", guarded([this](const httplib::Request& req, auto& res) {
      const auto& r = document(req.matches[1]);
      auto j = record_to_json(r);
      j["bucket"] = std::string(page_count_bucket(r.page_count));
      j["has_text"] = tfidf_row.count(r.id) > 0;
      auto pages = ordered_json::array();
      if (a.store) {
        for (const auto& ref : a.store->row_ids()) {
          if (ref.doc_id == r.id) pages.push_back(ref.page_index);
        }
      }
      j["embedded_pages"] = std::move(pages);
      send_json(res, j);
    }));

    server.Get("/api/facets/base_url", guarded([this](const auto&, auto& res) {
      res.set_content(facet_base_url, "application/json");
    }));
    server.Get("/api/facets/page_count", guarded([this](const auto&, auto& res) {
      res.set_content(facet_page_count, "application/json");
    }));

    server.Get("/api/search", guarded([this](const httplib::Request& req, auto& res) {
      require_text();
      const auto q = param(req, "q");
      if (q.empty()) fail(400, "bad_request", "parameter 'q' is required");
      const auto limit = uint_param(req, "limit", 10, 1000);
      ordered_json j;
      j["query"] = q;
      auto& hits = j["hits"] = ordered_json::array();
      for (const auto& h : keyword_search(*index, q, limit)) {
        const auto& id = a.tfidf.ids[h.doc];
        const auto* record = a.manifest.find(id);
        hits.push_back({{"doc_id", id.hex()},
                        {"score", h.score},
                        {"base_url", record ? ordered_json(record->base_url) : ordered_json(nullptr)}});
      }
      send_json(res, j);
    }));

    server.Get("/api/terms", guarded([this](const httplib::Request& req, auto& res) {
      require_text();
      const auto base_url = param(req, "base_url");
      const auto top_k = uint_param(req, "top_k", 10, 1000);
      const bool prune = bool_param(req, "prune", false);
      auto rows = text_rows([&](const DocumentRecord& r) { return base_url.empty() || r.base_url == base_url; });
      if (rows.second.empty()) fail(404, "not_found", "no documents with text for base_url '" + base_url + "'");
      auto report = group_centroid_terms(rows.second, *a.vocab, top_k, prune, base_url.empty() ? "*" : base_url);
      auto j = to_json(report);
      j["documents"] = rows.second.size();
      send_json(res, j);
    }));

    server.Post("/api/cluster", guarded([this](const httplib::Request& req, auto& res) {
      require_text();
      const auto body = parse_body(req);
      if (!body.contains("k") || !body.at("k").is_number_integer() || body.at("k").get<std::int64_t>() < 1) {
        fail(400, "bad_request", "'k' must be a positive integer");
      }
      const auto k = body.at("k").get<std::int64_t>();
      std::uint64_t seed = 0;
      if (body.contains("seed")) {
        if (!body.at("seed").is_number_unsigned()) fail(400, "bad_request", "'seed' must be a non-negative integer");
        seed = body.at("seed").get<std::uint64_t>();
      }
      std::string base_url, bucket;
      if (body.contains("facet_filter") && !body.at("facet_filter").is_null()) {
        const auto& f = body.at("facet_filter");
        if (!f.is_object()) fail(400, "bad_request", "'facet_filter' must be an object");
        for (const auto& [key, value] : f.items()) {
          if (!value.is_string()) fail(400, "bad_request", "facet_filter values must be strings");
          if (key == "base_url") {
            base_url = value.template get<std::string>();
          } else if (key == "bucket" || key == "page_count") {
            bucket = value.template get<std::string>();
          } else {
            fail(400, "bad_request", "unknown facet '" + key + "'");
          }
        }
      }
      auto rows = text_rows([&](const DocumentRecord& r) {
        return (base_url.empty() || r.base_url == base_url) &&
               (bucket.empty() || page_count_bucket(r.page_count) == bucket);
      });
      if (rows.second.size() > cfg.cluster_row_cap) {
        fail(409, "too_large", std::to_string(rows.second.size()) + " documents exceed the clustering cap of " +
                                   std::to_string(cfg.cluster_row_cap));
      }
      if (rows.second.empty()) fail(404, "not_found", "no documents with text match the filter");
      const auto dense = densify(rows.second);
      const auto result =
          kmeans(dense, a.vocab->size(), static_cast<std::uint32_t>(std::min<std::int64_t>(k, UINT32_MAX)), seed,
                 cfg.cluster_max_iter);
      auto j = to_json(result, rows.first);
      j.erase("centroids");
      auto& terms = j["cluster_terms"] = ordered_json::array();
      for (const auto& report : cluster_terms(rows.second, *a.vocab, result, 10, true)) {
        terms.push_back(to_json(report));
      }
      send_json(res, j);
    }));

    server.Get("/api/projection", guarded([this](const auto&, auto& res) {
      if (!a.projection) fail(404, "not_found", "no projection artifact is loaded");
      res.set_content(projection, "application/json");
    }));

    server.Post("/api/sessions", guarded([this](const auto&, auto& res) {
      auto slot = std::make_shared<SessionSlot>();
      slot->session = create_session();
      ordered_json j = {{"session_id", slot->session.session_id}, {"created_at", slot->session.created_at}};
      snapshot(slot->session);
      {
        std::unique_lock lock(sessions_mutex);
        sessions.emplace(slot->session.session_id, slot);
      }
      send_json(res, j, 201);
    }));
    server.Get(R"(/api/sessions/([0-9a-f]+))", guarded([this](const httplib::Request& req, auto& res) {
      auto slot = session(req.matches[1]);
      std::lock_guard lock(slot->mutex);
      const auto& s = slot->session;
      ordered_json j = {{"session_id", s.session_id}, {"created_at", s.created_at}, {"updated_at", s.updated_at}};
      auto& labels = j["labels"] = ordered_json::array();
      for (const auto& [page, label] : s.labels) {
        labels.push_back(
            {{"doc_id", page.doc_id.hex()}, {"page_index", page.page_index}, {"label", to_string(label)}});
      }
      j["trained"] = s.model.has_value();
      send_json(res, j);
    }));
    server.Post(R"(/api/sessions/([0-9a-f]+)/labels)", guarded([this](const httplib::Request& req, auto& res) {
      auto slot = session(req.matches[1]);
      const auto body = parse_body(req);
      if (!body.contains("doc_id") || !body.at("doc_id").is_string() || !body.contains("page_index") ||
          !body.at("page_index").is_number_unsigned() || !body.contains("label") || !body.at("label").is_string()) {
        fail(400, "bad_request", "body needs doc_id (string), page_index (integer >= 0) and label");
      }
      const auto label = parse_label(body.at("label").get<std::string>());
      const auto hex = body.at("doc_id").get<std::string>();
      DocumentId id;
      try {
        id = DocumentId::from_hex(hex);
      } catch (const Error&) {
        fail(400, "bad_request", "'" + hex + "' is not a document id");
      }
      const auto page_index = body.at("page_index").get<std::uint64_t>();
      if (!a.store || page_index > UINT32_MAX) {
        fail(404, "unknown_page", hex + " page " + std::to_string(page_index) + " has no embedding");
      }
      std::lock_guard lock(slot->mutex);
      add_label(slot->session, *a.store, {id, static_cast<std::uint32_t>(page_index)}, label);
      snapshot(slot->session);
      send_json(res, {{"session_id", slot->session.session_id}, {"labels", slot->session.labels.size()}});
    }));
    server.Post(R"(/api/sessions/([0-9a-f]+)/train)", guarded([this](const httplib::Request& req, auto& res) {
      auto slot = session(req.matches[1]);
      std::lock_guard lock(slot->mutex);
      if (!a.store) fail(409, "need_both_classes", "no embedding store is loaded");
      const auto& model = train(slot->session, *a.store);
      snapshot(slot->session);
      send_json(res, {{"session_id", slot->session.session_id},
                      {"labels", slot->session.labels.size()},
                      {"steps", model.steps},
                      {"final_loss", model.final_loss},
                      {"gradient_norm", model.gradient_norm}});
    }));
    server.Get(R"(/api/sessions/([0-9a-f]+)/ranking)", guarded([this](const httplib::Request& req, auto& res) {
      auto slot = session(req.matches[1]);
      const auto limit = uint_param(req, "limit", 50, 100000);
      const bool exclude = bool_param(req, "exclude_labeled", false);
      const auto rollup = param(req, "rollup", "page");
      if (rollup != "page" && rollup != "document") fail(400, "bad_request", "rollup must be page or document");
      std::lock_guard lock(slot->mutex);
      if (!slot->session.model) fail(409, "no_model", "session has not been trained");
      const auto ranking = rollup == "page" ? rank(slot->session, *a.store, limit, exclude)
                                            : rank_documents(slot->session, *a.store, limit, exclude);
      send_json(res, ranking_json(slot->session, ranking));
    }));

    server.Get(R"(/api/pages/([^/]+)/(\d+)/thumbnail)", guarded([this](const httplib::Request& req, auto& res) {
      const auto& r = document(req.matches[1]);
      if (!a.raster_dir) fail(404, "not_found", "no rasters are configured");
      const auto dir = *a.raster_dir / r.id.hex();
      const std::string stem = "page-" + std::string(req.matches[2]);
      for (const auto& [ext, type] : {std::pair{".png", "image/png"}, {".jpg", "image/jpeg"}, {".jpeg", "image/jpeg"}}) {
        const auto path = dir / (stem + ext);
        std::ifstream in(path, std::ios::binary);
        if (!in) continue;
        std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
        res.set_content(std::move(bytes), type);
        return;
      }
      fail(404, "not_found", "no raster for " + r.id.hex() + " " + stem);
    }));
  }

  CorpusArtifacts a;
  ServiceConfig cfg;
  std::optional<InvertedIndex> index;
  std::unordered_map<DocumentId, std::size_t, DocumentIdHash> tfidf_row;
  std::string facet_base_url, facet_page_count, summary, projection;

  std::shared_mutex sessions_mutex;
  std::unordered_map<std::string, std::shared_ptr<SessionSlot>> sessions;

  httplib::Server server;
};

Service::Service(CorpusArtifacts artifacts, ServiceConfig config)
    : impl_(std::make_unique<Impl>(std::move(artifacts), std::move(config))) {}

Service::~Service() { stop(); }

int Service::bind() {
  auto& s = impl_->server;
  const auto& cfg = impl_->cfg;
  int port = cfg.port;
  // The library default is SO_REUSEPORT, which lets a second instance share a
  // busy port silently.
  s.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  if (port == 0) {
    port = s.bind_to_any_port(cfg.host);
  } else if (!s.bind_to_port(cfg.host, port)) {
    port = -1;
  }
  if (port < 0) throw Error(ErrorCode::BindFailed, "cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
  return port;
}

void Service::listen() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_) impl_->server.stop();
}

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace pdfcorpus
