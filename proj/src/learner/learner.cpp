#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>
#include <unordered_map>

#include <json.hpp>

#include "pdfcorpus/error.hpp"
#include "pdfcorpus/kernels.hpp"
#include "pdfcorpus/learner.hpp"

namespace pdfcorpus {

std::string_view to_string(Label label) { return label == Label::positive ? "positive" : "negative"; }

Label parse_label(std::string_view text) {
  if (text == "positive") return Label::positive;
  if (text == "negative") return Label::negative;
  throw Error(ErrorCode::InvalidArgument, "label must be 'positive' or 'negative', got '" + std::string(text) + "'");
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

LabelSession create_session() {
  static thread_local std::random_device device;
  std::uint64_t hi = (static_cast<std::uint64_t>(device()) << 32) | device();
  std::uint64_t lo = (static_cast<std::uint64_t>(device()) << 32) | device();
  char id[33];
  std::snprintf(id, sizeof id, "%016llx%016llx", static_cast<unsigned long long>(hi),
                static_cast<unsigned long long>(lo));
  LabelSession session;
  session.session_id = id;
  session.created_at = session.updated_at = utc_timestamp();
  return session;
}

void add_label(LabelSession& session, const EmbeddingStore& store, const PageRef& page, Label label) {
  if (!store.find(page)) {
    throw Error(ErrorCode::UnknownPage, page.doc_id.hex() + " page " + std::to_string(page.page_index));
  }
  session.labels[page] = label;
  session.updated_at = utc_timestamp();
}

namespace {

/// log(1 + exp(z)) - y z without overflow.
double log_loss(double z, double y) { return std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0) - y * z; }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double margin(const double* x, std::span<const double> w, double b) {
  double z = b;
  for (std::size_t d = 0; d < w.size(); ++d) z += x[d] * w[d];
  return z;
}

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return s;
}

void check_shapes(std::span<const double> x, std::span<const double> y, std::size_t dim) {
  if (y.empty() || x.size() != y.size() * dim) throw Error(ErrorCode::DimMismatch, "training matrix shape mismatch");
}

}  // namespace

double regularized_loss(std::span<const double> x, std::span<const double> y, std::span<const double> w, double b,
                        double lambda) {
  check_shapes(x, y, w.size());
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) total += log_loss(margin(x.data() + i * w.size(), w, b), y[i]);
  return total / static_cast<double>(y.size()) + 0.5 * lambda * squared_norm(w);
}

double loss_gradient(std::span<const double> x, std::span<const double> y, std::span<const double> w, double b,
                     double lambda, std::span<double> grad_w, double& grad_b) {
  const std::size_t dim = w.size();
  check_shapes(x, y, dim);
  if (grad_w.size() != dim) throw Error(ErrorCode::DimMismatch, "gradient buffer has the wrong size");
  std::fill(grad_w.begin(), grad_w.end(), 0.0);
  grad_b = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double* xi = x.data() + i * dim;
    const double z = margin(xi, w, b);
    total += log_loss(z, y[i]);
    const double r = sigmoid(z) - y[i];
    for (std::size_t d = 0; d < dim; ++d) grad_w[d] += r * xi[d];
    grad_b += r;
  }
  const double inv = 1.0 / static_cast<double>(y.size());
  for (std::size_t d = 0; d < dim; ++d) grad_w[d] = grad_w[d] * inv + lambda * w[d];
  grad_b *= inv;
  return total * inv + 0.5 * lambda * squared_norm(w);
}

ModelState fit_logistic(std::span<const double> x, std::span<const double> y, std::size_t dim,
                        const TrainOptions& options) {
  check_shapes(x, y, dim);
  ModelState model;
  model.weights.assign(dim, 0.0);
  std::vector<double> grad(dim), trial(dim);
  double grad_b = 0.0;
  double loss = loss_gradient(x, y, model.weights, model.bias, options.l2_lambda, grad, grad_b);
  model.loss_trace.push_back(loss);
  double gnorm2 = squared_norm(grad) + grad_b * grad_b;

  while (model.steps < options.max_steps && std::sqrt(gnorm2) >= options.gradient_tolerance) {
    double step = options.initial_step;
    bool accepted = false;
    double trial_b = 0.0;
    for (std::uint32_t h = 0; h <= options.max_halvings; ++h, step *= 0.5) {
      for (std::size_t d = 0; d < dim; ++d) trial[d] = model.weights[d] - step * grad[d];
      trial_b = model.bias - step * grad_b;
      const double candidate = regularized_loss(x, y, trial, trial_b, options.l2_lambda);
      if (candidate <= loss - options.armijo_c * step * gnorm2) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    model.weights.swap(trial);
    model.bias = trial_b;
    loss = loss_gradient(x, y, model.weights, model.bias, options.l2_lambda, grad, grad_b);
    model.loss_trace.push_back(loss);
    gnorm2 = squared_norm(grad) + grad_b * grad_b;
    ++model.steps;
  }
  model.final_loss = loss;
  model.gradient_norm = std::sqrt(gnorm2);
  return model;
}

const ModelState& train(LabelSession& session, const EmbeddingStore& store, const TrainOptions& options) {
  std::size_t positives = 0;
  for (const auto& [page, label] : session.labels) positives += label == Label::positive;
  if (positives == 0 || positives == session.labels.size()) {
    throw Error(ErrorCode::NeedBothClasses, "training needs at least one positive and one negative label");
  }
  const std::size_t dim = store.dim();
  std::vector<double> x, y;
  x.reserve(session.labels.size() * dim);
  for (const auto& [page, label] : session.labels) {
    const auto row = store.find(page);
    if (!row) throw Error(ErrorCode::UnknownPage, page.doc_id.hex() + " page " + std::to_string(page.page_index));
    const auto values = store.row(*row);
    x.insert(x.end(), values.begin(), values.end());
    y.push_back(label == Label::positive ? 1.0 : 0.0);
  }
  session.model = fit_logistic(x, y, dim, options);
  session.updated_at = utc_timestamp();
  return *session.model;
}

std::vector<double> score_all(const ModelState& model, const EmbeddingStore& store, std::size_t chunk_size) {
  if (model.weights.size() != store.dim()) {
    throw Error(ErrorCode::DimMismatch, "model has " + std::to_string(model.weights.size()) +
                                            " weights, store has dim " + std::to_string(store.dim()));
  }
  std::vector<double> scores(store.rows());
  kernels::parallel::score_rows(store.matrix(), store.dim(), model.weights, model.bias, scores, chunk_size);
  return scores;
}

namespace {

bool ranks_before(const RankEntry& a, const RankEntry& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.page < b.page;
}

void top_entries(std::vector<RankEntry>& entries, std::size_t limit) {
  if (limit < entries.size()) {
    std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(limit), entries.end(),
                      ranks_before);
    entries.resize(limit);
  } else {
    std::sort(entries.begin(), entries.end(), ranks_before);
  }
}

const ModelState& require_model(const LabelSession& session) {
  if (!session.model) throw Error(ErrorCode::NoModel, "session " + session.session_id + " has not been trained");
  return *session.model;
}

}  // namespace

Ranking rank_scores(std::span<const double> scores, const EmbeddingStore& store, std::size_t limit,
                    const std::map<PageRef, Label>* exclude) {
  Ranking ranking;
  ranking.excluded_labeled = exclude != nullptr;
  const auto ids = store.row_ids();
  ranking.entries.reserve(exclude ? ids.size() - std::min(ids.size(), exclude->size()) : ids.size());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (exclude && exclude->count(ids[r])) continue;
    ranking.entries.push_back({ids[r], scores[r]});
  }
  top_entries(ranking.entries, limit);
  return ranking;
}

Ranking rank(const LabelSession& session, const EmbeddingStore& store, std::size_t limit, bool exclude_labeled,
             std::size_t chunk_size) {
  const auto scores = score_all(require_model(session), store, chunk_size);
  return rank_scores(scores, store, limit, exclude_labeled ? &session.labels : nullptr);
}

Ranking rank_documents(const LabelSession& session, const EmbeddingStore& store, std::size_t limit,
                       bool exclude_labeled, std::size_t chunk_size) {
  const auto scores = score_all(require_model(session), store, chunk_size);
  const auto ids = store.row_ids();
  std::unordered_map<DocumentId, RankEntry, DocumentIdHash> best;
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (exclude_labeled && session.labels.count(ids[r])) continue;
    const RankEntry entry{ids[r], scores[r]};
    auto [it, inserted] = best.try_emplace(ids[r].doc_id, entry);
    if (!inserted && ranks_before(entry, it->second)) it->second = entry;
  }
  Ranking ranking;
  ranking.excluded_labeled = exclude_labeled;
  for (auto& [doc, entry] : best) ranking.entries.push_back(entry);
  top_entries(ranking.entries, limit);
  return ranking;
}

void save_session(const LabelSession& session, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["session_id"] = session.session_id;
  j["created_at"] = session.created_at;
  j["updated_at"] = session.updated_at;
  auto& labels = j["labels"] = nlohmann::ordered_json::array();
  for (const auto& [page, label] : session.labels) {
    labels.push_back({{"doc_id", page.doc_id.hex()}, {"page_index", page.page_index}, {"label", to_string(label)}});
  }
  if (session.model) {
    j["model"] = {{"weights", session.model->weights},
                  {"bias", session.model->bias},
                  {"final_loss", session.model->final_loss},
                  {"steps", session.model->steps},
                  {"gradient_norm", session.model->gradient_norm}};
  } else {
    j["model"] = nullptr;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

LabelSession load_session(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  LabelSession session;
  try {
    const auto j = nlohmann::json::parse(in);
    session.session_id = j.at("session_id").get<std::string>();
    session.created_at = j.value("created_at", "");
    session.updated_at = j.value("updated_at", "");
    for (const auto& l : j.at("labels")) {
      const PageRef page{DocumentId::from_hex(l.at("doc_id").get<std::string>()),
                         l.at("page_index").get<std::uint32_t>()};
      session.labels[page] = parse_label(l.at("label").get<std::string>());
    }
    if (j.contains("model") && !j.at("model").is_null()) {
      const auto& m = j.at("model");
      ModelState model;
      model.weights = m.at("weights").get<std::vector<double>>();
      model.bias = m.at("bias").get<double>();
      model.final_loss = m.at("final_loss").get<double>();
      model.steps = m.at("steps").get<std::uint32_t>();
      model.gradient_norm = m.value("gradient_norm", 0.0);
      session.model = std::move(model);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadFormat, path.string() + ": " + e.what());
  }
  return session;
}

}  // namespace pdfcorpus
