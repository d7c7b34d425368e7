#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pdfcorpus/corpus_model.hpp"
#include "pdfcorpus/embeddings.hpp"

namespace pdfcorpus {

enum class Label { positive, negative };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);

struct ModelState {
  std::vector<double> weights;
  double bias = 0.0;
  double final_loss = 0.0;
  std::uint32_t steps = 0;
  double gradient_norm = 0.0;
  std::vector<double> loss_trace;  // loss before the first step, then after each accepted step
};

struct LabelSession {
  std::string session_id;
  std::map<PageRef, Label> labels;
  std::optional<ModelState> model;
  std::string created_at;
  std::string updated_at;
};

/// Empty session with a random 128-bit hex id.
LabelSession create_session();

/// Records or overwrites a label. Throws UnknownPage when `page` is not a store row.
void add_label(LabelSession& session, const EmbeddingStore& store, const PageRef& page, Label label);

inline constexpr double kDefaultL2Lambda = 1e-3;

struct TrainOptions {
  double l2_lambda = kDefaultL2Lambda;
  std::uint32_t max_steps = 500;
  double gradient_tolerance = 1e-6;
  double armijo_c = 1e-4;
  double initial_step = 1.0;
  std::uint32_t max_halvings = 60;
};

/// Mean log-loss of labels y in {0, 1} plus (lambda / 2)|w|^2; the bias is
/// not penalized. `x` is row-major with w.size() columns.
double regularized_loss(std::span<const double> x, std::span<const double> y, std::span<const double> w, double b,
                        double lambda);

/// Same loss, also writing d/dw into `grad_w` and d/db into `grad_b`.
double loss_gradient(std::span<const double> x, std::span<const double> y, std::span<const double> w, double b,
                     double lambda, std::span<double> grad_w, double& grad_b);

/// Full-batch gradient descent from zero with Armijo backtracking.
ModelState fit_logistic(std::span<const double> x, std::span<const double> y, std::size_t dim,
                        const TrainOptions& options = {});

/// Trains on the session's labeled rows and stores the model in the session.
/// Throws NeedBothClasses unless both labels occur.
const ModelState& train(LabelSession& session, const EmbeddingStore& store, const TrainOptions& options = {});

/// w.x + b for every row, in chunks of `chunk_size` rows spread over threads.
/// The result does not depend on chunk_size or the thread count.
std::vector<double> score_all(const ModelState& model, const EmbeddingStore& store, std::size_t chunk_size = 4096);

struct RankEntry {
  PageRef page;
  double score = 0.0;
  bool operator==(const RankEntry&) const = default;
};

struct Ranking {
  std::vector<RankEntry> entries;
  bool excluded_labeled = false;
};

/// Orders `scores` (aligned with store rows) descending, ties by PageRef.
Ranking rank_scores(std::span<const double> scores, const EmbeddingStore& store, std::size_t limit,
                    const std::map<PageRef, Label>* exclude = nullptr);

/// Throws NoModel before the first train.
Ranking rank(const LabelSession& session, const EmbeddingStore& store, std::size_t limit, bool exclude_labeled,
             std::size_t chunk_size = 4096);

/// Document rollup: each document scored by its best page (page_index of that page kept).
Ranking rank_documents(const LabelSession& session, const EmbeddingStore& store, std::size_t limit,
                       bool exclude_labeled, std::size_t chunk_size = 4096);

/// `.session.json` snapshot.
void save_session(const LabelSession& session, const std::filesystem::path& path);
LabelSession load_session(const std::filesystem::path& path);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

}  // namespace pdfcorpus
