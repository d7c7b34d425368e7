#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "pdfcorpus/corpus_model.hpp"

namespace pdfcorpus {

struct TsneParams {
  double perplexity = 30.0;
  std::uint32_t iterations = 1000;
  double early_exaggeration = 12.0;
  std::uint32_t exaggeration_iterations = 250;
  double learning_rate = 200.0;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  std::uint64_t seed = 0;

  bool operator==(const TsneParams&) const = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

struct Projection2D {
  std::vector<Point2> points;
  TsneParams params;
  double final_kl = 0.0;
  double exaggeration_end_kl = 0.0;  // KL(P||Q) right after early exaggeration
};

struct Calibration {
  double beta = 1.0;
  double perplexity = 0.0;
  bool converged = false;
};

/// Finds beta so that p_j ~ exp(-beta d_j) over the row's squared distances
/// (self excluded) has perplexity within 1e-5 of `target`. Unreachable targets
/// return the closest beta found with converged = false. Throws DegenerateRow
/// when every distance is equal and target differs from the row length.
Calibration perplexity_calibrate(std::span<const double> squared_distances_row, double target);

inline constexpr double kCalibrationTolerance = 1e-5;
inline constexpr double kAffinityFloor = 1e-12;

/// Row-stochastic p(j|i) (zero diagonal) from an n x n squared distance matrix.
std::vector<double> conditional_affinities(std::span<const double> sq_dist, std::size_t n, double perplexity,
                                           std::vector<Calibration>* calibrations = nullptr);

/// (P + P^T) / 2n, no floor.
std::vector<double> symmetrize_affinities(std::span<const double> conditional, std::size_t n);

/// Exact t-SNE of a row-major matrix. The output is centered at the origin.
Projection2D tsne(std::span<const double> vectors, std::size_t dim, const TsneParams& params);
Projection2D tsne(std::span<const float> vectors, std::size_t dim, const TsneParams& params);

nlohmann::ordered_json projection_to_json(const Projection2D& projection, std::span<const PageRef> refs);

/// `.projection.json`: params, final_kl and one {doc_id, page_index, x, y} per row.
void write_projection(const Projection2D& projection, std::span<const PageRef> refs,
                      const std::filesystem::path& path);

struct ProjectionArtifact {
  Projection2D projection;
  std::vector<PageRef> refs;
};

ProjectionArtifact read_projection(const std::filesystem::path& path);

}  // namespace pdfcorpus
