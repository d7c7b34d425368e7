#pragma once

// Hot loops, each in a serial reference form and an OpenMP form. Both forms
// share the per-row arithmetic below, so for any thread count and chunk size
// the parallel results are bitwise equal to the serial ones.

#include <cstddef>
#include <cstdint>
#include <span>

namespace pdfcorpus::kernels {

/// w.x with eight interleaved double accumulators combined pairwise.
inline double row_dot(const float* x, const double* w, std::size_t dim) {
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= dim; i += 8) {
    for (int l = 0; l < 8; ++l) acc[l] += static_cast<double>(x[i + l]) * w[i + l];
  }
  for (int l = 0; i < dim; ++i, ++l) acc[l] += static_cast<double>(x[i]) * w[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

inline double squared_distance(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

namespace serial {

/// out[r] = w . row_r + bias for a row-major float matrix.
void score_rows(std::span<const float> matrix, std::size_t dim, std::span<const double> weights, double bias,
                std::span<double> out);

/// Full n x n matrix of squared Euclidean distances (diagonal 0).
void squared_distances(std::span<const double> points, std::size_t dim, std::span<double> out);

/// Nearest centroid per point (ties to the lowest id) and its squared distance.
void assign_nearest(std::span<const double> points, std::span<const double> centroids, std::size_t dim,
                    std::span<std::uint32_t> assignment, std::span<double> sq_dist);

/// t-SNE gradient for a 2-D layout. `p` is the n x n joint affinity matrix,
/// `num` receives the Student-t kernel 1/(1+|yi-yj|^2). Returns the
/// normalizer Z = sum of num.
double tsne_gradient(std::span<const double> p, std::span<const double> y, double exaggeration,
                     std::span<double> num, std::span<double> grad);

/// KL(P || Q) for layout `y` (P entries assumed floored above zero).
double tsne_kl(std::span<const double> p, std::span<const double> y);

}  // namespace serial

namespace parallel {

/// Rows are processed in chunks of `chunk_rows`, chunks spread across threads.
void score_rows(std::span<const float> matrix, std::size_t dim, std::span<const double> weights, double bias,
                std::span<double> out, std::size_t chunk_rows = 4096);
void squared_distances(std::span<const double> points, std::size_t dim, std::span<double> out);
void assign_nearest(std::span<const double> points, std::span<const double> centroids, std::size_t dim,
                    std::span<std::uint32_t> assignment, std::span<double> sq_dist);
double tsne_gradient(std::span<const double> p, std::span<const double> y, double exaggeration,
                     std::span<double> num, std::span<double> grad);
double tsne_kl(std::span<const double> p, std::span<const double> y);

}  // namespace parallel

}  // namespace pdfcorpus::kernels
