#include <vector>

#include "row_kernels.hpp"

namespace pdfcorpus::kernels::serial {

void score_rows(std::span<const float> matrix, std::size_t dim, std::span<const double> weights, double bias,
                std::span<double> out) {
  const std::size_t rows = out.size();
  for (std::size_t r = 0; r < rows; ++r) out[r] = row_dot(matrix.data() + r * dim, weights.data(), dim) + bias;
}

void squared_distances(std::span<const double> points, std::size_t dim, std::span<double> out) {
  const std::size_t n = points.size() / dim;
  for (std::size_t i = 0; i < n; ++i) detail::distance_row(points.data(), n, dim, i, out.data() + i * n);
}

void assign_nearest(std::span<const double> points, std::span<const double> centroids, std::size_t dim,
                    std::span<std::uint32_t> assignment, std::span<double> sq_dist) {
  const std::size_t n = assignment.size(), k = centroids.size() / dim;
  for (std::size_t i = 0; i < n; ++i) {
    detail::assign_row(points.data() + i * dim, centroids.data(), k, dim, assignment[i], sq_dist[i]);
  }
}

double tsne_gradient(std::span<const double> p, std::span<const double> y, double exaggeration,
                     std::span<double> num, std::span<double> grad) {
  const std::size_t n = y.size() / 2;
  std::vector<double> row_sums(n);
  for (std::size_t i = 0; i < n; ++i) row_sums[i] = detail::kernel_row(y.data(), n, i, num.data() + i * n);
  double z = 0.0;
  for (double s : row_sums) z += s;
  const double inv_z = 1.0 / z;
  for (std::size_t i = 0; i < n; ++i) {
    detail::gradient_row(p.data() + i * n, num.data() + i * n, y.data(), n, i, exaggeration, inv_z, grad.data());
  }
  return z;
}

double tsne_kl(std::span<const double> p, std::span<const double> y) {
  const std::size_t n = y.size() / 2;
  std::vector<double> row(n), row_sums(n), row_kl(n);
  for (std::size_t i = 0; i < n; ++i) row_sums[i] = detail::kernel_row(y.data(), n, i, row.data());
  double z = 0.0;
  for (double s : row_sums) z += s;
  for (std::size_t i = 0; i < n; ++i) {
    detail::kernel_row(y.data(), n, i, row.data());
    row_kl[i] = detail::kl_row(p.data() + i * n, row.data(), n, i, 1.0 / z);
  }
  double kl = 0.0;
  for (double v : row_kl) kl += v;
  return kl;
}

}  // namespace pdfcorpus::kernels::serial
