#include <algorithm>
#include <vector>

#include "row_kernels.hpp"

namespace pdfcorpus::kernels::parallel {

void score_rows(std::span<const float> matrix, std::size_t dim, std::span<const double> weights, double bias,
                std::span<double> out, std::size_t chunk_rows) {
  const std::size_t rows = out.size();
  const std::size_t chunk = std::max<std::size_t>(chunk_rows, 1);
  const auto chunks = static_cast<std::ptrdiff_t>((rows + chunk - 1) / chunk);
  const float* data = matrix.data();
  const double* w = weights.data();
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * chunk;
    const std::size_t end = std::min(rows, begin + chunk);
    for (std::size_t r = begin; r < end; ++r) out[r] = row_dot(data + r * dim, w, dim) + bias;
  }
}

void squared_distances(std::span<const double> points, std::size_t dim, std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(points.size() / dim);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    detail::distance_row(points.data(), static_cast<std::size_t>(n), dim, static_cast<std::size_t>(i),
                         out.data() + i * n);
  }
}

void assign_nearest(std::span<const double> points, std::span<const double> centroids, std::size_t dim,
                    std::span<std::uint32_t> assignment, std::span<double> sq_dist) {
  const auto n = static_cast<std::ptrdiff_t>(assignment.size());
  const std::size_t k = centroids.size() / dim;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    detail::assign_row(points.data() + i * dim, centroids.data(), k, dim, assignment[i], sq_dist[i]);
  }
}

double tsne_gradient(std::span<const double> p, std::span<const double> y, double exaggeration,
                     std::span<double> num, std::span<double> grad) {
  const std::size_t n = y.size() / 2;
  const auto sn = static_cast<std::ptrdiff_t>(n);
  std::vector<double> row_sums(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < sn; ++i) {
    row_sums[i] = detail::kernel_row(y.data(), n, static_cast<std::size_t>(i), num.data() + i * sn);
  }
  double z = 0.0;
  for (double s : row_sums) z += s;
  const double inv_z = 1.0 / z;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < sn; ++i) {
    detail::gradient_row(p.data() + i * sn, num.data() + i * sn, y.data(), n, static_cast<std::size_t>(i),
                         exaggeration, inv_z, grad.data());
  }
  return z;
}

double tsne_kl(std::span<const double> p, std::span<const double> y) {
  const std::size_t n = y.size() / 2;
  const auto sn = static_cast<std::ptrdiff_t>(n);
  std::vector<double> row_sums(n), row_kl(n);
#pragma omp parallel
  {
    std::vector<double> row(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < sn; ++i) {
      row_sums[i] = detail::kernel_row(y.data(), n, static_cast<std::size_t>(i), row.data());
    }
  }
  double z = 0.0;
  for (double s : row_sums) z += s;
#pragma omp parallel
  {
    std::vector<double> row(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < sn; ++i) {
      detail::kernel_row(y.data(), n, static_cast<std::size_t>(i), row.data());
      row_kl[i] = detail::kl_row(p.data() + i * sn, row.data(), n, static_cast<std::size_t>(i), 1.0 / z);
    }
  }
  double kl = 0.0;
  for (double v : row_kl) kl += v;
  return kl;
}

}  // namespace pdfcorpus::kernels::parallel
