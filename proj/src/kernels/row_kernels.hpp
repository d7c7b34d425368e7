#pragma once

// Per-row bodies shared by the serial and parallel kernels.

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdfcorpus/kernels.hpp"

namespace pdfcorpus::kernels::detail {

inline void distance_row(const double* points, std::size_t n, std::size_t dim, std::size_t i, double* out_row) {
  const double* a = points + i * dim;
  for (std::size_t j = 0; j < n; ++j) out_row[j] = (i == j) ? 0.0 : squared_distance(a, points + j * dim, dim);
}

inline void assign_row(const double* point, const double* centroids, std::size_t k, std::size_t dim,
                       std::uint32_t& best, double& best_dist) {
  best = 0;
  best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const double d = squared_distance(point, centroids + c * dim, dim);
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<std::uint32_t>(c);
    }
  }
}

inline double kernel_row(const double* y, std::size_t n, std::size_t i, double* num_row) {
  const double yi0 = y[2 * i], yi1 = y[2 * i + 1];
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) {
      num_row[j] = 0.0;
      continue;
    }
    const double d0 = yi0 - y[2 * j], d1 = yi1 - y[2 * j + 1];
    num_row[j] = 1.0 / (1.0 + d0 * d0 + d1 * d1);
    sum += num_row[j];
  }
  return sum;
}

inline void gradient_row(const double* p_row, const double* num_row, const double* y, std::size_t n, std::size_t i,
                         double exaggeration, double inv_z, double* grad) {
  const double yi0 = y[2 * i], yi1 = y[2 * i + 1];
  double g0 = 0.0, g1 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const double mult = (exaggeration * p_row[j] - num_row[j] * inv_z) * num_row[j];
    g0 += mult * (yi0 - y[2 * j]);
    g1 += mult * (yi1 - y[2 * j + 1]);
  }
  grad[2 * i] = 4.0 * g0;
  grad[2 * i + 1] = 4.0 * g1;
}

inline double kl_row(const double* p_row, const double* num_row, std::size_t n, std::size_t i, double inv_z) {
  constexpr double kMinQ = 1e-300;
  double kl = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i || p_row[j] <= 0.0) continue;
    const double q = std::max(num_row[j] * inv_z, kMinQ);
    kl += p_row[j] * std::log(p_row[j] / q);
  }
  return kl;
}

}  // namespace pdfcorpus::kernels::detail
