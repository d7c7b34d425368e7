#include <algorithm>
#include <cmath>
#include <numeric>

#include "pdfcorpus/analytics.hpp"
#include "pdfcorpus/error.hpp"
#include "pdfcorpus/kernels.hpp"
#include "pdfcorpus/random.hpp"

namespace pdfcorpus {

namespace {

std::size_t count_distinct_rows(std::span<const double> points, std::size_t rows, std::size_t dim) {
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto row = [&](std::size_t i) { return points.begin() + static_cast<std::ptrdiff_t>(i * dim); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(row(a), row(a) + static_cast<std::ptrdiff_t>(dim), row(b),
                                        row(b) + static_cast<std::ptrdiff_t>(dim));
  });
  std::size_t distinct = rows ? 1 : 0;
  for (std::size_t i = 1; i < rows; ++i) {
    if (!std::equal(row(order[i]), row(order[i]) + static_cast<std::ptrdiff_t>(dim), row(order[i - 1]))) ++distinct;
  }
  return distinct;
}

void copy_row(std::span<const double> points, std::size_t dim, std::size_t from, std::vector<double>& centroids,
              std::size_t to) {
  std::copy_n(points.begin() + static_cast<std::ptrdiff_t>(from * dim), dim,
              centroids.begin() + static_cast<std::ptrdiff_t>(to * dim));
}

std::vector<double> seed_plus_plus(std::span<const double> points, std::size_t rows, std::size_t dim,
                                   std::uint32_t k, Rng& rng) {
  std::vector<double> centroids(static_cast<std::size_t>(k) * dim);
  copy_row(points, dim, uniform_index(rng, rows), centroids, 0);
  std::vector<double> best(rows);
  const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    best[i] = kernels::squared_distance(points.data() + i * dim, centroids.data(), dim);
  }
  for (std::uint32_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : best) total += d;
    const double target = uniform01(rng) * total;
    std::size_t pick = rows;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      if (best[i] <= 0.0) continue;
      cumulative += best[i];
      pick = i;
      if (cumulative > target) break;
    }
    copy_row(points, dim, pick, centroids, c);
    const double* centre = centroids.data() + c * dim;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      best[i] = std::min(best[i], kernels::squared_distance(points.data() + i * dim, centre, dim));
    }
  }
  return centroids;
}

/// Means of the assigned points; empty clusters take the farthest points.
void update_centroids(std::span<const double> points, std::size_t rows, std::size_t dim, std::uint32_t k,
                      const std::vector<std::uint32_t>& assignment, std::vector<double> sq_dist,
                      std::vector<double>& centroids) {
  std::vector<double> sums(static_cast<std::size_t>(k) * dim, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < rows; ++i) {
    double* s = sums.data() + assignment[i] * dim;
    const double* p = points.data() + i * dim;
    for (std::size_t d = 0; d < dim; ++d) s[d] += p[d];
    ++counts[assignment[i]];
  }
  for (std::uint32_t c = 0; c < k; ++c) {
    if (counts[c] == 0) {
      const auto far = static_cast<std::size_t>(std::max_element(sq_dist.begin(), sq_dist.end()) - sq_dist.begin());
      copy_row(points, dim, far, centroids, c);
      sq_dist[far] = -1.0;
      continue;
    }
    const double inv = 1.0 / static_cast<double>(counts[c]);
    for (std::size_t d = 0; d < dim; ++d) centroids[c * dim + d] = sums[c * dim + d] * inv;
  }
}

}  // namespace

std::vector<double> densify(std::span<const SparseVector> vectors) {
  if (vectors.empty()) return {};
  const std::size_t dim = vectors.front().dim;
  std::vector<double> dense(vectors.size() * dim, 0.0);
  for (std::size_t r = 0; r < vectors.size(); ++r) {
    if (vectors[r].dim != dim) throw Error(ErrorCode::DimMismatch, "vectors differ in dimension");
    for (std::size_t i = 0; i < vectors[r].indices.size(); ++i) {
      dense[r * dim + vectors[r].indices[i]] = vectors[r].values[i];
    }
  }
  return dense;
}

ClusteringResult kmeans(std::span<const double> points, std::size_t dim, std::uint32_t k, std::uint64_t seed,
                        std::uint32_t max_iter) {
  if (dim == 0 || points.size() % dim != 0) throw Error(ErrorCode::InvalidArgument, "points are not a dim-wide matrix");
  const std::size_t rows = points.size() / dim;
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (k > rows) {
    throw Error(ErrorCode::KTooLarge, "k = " + std::to_string(k) + " exceeds " + std::to_string(rows) + " rows");
  }
  if (!std::all_of(points.begin(), points.end(), [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorCode::NonFiniteValue, "k-means input contains non-finite values");
  }
  if (count_distinct_rows(points, rows, dim) < k) {
    throw Error(ErrorCode::DegenerateInput, "fewer distinct points than k = " + std::to_string(k));
  }

  Rng rng(seed);
  ClusteringResult result;
  result.k = k;
  result.dim = dim;
  result.seed = seed;
  result.centroids = seed_plus_plus(points, rows, dim, k, rng);

  std::vector<std::uint32_t> assignment(rows), next(rows);
  std::vector<double> sq_dist(rows);
  auto assign = [&](std::vector<std::uint32_t>& out) {
    kernels::parallel::assign_nearest(points, result.centroids, dim, out, sq_dist);
    double inertia = 0.0;
    for (double d : sq_dist) inertia += d;
    result.inertia_history.push_back(inertia);
    return inertia;
  };

  result.inertia = assign(assignment);
  while (result.iterations < max_iter) {
    update_centroids(points, rows, dim, k, assignment, sq_dist, result.centroids);
    ++result.iterations;
    result.inertia = assign(next);
    const bool stable = next == assignment;
    assignment.swap(next);
    if (stable) break;
  }
  result.assignments = std::move(assignment);
  return result;
}

}  // namespace pdfcorpus
