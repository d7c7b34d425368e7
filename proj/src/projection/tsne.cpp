#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "pdfcorpus/error.hpp"
#include "pdfcorpus/kernels.hpp"
#include "pdfcorpus/projection.hpp"
#include "pdfcorpus/random.hpp"

namespace pdfcorpus {

namespace {

constexpr int kMaxBracketSteps = 50;
constexpr int kMaxBisectionSteps = 50;

/// Perplexity of p_j ~ exp(-beta d_j) for distances already shifted to min 0.
double row_perplexity(std::span<const double> shifted, double beta) {
  double sum = 0.0, weighted = 0.0;
  for (double d : shifted) {
    const double e = std::exp(-beta * d);
    sum += e;
    weighted += d * e;
  }
  return std::exp(std::log(sum) + beta * weighted / sum);
}

}  // namespace

Calibration perplexity_calibrate(std::span<const double> row, double target) {
  if (row.size() < 2) throw Error(ErrorCode::InvalidArgument, "calibration needs at least two distances");
  if (!(target > 0.0) || !std::isfinite(target)) throw Error(ErrorCode::InvalidArgument, "perplexity must be > 0");
  const auto [lo_it, hi_it] = std::minmax_element(row.begin(), row.end());
  const double dmin = *lo_it, dmax = *hi_it;
  if (!std::isfinite(dmin) || !std::isfinite(dmax) || dmin < 0.0) {
    throw Error(ErrorCode::NonFiniteValue, "squared distances must be finite and non-negative");
  }
  const double m = static_cast<double>(row.size());
  if (dmax - dmin <= 4.0 * std::numeric_limits<double>::epsilon() * dmax) {
    if (std::abs(m - target) <= kCalibrationTolerance) return {1.0, m, true};
    throw Error(ErrorCode::DegenerateRow, "all distances equal; perplexity is fixed at " + std::to_string(row.size()));
  }

  std::vector<double> shifted(row.size());
  double mean = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    shifted[j] = row[j] - dmin;
    mean += shifted[j];
  }
  mean /= m;

  Calibration best{1.0 / mean, 0.0, false};
  double best_gap = std::numeric_limits<double>::infinity();
  auto evaluate = [&](double beta) {
    const double perp = row_perplexity(shifted, beta);
    const double gap = std::abs(perp - target);
    if (gap < best_gap) {
      best_gap = gap;
      best = {beta, perp, gap <= kCalibrationTolerance};
    }
    return perp;
  };

  // perplexity falls as beta grows: bracket by doubling or halving, then bisect
  double beta = best.beta;
  double perp = evaluate(beta);
  if (best.converged) return best;
  double lo = 0.0, hi = 0.0;
  bool bracketed = false;
  if (perp > target) {
    lo = beta;
    for (int s = 0; s < kMaxBracketSteps && !bracketed; ++s) {
      beta *= 2.0;
      perp = evaluate(beta);
      if (best.converged) return best;
      if (perp < target) {
        hi = beta;
        bracketed = true;
      } else {
        lo = beta;
      }
    }
  } else {
    hi = beta;
    for (int s = 0; s < kMaxBracketSteps && !bracketed; ++s) {
      beta *= 0.5;
      perp = evaluate(beta);
      if (best.converged) return best;
      if (perp > target) {
        lo = beta;
        bracketed = true;
      } else {
        hi = beta;
      }
    }
  }
  if (!bracketed) return best;
  for (int s = 0; s < kMaxBisectionSteps; ++s) {
    const double mid = 0.5 * (lo + hi);
    perp = evaluate(mid);
    if (best.converged) return best;
    (perp > target ? lo : hi) = mid;
  }
  return best;
}

std::vector<double> conditional_affinities(std::span<const double> sq_dist, std::size_t n, double perplexity,
                                           std::vector<Calibration>* calibrations) {
  std::vector<double> p(n * n, 0.0);
  std::vector<Calibration> calib(n);
  std::vector<std::exception_ptr> failures(n);
  const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
  {
    std::vector<double> row(n - 1);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < sn; ++i) {
      try {
        const double* d = sq_dist.data() + i * sn;
        std::copy(d, d + i, row.begin());
        std::copy(d + i + 1, d + sn, row.begin() + i);
        calib[i] = perplexity_calibrate(row, perplexity);
        const double dmin = *std::min_element(row.begin(), row.end());
        double* out = p.data() + i * sn;
        double sum = 0.0;
        for (std::ptrdiff_t j = 0; j < sn; ++j) {
          if (j == i) continue;
          out[j] = std::exp(-calib[i].beta * (d[j] - dmin));
          sum += out[j];
        }
        for (std::ptrdiff_t j = 0; j < sn; ++j) out[j] /= sum;
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  if (calibrations) *calibrations = std::move(calib);
  return p;
}

std::vector<double> symmetrize_affinities(std::span<const double> conditional, std::size_t n) {
  std::vector<double> p(n * n, 0.0);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) p[i * n + j] = (conditional[i * n + j] + conditional[j * n + i]) * scale;
    }
  }
  return p;
}

Projection2D tsne(std::span<const double> vectors, std::size_t dim, const TsneParams& params) {
  if (dim == 0 || vectors.size() % dim != 0) throw Error(ErrorCode::InvalidArgument, "vectors are not dim-wide rows");
  const std::size_t n = vectors.size() / dim;
  if (n < 4) throw Error(ErrorCode::TooFewRows, "t-SNE needs at least 4 rows, got " + std::to_string(n));
  if (!(params.perplexity > 0.0)) throw Error(ErrorCode::InvalidArgument, "perplexity must be > 0");
  if (!(params.perplexity < static_cast<double>(n - 1) / 3.0)) {
    throw Error(ErrorCode::PerplexityTooLarge,
                "perplexity must be below (rows - 1) / 3 = " + std::to_string(static_cast<double>(n - 1) / 3.0));
  }
  if (params.iterations < params.exaggeration_iterations) {
    throw Error(ErrorCode::InvalidArgument, "iterations must cover the early exaggeration phase");
  }
  if (!std::all_of(vectors.begin(), vectors.end(), [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorCode::NonFiniteValue, "t-SNE input contains non-finite values");
  }

  std::vector<double> sq(n * n);
  kernels::parallel::squared_distances(vectors, dim, sq);
  std::vector<double> p = symmetrize_affinities(conditional_affinities(sq, n, params.perplexity), n);
  sq = {};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) p[i * n + j] = std::max(p[i * n + j], kAffinityFloor);
    }
  }

  Rng rng(params.seed);
  std::vector<double> y(2 * n), update(2 * n, 0.0), gains(2 * n, 1.0), grad(2 * n), num(n * n);
  for (auto& v : y) v = 1e-4 * standard_normal(rng);

  Projection2D result;
  result.params = params;
  for (std::uint32_t t = 0; t < params.iterations; ++t) {
    const bool early = t < params.exaggeration_iterations;
    const double exaggeration = early ? params.early_exaggeration : 1.0;
    const double momentum = early ? params.initial_momentum : params.final_momentum;
    kernels::parallel::tsne_gradient(p, y, exaggeration, num, grad);
    for (std::size_t k = 0; k < 2 * n; ++k) {
      gains[k] = ((grad[k] > 0.0) != (update[k] > 0.0)) ? gains[k] + 0.2 : gains[k] * 0.8;
      gains[k] = std::max(gains[k], 0.01);
      update[k] = momentum * update[k] - params.learning_rate * gains[k] * grad[k];
      y[k] += update[k];
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += y[2 * i];
      my += y[2 * i + 1];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[2 * i] -= mx;
      y[2 * i + 1] -= my;
    }
    if (t + 1 == params.exaggeration_iterations) result.exaggeration_end_kl = kernels::parallel::tsne_kl(p, y);
  }
  result.final_kl = kernels::parallel::tsne_kl(p, y);
  result.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.points[i] = {y[2 * i], y[2 * i + 1]};
  return result;
}

Projection2D tsne(std::span<const float> vectors, std::size_t dim, const TsneParams& params) {
  std::vector<double> wide(vectors.begin(), vectors.end());
  return tsne(std::span<const double>(wide), dim, params);
}

}  // namespace pdfcorpus
