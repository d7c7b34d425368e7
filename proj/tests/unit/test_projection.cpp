#include <catch_amalgamated.hpp>

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstring>

#include "reference_corpus.hpp"
#include "pdfcorpus/error.hpp"
#include "pdfcorpus/kernels.hpp"
#include "pdfcorpus/parallel.hpp"
#include "pdfcorpus/projection.hpp"
#include "pdfcorpus/random.hpp"
#include "test_util.hpp"

using namespace pdfcorpus;
using Catch::Matchers::WithinAbs;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::BindFailed;
}

/// exp(entropy) of p_j ~ exp(-beta d_j), computed directly on unshifted distances.
double direct_perplexity(const std::vector<double>& d, double beta) {
  std::vector<double> p(d.size());
  double z = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) z += (p[j] = std::exp(-beta * d[j]));
  double h = 0.0;
  for (double& v : p) {
    v /= z;
    if (v > 0) h -= v * std::log(v);
  }
  return std::exp(h);
}

struct Blobs {
  std::vector<double> points;
  std::vector<int> labels;
  std::size_t dim;
};

/// Three Gaussian blobs, unit spread, centers 15 apart on each axis pair (distance ~21).
Blobs three_blobs(std::uint64_t seed, std::size_t per_blob = 20, std::size_t dim = 50) {
  Rng rng(seed);
  Blobs b{{}, {}, dim};
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < per_blob; ++i) {
      for (std::size_t d = 0; d < dim; ++d) b.points.push_back(standard_normal(rng) + (d == static_cast<std::size_t>(c) ? 15.0 : 0.0));
      b.labels.push_back(c);
    }
  }
  return b;
}

/// Mean silhouette over 2-D points with Euclidean distance.
double silhouette(const std::vector<Point2>& pts, const std::vector<int>& labels) {
  const std::size_t n = pts.size();
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
    std::vector<int> count(static_cast<std::size_t>(k), 0);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      sum[static_cast<std::size_t>(labels[j])] += std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
      ++count[static_cast<std::size_t>(labels[j])];
    }
    const auto own = static_cast<std::size_t>(labels[i]);
    const double a = sum[own] / count[own];
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c)
      if (c != own) b = std::min(b, sum[c] / count[c]);
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(n);
}

TsneParams blob_params() {
  TsneParams p;
  p.perplexity = 10;
  p.seed = 42;
  return p;
}

}  // namespace

// Oracle: Boost's TOMS 748 root finder on the unshifted perplexity function.
TEST_CASE("calibration of the (1, 4) row matches a scalar root finder") {
  const std::vector<double> row = {1.0, 4.0};
  const auto c = perplexity_calibrate(row, 1.5);
  CHECK(c.converged);
  CHECK_THAT(c.perplexity, WithinAbs(1.5, 1e-5));

  auto f = [&](double beta) { return direct_perplexity(row, beta) - 1.5; };
  boost::uintmax_t iters = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(f, 1e-6, 50.0, boost::math::tools::eps_tolerance<double>(50), iters);
  const double beta_ref = 0.5 * (lo + hi);
  CHECK_THAT(direct_perplexity(row, beta_ref), WithinAbs(1.5, 1e-12));
  // perplexity changes at rate ~0.3 per unit beta here, so 1e-5 in perplexity is ~4e-5 in beta
  CHECK_THAT(c.beta, WithinAbs(beta_ref, 1e-4));
  CHECK_THAT(direct_perplexity(row, c.beta), WithinAbs(1.5, 1e-5));
}

TEST_CASE("every row calibrates to within tolerance on random data") {
  Rng rng(8);
  const std::size_t n = 200, dim = 10;
  std::vector<double> pts(n * dim);
  for (auto& p : pts) p = standard_normal(rng) * (1 + uniform01(rng));
  std::vector<double> sq(n * n);
  kernels::serial::squared_distances(pts, dim, sq);
  for (double perp : {5.0, 30.0, 60.0}) {
    std::vector<Calibration> calib;
    const auto cond = conditional_affinities(sq, n, perp, &calib);
    REQUIRE(calib.size() == n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(calib[i].converged);
      CHECK(std::abs(calib[i].perplexity - perp) <= kCalibrationTolerance);
      // recompute from the output row itself
      double h = 0.0, sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        sum += cond[i * n + j];
        if (cond[i * n + j] > 0) h -= cond[i * n + j] * std::log(cond[i * n + j]);
      }
      CHECK_THAT(sum, WithinAbs(1.0, 1e-9));
      CHECK_THAT(std::exp(h), WithinAbs(perp, 1e-5 + 1e-9));
      CHECK(cond[i * n + i] == 0.0);
    }
    const auto joint = symmetrize_affinities(cond, n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        total += joint[i * n + j];
        CHECK(joint[i * n + j] == joint[j * n + i]);
      }
    CHECK_THAT(total, WithinAbs(1.0, 1e-9));
  }
}

TEST_CASE("uniform rows") {
  const std::vector<double> row(7, 2.5);
  const auto c = perplexity_calibrate(row, 7.0);
  CHECK(c.converged);
  CHECK(c.perplexity == 7.0);
  CHECK(code_of([&] { perplexity_calibrate(row, 3.0); }) == ErrorCode::DegenerateRow);
}

TEST_CASE("unreachable targets report non-convergence") {
  const std::vector<double> row = {1.0, 2.0, 3.0, 5.0};
  const auto c = perplexity_calibrate(row, 5.0);  // at most 4 neighbours
  CHECK_FALSE(c.converged);
  CHECK(c.perplexity < 4.0 + 1e-9);
  CHECK(c.perplexity > 3.9);
  const auto low = perplexity_calibrate(row, 0.5);  // below 1 is unreachable too
  CHECK_FALSE(low.converged);
  CHECK(low.perplexity >= 1.0);
  CHECK(code_of([] { perplexity_calibrate(std::vector<double>{1.0}, 1.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { perplexity_calibrate(std::vector<double>{1.0, 2.0}, -1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("calibration is stable for distances at very different scales") {
  for (double scale : {1e-8, 1.0, 1e6}) {
    std::vector<double> row;
    for (int j = 1; j <= 40; ++j) row.push_back(scale * j * j);
    const auto c = perplexity_calibrate(row, 10.0);
    CHECK(c.converged);
    CHECK_THAT(direct_perplexity(row, c.beta), WithinAbs(10.0, 1e-5));
  }
}

TEST_CASE("three blobs project into separated groups") {
  const auto blobs = three_blobs(1);
  const auto proj = tsne(std::span<const double>(blobs.points), blobs.dim, blob_params());
  REQUIRE(proj.points.size() == 60);
  CHECK(silhouette(proj.points, blobs.labels) > 0.5);
  CHECK(proj.final_kl >= 0.0);
  CHECK(proj.exaggeration_end_kl > 0.0);
  CHECK(proj.final_kl < proj.exaggeration_end_kl);

  double mx = 0.0, my = 0.0;
  for (const auto& p : proj.points) {
    mx += p.x;
    my += p.y;
  }
  CHECK_THAT(mx / 60.0, WithinAbs(0.0, 1e-9));
  CHECK_THAT(my / 60.0, WithinAbs(0.0, 1e-9));
}

TEST_CASE("t-SNE is bit-reproducible for a fixed seed and any thread count") {
  const auto blobs = three_blobs(2, 12, 8);
  auto params = blob_params();
  params.perplexity = 5;
  params.iterations = 400;
  set_thread_count(1);
  const auto a = tsne(std::span<const double>(blobs.points), blobs.dim, params);
  const auto b = tsne(std::span<const double>(blobs.points), blobs.dim, params);
  set_thread_count(3);
  const auto c = tsne(std::span<const double>(blobs.points), blobs.dim, params);
  set_thread_count(0);
  CHECK(std::memcmp(a.points.data(), b.points.data(), a.points.size() * sizeof(Point2)) == 0);
  CHECK(std::memcmp(a.points.data(), c.points.data(), a.points.size() * sizeof(Point2)) == 0);
  CHECK(a.final_kl == c.final_kl);

  params.seed = 43;
  const auto d = tsne(std::span<const double>(blobs.points), blobs.dim, params);
  CHECK(d.points != a.points);

  // float input takes the same path
  std::vector<float> narrow(blobs.points.begin(), blobs.points.end());
  std::vector<double> widened(narrow.begin(), narrow.end());
  params.seed = 42;
  CHECK(tsne(std::span<const float>(narrow), blobs.dim, params).points ==
        tsne(std::span<const double>(widened), blobs.dim, params).points);
}

TEST_CASE("duplicate rows stay together") {
  Rng rng(5);
  const std::size_t base = 40, dim = 6;
  std::vector<double> pts;
  for (std::size_t i = 0; i < base; ++i)
    for (std::size_t d = 0; d < dim; ++d) pts.push_back(standard_normal(rng) * 3.0);
  // rows base..base+19 duplicate rows 0..19
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t d = 0; d < dim; ++d) pts.push_back(pts[i * dim + d]);
  const std::size_t n = base + 20;

  std::vector<double> sq(n * n);
  kernels::serial::squared_distances(pts, dim, sq);
  const auto joint = symmetrize_affinities(conditional_affinities(sq, n, 10.0), n);
  auto partner = [&](std::size_t i) { return i < 20 ? base + i : (i >= base ? i - base : n); };
  for (std::size_t i = 0; i < n; ++i) {
    const auto twin = partner(i);
    if (twin == n) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) CHECK(joint[i * n + twin] >= joint[i * n + j]);
    }
  }

  TsneParams params;
  params.perplexity = 10;
  params.seed = 3;
  const auto proj = tsne(std::span<const double>(pts), dim, params);
  int together = 0, duplicated = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto twin = partner(i);
    if (twin == n) continue;
    ++duplicated;
    std::size_t nearest = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = std::hypot(proj.points[i].x - proj.points[j].x, proj.points[i].y - proj.points[j].y);
      if (d < best) {
        best = d;
        nearest = j;
      }
    }
    together += nearest == twin;
  }
  CHECK(together >= 0.9 * duplicated);
}

TEST_CASE("t-SNE argument errors") {
  std::vector<double> three(3 * 2, 1.0);
  CHECK(code_of([&] { tsne(std::span<const double>(three), 2, TsneParams{}); }) == ErrorCode::TooFewRows);
  const auto blobs = three_blobs(3, 10, 4);  // 30 rows: perplexity must stay below 29/3
  TsneParams p;
  p.perplexity = 9.7;
  CHECK(code_of([&] { tsne(std::span<const double>(blobs.points), 4, p); }) == ErrorCode::PerplexityTooLarge);
  p.perplexity = 5;
  p.iterations = 100;
  CHECK(code_of([&] { tsne(std::span<const double>(blobs.points), 4, p); }) == ErrorCode::InvalidArgument);
  auto bad = blobs.points;
  bad[7] = std::nan("");
  p.iterations = 300;
  CHECK(code_of([&] { tsne(std::span<const double>(bad), 4, p); }) == ErrorCode::NonFiniteValue);
}

TEST_CASE("projection artifact round trip") {
  const auto blobs = three_blobs(4, 5, 3);
  TsneParams params;
  params.perplexity = 3;
  params.iterations = 300;
  params.seed = 9;
  const auto proj = tsne(std::span<const double>(blobs.points), 3, params);
  std::vector<PageRef> refs;
  for (std::size_t i = 0; i < proj.points.size(); ++i) refs.push_back({fixtures::synthetic_id("p", i), 0});

  fixtures::TempDir dir;
  write_projection(proj, refs, dir / "a.projection.json");
  const auto back = read_projection(dir / "a.projection.json");
  CHECK(back.refs == refs);
  CHECK(back.projection.points == proj.points);
  CHECK(back.projection.params == params);
  CHECK(back.projection.final_kl == proj.final_kl);
  CHECK(back.projection.exaggeration_end_kl == proj.exaggeration_end_kl);

  write_projection(back.projection, back.refs, dir / "b.projection.json");
  CHECK(fixtures::read_file(dir / "a.projection.json") == fixtures::read_file(dir / "b.projection.json"));

  refs.pop_back();
  CHECK(code_of([&] { write_projection(proj, refs, dir / "c.json"); }) == ErrorCode::InvalidArgument);
  fixtures::write_file(dir / "bad.json", "{\"params\": {}}");
  CHECK(code_of([&] { read_projection(dir / "bad.json"); }) == ErrorCode::BadFormat);
}
