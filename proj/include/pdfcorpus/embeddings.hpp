#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "pdfcorpus/corpus_model.hpp"

namespace pdfcorpus {

inline constexpr std::uint32_t kExternalEmbeddingDim = 2048;
inline constexpr std::uint32_t kBuiltinFeatureDim = 128;
/// Norm deviation beyond which a stored row is rejected.
inline constexpr double kStoreNormTolerance = 1e-4;

/// Row-major float32 matrix of unit-norm page vectors plus aligned PageRefs.
/// The matrix either lives in memory or is a read-only view of a mapped file;
/// copies share the same immutable storage.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  /// Owned storage. Throws on shape mismatch, duplicate row ids, non-finite
  /// values, or rows whose norm is off by more than kStoreNormTolerance.
  EmbeddingStore(std::uint32_t dim, std::vector<float> matrix, std::vector<PageRef> row_ids);

  /// Storage owned elsewhere (e.g. a mapping); `owner` keeps it alive.
  /// Only shape and ids are checked here; call validate_values() as needed.
  static EmbeddingStore from_view(std::uint32_t dim, std::shared_ptr<const void> owner, const float* data,
                                  std::vector<PageRef> row_ids);

  std::uint32_t dim() const noexcept { return dim_; }
  std::size_t rows() const noexcept { return row_ids_ ? row_ids_->size() : 0; }
  std::span<const float> matrix() const noexcept { return {data_, rows() * dim_}; }
  std::span<const float> row(std::size_t i) const noexcept { return {data_ + i * dim_, dim_}; }
  std::span<const PageRef> row_ids() const noexcept {
    return row_ids_ ? std::span<const PageRef>(*row_ids_) : std::span<const PageRef>();
  }
  std::optional<std::size_t> find(const PageRef& ref) const;

  /// NonFiniteValue / NotNormalized checks over every row.
  void validate_values() const;

  friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b);

 private:
  void index_rows();

  std::uint32_t dim_ = 0;
  std::shared_ptr<const void> owner_;
  const float* data_ = nullptr;
  std::shared_ptr<const std::vector<PageRef>> row_ids_;
  std::shared_ptr<const std::unordered_map<PageRef, std::size_t, PageRefHash>> lookup_;
};

/// Streams rows into an EMB1 file without holding the matrix in memory.
class StoreWriter {
 public:
  StoreWriter(const std::filesystem::path& path, std::uint32_t dim);
  ~StoreWriter();
  StoreWriter(const StoreWriter&) = delete;
  StoreWriter& operator=(const StoreWriter&) = delete;

  void append(const PageRef& ref, std::span<const float> values);
  /// Patches the row count and writes the `.ids.jsonl` sidecar.
  void finish();

 private:
  std::filesystem::path path_;
  std::uint32_t dim_;
  std::ofstream out_;
  std::vector<PageRef> ids_;
  bool finished_ = false;
};

std::filesystem::path sidecar_path(const std::filesystem::path& store_path);

void write_store(const EmbeddingStore& store, const std::filesystem::path& path);

enum class StoreValidation { full, structure_only };

/// Maps the file read-only. `full` validates every value (finite, unit norm).
EmbeddingStore read_store(const std::filesystem::path& path, StoreValidation validation = StoreValidation::full);

/// Rows with page_index 0, original order kept.
EmbeddingStore front_page_rows(const EmbeddingStore& store);

/// dot(a,b) / (|a||b|), accumulated in double.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

/// Scales `v` to unit norm in place; returns false (leaving v untouched) for zero vectors.
bool l2_normalize(std::span<float> v);

// ---------------------------------------------------------------------------
// Built-in raster features

struct PageRaster {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;  // grayscale, row-major

  PageRaster() = default;
  PageRaster(std::uint32_t w, std::uint32_t h, std::vector<std::uint8_t> px);

  std::uint8_t at(std::uint32_t x, std::uint32_t y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

inline constexpr int kFeatureGrid = 8;
inline constexpr int kEdgeThreshold = 32;

struct PageFeatures {
  std::vector<float> values;  // 128 entries: 64 cell means then 64 edge densities, row-major cells
  bool blank = false;         // all-zero before normalization; values stay zero
};

PageFeatures builtin_page_features(const PageRaster& raster);

/// Decodes a PNG or JPEG file to luminance round(0.299R + 0.587G + 0.114B).
PageRaster load_raster(const std::filesystem::path& path);

}  // namespace pdfcorpus
