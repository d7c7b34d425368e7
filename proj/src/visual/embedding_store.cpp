#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <bit>
#include <cmath>
#include <cstring>

#include "json.hpp"
#include "pdfcorpus/embeddings.hpp"
#include "pdfcorpus/error.hpp"

namespace pdfcorpus {

static_assert(std::endian::native == std::endian::little, "EMB1 files are little-endian and mapped in place");

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};
constexpr std::size_t kHeaderBytes = 16;

class Mapping {
 public:
  explicit Mapping(const fs::path& path) {
    int fd = ::open(path.c_str(), O_RDONLY);
    if (fd < 0) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    struct stat st {};
    if (::fstat(fd, &st) != 0) {
      ::close(fd);
      throw Error(ErrorCode::IoFailure, "cannot stat " + path.string());
    }
    size_ = static_cast<std::size_t>(st.st_size);
    if (size_ > 0) {
      void* p = ::mmap(nullptr, size_, PROT_READ, MAP_PRIVATE, fd, 0);
      if (p == MAP_FAILED) {
        ::close(fd);
        throw Error(ErrorCode::IoFailure, "cannot map " + path.string());
      }
      ::madvise(p, size_, MADV_SEQUENTIAL);
      data_ = static_cast<const std::uint8_t*>(p);
    }
    ::close(fd);
  }
  ~Mapping() {
    if (data_) ::munmap(const_cast<std::uint8_t*>(data_), size_);
  }
  Mapping(const Mapping&) = delete;
  Mapping& operator=(const Mapping&) = delete;

  const std::uint8_t* data() const { return data_; }
  std::size_t size() const { return size_; }

 private:
  const std::uint8_t* data_ = nullptr;
  std::size_t size_ = 0;
};

double row_norm(std::span<const float> row) {
  double sq = 0.0;
  for (float v : row) sq += static_cast<double>(v) * v;
  return std::sqrt(sq);
}

void check_row(std::span<const float> row, std::size_t index) {
  for (float v : row) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "row " + std::to_string(index));
  }
  double n = row_norm(row);
  if (std::abs(n - 1.0) > kStoreNormTolerance) {
    throw Error(ErrorCode::NotNormalized, "row " + std::to_string(index) + " has norm " + std::to_string(n));
  }
}

std::vector<PageRef> read_sidecar(const fs::path& path, std::size_t expected_rows) {
  std::ifstream in(sidecar_path(path), std::ios::binary);
  if (!in) throw Error(ErrorCode::SidecarMismatch, "missing sidecar " + sidecar_path(path).string());
  std::vector<PageRef> ids;
  ids.reserve(expected_rows);
  std::string line;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto j = nlohmann::json::parse(line);
      if (j.at("row").get<std::size_t>() != ids.size()) {
        throw Error(ErrorCode::SidecarMismatch, "sidecar rows out of order at line " + std::to_string(ids.size()));
      }
      ids.push_back(PageRef{DocumentId::from_hex(j.at("doc_id").get<std::string>()),
                            j.at("page_index").get<std::uint32_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SidecarMismatch, std::string("unreadable sidecar: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BadFormat) throw Error(ErrorCode::SidecarMismatch, e.what());
    throw;
  }
  if (ids.size() != expected_rows) {
    throw Error(ErrorCode::SidecarMismatch, "sidecar has " + std::to_string(ids.size()) + " rows, store has " +
                                                std::to_string(expected_rows));
  }
  return ids;
}

}  // namespace

// ---------------------------------------------------------------------------

EmbeddingStore::EmbeddingStore(std::uint32_t dim, std::vector<float> matrix, std::vector<PageRef> row_ids) {
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "store dim must be positive");
  if (matrix.size() != static_cast<std::size_t>(dim) * row_ids.size()) {
    throw Error(ErrorCode::DimMismatch, "matrix length must equal dim x rows");
  }
  auto owned = std::make_shared<const std::vector<float>>(std::move(matrix));
  dim_ = dim;
  data_ = owned->data();
  owner_ = std::move(owned);
  row_ids_ = std::make_shared<const std::vector<PageRef>>(std::move(row_ids));
  index_rows();
  validate_values();
}

EmbeddingStore EmbeddingStore::from_view(std::uint32_t dim, std::shared_ptr<const void> owner, const float* data,
                                         std::vector<PageRef> row_ids) {
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "store dim must be positive");
  EmbeddingStore s;
  s.dim_ = dim;
  s.owner_ = std::move(owner);
  s.data_ = data;
  s.row_ids_ = std::make_shared<const std::vector<PageRef>>(std::move(row_ids));
  s.index_rows();
  return s;
}

void EmbeddingStore::index_rows() {
  auto lookup = std::make_shared<std::unordered_map<PageRef, std::size_t, PageRefHash>>();
  lookup->reserve(row_ids_->size());
  for (std::size_t i = 0; i < row_ids_->size(); ++i) {
    if (!lookup->emplace((*row_ids_)[i], i).second) {
      throw Error(ErrorCode::InvalidArgument,
                  "duplicate row id " + (*row_ids_)[i].doc_id.hex() + ":" + std::to_string((*row_ids_)[i].page_index));
    }
  }
  lookup_ = std::move(lookup);
}

std::optional<std::size_t> EmbeddingStore::find(const PageRef& ref) const {
  if (!lookup_) return std::nullopt;
  auto it = lookup_->find(ref);
  if (it == lookup_->end()) return std::nullopt;
  return it->second;
}

void EmbeddingStore::validate_values() const {
  for (std::size_t i = 0; i < rows(); ++i) check_row(row(i), i);
}

bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
  if (a.dim_ != b.dim_ || a.rows() != b.rows()) return false;
  if (!std::equal(a.row_ids().begin(), a.row_ids().end(), b.row_ids().begin())) return false;
  return a.rows() == 0 || std::memcmp(a.data_, b.data_, a.matrix().size_bytes()) == 0;
}

// ---------------------------------------------------------------------------

fs::path sidecar_path(const fs::path& store_path) { return fs::path(store_path.string() + ".ids.jsonl"); }

StoreWriter::StoreWriter(const fs::path& path, std::uint32_t dim) : path_(path), dim_(dim) {
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "store dim must be positive");
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  std::uint8_t header[kHeaderBytes] = {};
  std::memcpy(header, kMagic, 4);
  std::memcpy(header + 4, &dim_, 4);
  out_.write(reinterpret_cast<const char*>(header), sizeof(header));
}

StoreWriter::~StoreWriter() {
  if (!finished_) {
    try {
      finish();
    } catch (...) {
    }
  }
}

void StoreWriter::append(const PageRef& ref, std::span<const float> values) {
  if (finished_) throw Error(ErrorCode::InvalidArgument, "store writer already finished");
  if (values.size() != dim_) throw Error(ErrorCode::DimMismatch, "row has wrong dimension");
  check_row(values, ids_.size());
  out_.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  ids_.push_back(ref);
}

void StoreWriter::finish() {
  if (finished_) return;
  finished_ = true;
  const std::uint64_t rows = ids_.size();
  out_.seekp(8);
  out_.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out_.close();
  if (!out_) throw Error(ErrorCode::IoFailure, "write failed: " + path_.string());

  std::ofstream ids(sidecar_path(path_), std::ios::binary | std::ios::trunc);
  if (!ids) throw Error(ErrorCode::IoFailure, "cannot open sidecar for " + path_.string());
  std::string line;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    line = "{\"row\":" + std::to_string(i) + ",\"doc_id\":\"" + ids_[i].doc_id.hex() +
           "\",\"page_index\":" + std::to_string(ids_[i].page_index) + "}\n";
    ids << line;
  }
  if (!ids) throw Error(ErrorCode::IoFailure, "sidecar write failed for " + path_.string());
}

void write_store(const EmbeddingStore& store, const fs::path& path) {
  StoreWriter writer(path, store.dim());
  for (std::size_t i = 0; i < store.rows(); ++i) writer.append(store.row_ids()[i], store.row(i));
  writer.finish();
}

EmbeddingStore read_store(const fs::path& path, StoreValidation validation) {
  auto mapping = std::make_shared<const Mapping>(path);
  if (mapping->size() < kHeaderBytes || std::memcmp(mapping->data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::BadMagic, path.string() + " is not an EMB1 store");
  }
  std::uint32_t dim = 0;
  std::uint64_t rows = 0;
  std::memcpy(&dim, mapping->data() + 4, 4);
  std::memcpy(&rows, mapping->data() + 8, 8);
  if (dim == 0) throw Error(ErrorCode::BadFormat, path.string() + ": zero dimension");
  const std::size_t payload = mapping->size() - kHeaderBytes;
  if (rows > payload / (static_cast<std::uint64_t>(dim) * 4) || payload != rows * dim * 4) {
    throw Error(ErrorCode::IoFailure, path.string() + ": payload size does not match header (truncated?)");
  }
  auto ids = read_sidecar(path, rows);
  const auto* data = reinterpret_cast<const float*>(mapping->data() + kHeaderBytes);
  EmbeddingStore store;
  try {
    store = EmbeddingStore::from_view(dim, mapping, data, std::move(ids));
  } catch (const Error& e) {
    throw Error(ErrorCode::SidecarMismatch, e.what());
  }
  if (validation == StoreValidation::full) store.validate_values();
  return store;
}

EmbeddingStore front_page_rows(const EmbeddingStore& store) {
  std::vector<float> matrix;
  std::vector<PageRef> ids;
  for (std::size_t i = 0; i < store.rows(); ++i) {
    if (store.row_ids()[i].page_index != 0) continue;
    auto r = store.row(i);
    matrix.insert(matrix.end(), r.begin(), r.end());
    ids.push_back(store.row_ids()[i]);
  }
  return EmbeddingStore(store.dim() == 0 ? 1 : store.dim(), std::move(matrix), std::move(ids));
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimMismatch, "vectors differ in dimension");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine similarity of a zero vector");
  double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

bool l2_normalize(std::span<float> v) {
  double sq = 0.0;
  for (float x : v) sq += static_cast<double>(x) * x;
  if (sq == 0.0) return false;
  const double inv = 1.0 / std::sqrt(sq);
  for (float& x : v) x = static_cast<float>(x * inv);
  return true;
}

}  // namespace pdfcorpus
