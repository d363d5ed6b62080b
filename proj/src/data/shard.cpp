#include "mil/data/shard.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include "mil/data/errors.hpp"
#include "mil/errors.hpp"
#include "mil/numerics/binary_io.hpp"

namespace mil {
namespace {

struct Header {
  std::uint64_t n_patches;
  std::uint64_t dim;
};

void write_header(std::ostream& os, const char (&magic)[8], std::uint64_t n, std::uint64_t dim) {
  binio::write_bytes(os, std::string_view(magic, 8));
  binio::write_u32(os, kShardVersion);
  binio::write_u32(os, 0);
  binio::write_u64(os, n);
  binio::write_u64(os, dim);
}

Header parse_header(std::span<const unsigned char> bytes, const char (&magic)[8], const std::filesystem::path& path) {
  if (bytes.size() < kShardHeaderSize) throw FormatError(path.string() + ": file shorter than header");
  if (std::memcmp(bytes.data(), magic, 8) != 0) throw FormatError(path.string() + ": bad magic");
  if (const auto v = binio::load_u32(bytes.data() + 8); v != kShardVersion) {
    throw FormatError(path.string() + ": unsupported version " + std::to_string(v));
  }
  return {binio::load_u64(bytes.data() + 16), binio::load_u64(bytes.data() + 24)};
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot write " + path.string());
  return os;
}

}  // namespace

void write_embedding_shard(const std::filesystem::path& path, const Tensor& embeddings) {
  if (embeddings.rank() != 2) throw ShapeMismatchError("embedding shard needs a [np, d_kv] matrix");
  auto os = open_for_write(path);
  write_header(os, kEmbeddingMagic, embeddings.rows(), embeddings.cols());
  for (double v : embeddings.values()) binio::write_f32(os, static_cast<float>(v));
  if (!os) throw DataError("failed writing " + path.string());
}

void write_tissue_file(const std::filesystem::path& path, std::span<const TissueLabel> labels) {
  auto os = open_for_write(path);
  write_header(os, kTissueMagic, labels.size(), 1);
  for (auto t : labels) binio::write_u8(os, static_cast<std::uint8_t>(t));
  if (!os) throw DataError("failed writing " + path.string());
}

std::vector<TissueLabel> read_tissue_file(const std::filesystem::path& path) {
  const MappedFile file(path);
  const auto bytes = file.bytes();
  const Header h = parse_header(bytes, kTissueMagic, path);
  if (h.dim != 1) throw FormatError(path.string() + ": tissue file dim must be 1");
  if (bytes.size() != kShardHeaderSize + h.n_patches) {
    throw FormatError(path.string() + ": payload size " + std::to_string(bytes.size() - kShardHeaderSize) +
                      " does not match " + std::to_string(h.n_patches) + " patches");
  }
  std::vector<TissueLabel> labels(h.n_patches);
  for (std::size_t i = 0; i < h.n_patches; ++i) {
    const auto code = bytes[kShardHeaderSize + i];
    if (!is_valid_tissue_code(code)) {
      throw FormatError(path.string() + ": invalid tissue code " + std::to_string(code) + " at patch " +
                        std::to_string(i));
    }
    labels[i] = static_cast<TissueLabel>(code);
  }
  return labels;
}

MappedFile::MappedFile(const std::filesystem::path& path) {
  const int fd = ::open(path.c_str(), O_RDONLY);
  if (fd < 0) throw MissingFileError("cannot open " + path.string());
  struct stat st {};
  if (::fstat(fd, &st) != 0) {
    ::close(fd);
    throw DataError("cannot stat " + path.string());
  }
  size_ = static_cast<std::size_t>(st.st_size);
  if (size_ > 0) {
    void* p = ::mmap(nullptr, size_, PROT_READ, MAP_PRIVATE, fd, 0);
    if (p == MAP_FAILED) {
      ::close(fd);
      throw DataError("cannot map " + path.string());
    }
    data_ = static_cast<const unsigned char*>(p);
  }
  ::close(fd);
}

MappedFile::~MappedFile() {
  if (data_) ::munmap(const_cast<unsigned char*>(data_), size_);
}

EmbeddingShard::EmbeddingShard(const std::filesystem::path& path)
    : file_(std::make_shared<MappedFile>(path)), path_(path) {
  const auto bytes = file_->bytes();
  const Header h = parse_header(bytes, kEmbeddingMagic, path);
  n_patches_ = h.n_patches;
  dim_ = h.dim;
  const std::size_t expected = kShardHeaderSize + n_patches_ * dim_ * sizeof(float);
  if (bytes.size() != expected) {
    throw FormatError(path.string() + ": file is " + std::to_string(bytes.size()) + " bytes, header implies " +
                      std::to_string(expected));
  }
}

void EmbeddingShard::decode_row(std::size_t row, double* out) const {
  const unsigned char* p = file_->bytes().data() + kShardHeaderSize + row * dim_ * sizeof(float);
  for (std::size_t j = 0; j < dim_; ++j) {
    const float v = binio::load_f32(p + j * sizeof(float));
    if (!std::isfinite(v)) {
      throw FormatError(path_.string() + ": non-finite value at patch " + std::to_string(row));
    }
    out[j] = static_cast<double>(v);
  }
}

Tensor EmbeddingShard::read_all() const {
  Tensor t({n_patches_, dim_});
  for (std::size_t r = 0; r < n_patches_; ++r) decode_row(r, t.data() + r * dim_);
  return t;
}

Tensor EmbeddingShard::read_rows(std::span<const std::size_t> rows) const {
  Tensor t({rows.size(), dim_});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= n_patches_) throw InputError("row " + std::to_string(rows[i]) + " out of range in " + path_.string());
    decode_row(rows[i], t.data() + i * dim_);
  }
  return t;
}

}  // namespace mil
