#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "mil/numerics/tensor.hpp"
#include "mil/tissue_label.hpp"

// On-disk formats. Both files start with the same 32-byte header:
//
//   offset  size  field
//   0       8     magic: "MILEMB\0\0" (embeddings) or "MILTIS\0\0" (tissue)
//   8       4     version (u32, currently 1)
//   12      4     reserved, zero
//   16      8     n_patches (u64)
//   24      8     dim (u64): d_kv for embeddings, 1 for tissue labels
//
// Embedding payload: n_patches * d_kv little-endian float32, row-major.
// Tissue payload: n_patches bytes, codes 0 = CA, 1 = CS, 2 = BG.
namespace mil {

inline constexpr char kEmbeddingMagic[8] = {'M', 'I', 'L', 'E', 'M', 'B', '\0', '\0'};
inline constexpr char kTissueMagic[8] = {'M', 'I', 'L', 'T', 'I', 'S', '\0', '\0'};
inline constexpr std::uint32_t kShardVersion = 1;
inline constexpr std::size_t kShardHeaderSize = 32;

void write_embedding_shard(const std::filesystem::path& path, const Tensor& embeddings);
void write_tissue_file(const std::filesystem::path& path, std::span<const TissueLabel> labels);
std::vector<TissueLabel> read_tissue_file(const std::filesystem::path& path);

// Read-only memory map of a whole file.
class MappedFile {
 public:
  explicit MappedFile(const std::filesystem::path& path);
  ~MappedFile();
  MappedFile(const MappedFile&) = delete;
  MappedFile& operator=(const MappedFile&) = delete;

  std::span<const unsigned char> bytes() const noexcept { return {data_, size_}; }

 private:
  const unsigned char* data_ = nullptr;
  std::size_t size_ = 0;
};

// Memory-mapped embedding shard; rows are decoded to float64 on demand.
class EmbeddingShard {
 public:
  explicit EmbeddingShard(const std::filesystem::path& path);

  std::size_t n_patches() const noexcept { return n_patches_; }
  std::size_t dim() const noexcept { return dim_; }

  Tensor read_all() const;
  // Rows in the given order; indices must be < n_patches().
  Tensor read_rows(std::span<const std::size_t> rows) const;

 private:
  void decode_row(std::size_t row, double* out) const;

  std::shared_ptr<MappedFile> file_;
  std::filesystem::path path_;
  std::size_t n_patches_ = 0;
  std::size_t dim_ = 0;
};

}  // namespace mil
