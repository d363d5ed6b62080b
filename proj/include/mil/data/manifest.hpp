#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mil/data/bag.hpp"
#include "mil/data/shard.hpp"

// Manifest: JSON Lines, UTF-8, one object per line.
//
//   line 1   {"format":"mil-manifest","version":1,"d_kv":<int>}
//   line 2+  {"bag_id":<str>,"embeddings":<path>,"tissue":<path>,"labels":{<task>:0|1|null,...}}
//
// Paths are relative to the manifest's directory. Blank lines are ignored.
namespace mil {

inline constexpr int kManifestVersion = 1;

struct ManifestRecord {
  std::string bag_id;
  std::filesystem::path embeddings;  // resolved
  std::filesystem::path tissue;      // resolved
  std::map<std::string, std::optional<int>> labels;

  std::optional<int> label(const std::string& task) const;
};

class Manifest {
 public:
  Manifest(std::filesystem::path root, std::size_t d_kv, std::vector<ManifestRecord> records);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::size_t d_kv() const noexcept { return d_kv_; }
  const std::vector<ManifestRecord>& records() const noexcept { return records_; }
  const ManifestRecord& record(const std::string& bag_id) const;  // throws UnknownBagError
  bool contains(const std::string& bag_id) const { return index_.count(bag_id) != 0; }

  // Bag ids carrying a 0/1 label for the task, in manifest order.
  std::vector<std::string> labeled_bags(const std::string& task) const;

 private:
  std::filesystem::path root_;
  std::size_t d_kv_;
  std::vector<ManifestRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Parses and validates: unique ids, labels in {0,1,null}, all paths present.
Manifest load_manifest(const std::filesystem::path& path);

// Fully materialized, validated bag (embeddings decoded to float64).
Bag load_bag(const Manifest& manifest, const std::string& bag_id, const std::string& task);

// Writes shard + tissue file per bag under <dir>/shards and the manifest at
// <dir>/manifest.jsonl. All bags must share d_kv. Returns the manifest path.
std::filesystem::path write_dataset(const std::filesystem::path& dir, const std::vector<Bag>& bags);

// A bag opened for repeated sampling: tissue labels in memory, embeddings
// mapped, rows decoded only when requested.
class BagHandle {
 public:
  BagHandle(const Manifest& manifest, const std::string& bag_id, const std::string& task);

  const std::string& id() const noexcept { return id_; }
  int label() const noexcept { return label_; }
  std::size_t size() const noexcept { return tissue_.size(); }
  std::size_t dim() const noexcept { return shard_.dim(); }
  const std::vector<TissueLabel>& tissue() const noexcept { return tissue_; }

  Tensor embeddings(std::span<const std::size_t> rows) const { return shard_.read_rows(rows); }
  Tensor all_embeddings() const { return shard_.read_all(); }
  std::vector<TissueLabel> tissue_at(std::span<const std::size_t> rows) const;

 private:
  std::string id_;
  int label_;
  std::vector<TissueLabel> tissue_;
  EmbeddingShard shard_;
};

}  // namespace mil
