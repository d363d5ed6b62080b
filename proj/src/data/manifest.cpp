#include "mil/data/manifest.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "mil/data/errors.hpp"
#include "mil/errors.hpp"

namespace mil {

namespace fs = std::filesystem;
using nlohmann::json;

void Bag::validate() const {
  if (tissue.empty()) throw InputError("bag " + bag_id + ": empty bag");
  if (embeddings.rank() != 2 || embeddings.rows() != tissue.size()) {
    throw InputError("bag " + bag_id + ": " + std::to_string(tissue.size()) + " tissue labels for embeddings " +
                     shape_string(embeddings.shape()));
  }
  if (!embeddings.all_finite()) throw InputError("bag " + bag_id + ": non-finite embedding values");
  for (auto t : tissue) {
    if (!is_valid_tissue_code(static_cast<std::uint8_t>(t))) throw InputError("bag " + bag_id + ": bad tissue code");
  }
  if (label != 0 && label != 1) throw InputError("bag " + bag_id + ": label must be 0 or 1");
}

std::optional<int> ManifestRecord::label(const std::string& task) const {
  const auto it = labels.find(task);
  return it == labels.end() ? std::nullopt : it->second;
}

Manifest::Manifest(fs::path root, std::size_t d_kv, std::vector<ManifestRecord> records)
    : root_(std::move(root)), d_kv_(d_kv), records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (!index_.emplace(records_[i].bag_id, i).second) {
      throw FormatError("manifest: duplicate bag_id '" + records_[i].bag_id + "'");
    }
  }
}

const ManifestRecord& Manifest::record(const std::string& bag_id) const {
  const auto it = index_.find(bag_id);
  if (it == index_.end()) throw UnknownBagError("manifest has no bag '" + bag_id + "'");
  return records_[it->second];
}

std::vector<std::string> Manifest::labeled_bags(const std::string& task) const {
  std::vector<std::string> ids;
  for (const auto& r : records_) {
    if (r.label(task)) ids.push_back(r.bag_id);
  }
  return ids;
}

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFileError("cannot open manifest " + path.string());
  const fs::path root = path.parent_path();

  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> d_kv;
  std::vector<ManifestRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = [&] { return path.string() + ":" + std::to_string(line_no) + ": "; };
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(where() + e.what());
    }
    if (!d_kv) {
      if (j.value("format", "") != "mil-manifest") throw FormatError(where() + "missing mil-manifest header");
      if (j.value("version", 0) != kManifestVersion) throw FormatError(where() + "unsupported manifest version");
      if (!j.contains("d_kv") || !j["d_kv"].is_number_unsigned() || j["d_kv"].get<std::size_t>() == 0) {
        throw FormatError(where() + "header needs a positive integer d_kv");
      }
      d_kv = j["d_kv"].get<std::size_t>();
      continue;
    }
    ManifestRecord r;
    try {
      r.bag_id = j.at("bag_id").get<std::string>();
      r.embeddings = root / j.at("embeddings").get<std::string>();
      r.tissue = root / j.at("tissue").get<std::string>();
      for (const auto& [task, v] : j.at("labels").items()) {
        if (v.is_null()) {
          r.labels[task] = std::nullopt;
        } else if (v.is_number_integer() && (v.get<int>() == 0 || v.get<int>() == 1)) {
          r.labels[task] = v.get<int>();
        } else {
          throw FormatError(where() + "label for task '" + task + "' must be 0, 1 or null");
        }
      }
    } catch (const json::exception& e) {
      throw FormatError(where() + e.what());
    }
    if (r.bag_id.empty()) throw FormatError(where() + "empty bag_id");
    for (const auto* p : {&r.embeddings, &r.tissue}) {
      if (!fs::exists(*p)) throw MissingFileError(where() + "referenced file " + p->string() + " does not exist");
    }
    records.push_back(std::move(r));
  }
  if (!d_kv) throw FormatError(path.string() + ": empty manifest");
  return Manifest(root, *d_kv, std::move(records));
}

BagHandle::BagHandle(const Manifest& manifest, const std::string& bag_id, const std::string& task)
    : id_(bag_id), label_(0), shard_(manifest.record(bag_id).embeddings) {
  const auto& rec = manifest.record(bag_id);
  const auto label = rec.label(task);
  if (!label) throw MissingLabelError("bag '" + bag_id + "' has no label for task '" + task + "'");
  label_ = *label;
  if (shard_.dim() != manifest.d_kv()) {
    throw ShapeMismatchError("bag '" + bag_id + "': shard d_kv " + std::to_string(shard_.dim()) +
                             " differs from manifest d_kv " + std::to_string(manifest.d_kv()));
  }
  tissue_ = read_tissue_file(rec.tissue);
  if (tissue_.size() != shard_.n_patches()) {
    throw ShapeMismatchError("bag '" + bag_id + "': shard has " + std::to_string(shard_.n_patches()) +
                             " patches but tissue file has " + std::to_string(tissue_.size()));
  }
  if (tissue_.empty()) throw ShapeMismatchError("bag '" + bag_id + "': no patches");
}

std::vector<TissueLabel> BagHandle::tissue_at(std::span<const std::size_t> rows) const {
  std::vector<TissueLabel> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(tissue_.at(r));
  return out;
}

Bag load_bag(const Manifest& manifest, const std::string& bag_id, const std::string& task) {
  const BagHandle handle(manifest, bag_id, task);
  Bag bag{bag_id, handle.all_embeddings(), handle.tissue(), handle.label(), task};
  bag.validate();
  return bag;
}

fs::path write_dataset(const fs::path& dir, const std::vector<Bag>& bags) {
  if (bags.empty()) throw InputError("write_dataset: no bags");
  const std::size_t d_kv = bags.front().embeddings.cols();
  fs::create_directories(dir / "shards");
  const fs::path manifest_path = dir / "manifest.jsonl";
  std::ofstream out(manifest_path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + manifest_path.string());
  out << json{{"format", "mil-manifest"}, {"version", kManifestVersion}, {"d_kv", d_kv}}.dump() << '\n';
  std::set<std::string> seen;
  for (const auto& bag : bags) {
    bag.validate();
    if (bag.embeddings.cols() != d_kv) throw ShapeMismatchError("write_dataset: bag " + bag.bag_id + " has different d_kv");
    if (!seen.insert(bag.bag_id).second) throw FormatError("write_dataset: duplicate bag_id " + bag.bag_id);
    const std::string emb = "shards/" + bag.bag_id + ".emb";
    const std::string tis = "shards/" + bag.bag_id + ".tis";
    write_embedding_shard(dir / emb, bag.embeddings);
    write_tissue_file(dir / tis, bag.tissue);
    out << json{{"bag_id", bag.bag_id}, {"embeddings", emb}, {"tissue", tis}, {"labels", {{bag.task, bag.label}}}}.dump()
        << '\n';
  }
  if (!out) throw DataError("failed writing " + manifest_path.string());
  return manifest_path;
}

}  // namespace mil
