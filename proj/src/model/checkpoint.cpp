#include "mil/model/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "mil/numerics/binary_io.hpp"

namespace mil {

std::string serialize_checkpoint(const MilModel& model) {
  std::ostringstream os(std::ios::binary);
  binio::write_bytes(os, std::string_view(kCheckpointMagic, sizeof kCheckpointMagic));
  binio::write_u32(os, kCheckpointVersion);
  binio::write_u64(os, model.init_seed());
  binio::write_string(os, nlohmann::json(model.config()).dump());
  const auto& store = model.parameters();
  binio::write_u32(os, static_cast<std::uint32_t>(store.size()));
  for (const auto& p : store) {
    binio::write_string(os, p.name);
    binio::write_u32(os, static_cast<std::uint32_t>(p.value.rank()));
    for (auto d : p.value.shape()) binio::write_u64(os, d);
    for (double v : p.value.values()) binio::write_f64(os, v);
  }
  return os.str();
}

MilModel deserialize_checkpoint(const std::string& bytes) {
  std::istringstream is(bytes, std::ios::binary);
  try {
    if (binio::read_bytes(is, sizeof kCheckpointMagic) != std::string_view(kCheckpointMagic, sizeof kCheckpointMagic)) {
      throw CheckpointError("checkpoint: bad magic");
    }
    if (const auto v = binio::read_u32(is); v != kCheckpointVersion) {
      throw CheckpointError("checkpoint: unsupported version " + std::to_string(v));
    }
    const std::uint64_t seed = binio::read_u64(is);
    const AttentionConfig cfg = nlohmann::json::parse(binio::read_string(is)).get<AttentionConfig>();
    MilModel model(cfg, seed);
    auto& store = model.parameters();
    const std::uint32_t count = binio::read_u32(is);
    if (count != store.size()) {
      throw CheckpointError("checkpoint: " + std::to_string(count) + " tensors, model layout has " +
                            std::to_string(store.size()));
    }
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::string name = binio::read_string(is);
      if (name != store[i].name) throw CheckpointError("checkpoint: expected tensor " + store[i].name + ", found " + name);
      Shape shape(binio::read_u32(is));
      for (auto& d : shape) d = binio::read_u64(is);
      if (shape != store[i].value.shape()) {
        throw CheckpointError("checkpoint: tensor " + name + " has shape " + shape_string(shape) + ", expected " +
                              shape_string(store[i].value.shape()));
      }
      for (auto& v : store[i].value.values()) v = binio::read_f64(is);
      if (!store[i].value.all_finite()) throw CheckpointError("checkpoint: tensor " + name + " holds non-finite values");
    }
    if (is.peek() != std::char_traits<char>::eof()) throw CheckpointError("checkpoint: trailing bytes");
    return model;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const MilModel& model) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError("cannot write checkpoint " + path.string());
  const std::string bytes = serialize_checkpoint(model);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw CheckpointError("failed writing checkpoint " + path.string());
}

MilModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return deserialize_checkpoint(buf.str());
}

}  // namespace mil
