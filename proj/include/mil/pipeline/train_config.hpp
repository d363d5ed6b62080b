#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "mil/data/sampling.hpp"
#include "mil/model/config.hpp"
#include "mil/pipeline/optimizer.hpp"
#include "mil/pipeline/schedule.hpp"

namespace mil {

struct SamplingConfig {
  bool stratified = true;       // false: uniform draw ignoring tissue type
  std::size_t n_target = 512;   // patches per bag per epoch
  TissueRatios ratios = kDefaultTissueRatios;
};

struct TrainConfig {
  double lr = 2e-4;  // peak of the cosine schedule
  AdamWOptions adamw;
  double eta_min = 1e-6;
  double scheduler_period = 10.0;  // epochs
  std::size_t batch_size = 128;    // bags per optimizer step
  std::size_t epochs = 10;
  std::size_t folds = 5;
  double pos_weight = 1.0;
  std::uint64_t seed = 0;
  std::string task = "SYNTH";
  AttentionConfig model;  // d_kv is taken from the manifest
  SamplingConfig sampling;

  CosineSchedule schedule() const { return {scheduler_period, lr, eta_min}; }
  void validate() const;  // ParameterError
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
TrainConfig load_train_config(const std::filesystem::path& path);

// 16 hex digits of FNV-1a over the canonical JSON form.
std::string config_hash(const nlohmann::json& j);

}  // namespace mil
