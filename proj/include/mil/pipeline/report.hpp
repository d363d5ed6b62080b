#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mil/model/config.hpp"
#include "mil/pipeline/crossval.hpp"

namespace mil {

// "AsymTransDec", "TransDec", "TransEnc", "ABMIL".
std::string display_name(AggregatorKind kind);

nlohmann::json history_json(std::span<const EpochLog> history);

// Everything except wall-clock durations, so equal runs give equal bytes.
nlohmann::json report_json(const EvalReport& report);
nlohmann::json timing_json(const EvalReport& report);

// One row per report (labelled by `row_names` when given, else the method),
// one column per task, mean AUROC last.
std::string format_auroc_table(std::span<const EvalReport> reports, std::span<const std::string> row_names = {});
std::string format_fold_table(const EvalReport& report);

struct ReportFiles {
  std::filesystem::path json;
  std::filesystem::path table;
  std::filesystem::path timing;
};

// <out>/<prefix>-<config hash>.json / .txt / .timing.json
ReportFiles write_report(const std::filesystem::path& out_dir, const EvalReport& report,
                         std::string_view prefix = "crossval");

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace mil
