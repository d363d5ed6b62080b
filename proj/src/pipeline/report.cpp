#include "mil/pipeline/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "mil/data/errors.hpp"

namespace mil {

using nlohmann::json;

std::string display_name(AggregatorKind kind) {
  switch (kind) {
    case AggregatorKind::asym_decoder: return "AsymTransDec";
    case AggregatorKind::vanilla_decoder: return "TransDec";
    case AggregatorKind::encoder: return "TransEnc";
    case AggregatorKind::abmil: return "ABMIL";
  }
  return "?";
}

json history_json(std::span<const EpochLog> history) {
  json out = json::array();
  for (const auto& e : history) {
    json row = {{"epoch", e.epoch}, {"lr", e.lr}, {"train_loss", e.train_loss}};
    row["val_auroc"] = e.val_auroc ? json(*e.val_auroc) : json(nullptr);
    out.push_back(row);
  }
  return out;
}

json report_json(const EvalReport& report) {
  json tasks = json::array();
  for (const auto& t : report.tasks) {
    json folds = json::array();
    for (const auto& f : t.folds) {
      folds.push_back({{"fold", f.fold},
                       {"n_train", f.n_train},
                       {"n_val", f.n_val},
                       {"val_positives", f.val_positives},
                       {"auroc", f.auroc},
                       {"best_epoch", f.best_epoch},
                       {"history", history_json(f.history)}});
    }
    tasks.push_back({{"task", t.task}, {"mean_auroc", t.mean_auroc}, {"folds", folds}});
  }
  return {{"method", report.method},
          {"config_hash", report.config_hash},
          {"seed", report.seed},
          {"config", report.config},
          {"tasks", tasks},
          {"mean_auroc", report.mean_auroc}};
}

json timing_json(const EvalReport& report) {
  json tasks = json::object();
  for (const auto& t : report.tasks) {
    json folds = json::array();
    for (const auto& f : t.folds) folds.push_back(f.seconds);
    tasks[t.task] = folds;
  }
  return {{"config_hash", report.config_hash}, {"total_seconds", report.seconds}, {"fold_seconds", tasks}};
}

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string format_auroc_table(std::span<const EvalReport> reports, std::span<const std::string> row_names) {
  std::vector<std::string> tasks;
  for (const auto& r : reports) {
    for (const auto& t : r.tasks) {
      if (std::find(tasks.begin(), tasks.end(), t.task) == tasks.end()) tasks.push_back(t.task);
    }
  }
  std::vector<std::string> names;
  std::size_t name_w = 6;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    names.push_back(i < row_names.size() ? row_names[i] : reports[i].method);
    name_w = std::max(name_w, names.back().size() + 2);
  }
  std::size_t col_w = 8;
  for (const auto& t : tasks) col_w = std::max(col_w, t.size() + 2);

  std::ostringstream os;
  os << pad("Method", name_w);
  for (const auto& t : tasks) os << pad(t, col_w);
  os << "Mean\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    os << pad(names[i], name_w);
    for (const auto& t : tasks) {
      auto it = std::find_if(reports[i].tasks.begin(), reports[i].tasks.end(),
                             [&](const TaskResult& r) { return r.task == t; });
      os << pad(it == reports[i].tasks.end() ? "-" : fixed(it->mean_auroc), col_w);
    }
    os << fixed(reports[i].mean_auroc) << '\n';
  }
  return os.str();
}

std::string format_fold_table(const EvalReport& report) {
  std::ostringstream os;
  os << "Task      Fold  Train  Val   Val+  Best  AUROC\n";
  for (const auto& t : report.tasks) {
    for (const auto& f : t.folds) {
      char line[160];
      std::snprintf(line, sizeof line, "%-9s %-5zu %-6zu %-5zu %-5zu %-5zu %s\n", t.task.c_str(), f.fold, f.n_train,
                    f.n_val, f.val_positives, f.best_epoch, fixed(f.auroc).c_str());
      os << line;
    }
  }
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

ReportFiles write_report(const std::filesystem::path& out_dir, const EvalReport& report, std::string_view prefix) {
  const std::string stem = std::string(prefix) + "-" + report.config_hash;
  ReportFiles files{out_dir / (stem + ".json"), out_dir / (stem + ".txt"), out_dir / (stem + ".timing.json")};
  write_text_file(files.json, report_json(report).dump(2) + "\n");
  write_text_file(files.table, format_auroc_table(std::span<const EvalReport>(&report, 1)) + "\n" +
                                   format_fold_table(report));
  write_text_file(files.timing, timing_json(report).dump(2) + "\n");
  return files;
}

}  // namespace mil
