#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "rumorlens/errors.hpp"
#include "rumorlens/experiments.hpp"

namespace rumorlens {

namespace {

using Row = std::vector<std::string>;

std::string fixed2(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

std::string cell(double value, bool undefined, bool mark_undefined) {
  std::string out = fixed2(value);
  if (undefined && mark_undefined) out += '*';
  return out;
}

// Technique, ACC, PRE, REC, F-M for one metrics report.
Row metric_cells(const std::string& label, const MetricsReport& m, bool mark_undefined) {
  return {label, fixed2(m.accuracy), cell(m.precision_pos, m.precision_pos_undefined, mark_undefined),
          cell(m.recall_pos, m.recall_pos_undefined, mark_undefined),
          cell(m.f1_pos, m.f1_pos_undefined, mark_undefined)};
}

Row result_cells(const ExperimentResult& r, bool mark_undefined) {
  if (r.status == RunStatus::kFailed) return {display_name(r.variant), "-", "-", "-", "-"};
  return metric_cells(display_name(r.variant), r.mean, mark_undefined);
}

std::string render_aligned(const Row& header, const std::vector<Row>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
  }
  const auto line = [&](const Row& row) {
    std::string out = row[0] + std::string(width[0] - row[0].size(), ' ');
    for (std::size_t c = 1; c < row.size(); ++c) {
      out += "  ";
      out += std::string(width[c] - row[c].size(), ' ') + row[c];
    }
    return out + "\n";
  };
  std::string out = line(header);
  for (const auto& row : rows) out += line(row);
  return out;
}

std::string render_csv(const Row& header, const std::vector<Row>& rows) {
  const auto quote = [](const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  };
  const auto line = [&](const Row& row) {
    std::string out;
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + quote(row[c]);
    return out + "\n";
  };
  std::string out = line(header);
  for (const auto& row : rows) out += line(row);
  return out;
}

bool any_undefined(const MetricsReport& m) {
  return m.precision_pos_undefined || m.recall_pos_undefined || m.f1_pos_undefined;
}

const char* kUndefinedNote = "* undefined ratio (0/0), reported as 0\n";

}  // namespace

ReportFormat parse_report_format(const std::string& name) {
  if (name == "text") return ReportFormat::kText;
  if (name == "csv") return ReportFormat::kCsv;
  throw ConfigError("unknown report format '" + name + "' (expected text or csv)");
}

std::string render_row(const ExperimentResult& result) {
  const Row cells = result_cells(result, false);
  std::string out = cells[0];
  for (std::size_t c = 1; c < cells.size(); ++c) out += "  " + cells[c];
  return out;
}

std::string render_report(const std::vector<ExperimentResult>& results, ReportFormat format) {
  std::vector<Row> rows;
  const bool text = format == ReportFormat::kText;
  bool flagged = false;
  for (const auto& r : results) {
    rows.push_back(result_cells(r, text));
    flagged |= r.status == RunStatus::kOk && any_undefined(r.mean);
  }
  if (!text) return render_csv({"technique", "acc", "pre", "rec", "f_m"}, rows);
  std::string out = render_aligned({"Technique", "ACC", "PRE", "REC", "F-M"}, rows);
  if (flagged) out += kUndefinedNote;
  return out;
}

std::string render_fold_table(const std::vector<FoldResult>& folds, const MetricsReport& mean,
                              ReportFormat format) {
  const bool text = format == ReportFormat::kText;
  std::vector<Row> rows;
  bool flagged = any_undefined(mean);
  for (const auto& f : folds) {
    rows.push_back(metric_cells(std::to_string(f.fold + 1), f.metrics, text));
    flagged |= any_undefined(f.metrics);
  }
  rows.push_back(metric_cells("mean", mean, text));
  if (!text) return render_csv({"fold", "acc", "pre", "rec", "f_m"}, rows);
  std::string out = render_aligned({"Fold", "ACC", "PRE", "REC", "F-M"}, rows);
  if (flagged) out += kUndefinedNote;
  return out;
}

}  // namespace rumorlens
