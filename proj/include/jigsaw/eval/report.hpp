#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace jigsaw {

inline constexpr int kReportSchema = 1;

struct EvalRecord {
  std::string puzzle_id;
  std::string solver;
  int rows = 0;
  int cols = 0;
  std::string perturbation = "clean";
  double direct_accuracy = 0;
  std::optional<double> neighbor_accuracy;  // absent when pieces are missing
  double time_ms = 0;

  bool operator==(const EvalRecord&) const = default;
};

struct AggregateCell {
  std::string solver;
  int rows = 0;
  int cols = 0;
  std::string perturbation;
  int count = 0;
  double mean_direct = 0;
  double stderr_direct = 0;
  std::optional<double> mean_neighbor;
  std::optional<double> stderr_neighbor;
  double mean_time_ms = 0;
};

struct EvalReport {
  std::map<std::string, std::string> metadata;
  std::vector<EvalRecord> records;

  bool operator==(const EvalReport&) const = default;
};

// Metadata every report carries: metric conventions and schema.
std::map<std::string, std::string> default_report_metadata();

// Stable sort by puzzle id; relative order of a puzzle's records is kept.
void canonicalize(EvalReport& report);

// One cell per (solver, grid, perturbation), in first-appearance order.
// Standard error = sample std / sqrt(count) (0 for a single record).
std::vector<AggregateCell> aggregate(const EvalReport& report);

enum class ReportFormat { Csv, Json };

inline constexpr const char* kCsvHeader =
    "puzzle_id,solver,rows,cols,perturbation,direct_accuracy,neighbor_accuracy,time_ms";
inline constexpr int kCsvFields = 8;

// CSV: header plus one row per record. JSON: {schema, metadata, records,
// aggregates, table}, where table[solver][perturbation]["RxC"] is the mean
// direct accuracy (the solver x grid-size layout). Errors: IoError.
void emit_report(const EvalReport& report, const std::filesystem::path& path, ReportFormat format);
std::string report_to_csv(const EvalReport& report);
std::string report_to_json(const EvalReport& report);

// Reads the records and metadata back from a JSON report. Errors: IoError, DecodeError.
EvalReport read_report_json(const std::filesystem::path& path);

}  // namespace jigsaw
