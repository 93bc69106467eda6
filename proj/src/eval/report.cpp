#include "jigsaw/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "jigsaw/error.hpp"
#include "json.hpp"

namespace jigsaw {

using nlohmann::json;

std::map<std::string, std::string> default_report_metadata() {
  return {
      {"schema", std::to_string(kReportSchema)},
      {"direct_metric", "fraction of present pieces in their ground-truth slot"},
      {"neighbor_metric", "ordered right/down ground-truth pairs, direction-sensitive"},
      {"missing_denominator", "present pieces"},
  };
}

void canonicalize(EvalReport& report) {
  std::stable_sort(report.records.begin(), report.records.end(),
                   [](const EvalRecord& a, const EvalRecord& b) { return a.puzzle_id < b.puzzle_id; });
}

namespace {

struct Moments {
  double sum = 0, sum_sq = 0;
  int count = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++count;
  }
  double mean() const { return count ? sum / count : 0.0; }
  double stderr_of_mean() const {
    if (count < 2) return 0.0;
    const double var = std::max(0.0, (sum_sq - sum * sum / count) / (count - 1));
    return std::sqrt(var / count);
  }
};

std::string grid_label(int rows, int cols) { return std::to_string(rows) + "x" + std::to_string(cols); }

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

std::vector<AggregateCell> aggregate(const EvalReport& report) {
  struct Accumulator {
    AggregateCell cell;
    Moments direct, neighbor, time;
  };
  std::vector<Accumulator> cells;
  for (const EvalRecord& r : report.records) {
    auto it = std::find_if(cells.begin(), cells.end(), [&](const Accumulator& a) {
      return a.cell.solver == r.solver && a.cell.rows == r.rows && a.cell.cols == r.cols &&
             a.cell.perturbation == r.perturbation;
    });
    if (it == cells.end()) {
      cells.emplace_back();
      AggregateCell& cell = cells.back().cell;
      cell.solver = r.solver;
      cell.rows = r.rows;
      cell.cols = r.cols;
      cell.perturbation = r.perturbation;
      it = cells.end() - 1;
    }
    it->direct.add(r.direct_accuracy);
    if (r.neighbor_accuracy) it->neighbor.add(*r.neighbor_accuracy);
    it->time.add(r.time_ms);
  }
  std::vector<AggregateCell> out;
  for (Accumulator& a : cells) {
    a.cell.count = a.direct.count;
    a.cell.mean_direct = a.direct.mean();
    a.cell.stderr_direct = a.direct.stderr_of_mean();
    if (a.neighbor.count > 0) {
      a.cell.mean_neighbor = a.neighbor.mean();
      a.cell.stderr_neighbor = a.neighbor.stderr_of_mean();
    }
    a.cell.mean_time_ms = a.time.mean();
    out.push_back(a.cell);
  }
  return out;
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const EvalRecord& r : report.records) {
    out << csv_escape(r.puzzle_id) << ',' << csv_escape(r.solver) << ',' << r.rows << ',' << r.cols << ','
        << csv_escape(r.perturbation) << ',' << format_double(r.direct_accuracy) << ','
        << (r.neighbor_accuracy ? format_double(*r.neighbor_accuracy) : std::string()) << ','
        << format_double(r.time_ms) << '\n';
  }
  return out.str();
}

std::string report_to_json(const EvalReport& report) {
  json doc;
  doc["schema"] = kReportSchema;
  doc["metadata"] = report.metadata;
  json records = json::array();
  for (const EvalRecord& r : report.records) {
    json rec = {{"puzzle_id", r.puzzle_id},   {"solver", r.solver},
                {"rows", r.rows},             {"cols", r.cols},
                {"perturbation", r.perturbation}, {"direct_accuracy", r.direct_accuracy},
                {"time_ms", r.time_ms}};
    rec["neighbor_accuracy"] = r.neighbor_accuracy ? json(*r.neighbor_accuracy) : json(nullptr);
    records.push_back(std::move(rec));
  }
  doc["records"] = records;
  json aggregates = json::array();
  json table = json::object();
  for (const AggregateCell& a : aggregate(report)) {
    json cell = {{"solver", a.solver},
                 {"rows", a.rows},
                 {"cols", a.cols},
                 {"perturbation", a.perturbation},
                 {"count", a.count},
                 {"mean_direct", a.mean_direct},
                 {"stderr_direct", a.stderr_direct},
                 {"mean_time_ms", a.mean_time_ms}};
    cell["mean_neighbor"] = a.mean_neighbor ? json(*a.mean_neighbor) : json(nullptr);
    cell["stderr_neighbor"] = a.stderr_neighbor ? json(*a.stderr_neighbor) : json(nullptr);
    aggregates.push_back(std::move(cell));
    table[a.solver][a.perturbation][grid_label(a.rows, a.cols)] = a.mean_direct;
  }
  doc["aggregates"] = aggregates;
  doc["table"] = table;
  return doc.dump(2) + "\n";
}

void emit_report(const EvalReport& report, const std::filesystem::path& path, ReportFormat format) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << (format == ReportFormat::Csv ? report_to_csv(report) : report_to_json(report));
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

EvalReport read_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  try {
    json doc;
    in >> doc;
    if (doc.at("schema").get<int>() != kReportSchema) throw Error(Errc::DecodeError, "unsupported report schema");
    EvalReport report;
    report.metadata = doc.at("metadata").get<std::map<std::string, std::string>>();
    for (const json& rec : doc.at("records")) {
      EvalRecord r;
      r.puzzle_id = rec.at("puzzle_id").get<std::string>();
      r.solver = rec.at("solver").get<std::string>();
      r.rows = rec.at("rows").get<int>();
      r.cols = rec.at("cols").get<int>();
      r.perturbation = rec.at("perturbation").get<std::string>();
      r.direct_accuracy = rec.at("direct_accuracy").get<double>();
      if (!rec.at("neighbor_accuracy").is_null()) r.neighbor_accuracy = rec.at("neighbor_accuracy").get<double>();
      r.time_ms = rec.at("time_ms").get<double>();
      report.records.push_back(std::move(r));
    }
    return report;
  } catch (const json::exception& e) {
    throw Error(Errc::DecodeError, path.string() + ": " + e.what());
  }
}

}  // namespace jigsaw
