#include "distkp/run_log_io.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "distkp/errors.hpp"

namespace distkp {

std::string format_number(double value) { return fmt::format("{:.10g}", value); }

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
  return out;
}

}  // namespace

void write_metrics_csv(const std::filesystem::path& path, const RunLog* distkp, const RunLog* oracle,
                       const RunLog* baseline) {
  const RunLog* primary = distkp ? distkp : (baseline ? baseline : oracle);
  if (!primary) throw InputError("metrics.csv needs at least one run");
  for (const RunLog* log : {distkp, oracle, baseline}) {
    if (log && log->metrics.size() != primary->metrics.size()) throw InputError("runs differ in length");
  }
  auto out = open_out(path);
  out << "step,rmse_distkp,rmse_oracle,rmse_baseline,disagreement,messages\n";
  auto cell = [](const RunLog* log, std::size_t k) { return log ? format_number(log->metrics[k].rmse) : std::string(); };
  for (std::size_t k = 0; k < primary->metrics.size(); ++k) {
    const auto& m = primary->metrics[k];
    out << m.step << ',' << cell(distkp, k) << ',' << cell(oracle, k) << ',' << cell(baseline, k) << ','
        << format_number(m.disagreement) << ',' << m.messages << '\n';
  }
}

void write_field_csv(const std::filesystem::path& path, const PointSet& grid, const FieldEstimate& field) {
  auto out = open_out(path);
  out << "x,y,mean,variance\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out << format_number(grid.row(i)(0)) << ',' << format_number(grid.row(i)(1)) << ','
        << format_number(field.means(k)) << ',' << format_number(field.variances(k)) << '\n';
  }
}

void write_truth_csv(const std::filesystem::path& path, const PointSet& grid, const Vector& truth) {
  auto out = open_out(path);
  out << "x,y,value\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << format_number(grid.row(i)(0)) << ',' << format_number(grid.row(i)(1)) << ','
        << format_number(truth(static_cast<Eigen::Index>(i))) << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw InputError(fmt::format("'{}' is empty", path.string()));
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw InputError(fmt::format("'{}': row has {} cells, header has {}", path.string(), cells.size(),
                                   table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw InputError(fmt::format("no column named '{}'", name));
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  const std::string& cell = rows.at(row).at(column(name));
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(cell, &used);
  if (used != cell.size()) throw InputError(fmt::format("malformed number '{}'", cell));
  return v;
}

}  // namespace distkp
