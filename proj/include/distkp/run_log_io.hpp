#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "distkp/sim.hpp"

namespace distkp {

/// Numbers are written with fmt "{:.10g}" (10 significant digits, shortest of fixed/exponent).
std::string format_number(double value);

/// metrics.csv: step,rmse_distkp,rmse_oracle,rmse_baseline,disagreement,messages
/// A run that was not executed leaves its column empty. disagreement and messages
/// come from the first of distkp, baseline, oracle that is present.
void write_metrics_csv(const std::filesystem::path& path, const RunLog* distkp, const RunLog* oracle,
                       const RunLog* baseline);

/// field_t<STEP>_agent<ID>.csv: x,y,mean,variance (grid order: x fastest)
void write_field_csv(const std::filesystem::path& path, const PointSet& grid, const FieldEstimate& field);

/// truth_t<STEP>.csv: x,y,value
void write_truth_csv(const std::filesystem::path& path, const PointSet& grid, const Vector& truth);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  /// Empty cells read as NaN.
  double number(std::size_t row, const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace distkp
