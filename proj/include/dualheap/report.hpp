#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dualheap/workload/driver.hpp"

namespace dualheap {

struct ReportRow {
  std::string run_id;
  std::uint64_t config_hash = 0;
  std::string mode;
  std::string param;
  std::string value;
  workload::RunMetrics metrics;
};

// Work counters in column order; these get a normalized column in sweeps.
std::vector<std::string> work_counter_columns();
std::vector<std::uint64_t> work_counters(const workload::RunMetrics& m);

std::vector<std::string> csv_columns();
void write_csv_header(std::ostream& out);
// baseline supplies the denominators of the norm_ columns; a zero
// denominator yields an empty cell.
void write_csv_row(std::ostream& out, const ReportRow& row, const workload::RunMetrics& baseline);

}  // namespace dualheap
