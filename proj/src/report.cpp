#include "dualheap/report.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>

namespace dualheap {

namespace {

double millis(Nanos n) { return std::chrono::duration<double, std::milli>(n).count(); }

std::string fixed(double v, const char* fmt = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

const std::vector<std::string> kIdColumns = {"run_id", "config_hash", "mode", "param", "value"};

const std::vector<std::string> kWorkColumns = {
    "minor_collections",   "major_collections",  "objects_copied",         "bytes_copied",
    "objects_promoted",    "objects_marked",     "h2_cards_examined",      "h2_cards_scanned",
    "h2_segment_bytes_walked", "h2_cards_cleaned", "h2_boundary_cards_kept", "h2_dirty_cards",
    "h2_boundary_dirty_cards", "h2_cards_in_use",  "backward_refs_found",    "objects_moved_to_h2",
    "bytes_moved_to_h2",   "flush_ops",          "regions_freed",          "reclaim_ops",
    "bytes_serialized",    "bytes_deserialized", "partitions_evicted",     "mutator_steps",
    "barrier_writes",      "h1_card_marks",      "h2_card_marks",          "h1_bytes_before_major",
    "h1_bytes_reclaimed_major"};

const std::vector<std::string> kDerivedColumns = {"boundary_dirty_fraction", "old_reclaimed_fraction", "checksum_digest"};

const std::vector<std::string> kTimeColumns = {"minor_ms", "major_ms", "mark_ms", "precompact_ms", "compact_ms",
                                               "adjust_ms"};

}  // namespace

std::vector<std::string> work_counter_columns() { return kWorkColumns; }

std::vector<std::uint64_t> work_counters(const workload::RunMetrics& m) {
  const GcCounters& g = m.gc;
  return {g.minor_collections,    g.major_collections,     g.objects_copied,           g.bytes_copied,
          g.objects_promoted,     g.objects_marked,        g.h2_cards_examined,        g.h2_cards_scanned,
          g.h2_segment_bytes_walked, g.h2_cards_cleaned,   g.h2_boundary_cards_kept,   m.h2_dirty_cards,
          m.h2_boundary_dirty_cards, m.h2_cards_in_use,    g.backward_refs_found,      g.objects_moved_to_h2,
          g.bytes_moved_to_h2,    g.flush_ops,             g.regions_freed,            g.reclaim_ops,
          m.bytes_serialized,     m.bytes_deserialized,    m.partitions_evicted,       m.mutator_steps,
          m.barrier.writes,       m.barrier.h1_card_marks, m.barrier.h2_card_marks,    g.h1_bytes_before_major,
          g.h1_bytes_reclaimed_major};
}

std::vector<std::string> csv_columns() {
  std::vector<std::string> cols = kIdColumns;
  cols.insert(cols.end(), kWorkColumns.begin(), kWorkColumns.end());
  cols.insert(cols.end(), kDerivedColumns.begin(), kDerivedColumns.end());
  cols.insert(cols.end(), kTimeColumns.begin(), kTimeColumns.end());
  for (const std::string& c : kWorkColumns) cols.push_back("norm_" + c);
  return cols;
}

void write_csv_header(std::ostream& out) {
  const std::vector<std::string> cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

void write_csv_row(std::ostream& out, const ReportRow& row, const workload::RunMetrics& baseline) {
  const workload::RunMetrics& m = row.metrics;
  out << row.run_id << ',' << hex(row.config_hash) << ',' << row.mode << ',' << row.param << ',' << row.value;
  const std::vector<std::uint64_t> work = work_counters(m);
  for (std::uint64_t v : work) out << ',' << v;
  out << ',' << fixed(m.boundary_dirty_fraction()) << ',' << fixed(m.old_reclaimed_fraction()) << ','
      << hex(m.checksum_digest());
  const GcCounters& g = m.gc;
  for (Nanos t : {g.minor_time, g.major_time, g.mark_time, g.precompact_time, g.compact_time, g.adjust_time})
    out << ',' << fixed(millis(t), "%.3f");
  const std::vector<std::uint64_t> base = work_counters(baseline);
  for (std::size_t i = 0; i < work.size(); ++i) {
    out << ',';
    if (base[i] != 0) out << fixed(double(work[i]) / double(base[i]));
  }
  out << '\n';
}

}  // namespace dualheap
