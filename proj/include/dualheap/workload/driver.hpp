#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dualheap/runtime.hpp"
#include "dualheap/workload/trace.hpp"

namespace dualheap::workload {

// TC: dual heap. SD: single heap, cached partitions beyond the on-heap
// budget are serialized and read back on access. MO: single heap large
// enough to hold everything.
enum class RunMode { tc, sd, mo };

RunMode parse_run_mode(const std::string& name);
std::string to_string(RunMode mode);

struct DriverOptions {
  RunMode mode = RunMode::tc;
  std::uint64_t seed = 0;
  double sd_cache_fraction = 0.5;
};

struct RunMetrics {
  GcCounters gc;
  BarrierStats barrier;
  std::size_t h2_dirty_cards = 0;
  std::size_t h2_boundary_dirty_cards = 0;
  std::size_t h2_cards_in_use = 0;
  std::size_t bytes_serialized = 0;
  std::size_t bytes_deserialized = 0;
  std::size_t partitions_evicted = 0;
  std::size_t mutator_steps = 0;
  std::size_t events = 0;
  std::vector<std::uint64_t> checksums;

  double boundary_dirty_fraction() const {
    return h2_cards_in_use == 0 ? 0.0 : double(h2_boundary_dirty_cards) / double(h2_cards_in_use);
  }
  double old_reclaimed_fraction() const {
    return gc.h1_bytes_before_major == 0 ? 0.0 : double(gc.h1_bytes_reclaimed_major) / double(gc.h1_bytes_before_major);
  }
  std::uint64_t checksum_digest() const;
};

// Options actually used for a mode: MO folds the H2 budget into the old
// generation and SD/MO disable H2.
RuntimeOptions options_for_mode(RuntimeOptions base, RunMode mode);

class Driver {
 public:
  Driver(const RuntimeOptions& base, const DriverOptions& options);
  ~Driver();

  void apply(const TraceEvent& event);
  RunMetrics finish();

  Runtime& runtime() { return *_rt; }
  // Root of a built partition, null when absent or evicted.
  ObjectHandle partition_root(PartitionKey p) const;
  bool evicted(PartitionKey p) const;

 private:
  struct Impl;
  std::unique_ptr<Runtime> _rt;
  std::unique_ptr<Impl> _impl;
};

RunMetrics run_trace(const std::vector<TraceEvent>& events, const RuntimeOptions& base, const DriverOptions& options);

// Checksum of a partition graph: breadth-first over non-transient
// references, folding scalars and the discovery index of each target.
std::uint64_t scan_checksum(const Runtime& rt, ObjectHandle root);
std::uint64_t point_checksum(const Runtime& rt, ObjectHandle root, std::uint64_t seed);

}  // namespace dualheap::workload
