#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "dualheap/runtime.hpp"
#include "dualheap/workload/driver.hpp"
#include "dualheap/workload/trace.hpp"

namespace dualheap {

struct GeneratedTrace {
  workload::Profile profile = workload::Profile::pagerank_like;
  unsigned scale = 4;
  std::uint64_t objects_per_partition = 4096;
};

struct RunConfig {
  RuntimeOptions runtime;
  workload::DriverOptions driver;
  // Exactly one of trace_path and generate is set.
  std::string trace_path;
  std::optional<GeneratedTrace> generate;
  std::string metrics_out = "metrics.csv";
};

// Parses "4096", "8KiB", "4MiB", "1GiB" (also K/M/G and KB/MB/GB as binary units).
std::size_t parse_size(const std::string& text);

// Relative paths inside the document resolve against base_dir.
RunConfig parse_config(const std::string& yaml_text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

// DUALHEAP_SEED and DUALHEAP_METRICS_OUT override the file.
void apply_env_overrides(RunConfig& config);

// Throws a config error naming the violated constraint.
void validate(const RunConfig& config);

// Sweepable parameters: card_segment, stripe_size, h1_size, write_strategy, mode.
void set_parameter(RunConfig& config, const std::string& name, const std::string& value);
bool is_sweep_parameter(const std::string& name);

// Canonical text of every setting that affects a run, and its FNV-1a hash.
std::string canonical_form(const RunConfig& config);
std::uint64_t config_hash(const RunConfig& config);

std::vector<workload::TraceEvent> resolve_trace(const RunConfig& config);

}  // namespace dualheap
