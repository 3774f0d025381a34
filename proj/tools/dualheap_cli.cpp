#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "dualheap/config.hpp"
#include "dualheap/error.hpp"
#include "dualheap/report.hpp"

namespace {

using namespace dualheap;

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

std::string run_id(std::uint64_t hash, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%08llx-%zu", static_cast<unsigned long long>(hash >> 32), index);
  return buf;
}

workload::RunMetrics execute(const RunConfig& config) {
  const std::vector<workload::TraceEvent> events = resolve_trace(config);
  return workload::run_trace(events, config.runtime, config.driver);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write metrics file '" + path + "'");
  return out;
}

void summarize(const ReportRow& row) {
  const workload::RunMetrics& m = row.metrics;
  std::cout << row.run_id << " mode=" << row.mode;
  if (!row.param.empty() && row.param != "mode") std::cout << ' ' << row.param << '=' << row.value;
  std::cout << " minor=" << m.gc.minor_collections << " major=" << m.gc.major_collections
            << " moved_to_h2=" << m.gc.bytes_moved_to_h2 << " serialized=" << m.bytes_serialized
            << " regions_freed=" << m.gc.regions_freed << '\n';
}

int cmd_run(const std::string& config_path) {
  RunConfig config = load_config(config_path);
  apply_env_overrides(config);
  const std::uint64_t hash = config_hash(config);
  ReportRow row{run_id(hash, 0), hash, workload::to_string(config.driver.mode), "", "", execute(config)};
  std::ofstream out = open_output(config.metrics_out);
  write_csv_header(out);
  write_csv_row(out, row, row.metrics);
  summarize(row);
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& param, const std::vector<std::string>& values) {
  RunConfig base = load_config(config_path);
  apply_env_overrides(base);
  if (!is_sweep_parameter(param)) set_parameter(base, param, "");
  std::vector<RunConfig> configs;
  for (const std::string& v : values) {
    RunConfig c = base;
    set_parameter(c, param, v);
    configs.push_back(c);
  }
  std::ofstream out = open_output(base.metrics_out);
  write_csv_header(out);
  workload::RunMetrics first;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const std::uint64_t hash = config_hash(configs[i]);
    ReportRow row{run_id(hash, i), hash, workload::to_string(configs[i].driver.mode), param, values[i],
                  execute(configs[i])};
    if (i == 0) first = row.metrics;
    write_csv_row(out, row, first);
    out.flush();
    summarize(row);
  }
  return 0;
}

int cmd_gen_trace(const std::string& profile, unsigned scale, std::uint64_t seed, std::uint64_t objects,
                  const std::string& out_path) {
  workload::GeneratorOptions g;
  g.objects_per_partition = objects;
  const auto events = workload::generate_trace(workload::parse_profile(profile), scale, seed, g);
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write trace file '" + out_path + "'");
  workload::write_trace(out, events);
  if (!out) fail(ErrorCode::io, "failed writing trace file '" + out_path + "'");
  return 0;
}

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::config:
      return kExitConfig;
    case ErrorCode::io:
      return kExitIo;
    default:
      return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dualheap: dual-heap managed runtime and cache workload harness"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Replay one configured run and write a metrics CSV");
  run->add_option("--config", config_path, "YAML config file")->required();

  std::string param;
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep with a shared seed");
  sweep->add_option("--config", config_path, "YAML config file")->required();
  sweep->add_option("--param", param, "card_segment, stripe_size, h1_size, write_strategy or mode")->required();
  sweep->add_option("--values", values, "comma-separated values")->required()->delimiter(',');

  std::string profile;
  unsigned scale = 4;
  std::uint64_t seed = 1;
  std::uint64_t objects = workload::GeneratorOptions{}.objects_per_partition;
  std::string out_path;
  auto* gen = app.add_subcommand("gen-trace", "Write a generated workload trace");
  gen->add_option("--profile", profile, "pagerank_like, cc_like or uniform")->required();
  gen->add_option("--scale", scale, "partitions per cached dataset")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--objects-per-partition", objects, "mean partition size in objects")->check(CLI::PositiveNumber);
  gen->add_option("--out", out_path, "output trace path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path);
    if (*sweep) return cmd_sweep(config_path, param, values);
    if (*gen) return cmd_gen_trace(profile, scale, seed, objects, out_path);
  } catch (const Error& e) {
    std::cerr << "dualheap: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "dualheap: error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
