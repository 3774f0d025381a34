#include "dualheap/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dualheap/error.hpp"

namespace dualheap {

namespace {

[[noreturn]] void config_fail(const std::string& what) { fail(ErrorCode::config, what); }

void reject_unknown(const YAML::Node& node, const std::string& where, const std::set<std::string>& known) {
  if (!node.IsMap()) config_fail(where.empty() ? "config must be a mapping" : where + " must be a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!known.contains(key)) config_fail("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
  }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& name) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    config_fail("bad value for " + name);
  }
}

std::size_t size_value(const YAML::Node& node, const std::string& name) {
  try {
    return parse_size(scalar<std::string>(node, name));
  } catch (const Error& e) {
    config_fail(name + ": " + e.what());
  }
}

WriteMode parse_write_mode(const std::string& s) {
  if (s == "direct_copy") return WriteMode::direct_copy;
  if (s == "batched_async") return WriteMode::batched_async;
  config_fail("unknown write strategy '" + s + "' (expected direct_copy or batched_async)");
}

MarkingPolicy parse_policy(const std::string& s) {
  if (s == "etr") return MarkingPolicy::etr;
  if (s == "root_only") return MarkingPolicy::root_only;
  config_fail("unknown marking_policy '" + s + "' (expected etr or root_only)");
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty()) return path;
  std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

}  // namespace

std::size_t parse_size(const std::string& text) {
  std::size_t pos = 0;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos == 0) fail(ErrorCode::config, "'" + text + "' is not a size");
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + pos, value);
  if (ec != std::errc()) fail(ErrorCode::config, "'" + text + "' is out of range");
  std::string unit = text.substr(pos);
  while (!unit.empty() && unit.front() == ' ') unit.erase(0, 1);
  std::uint64_t mult = 1;
  if (unit.empty() || unit == "B") {
    mult = 1;
  } else if (unit == "K" || unit == "KB" || unit == "KiB") {
    mult = 1ull << 10;
  } else if (unit == "M" || unit == "MB" || unit == "MiB") {
    mult = 1ull << 20;
  } else if (unit == "G" || unit == "GB" || unit == "GiB") {
    mult = 1ull << 30;
  } else {
    fail(ErrorCode::config, "unknown size unit in '" + text + "'");
  }
  return std::size_t(value * mult);
}

RunConfig parse_config(const std::string& yaml_text, const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    config_fail(std::string("malformed config: ") + e.what());
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  reject_unknown(root, "", {"mode", "seed", "trace", "generate", "metrics_out", "sd_cache_fraction", "marking_policy",
                            "h1", "h2", "migration"});
  RunConfig c;
  if (root["mode"]) c.driver.mode = workload::parse_run_mode(scalar<std::string>(root["mode"], "mode"));
  if (root["seed"]) c.driver.seed = scalar<std::uint64_t>(root["seed"], "seed");
  if (root["sd_cache_fraction"]) c.driver.sd_cache_fraction = scalar<double>(root["sd_cache_fraction"], "sd_cache_fraction");
  if (root["marking_policy"]) c.runtime.policy = parse_policy(scalar<std::string>(root["marking_policy"], "marking_policy"));
  if (root["metrics_out"]) c.metrics_out = resolve(scalar<std::string>(root["metrics_out"], "metrics_out"), base_dir);
  if (root["trace"]) c.trace_path = resolve(scalar<std::string>(root["trace"], "trace"), base_dir);
  if (const YAML::Node g = root["generate"]) {
    reject_unknown(g, "generate", {"profile", "scale", "objects_per_partition"});
    GeneratedTrace gen;
    if (g["profile"]) gen.profile = workload::parse_profile(scalar<std::string>(g["profile"], "generate.profile"));
    if (g["scale"]) gen.scale = scalar<unsigned>(g["scale"], "generate.scale");
    if (g["objects_per_partition"])
      gen.objects_per_partition = scalar<std::uint64_t>(g["objects_per_partition"], "generate.objects_per_partition");
    c.generate = gen;
  }
  if (const YAML::Node h1 = root["h1"]) {
    reject_unknown(h1, "h1", {"young_size", "old_size", "tenuring_threshold", "card_segment"});
    if (h1["young_size"]) c.runtime.h1.young_size = size_value(h1["young_size"], "h1.young_size");
    if (h1["old_size"]) c.runtime.h1.old_size = size_value(h1["old_size"], "h1.old_size");
    if (h1["tenuring_threshold"])
      c.runtime.h1.tenuring_threshold = scalar<unsigned>(h1["tenuring_threshold"], "h1.tenuring_threshold");
    if (h1["card_segment"]) c.runtime.h1.card_segment = size_value(h1["card_segment"], "h1.card_segment");
  }
  if (const YAML::Node h2 = root["h2"]) {
    reject_unknown(h2, "h2", {"size", "region_size", "card_segment", "stripe_size", "scan_threads", "backing_path",
                              "scalar_writes_dirty"});
    if (h2["size"]) c.runtime.h2.h2_size = size_value(h2["size"], "h2.size");
    if (h2["region_size"]) c.runtime.h2.region_size = size_value(h2["region_size"], "h2.region_size");
    if (h2["card_segment"]) c.runtime.h2.card_segment = size_value(h2["card_segment"], "h2.card_segment");
    if (h2["stripe_size"]) c.runtime.h2.stripe_size = size_value(h2["stripe_size"], "h2.stripe_size");
    if (h2["scan_threads"]) c.runtime.h2.scan_threads = scalar<unsigned>(h2["scan_threads"], "h2.scan_threads");
    if (h2["backing_path"])
      c.runtime.h2.backing_path = resolve(scalar<std::string>(h2["backing_path"], "h2.backing_path"), base_dir);
    if (h2["scalar_writes_dirty"])
      c.runtime.h2_scalar_writes_dirty = scalar<bool>(h2["scalar_writes_dirty"], "h2.scalar_writes_dirty");
  }
  if (const YAML::Node m = root["migration"]) {
    reject_unknown(m, "migration", {"strategy", "buffer_size", "queue_depth"});
    if (m["strategy"]) c.runtime.strategy.mode = parse_write_mode(scalar<std::string>(m["strategy"], "migration.strategy"));
    if (m["buffer_size"]) c.runtime.strategy.buffer_size = size_value(m["buffer_size"], "migration.buffer_size");
    if (m["queue_depth"]) c.runtime.strategy.queue_depth = scalar<std::size_t>(m["queue_depth"], "migration.queue_depth");
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open config file '" + path + "'");
  std::stringstream text;
  text << in.rdbuf();
  const std::string dir = std::filesystem::path(path).parent_path().string();
  return parse_config(text.str(), dir.empty() ? "." : dir);
}

void apply_env_overrides(RunConfig& config) {
  if (const char* seed = std::getenv("DUALHEAP_SEED")) {
    std::uint64_t v = 0;
    const char* end = seed + std::char_traits<char>::length(seed);
    auto [ptr, ec] = std::from_chars(seed, end, v);
    if (ec != std::errc() || ptr != end || ptr == seed)
      fail(ErrorCode::config, std::string("DUALHEAP_SEED is not an unsigned integer: '") + seed + "'");
    config.driver.seed = v;
  }
  if (const char* out = std::getenv("DUALHEAP_METRICS_OUT"); out && *out) config.metrics_out = out;
}

void validate(const RunConfig& c) {
  validate(c.runtime.h1);
  validate(c.runtime.h2);
  if (c.runtime.strategy.buffer_size == 0) config_fail("migration.buffer_size must be positive");
  if (c.runtime.strategy.queue_depth == 0) config_fail("migration.queue_depth must be positive");
  if (!(c.driver.sd_cache_fraction > 0.0 && c.driver.sd_cache_fraction <= 1.0))
    config_fail("sd_cache_fraction must be in (0, 1]");
  if (c.trace_path.empty() == !c.generate.has_value())
    config_fail("exactly one of 'trace' and 'generate' must be given");
  if (c.generate && c.generate->scale == 0) config_fail("generate.scale must be positive");
}

bool is_sweep_parameter(const std::string& name) {
  return name == "card_segment" || name == "stripe_size" || name == "h1_size" || name == "write_strategy" ||
         name == "mode";
}

void set_parameter(RunConfig& c, const std::string& name, const std::string& value) {
  if (name == "card_segment") {
    c.runtime.h2.card_segment = parse_size(value);
  } else if (name == "stripe_size") {
    c.runtime.h2.stripe_size = parse_size(value);
    c.runtime.h2.region_size = std::max(c.runtime.h2.region_size, c.runtime.h2.stripe_size);
  } else if (name == "h1_size") {
    const std::size_t total = parse_size(value);
    const std::size_t seg = c.runtime.h1.card_segment;
    c.runtime.h1.young_size = std::max<std::size_t>(seg, total / 4 / seg * seg);
    c.runtime.h1.old_size = total > c.runtime.h1.young_size ? (total - c.runtime.h1.young_size) / seg * seg : 0;
  } else if (name == "write_strategy") {
    c.runtime.strategy.mode = parse_write_mode(value);
  } else if (name == "mode") {
    c.driver.mode = workload::parse_run_mode(value);
  } else {
    config_fail("unknown sweep parameter '" + name +
                "' (expected card_segment, stripe_size, h1_size, write_strategy or mode)");
  }
  validate(c);
}

std::string canonical_form(const RunConfig& c) {
  std::ostringstream s;
  const RuntimeOptions& r = c.runtime;
  s << "mode=" << workload::to_string(c.driver.mode) << "\nseed=" << c.driver.seed
    << "\nsd_cache_fraction=" << c.driver.sd_cache_fraction
    << "\nmarking_policy=" << (r.policy == MarkingPolicy::etr ? "etr" : "root_only")
    << "\nh1.young_size=" << r.h1.young_size << "\nh1.old_size=" << r.h1.old_size
    << "\nh1.tenuring_threshold=" << r.h1.tenuring_threshold << "\nh1.card_segment=" << r.h1.card_segment
    << "\nh2.size=" << r.h2.h2_size << "\nh2.region_size=" << r.h2.region_size
    << "\nh2.card_segment=" << r.h2.card_segment << "\nh2.stripe_size=" << r.h2.stripe_size
    << "\nh2.scan_threads=" << r.h2.scan_threads << "\nh2.backing=" << (r.h2.backing_path.empty() ? "anonymous" : "file")
    << "\nh2.scalar_writes_dirty=" << r.h2_scalar_writes_dirty << "\nmigration.strategy=" << to_string(r.strategy.mode)
    << "\nmigration.buffer_size=" << r.strategy.buffer_size << "\nmigration.queue_depth=" << r.strategy.queue_depth;
  if (c.generate) {
    s << "\ngenerate=" << workload::to_string(c.generate->profile) << "/" << c.generate->scale << "/"
      << c.generate->objects_per_partition;
  } else {
    s << "\ntrace=" << c.trace_path;
  }
  s << "\n";
  return s.str();
}

std::uint64_t config_hash(const RunConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical_form(c)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<workload::TraceEvent> resolve_trace(const RunConfig& c) {
  if (c.generate) {
    workload::GeneratorOptions g;
    g.objects_per_partition = c.generate->objects_per_partition;
    return workload::generate_trace(c.generate->profile, c.generate->scale, c.driver.seed, g);
  }
  return workload::load_trace(c.trace_path);
}

}  // namespace dualheap
