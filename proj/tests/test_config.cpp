#include <gtest/gtest.h>

#include <cstdlib>

#include "dualheap/config.hpp"
#include "dualheap/error.hpp"
#include "dualheap/report.hpp"

using namespace dualheap;

namespace {

const char* kBase = R"(
mode: TC
seed: 7
generate: {profile: uniform, scale: 1, objects_per_partition: 64}
h1: {young_size: 256KiB, old_size: 1MiB}
h2: {size: 8MiB, region_size: 64KiB, card_segment: 8KiB, stripe_size: 64KiB}
)";

std::string config_error(const std::string& yaml) {
  try {
    parse_config(yaml);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config);
    return e.what();
  }
  return {};
}

}  // namespace

TEST(ParseSize, UnitsAndErrors) {
  EXPECT_EQ(parse_size("4096"), 4096u);
  EXPECT_EQ(parse_size("8KiB"), 8192u);
  EXPECT_EQ(parse_size("4MiB"), 4u << 20);
  EXPECT_EQ(parse_size("1GiB"), 1u << 30);
  EXPECT_EQ(parse_size("2M"), 2u << 20);
  EXPECT_THROW(parse_size("KiB"), Error);
  EXPECT_THROW(parse_size("3 parsecs"), Error);
}

TEST(Config, ParsesTree) {
  const RunConfig c = parse_config(kBase);
  EXPECT_EQ(c.driver.mode, workload::RunMode::tc);
  EXPECT_EQ(c.driver.seed, 7u);
  EXPECT_EQ(c.runtime.h1.young_size, 256u << 10);
  EXPECT_EQ(c.runtime.h2.stripe_size, 64u << 10);
  ASSERT_TRUE(c.generate.has_value());
  EXPECT_EQ(c.generate->profile, workload::Profile::uniform);
}

TEST(Config, DefaultsMatchDeskScale) {
  const RunConfig c = parse_config("trace: x.trace\n");
  EXPECT_EQ(c.runtime.h1.young_size + c.runtime.h1.old_size, 64u << 20);
  EXPECT_EQ(c.runtime.h1.card_segment, 512u);
  EXPECT_EQ(c.runtime.h1.tenuring_threshold, 2u);
  EXPECT_EQ(c.runtime.h2.h2_size, 1u << 30);
  EXPECT_EQ(c.runtime.h2.card_segment, 8u << 10);
  EXPECT_EQ(c.runtime.h2.stripe_size, 4u << 20);
  EXPECT_EQ(c.runtime.strategy.buffer_size, 2u << 20);
  EXPECT_EQ(c.runtime.strategy.queue_depth, 64u);
  EXPECT_DOUBLE_EQ(c.driver.sd_cache_fraction, 0.5);
}

TEST(Config, ValidationMessages) {
  const std::string stripe = config_error("trace: t\nh2: {stripe_size: 3000}\n");
  EXPECT_NE(stripe.find("h2.stripe_size"), std::string::npos) << stripe;
  EXPECT_NE(stripe.find("h2.card_segment"), std::string::npos) << stripe;
  EXPECT_NE(config_error("trace: t\nh1: {young_size: 1000}\n").find("h1.young_size"), std::string::npos);
  EXPECT_NE(config_error("trace: t\nbogus: 1\n").find("bogus"), std::string::npos);
  EXPECT_NE(config_error("trace: t\nh2: {sise: 1}\n").find("h2.sise"), std::string::npos);
  EXPECT_NE(config_error("mode: TC\n").find("trace"), std::string::npos);
  EXPECT_NE(config_error("trace: t\nmode: XX\n").find("mode"), std::string::npos);
  EXPECT_NE(config_error("trace: t\nmigration: {strategy: carrier_pigeon}\n").find("strategy"), std::string::npos);
  EXPECT_NE(config_error("trace: t\nsd_cache_fraction: 0\n").find("sd_cache_fraction"), std::string::npos);
}

TEST(Config, HashIsDeterministicAndSensitive) {
  const RunConfig a = parse_config(kBase);
  const RunConfig b = parse_config(kBase);
  EXPECT_EQ(config_hash(a), config_hash(b));
  RunConfig c = a;
  set_parameter(c, "card_segment", "16KiB");
  EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(Config, SweepParameters) {
  RunConfig c = parse_config(kBase);
  set_parameter(c, "stripe_size", "256KiB");
  EXPECT_EQ(c.runtime.h2.stripe_size, 256u << 10);
  EXPECT_GE(c.runtime.h2.region_size, c.runtime.h2.stripe_size);
  set_parameter(c, "h1_size", "4MiB");
  EXPECT_EQ(c.runtime.h1.young_size + c.runtime.h1.old_size, 4u << 20);
  set_parameter(c, "write_strategy", "batched_async");
  EXPECT_EQ(c.runtime.strategy.mode, WriteMode::batched_async);
  set_parameter(c, "mode", "SD");
  EXPECT_EQ(c.driver.mode, workload::RunMode::sd);
  EXPECT_THROW(set_parameter(c, "colour", "blue"), Error);
  EXPECT_THROW(set_parameter(c, "card_segment", "24KiB"), Error);
}

TEST(Config, EnvironmentOverrides) {
  RunConfig c = parse_config(kBase);
  setenv("DUALHEAP_SEED", "99", 1);
  setenv("DUALHEAP_METRICS_OUT", "/tmp/elsewhere.csv", 1);
  apply_env_overrides(c);
  unsetenv("DUALHEAP_SEED");
  unsetenv("DUALHEAP_METRICS_OUT");
  EXPECT_EQ(c.driver.seed, 99u);
  EXPECT_EQ(c.metrics_out, "/tmp/elsewhere.csv");
  setenv("DUALHEAP_SEED", "many", 1);
  EXPECT_THROW(apply_env_overrides(c), Error);
  unsetenv("DUALHEAP_SEED");
}

TEST(Report, ColumnsAreFixed) {
  const auto cols = csv_columns();
  EXPECT_EQ(cols.front(), "run_id");
  EXPECT_EQ(work_counter_columns().size(), work_counters(workload::RunMetrics{}).size());
  std::size_t norm = 0;
  for (const std::string& c : cols) norm += c.rfind("norm_", 0) == 0;
  EXPECT_EQ(norm, work_counter_columns().size());
}

TEST(Run, SameConfigSameWorkCounters) {
  const RunConfig c = parse_config(kBase);
  const auto a = workload::run_trace(resolve_trace(c), c.runtime, c.driver);
  const auto b = workload::run_trace(resolve_trace(c), c.runtime, c.driver);
  EXPECT_EQ(work_counters(a), work_counters(b));
  EXPECT_EQ(a.checksums, b.checksums);
}
