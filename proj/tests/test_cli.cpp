#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string output;
};

Result cli(const std::string& args, const std::string& env = "") {
  const fs::path log = fs::temp_directory_path() / "dualheap_cli_test.log";
  const std::string cmd = env + " " + DUALHEAP_CLI_PATH + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream s;
  s << in.rdbuf();
  r.output = s.str();
  return r;
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("dualheap_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  fs::path write_config(const std::string& extra) {
    const fs::path p = dir / "run.yaml";
    std::ofstream out(p);
    out << "mode: TC\nseed: 3\nmetrics_out: out.csv\n"
           "h1: {young_size: 256KiB, old_size: 1MiB}\n"
           "h2: {size: 16MiB, region_size: 64KiB, card_segment: 8KiB, stripe_size: 64KiB}\n"
        << extra;
    return p;
  }

  fs::path dir;
};

}  // namespace

TEST_F(CliTest, GenTraceThenRunWritesOneRow) {
  const fs::path trace = dir / "t.trace";
  Result g = cli("gen-trace --profile pagerank_like --scale 1 --seed 4 --objects-per-partition 256 --out " +
                 trace.string());
  ASSERT_EQ(g.code, 0) << g.output;
  const fs::path cfg = write_config("trace: t.trace\n");
  Result r = cli("run --config " + cfg.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const auto rows = lines(dir / "out.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].rfind("run_id,config_hash,mode", 0), 0u);
}

TEST_F(CliTest, GenTraceIsByteIdentical) {
  for (const char* name : {"a.trace", "b.trace"})
    ASSERT_EQ(cli("gen-trace --profile cc_like --scale 2 --seed 8 --out " + (dir / name).string()).code, 0);
  std::ifstream a(dir / "a.trace");
  std::ifstream b(dir / "b.trace");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_FALSE(sa.str().empty());
}

TEST_F(CliTest, StripeValidationNamesBothFields) {
  const fs::path cfg = dir / "bad.yaml";
  std::ofstream(cfg) << "trace: t.trace\nh2: {card_segment: 8KiB, stripe_size: 3000}\n";
  Result r = cli("run --config " + cfg.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("h2.stripe_size"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("h2.card_segment"), std::string::npos) << r.output;
}

TEST_F(CliTest, MissingTraceIsIoError) {
  const fs::path cfg = write_config("trace: missing.trace\n");
  Result r = cli("run --config " + cfg.string());
  EXPECT_EQ(r.code, 3) << r.output;
}

TEST_F(CliTest, MissingConfigIsIoError) { EXPECT_EQ(cli("run --config " + (dir / "nope.yaml").string()).code, 3); }

TEST_F(CliTest, SweepModesNormalizesToFirst) {
  const fs::path cfg =
      write_config("generate: {profile: uniform, scale: 2, objects_per_partition: 512}\nsd_cache_fraction: 0.05\n");
  Result r = cli("sweep --config " + cfg.string() + " --param mode --values TC,SD");
  ASSERT_EQ(r.code, 0) << r.output;
  const auto rows = lines(dir / "out.csv");
  ASSERT_EQ(rows.size(), 3u);
  std::vector<std::string> header;
  std::stringstream hs(rows[0]);
  for (std::string c; std::getline(hs, c, ',');) header.push_back(c);
  auto cell = [&](std::size_t row, const std::string& col) {
    std::stringstream rs(rows[row]);
    std::string c;
    for (std::size_t i = 0; std::getline(rs, c, ','); ++i)
      if (header[i] == col) return c;
    return std::string("?");
  };
  EXPECT_EQ(cell(1, "mode"), "TC");
  EXPECT_EQ(cell(2, "mode"), "SD");
  EXPECT_EQ(cell(1, "bytes_serialized"), "0");
  EXPECT_NE(cell(2, "bytes_serialized"), "0");
  EXPECT_EQ(cell(1, "norm_major_collections"), "1.000000");
  EXPECT_EQ(cell(1, "checksum_digest"), cell(2, "checksum_digest"));
}

TEST_F(CliTest, EnvironmentOverridesOutput) {
  const fs::path cfg = write_config("generate: {profile: uniform, scale: 1, objects_per_partition: 64}\n");
  const fs::path out = dir / "env.csv";
  Result r = cli("run --config " + cfg.string(), "DUALHEAP_METRICS_OUT=" + out.string() + " DUALHEAP_SEED=5");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(lines(out).size(), 2u);
  EXPECT_FALSE(fs::exists(dir / "out.csv"));
}

TEST_F(CliTest, UnknownSweepParameter) {
  const fs::path cfg = write_config("generate: {profile: uniform, scale: 1}\n");
  Result r = cli("sweep --config " + cfg.string() + " --param colour --values red");
  EXPECT_EQ(r.code, 2);
}
