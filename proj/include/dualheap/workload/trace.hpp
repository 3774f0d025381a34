#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace dualheap::workload {

using PartitionKey = std::uint32_t;

// Layout characters: 'r' reference, 't' transient reference, 's' scalar.
struct DefineClass {
  std::uint32_t id = 0;
  std::string layout;
};
struct BuildPartition {
  PartitionKey partition = 0;
  std::uint32_t class_id = 0;
  std::uint64_t object_count = 0;
  std::uint32_t fan_out = 0;
  double transient_fraction = 0.0;
  std::uint64_t seed = 0;
};
struct Persist {
  PartitionKey partition = 0;
};
enum class AccessKind { scan, point };
struct Access {
  PartitionKey partition = 0;
  AccessKind kind = AccessKind::scan;
  std::uint64_t seed = 0;
};
struct Mutate {
  PartitionKey partition = 0;
  std::uint64_t count = 0;
  std::uint64_t seed = 0;
};
struct Unpersist {
  PartitionKey partition = 0;
};
enum class GcKind { minor, major };
struct GcHint {
  GcKind kind = GcKind::major;
};

using TraceEvent = std::variant<DefineClass, BuildPartition, Persist, Access, Mutate, Unpersist, GcHint>;

// One event per line; blank lines and lines starting with '#' are ignored.
//
//   class <id> <layout>
//   build <partition> <class> <count> <fan_out> <transient_fraction> <seed>
//   persist <partition>
//   access <partition> scan|point <seed>
//   mutate <partition> <count> <seed>
//   unpersist <partition>
//   gc minor|major
//
// Malformed lines raise TraceError carrying the zero-based event index.
std::vector<TraceEvent> parse_trace(std::istream& in);
std::vector<TraceEvent> load_trace(const std::string& path);
std::string format_event(const TraceEvent& event);
void write_trace(std::ostream& out, const std::vector<TraceEvent>& events);

enum class Profile { pagerank_like, cc_like, uniform };

Profile parse_profile(const std::string& name);
std::string to_string(Profile profile);

struct GeneratorOptions {
  std::uint64_t objects_per_partition = 4096;
};

std::vector<TraceEvent> generate_trace(Profile profile, unsigned scale, std::uint64_t seed,
                                       const GeneratorOptions& options = {});

}  // namespace dualheap::workload
