#include "dualheap/workload/trace.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dualheap/error.hpp"

namespace dualheap::workload {

namespace {

template <class T>
T parse_number(const std::string& token, std::size_t index, const char* what) {
  T value{};
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw TraceError(index, "bad " + std::string(what) + " '" + token + "'");
  return value;
}

bool valid_layout(const std::string& layout) {
  return layout.find_first_not_of("rts") == std::string::npos;
}

TraceEvent parse_line(const std::vector<std::string>& t, std::size_t index) {
  auto expect = [&](std::size_t n) {
    if (t.size() != n)
      throw TraceError(index, "'" + t[0] + "' expects " + std::to_string(n - 1) + " arguments");
  };
  const std::string& op = t[0];
  if (op == "class") {
    expect(3);
    std::string layout = t[2] == "-" ? "" : t[2];
    if (!valid_layout(layout)) throw TraceError(index, "bad layout '" + t[2] + "'");
    return DefineClass{parse_number<std::uint32_t>(t[1], index, "class id"), layout};
  }
  if (op == "build") {
    expect(7);
    BuildPartition b;
    b.partition = parse_number<PartitionKey>(t[1], index, "partition");
    b.class_id = parse_number<std::uint32_t>(t[2], index, "class id");
    b.object_count = parse_number<std::uint64_t>(t[3], index, "object count");
    b.fan_out = parse_number<std::uint32_t>(t[4], index, "fan out");
    b.transient_fraction = parse_number<double>(t[5], index, "transient fraction");
    b.seed = parse_number<std::uint64_t>(t[6], index, "seed");
    if (b.object_count == 0) throw TraceError(index, "object count must be positive");
    if (!(b.transient_fraction >= 0.0 && b.transient_fraction <= 1.0))
      throw TraceError(index, "transient fraction must be in [0, 1]");
    return b;
  }
  if (op == "persist") {
    expect(2);
    return Persist{parse_number<PartitionKey>(t[1], index, "partition")};
  }
  if (op == "access") {
    expect(4);
    AccessKind kind;
    if (t[2] == "scan") {
      kind = AccessKind::scan;
    } else if (t[2] == "point") {
      kind = AccessKind::point;
    } else {
      throw TraceError(index, "bad access kind '" + t[2] + "'");
    }
    return Access{parse_number<PartitionKey>(t[1], index, "partition"), kind,
                  parse_number<std::uint64_t>(t[3], index, "seed")};
  }
  if (op == "mutate") {
    expect(4);
    return Mutate{parse_number<PartitionKey>(t[1], index, "partition"),
                  parse_number<std::uint64_t>(t[2], index, "count"), parse_number<std::uint64_t>(t[3], index, "seed")};
  }
  if (op == "unpersist") {
    expect(2);
    return Unpersist{parse_number<PartitionKey>(t[1], index, "partition")};
  }
  if (op == "gc") {
    expect(2);
    if (t[1] == "minor") return GcHint{GcKind::minor};
    if (t[1] == "major") return GcHint{GcKind::major};
    throw TraceError(index, "bad gc kind '" + t[1] + "'");
  }
  throw TraceError(index, "unknown event '" + op + "'");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct Formatter {
  std::string operator()(const DefineClass& e) const {
    return "class " + std::to_string(e.id) + " " + (e.layout.empty() ? "-" : e.layout);
  }
  std::string operator()(const BuildPartition& e) const {
    return "build " + std::to_string(e.partition) + " " + std::to_string(e.class_id) + " " +
           std::to_string(e.object_count) + " " + std::to_string(e.fan_out) + " " + format_double(e.transient_fraction) +
           " " + std::to_string(e.seed);
  }
  std::string operator()(const Persist& e) const { return "persist " + std::to_string(e.partition); }
  std::string operator()(const Access& e) const {
    return "access " + std::to_string(e.partition) + (e.kind == AccessKind::scan ? " scan " : " point ") +
           std::to_string(e.seed);
  }
  std::string operator()(const Mutate& e) const {
    return "mutate " + std::to_string(e.partition) + " " + std::to_string(e.count) + " " + std::to_string(e.seed);
  }
  std::string operator()(const Unpersist& e) const { return "unpersist " + std::to_string(e.partition); }
  std::string operator()(const GcHint& e) const { return e.kind == GcKind::minor ? "gc minor" : "gc major"; }
};

}  // namespace

std::vector<TraceEvent> parse_trace(std::istream& in) {
  std::vector<TraceEvent> events;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::vector<std::string> tokens;
    for (std::string w; words >> w;) tokens.push_back(w);
    if (tokens.empty() || tokens[0][0] == '#') continue;
    events.push_back(parse_line(tokens, events.size()));
  }
  return events;
}

std::vector<TraceEvent> load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open trace file '" + path + "'");
  return parse_trace(in);
}

std::string format_event(const TraceEvent& event) { return std::visit(Formatter{}, event); }

void write_trace(std::ostream& out, const std::vector<TraceEvent>& events) {
  for (const TraceEvent& e : events) out << format_event(e) << '\n';
}

Profile parse_profile(const std::string& name) {
  if (name == "pagerank_like") return Profile::pagerank_like;
  if (name == "cc_like") return Profile::cc_like;
  if (name == "uniform") return Profile::uniform;
  fail(ErrorCode::config, "unknown profile '" + name + "' (expected pagerank_like, cc_like or uniform)");
}

std::string to_string(Profile profile) {
  switch (profile) {
    case Profile::pagerank_like:
      return "pagerank_like";
    case Profile::cc_like:
      return "cc_like";
    case Profile::uniform:
      return "uniform";
  }
  return "?";
}

}  // namespace dualheap::workload
