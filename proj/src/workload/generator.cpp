#include <algorithm>
#include <random>

#include "dualheap/workload/trace.hpp"

namespace dualheap::workload {

namespace {

constexpr std::uint32_t kLinksClass = 1;
constexpr std::uint32_t kRanksClass = 2;
constexpr std::uint32_t kTempClass = 3;

class Builder {
 public:
  Builder(std::uint64_t seed, const GeneratorOptions& options) : _rng(seed), _options(options) {
    _events.push_back(DefineClass{kLinksClass, "rrss"});
    _events.push_back(DefineClass{kRanksClass, "rrts"});
    _events.push_back(DefineClass{kTempClass, "rrs"});
  }

  std::uint64_t seed() { return _rng(); }

  void build(PartitionKey p, std::uint32_t cls, double transient_fraction) {
    const std::uint64_t base = std::max<std::uint64_t>(1, _options.objects_per_partition);
    const std::uint64_t count = std::max<std::uint64_t>(1, base * (3 + _rng() % 3) / 4);
    _events.push_back(BuildPartition{p, cls, count, 2, transient_fraction, seed()});
  }
  void persist(PartitionKey p) { _events.push_back(Persist{p}); }
  void scan(PartitionKey p) { _events.push_back(Access{p, AccessKind::scan, seed()}); }
  void point(PartitionKey p) { _events.push_back(Access{p, AccessKind::point, seed()}); }
  void mutate(PartitionKey p, std::uint64_t n) { _events.push_back(Mutate{p, n, seed()}); }
  void unpersist(PartitionKey p) { _events.push_back(Unpersist{p}); }
  void major() { _events.push_back(GcHint{GcKind::major}); }

  std::vector<TraceEvent> take() { return std::move(_events); }
  std::mt19937_64& rng() { return _rng; }

 private:
  std::mt19937_64 _rng;
  GeneratorOptions _options;
  std::vector<TraceEvent> _events;
};

PartitionKey links_key(unsigned k) { return 1 + k; }
PartitionKey ranks_key(unsigned it, unsigned k) { return 1000 * (it + 1) + k; }
PartitionKey temp_key(unsigned it, unsigned k) { return 1000000 + 1000 * it + k; }

// Iterative jobs: a long-lived input RDD re-read every iteration, one cached
// RDD per iteration that is read again `reread_gap` iterations later and
// dropped `drop_gap` iterations later, and uncached temporaries.
std::vector<TraceEvent> iterative(Builder& b, unsigned partitions, unsigned iterations, unsigned reread_gap,
                                  unsigned drop_gap) {
  for (unsigned k = 0; k < partitions; ++k) {
    b.build(links_key(k), kLinksClass, 0.0);
    b.persist(links_key(k));
    b.scan(links_key(k));
  }
  for (unsigned it = 1; it <= iterations; ++it) {
    for (unsigned k = 0; k < partitions; ++k) {
      b.build(temp_key(it, k), kTempClass, 0.0);
      b.scan(temp_key(it, k));
      b.scan(links_key(k));
      b.unpersist(temp_key(it, k));

      b.build(ranks_key(it, k), kRanksClass, 0.1);
      b.persist(ranks_key(it, k));
      b.scan(ranks_key(it, k));
      b.mutate(ranks_key(it, k), 4);
      if (it > reread_gap) b.point(ranks_key(it - reread_gap, k));
      if (it > drop_gap) b.unpersist(ranks_key(it - drop_gap, k));
    }
    b.major();
  }
  const unsigned first_live = iterations > drop_gap ? iterations - drop_gap + 1 : 1;
  for (unsigned k = 0; k < partitions; ++k) {
    b.scan(links_key(k));
    for (unsigned it = first_live; it <= iterations; ++it) b.scan(ranks_key(it, k));
  }
  for (unsigned k = 0; k < partitions; ++k) {
    for (unsigned it = first_live; it <= iterations; ++it) b.unpersist(ranks_key(it, k));
    b.unpersist(links_key(k));
  }
  b.major();
  return b.take();
}

std::vector<TraceEvent> uniform(Builder& b, unsigned partitions, unsigned rounds) {
  std::vector<PartitionKey> keys;
  for (unsigned k = 0; k < partitions; ++k) {
    keys.push_back(links_key(k));
    b.build(links_key(k), kLinksClass, 0.0);
    b.persist(links_key(k));
  }
  for (unsigned r = 0; r < rounds; ++r) {
    std::shuffle(keys.begin(), keys.end(), b.rng());
    for (PartitionKey p : keys) b.scan(p);
    b.major();
  }
  for (PartitionKey p : keys) b.unpersist(p);
  b.major();
  return b.take();
}

}  // namespace

std::vector<TraceEvent> generate_trace(Profile profile, unsigned scale, std::uint64_t seed,
                                       const GeneratorOptions& options) {
  scale = std::max(1u, scale);
  Builder b(seed, options);
  switch (profile) {
    case Profile::pagerank_like:
      return iterative(b, scale, 2 + scale, 1, 2);
    case Profile::cc_like:
      return iterative(b, scale, 4 + scale, 2, 4);
    case Profile::uniform:
      return uniform(b, 2 * scale, 4);
  }
  return {};
}

}  // namespace dualheap::workload
