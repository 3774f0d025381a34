#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "dualheap/address_space.hpp"
#include "dualheap/h1_heap.hpp"
#include "dualheap/h2_heap.hpp"
#include "dualheap/object_model.hpp"
#include "dualheap/write_strategy.hpp"

namespace dualheap {

enum class MarkingPolicy {
  etr,        // non-transient transitive closure of each hinted root
  root_only,  // the hinted root alone
};

struct RuntimeOptions {
  H1Config h1;
  H2Config h2;
  WriteStrategy strategy;
  MarkingPolicy policy = MarkingPolicy::etr;
  // Without H2 the runtime is a plain generational heap.
  bool enable_h2 = true;
  // Scalar stores into H2 dirty the card like reference stores do. Turning
  // this off filters them in the barrier.
  bool h2_scalar_writes_dirty = true;
};

struct RootSlot {
  std::uint32_t index = 0;
  std::uint32_t generation = 0;

  friend bool operator==(const RootSlot&, const RootSlot&) = default;
};

struct PersistHint {
  ObjectHandle root;
  PartitionId partition = 0;
};

using Nanos = std::chrono::nanoseconds;

struct MinorStats {
  bool escalated = false;  // promotion could not be guaranteed; a major ran instead
  std::size_t objects_copied = 0;
  std::size_t bytes_copied = 0;
  std::size_t objects_promoted = 0;
  std::size_t bytes_promoted = 0;
  std::size_t old_cards_scanned = 0;
  std::size_t backward_refs = 0;
  CardScanResult h2_scan;
  Nanos duration{0};
};

struct MajorStats {
  std::size_t objects_marked = 0;
  std::size_t closure_objects = 0;
  std::size_t objects_moved_to_h2 = 0;
  std::size_t bytes_moved_to_h2 = 0;
  std::size_t h1_bytes_before = 0;
  std::size_t h1_bytes_after = 0;
  std::size_t old_bytes_after = 0;
  std::size_t groups_merged = 0;
  std::size_t flush_ops = 0;
  std::size_t large_objects = 0;
  std::size_t backward_refs_adjusted = 0;
  std::vector<std::size_t> regions_freed;
  std::size_t reclaim_ops = 0;
  Nanos mark{0};
  Nanos precompact{0};
  Nanos compact{0};
  Nanos adjust{0};
  Nanos duration{0};
};

struct ClosureResult {
  std::size_t marked = 0;
  std::vector<ObjectHandle> objects;
};

// Cumulative work counters across the lifetime of a runtime.
struct GcCounters {
  std::size_t minor_collections = 0;
  std::size_t major_collections = 0;
  Nanos minor_time{0};
  Nanos major_time{0};
  Nanos mark_time{0};
  Nanos precompact_time{0};
  Nanos compact_time{0};
  Nanos adjust_time{0};
  std::size_t objects_copied = 0;
  std::size_t bytes_copied = 0;
  std::size_t objects_promoted = 0;
  std::size_t objects_marked = 0;
  std::size_t h2_cards_examined = 0;
  std::size_t h2_cards_scanned = 0;
  std::size_t h2_segment_bytes_walked = 0;
  std::size_t h2_cards_cleaned = 0;
  std::size_t h2_boundary_cards_kept = 0;
  std::size_t h2_scans = 0;
  std::size_t backward_refs_found = 0;
  std::size_t objects_moved_to_h2 = 0;
  std::size_t bytes_moved_to_h2 = 0;
  std::size_t flush_ops = 0;
  std::size_t regions_freed = 0;
  std::size_t reclaim_ops = 0;
  std::size_t h1_bytes_before_major = 0;
  std::size_t h1_bytes_reclaimed_major = 0;
};

struct BarrierStats {
  std::size_t writes = 0;
  std::size_t h1_card_marks = 0;
  std::size_t h2_card_marks = 0;
  std::size_t group_merges = 0;
};

enum class GcEvent { after_card_scan, after_minor, after_major };

// The dual heap runtime: a generational collected heap (H1) and an
// uncollected region heap (H2) sharing one address space. All mutator
// operations and collections run on the calling thread; handles obtained
// before a collection are stale afterwards unless held in a root slot.
class Runtime {
 public:
  explicit Runtime(const RuntimeOptions& options);
  ~Runtime();

  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  const RuntimeOptions& options() const { return _options; }

  // -- object model
  const ClassDescriptor& register_class(std::vector<FieldSpec> layout) {
    return _classes.register_class(std::move(layout));
  }
  const ClassRegistry& classes() const { return _classes; }
  HeapSpace classify_handle(ObjectHandle h) const;
  const ClassDescriptor& class_of(ObjectHandle h) const;
  ObjectHeader header(ObjectHandle h) const;

  // -- collected heap
  ObjectHandle allocate(const ClassDescriptor& desc);
  MinorStats minor_collect();
  MajorStats major_collect();
  void dirty_h1_card(ObjectHandle h) { _h1.dirty_card(h.address()); }

  // -- mutator interface
  void write_ref(ObjectHandle obj, std::size_t field_index, ObjectHandle target);
  void write_scalar(ObjectHandle obj, std::size_t field_index, std::uint64_t value);
  ObjectHandle read_ref(ObjectHandle obj, std::size_t field_index) const;
  std::uint64_t read_scalar(ObjectHandle obj, std::size_t field_index) const;

  RootSlot add_root(ObjectHandle h);
  void drop_root(RootSlot slot);
  ObjectHandle root(RootSlot slot) const;
  void set_root(RootSlot slot, ObjectHandle h);
  std::size_t root_count() const { return _live_roots; }
  // Contents of every live root slot, including the cache table's slots.
  std::vector<ObjectHandle> root_values() const {
    std::vector<ObjectHandle> out;
    for (const RootEntry& r : _roots)
      if (r.live && r.value != 0) out.emplace_back(r.value);
    return out;
  }

  // -- migration
  // Marks root as a cache candidate of partition and registers it in the
  // runtime's cache table. Objects move at the next major collection.
  void persist(ObjectHandle root, PartitionId partition);
  // Drops the cache table entries of partition. Unknown partitions are a
  // no-op; H2 space is recovered by a later major collection.
  void unpersist(PartitionId partition);
  std::vector<ObjectHandle> cached_roots(PartitionId partition) const;
  std::vector<PersistHint> pending_hints() const;

  // Marks the closure of the hints. Normally invoked by major_collect after
  // liveness marking; callable directly for inspection.
  ClosureResult etr_mark_closure(std::span<const PersistHint> hints);

  // -- inspection
  const HeapLayout& layout() const { return _memory->layout(); }
  const AddressSpace& memory() const { return *_memory; }
  const H1Heap& h1() const { return _h1; }
  H2Heap* h2() { return _h2.get(); }
  const H2Heap* h2() const { return _h2.get(); }
  const GcCounters& counters() const { return _counters; }
  const BarrierStats& barrier_stats() const { return _barrier; }
  std::uint64_t load_word(Address a) const { return _memory->word(a); }

  void set_gc_observer(std::function<void(GcEvent)> observer) { _observer = std::move(observer); }

  // Visits every parseable H1 object (old, then survivors, then eden) and
  // every object in allocated H2 regions.
  void for_each_object(const std::function<void(ObjectHandle, const ClassDescriptor&)>& fn) const;

 private:
  struct RootEntry {
    Address value = 0;
    std::uint32_t generation = 0;
    bool live = false;
  };
  struct CacheEntry {
    RootSlot slot;
    PartitionId partition = 0;
    bool pending = true;  // not yet considered by a major collection
  };

  std::uint64_t& word(Address a) const { return _memory->word(a); }
  const ClassDescriptor& descriptor_at(Address obj) const;
  const FieldSpec& checked_field(ObjectHandle obj, std::size_t field_index, FieldKind kind) const;
  RootEntry& root_entry(RootSlot slot);
  const RootEntry& root_entry(RootSlot slot) const;

  template <class Fn>
  void for_each_root(Fn&& fn) {
    for (RootEntry& r : _roots)
      if (r.live) fn(r.value);
  }
  // Walks old, from and eden in address order. fn(obj, size) may move the
  // object; the walk has already read its size.
  template <class Fn>
  void walk_h1(Fn&& fn);

  bool minor_is_safe() const { return _h1.old().free() >= _h1.young_used(); }
  void scan_h2_cards(CardScanResult& out);
  MinorStats minor_collect_impl();
  MajorStats major_collect_impl(bool run_minor_first);
  void abort_major();
  void notify(GcEvent e) {
    if (_observer) _observer(e);
  }

  RuntimeOptions _options;
  ClassRegistry _classes;
  std::unique_ptr<AddressSpace> _memory;
  H1Heap _h1;
  std::unique_ptr<H2Heap> _h2;

  std::vector<RootEntry> _roots;
  std::vector<std::uint32_t> _free_roots;
  std::size_t _live_roots = 0;
  std::vector<CacheEntry> _cache;

  GcCounters _counters;
  BarrierStats _barrier;
  std::function<void(GcEvent)> _observer;
};

// Keeps a handle valid across allocations by parking it in a root slot.
class LocalRoot {
 public:
  LocalRoot(Runtime& rt, ObjectHandle h) : _rt(rt), _slot(rt.add_root(h)) {}
  ~LocalRoot() { _rt.drop_root(_slot); }
  LocalRoot(const LocalRoot&) = delete;
  LocalRoot& operator=(const LocalRoot&) = delete;

  ObjectHandle get() const { return _rt.root(_slot); }
  void set(ObjectHandle h) { _rt.set_root(_slot, h); }

 private:
  Runtime& _rt;
  RootSlot _slot;
};

}  // namespace dualheap
