#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dualheap/address_space.hpp"
#include "dualheap/card_table.hpp"
#include "dualheap/object_model.hpp"

namespace dualheap {

struct H2Config {
  std::size_t h2_size = std::size_t{1} << 30;
  std::size_t region_size = 8u << 20;
  std::size_t card_segment = 8u << 10;
  std::size_t stripe_size = 4u << 20;
  unsigned scan_threads = 1;
  // Empty means anonymous memory.
  std::string backing_path;
};

// Throws a config error naming the violated constraint.
void validate(const H2Config& config);

struct Region {
  std::size_t index = 0;
  std::size_t alloc_offset = 0;
  std::optional<PartitionId> partition;
  bool used = false;
};

// An H2 slot holding a reference into H1.
struct BackwardRef {
  Address slot = 0;
  Address target = 0;

  friend auto operator<=>(const BackwardRef&, const BackwardRef&) = default;
};

struct CardScanResult {
  std::vector<BackwardRef> refs;
  std::size_t cards_examined = 0;  // card-table entries read
  std::size_t cards_scanned = 0;   // dirty cards whose segment was walked
  std::size_t bytes_walked = 0;    // segment bytes covered by walked objects
  std::size_t objects_walked = 0;
  std::size_t cards_cleaned = 0;
  std::size_t boundary_cards_kept = 0;  // dirty boundary cards kept without refs

  void merge(CardScanResult&& other);
};

struct ReclaimResult {
  std::vector<std::size_t> freed;
  // Offset resets, partition unassignments, group unlinks and card cleans.
  std::size_t primitive_ops = 0;
};

struct DirtyCensus {
  std::size_t cards_in_use = 0;
  std::size_t dirty_cards = 0;
  std::size_t boundary_dirty_cards = 0;

  double boundary_dirty_fraction() const {
    return cards_in_use == 0 ? 0.0 : double(boundary_dirty_cards) / double(cards_in_use);
  }
};

// The region-based second heap. Objects are bump allocated into regions
// owned by one partition; regions linked by cross-region references form
// groups that are freed together when no member was reached from H1 during
// the last marking phase. The card table is split into slices of
// scan_threads stripes and thread t scans stripe t of every slice.
class H2Heap {
 public:
  H2Heap(const H2Config& config, AddressSpace& memory, const ClassRegistry& classes);

  const H2Config& config() const { return _config; }
  Address base() const { return _base; }
  Address end() const { return _base + _config.h2_size; }
  bool contains(Address a) const { return a >= _base && a < end(); }

  std::size_t region_count() const { return _regions.size(); }
  const Region& region(std::size_t index) const { return _regions[index]; }
  std::size_t region_index(Address a) const { return (a - _base) / _config.region_size; }
  Address region_start(std::size_t index) const { return _base + index * _config.region_size; }
  Address region_top(std::size_t index) const { return region_start(index) + _regions[index].alloc_offset; }
  bool region_allocated(std::size_t index) const { return _regions[index].partition.has_value(); }
  std::size_t free_region_count() const { return _free.size(); }
  std::optional<std::size_t> current_region(PartitionId partition) const;

  // Reserves space in the partition's current region, opening a fresh region
  // when it does not fit. Throws region_exhausted.
  ObjectHandle allocate_in_region(PartitionId partition, std::size_t size);

  void dirty_card(ObjectHandle h) { _cards.dirty(h.address()); }
  CardTable& cards() { return _cards; }
  const CardTable& cards() const { return _cards; }
  ObjectStartTable& starts() { return _starts; }

  std::size_t cards_per_stripe() const { return _config.stripe_size / _config.card_segment; }
  bool is_boundary_card(std::size_t card) const {
    const std::size_t pos = card % cards_per_stripe();
    return pos == 0 || pos == cards_per_stripe() - 1;
  }
  unsigned thread_for_card(std::size_t card) const {
    return unsigned((card / cards_per_stripe()) % _config.scan_threads);
  }

  // Visits every card owned by thread_id, stripe by stripe through all slices.
  template <class Fn>
  void for_each_card_of_thread(unsigned thread_id, Fn&& fn) const {
    const std::size_t per_stripe = cards_per_stripe();
    const std::size_t total = _cards.size();
    for (std::size_t stripe = thread_id; stripe * per_stripe < total; stripe += _config.scan_threads) {
      const std::size_t last = std::min(total, (stripe + 1) * per_stripe);
      for (std::size_t card = stripe * per_stripe; card < last; ++card) fn(card);
    }
  }

  // Scans the dirty cards owned by thread_id for references into H1. A card
  // with no such references is cleaned unless it is a stripe boundary card.
  CardScanResult scan_dirty_cards(unsigned thread_id);
  // Runs all scan threads, merges their results (sorted by slot) and
  // replaces the backward reference stack.
  CardScanResult scan_all();

  std::vector<BackwardRef>& backward_refs() { return _backward; }
  const std::vector<BackwardRef>& backward_refs() const { return _backward; }

  void clear_used_bits();
  void set_used(std::size_t region);
  bool group_used(std::size_t region) { return _group_used[find(region)]; }

  void merge_groups(std::size_t a, std::size_t b);
  std::size_t group_root(std::size_t region) { return find(region); }
  bool same_group(std::size_t a, std::size_t b) { return find(a) == find(b); }
  // Enumerates a region's group by walking all regions; used at free time
  // and by tests, never on the merge path.
  std::vector<std::size_t> group_members(std::size_t region);
  std::size_t merges() const { return _merges; }

  // Forgets the allocation region of partitions whose group was not reached
  // in this marking phase, so no new object lands in a region about to be
  // freed.
  void retire_unused_allocation_regions();

  ReclaimResult reclaim_free_regions();

  DirtyCensus census() const;

  // Walks the objects of one region in allocation order.
  template <class Fn>
  void for_each_object_in_region(std::size_t index, Fn&& fn) const {
    Address obj = region_start(index);
    const Address top = region_top(index);
    while (obj < top) {
      const std::size_t size = object_size(obj);
      fn(obj, size);
      obj += size;
    }
  }

  struct Snapshot {
    std::vector<Region> regions;
    std::set<std::size_t> free;
    std::map<PartitionId, std::size_t> current;
    std::vector<std::size_t> parent;
    std::vector<std::size_t> group_size;
    std::vector<bool> group_used;
    std::size_t merges = 0;
  };
  Snapshot snapshot() const;
  void restore(Snapshot snapshot);

 private:
  std::size_t find(std::size_t region);
  std::size_t object_size(Address obj) const;

  H2Config _config;
  AddressSpace& _memory;
  const ClassRegistry& _classes;
  Address _base;
  std::vector<Region> _regions;
  std::set<std::size_t> _free;
  std::map<PartitionId, std::size_t> _current;
  std::vector<std::size_t> _parent;
  std::vector<std::size_t> _group_size;
  std::vector<bool> _group_used;
  std::size_t _merges = 0;
  CardTable _cards;
  ObjectStartTable _starts;
  std::vector<BackwardRef> _backward;
};

}  // namespace dualheap
