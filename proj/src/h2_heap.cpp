#include "dualheap/h2_heap.hpp"

#include <algorithm>
#include <exception>
#include <numeric>
#include <thread>

#include "dualheap/error.hpp"

namespace dualheap {

void validate(const H2Config& c) {
  auto field = [](const char* name, std::size_t v) { return std::string(name) + " (" + std::to_string(v) + ")"; };
  if (c.h2_size == 0) fail(ErrorCode::config, "h2.size must be positive");
  if (c.region_size == 0) fail(ErrorCode::config, "h2.region_size must be positive");
  if (c.card_segment == 0 || c.card_segment % kObjectAlignment != 0)
    fail(ErrorCode::config, "h2.card_segment must be a positive multiple of 8");
  if (c.stripe_size == 0) fail(ErrorCode::config, "h2.stripe_size must be positive");
  if (c.scan_threads == 0) fail(ErrorCode::config, "h2.scan_threads must be positive");
  if (c.h2_size % c.region_size != 0)
    fail(ErrorCode::config, field("h2.size", c.h2_size) + " must be a multiple of " +
                                field("h2.region_size", c.region_size));
  if (c.stripe_size % c.card_segment != 0)
    fail(ErrorCode::config, field("h2.stripe_size", c.stripe_size) + " must be a multiple of " +
                                field("h2.card_segment", c.card_segment));
  if (c.region_size % c.stripe_size != 0)
    fail(ErrorCode::config, field("h2.region_size", c.region_size) + " must be a multiple of " +
                                field("h2.stripe_size", c.stripe_size));
}

void CardScanResult::merge(CardScanResult&& other) {
  refs.insert(refs.end(), other.refs.begin(), other.refs.end());
  cards_examined += other.cards_examined;
  cards_scanned += other.cards_scanned;
  bytes_walked += other.bytes_walked;
  objects_walked += other.objects_walked;
  cards_cleaned += other.cards_cleaned;
  boundary_cards_kept += other.boundary_cards_kept;
}

H2Heap::H2Heap(const H2Config& config, AddressSpace& memory, const ClassRegistry& classes)
    : _config(config),
      _memory(memory),
      _classes(classes),
      _base(memory.layout().h2_base),
      _regions(config.h2_size / config.region_size),
      _parent(_regions.size()),
      _group_size(_regions.size(), 1),
      _group_used(_regions.size(), false),
      _cards(_base, config.h2_size, config.card_segment),
      _starts(_base, config.h2_size, config.card_segment) {
  validate(config);
  for (std::size_t i = 0; i < _regions.size(); ++i) {
    _regions[i].index = i;
    _free.insert(i);
  }
  std::iota(_parent.begin(), _parent.end(), std::size_t{0});
}

std::optional<std::size_t> H2Heap::current_region(PartitionId partition) const {
  auto it = _current.find(partition);
  if (it == _current.end()) return std::nullopt;
  return it->second;
}

ObjectHandle H2Heap::allocate_in_region(PartitionId partition, std::size_t size) {
  if (size > _config.region_size)
    fail(ErrorCode::region_exhausted, "object of " + std::to_string(size) + " bytes exceeds region size " +
                                          std::to_string(_config.region_size));
  auto it = _current.find(partition);
  if (it == _current.end() || _config.region_size - _regions[it->second].alloc_offset < size) {
    if (_free.empty())
      fail(ErrorCode::region_exhausted, "no free region for partition " + std::to_string(partition));
    const std::size_t fresh = *_free.begin();
    _free.erase(_free.begin());
    _regions[fresh].partition = partition;
    _regions[fresh].alloc_offset = 0;
    it = _current.insert_or_assign(partition, fresh).first;
  }
  Region& r = _regions[it->second];
  const Address a = region_start(r.index) + r.alloc_offset;
  r.alloc_offset += size;
  _starts.record(a, size);
  return ObjectHandle(a);
}

std::size_t H2Heap::object_size(Address obj) const {
  const ClassDescriptor* d = _classes.find(mark_word::class_id(_memory.word(obj)));
  if (d == nullptr) fail(ErrorCode::heap_corruption, "unparseable H2 object at " + std::to_string(obj));
  return d->instance_size();
}

CardScanResult H2Heap::scan_dirty_cards(unsigned thread_id) {
  CardScanResult result;
  const HeapLayout& layout = _memory.layout();
  const std::size_t segment = _config.card_segment;
  for_each_card_of_thread(thread_id, [&](std::size_t card) {
    ++result.cards_examined;
    if (!_cards.is_dirty(card)) return;
    ++result.cards_scanned;

    const Address start = _cards.card_start(card);
    const std::size_t region = region_index(start);
    const Address top = region_top(region);
    const Address limit = std::min<Address>(start + segment, top);
    bool found = false;
    if (start < top) {
      Address obj = _starts.covering(card);
      if (obj == 0 || obj > start || region_index(obj) != region)
        fail(ErrorCode::heap_corruption, "no object covers H2 card " + std::to_string(card));
      while (obj < limit) {
        const ClassDescriptor* d = _classes.find(mark_word::class_id(_memory.word(obj)));
        if (d == nullptr || obj + d->instance_size() > top)
          fail(ErrorCode::heap_corruption, "unparseable H2 object at " + std::to_string(obj));
        // An object spilling in from the previous segment belongs to the
        // card holding its header; it is only stepped over here.
        if (obj >= start) {
          ++result.objects_walked;
          for (std::uint32_t off : d->reference_offsets()) {
            const Address v = _memory.word(obj + off);
            if (v != 0 && layout.in_h1(v)) {
              result.refs.push_back({obj + off, v});
              found = true;
            }
          }
        }
        obj += d->instance_size();
      }
      result.bytes_walked += limit - start;
    }
    if (found) return;
    if (is_boundary_card(card)) {
      ++result.boundary_cards_kept;
    } else {
      _cards.clean(card);
      ++result.cards_cleaned;
    }
  });
  return result;
}

CardScanResult H2Heap::scan_all() {
  const unsigned n = _config.scan_threads;
  std::vector<CardScanResult> results(n);
  if (n == 1) {
    results[0] = scan_dirty_cards(0);
  } else {
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> workers;
    workers.reserve(n - 1);
    for (unsigned t = 1; t < n; ++t) {
      workers.emplace_back([&, t] {
        try {
          results[t] = scan_dirty_cards(t);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    try {
      results[0] = scan_dirty_cards(0);
    } catch (...) {
      errors[0] = std::current_exception();
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  CardScanResult merged;
  for (auto& r : results) merged.merge(std::move(r));
  std::sort(merged.refs.begin(), merged.refs.end());
  _backward = merged.refs;
  return merged;
}

void H2Heap::clear_used_bits() {
  for (Region& r : _regions) r.used = false;
  std::fill(_group_used.begin(), _group_used.end(), false);
}

void H2Heap::set_used(std::size_t region) {
  _regions[region].used = true;
  _group_used[find(region)] = true;
}

std::size_t H2Heap::find(std::size_t region) {
  while (_parent[region] != region) {
    _parent[region] = _parent[_parent[region]];
    region = _parent[region];
  }
  return region;
}

void H2Heap::merge_groups(std::size_t a, std::size_t b) {
  std::size_t ra = find(a);
  std::size_t rb = find(b);
  if (ra == rb) return;
  if (_group_size[ra] < _group_size[rb]) std::swap(ra, rb);
  _parent[rb] = ra;
  _group_size[ra] += _group_size[rb];
  _group_used[ra] = _group_used[ra] || _group_used[rb];
  ++_merges;
}

std::vector<std::size_t> H2Heap::group_members(std::size_t region) {
  const std::size_t root = find(region);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < _regions.size(); ++i)
    if (find(i) == root) members.push_back(i);
  return members;
}

void H2Heap::retire_unused_allocation_regions() {
  for (auto it = _current.begin(); it != _current.end();) {
    if (!group_used(it->second))
      it = _current.erase(it);
    else
      ++it;
  }
}

ReclaimResult H2Heap::reclaim_free_regions() {
  ReclaimResult result;
  std::vector<bool> live(_regions.size(), false);
  for (const Region& r : _regions)
    if (r.partition && r.used) live[find(r.index)] = true;

  const std::size_t cards_per_region = _config.region_size / _config.card_segment;
  for (Region& r : _regions) {
    if (!r.partition || live[find(r.index)]) continue;
    result.freed.push_back(r.index);
  }
  // Unlinking must wait until every member's root has been consulted.
  for (std::size_t index : result.freed) {
    Region& r = _regions[index];
    auto cur = _current.find(*r.partition);
    if (cur != _current.end() && cur->second == index) _current.erase(cur);
    r.alloc_offset = 0;
    r.partition.reset();
    r.used = false;
    _parent[index] = index;
    _group_size[index] = 1;
    _group_used[index] = false;
    _cards.clean_range(index * cards_per_region, cards_per_region);
    _free.insert(index);
    result.primitive_ops += 3 + cards_per_region;
  }
  if (!result.freed.empty()) {
    std::erase_if(_backward, [&](const BackwardRef& b) { return !region_allocated(region_index(b.slot)); });
  }
  return result;
}

DirtyCensus H2Heap::census() const {
  DirtyCensus c;
  const std::size_t cards_per_region = _config.region_size / _config.card_segment;
  for (const Region& r : _regions) {
    if (!r.partition) continue;
    const std::size_t first = r.index * cards_per_region;
    const std::size_t used_cards = (r.alloc_offset + _config.card_segment - 1) / _config.card_segment;
    for (std::size_t card = first; card < first + used_cards; ++card) {
      ++c.cards_in_use;
      if (!_cards.is_dirty(card)) continue;
      ++c.dirty_cards;
      if (is_boundary_card(card)) ++c.boundary_dirty_cards;
    }
  }
  return c;
}

H2Heap::Snapshot H2Heap::snapshot() const {
  return Snapshot{_regions, _free, _current, _parent, _group_size, _group_used, _merges};
}

void H2Heap::restore(Snapshot s) {
  _regions = std::move(s.regions);
  _free = std::move(s.free);
  _current = std::move(s.current);
  _parent = std::move(s.parent);
  _group_size = std::move(s.group_size);
  _group_used = std::move(s.group_used);
  _merges = s.merges;
}

}  // namespace dualheap
