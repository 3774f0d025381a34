#include <algorithm>
#include <chrono>
#include <cstring>
#include <string>

#include "dualheap/error.hpp"
#include "dualheap/runtime.hpp"

namespace dualheap {

namespace {

using Clock = std::chrono::steady_clock;

}  // namespace

template <class Fn>
void Runtime::walk_h1(Fn&& fn) {
  for (BumpSpace* space : {&_h1.old(), &_h1.from(), &_h1.eden()}) {
    Address obj = space->base;
    const Address top = space->top;
    while (obj < top) {
      const std::size_t size = descriptor_at(obj).instance_size();
      fn(obj, size);
      obj += size;
    }
  }
}

MajorStats Runtime::major_collect() { return major_collect_impl(minor_is_safe()); }

void Runtime::abort_major() {
  walk_h1([&](Address obj, std::size_t) {
    word(obj) = mark_word::clear_gc_bits(word(obj));
    word(obj + kWordSize) &= ~TcWord::kVisitedBit;
  });
}

// Sliding mark-compact of all of H1 into the old generation. Objects in the
// closure of a pending persist hint are relocated into H2 instead.
MajorStats Runtime::major_collect_impl(bool run_minor_first) {
  const auto started = Clock::now();
  MajorStats stats;
  const HeapLayout& l = layout();

  if (run_minor_first) {
    minor_collect_impl();
  } else {
    CardScanResult scan;
    scan_h2_cards(scan);
  }
  stats.h1_bytes_before = _h1.old().used() + _h1.young_used();

  // -- mark
  auto phase_start = Clock::now();
  if (_h2) _h2->clear_used_bits();
  std::vector<Address> stack;
  auto mark = [&](Address v) {
    if (v == 0) return;
    if (l.in_h1(v)) {
      std::uint64_t& hdr = word(v);
      if (mark_word::is_marked(hdr)) return;
      hdr |= mark_word::kMarkBit;
      word(v + kWordSize) &= ~TcWord::kVisitedBit;
      ++stats.objects_marked;
      stack.push_back(v);
    } else if (_h2 && l.in_h2(v)) {
      // Marking stops at H2; only the region's liveness is recorded.
      _h2->set_used(_h2->region_index(v));
    }
  };
  auto drain = [&] {
    while (!stack.empty()) {
      const Address obj = stack.back();
      stack.pop_back();
      for (std::uint32_t off : descriptor_at(obj).reference_offsets()) mark(word(obj + off));
    }
  };
  for_each_root([&](Address& v) { mark(v); });
  drain();

  // A backward reference keeps its target alive only while the group holding
  // the slot is reachable. Marking can make further groups reachable, so
  // iterate until no new slot qualifies.
  std::vector<BackwardRef>* backward = _h2 ? &_h2->backward_refs() : nullptr;
  if (backward) {
    std::vector<bool> taken(backward->size(), false);
    for (bool progress = true; progress;) {
      progress = false;
      for (std::size_t i = 0; i < backward->size(); ++i) {
        if (taken[i] || !_h2->group_used(_h2->region_index((*backward)[i].slot))) continue;
        taken[i] = true;
        progress = true;
        mark(word((*backward)[i].slot));
      }
      drain();
    }
  }

  std::vector<PersistHint> hints;
  for (const CacheEntry& e : _cache) {
    if (!e.pending) continue;
    const Address r = root(e.slot).address();
    if (r != 0 && l.in_h1(r)) hints.push_back({ObjectHandle(r), e.partition});
  }
  if (_h2) stats.closure_objects = etr_mark_closure(hints).marked;
  stats.mark = Clock::now() - phase_start;

  // -- precompact: assign destinations, then rewrite every H1-held reference
  phase_start = Clock::now();
  std::optional<H2Heap::Snapshot> h2_before;
  if (_h2) {
    _h2->retire_unused_allocation_regions();
    h2_before = _h2->snapshot();
  }
  const std::size_t merges_before = _h2 ? _h2->merges() : 0;
  BumpSpace& old = _h1.old();
  Address compact_top = old.base;
  try {
    walk_h1([&](Address obj, std::size_t size) {
      std::uint64_t& hdr = word(obj);
      if (!mark_word::is_marked(hdr)) return;
      const std::uint64_t tc = word(obj + kWordSize);
      Address dest;
      if (tc & TcWord::kVisitedBit) {
        dest = _h2->allocate_in_region(TcWord::decode(tc).partition, size).address();
        _h2->set_used(_h2->region_index(dest));
      } else {
        if (old.end - compact_top < size)
          fail(ErrorCode::heap_exhausted, "live data exceeds the old generation (" + std::to_string(old.capacity()) +
                                              " bytes)");
        dest = compact_top;
        compact_top += size;
      }
      hdr = mark_word::forward_to(hdr, dest);
    });
  } catch (const Error&) {
    abort_major();
    if (_h2) _h2->restore(std::move(*h2_before));
    throw;
  }

  auto relocated = [&](Address v) -> Address {
    if (v == 0 || !l.in_h1(v)) return v;
    return mark_word::forwardee(word(v));
  };
  for_each_root([&](Address& v) { v = relocated(v); });
  walk_h1([&](Address obj, std::size_t) {
    const std::uint64_t hdr = word(obj);
    if (!mark_word::is_marked(hdr)) return;
    const bool to_h2 = (word(obj + kWordSize) & TcWord::kVisitedBit) != 0;
    const Address dest = mark_word::forwardee(hdr);
    for (std::uint32_t off : descriptor_at(obj).reference_offsets()) {
      std::uint64_t& slot = word(obj + off);
      slot = relocated(slot);
      if (to_h2 && slot != 0 && l.in_h2(slot)) {
        const std::size_t from_region = _h2->region_index(dest);
        const std::size_t to_region = _h2->region_index(slot);
        if (from_region != to_region) _h2->merge_groups(from_region, to_region);
      }
    }
  });
  // New targets of backward slots, computed while forwarding is readable.
  std::vector<Address> adjusted;
  if (backward) {
    adjusted.reserve(backward->size());
    for (const BackwardRef& b : *backward) {
      const Address t = word(b.slot);
      adjusted.push_back(t != 0 && l.in_h1(t) && mark_word::is_marked(word(t)) ? mark_word::forwardee(word(t)) : 0);
    }
  }
  stats.precompact = Clock::now() - phase_start;

  // -- compact
  phase_start = Clock::now();
  _h1.old_starts().clear();
  std::unique_ptr<H2Writer> writer = _h2 ? make_writer(*_memory, _options.strategy) : nullptr;
  walk_h1([&](Address obj, std::size_t size) {
    std::uint64_t& hdr = word(obj);
    if (!mark_word::is_marked(hdr)) return;
    const Address dest = mark_word::forwardee(hdr);
    hdr = mark_word::clear_gc_bits(hdr);
    std::uint64_t& tc = word(obj + kWordSize);
    if (tc & TcWord::kVisitedBit) {
      tc &= ~TcWord::kVisitedBit;
      writer->write(dest, _memory->at(obj), size);
      // Backward references among the fields are found by the next card scan.
      _h2->dirty_card(ObjectHandle(dest));
      ++stats.objects_moved_to_h2;
      stats.bytes_moved_to_h2 += size;
    } else {
      if (dest != obj) std::memmove(_memory->at(dest), _memory->at(obj), size);
      _h1.old_starts().record(dest, size);
    }
  });
  if (writer) {
    writer->finish();
    stats.flush_ops = writer->stats().flush_ops;
    stats.large_objects = writer->stats().large_objects;
  }
  old.top = compact_top;
  _h1.eden().reset();
  _h1.from().reset();
  _h1.to().reset();
  _h1.cards().clear();
  stats.compact = Clock::now() - phase_start;

  // -- adjust backward references to the new H1 locations
  phase_start = Clock::now();
  if (backward) {
    for (std::size_t i = 0; i < backward->size(); ++i) {
      if (adjusted[i] == 0) continue;
      BackwardRef& b = (*backward)[i];
      word(b.slot) = adjusted[i];
      b.target = adjusted[i];
      ++stats.backward_refs_adjusted;
      // The referent itself moved into H2, possibly into another region.
      if (l.in_h2(adjusted[i])) {
        const std::size_t from_region = _h2->region_index(b.slot);
        const std::size_t to_region = _h2->region_index(adjusted[i]);
        if (from_region != to_region) _h2->merge_groups(from_region, to_region);
      }
    }
    std::erase_if(*backward, [&](const BackwardRef& b) { return !l.in_h1(b.target); });
  }
  stats.groups_merged = _h2 ? _h2->merges() - merges_before : 0;
  stats.adjust = Clock::now() - phase_start;

  if (_h2) {
    ReclaimResult reclaimed = _h2->reclaim_free_regions();
    stats.regions_freed = std::move(reclaimed.freed);
    stats.reclaim_ops = reclaimed.primitive_ops;
  }

  for (CacheEntry& e : _cache) e.pending = false;

  stats.h1_bytes_after = old.used();
  stats.old_bytes_after = old.used();
  stats.duration = Clock::now() - started;

  ++_counters.major_collections;
  _counters.major_time += stats.duration;
  _counters.mark_time += stats.mark;
  _counters.precompact_time += stats.precompact;
  _counters.compact_time += stats.compact;
  _counters.adjust_time += stats.adjust;
  _counters.objects_marked += stats.objects_marked;
  _counters.objects_moved_to_h2 += stats.objects_moved_to_h2;
  _counters.bytes_moved_to_h2 += stats.bytes_moved_to_h2;
  _counters.flush_ops += stats.flush_ops;
  _counters.regions_freed += stats.regions_freed.size();
  _counters.reclaim_ops += stats.reclaim_ops;
  _counters.h1_bytes_before_major += stats.h1_bytes_before;
  _counters.h1_bytes_reclaimed_major += stats.h1_bytes_before - std::min(stats.h1_bytes_before, stats.h1_bytes_after);
  notify(GcEvent::after_major);
  return stats;
}

}  // namespace dualheap
