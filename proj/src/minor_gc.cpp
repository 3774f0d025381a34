#include <algorithm>
#include <chrono>
#include <cstring>
#include <string>

#include "dualheap/error.hpp"
#include "dualheap/runtime.hpp"

namespace dualheap {

void Runtime::scan_h2_cards(CardScanResult& out) {
  if (!_h2) return;
  out = _h2->scan_all();
  ++_counters.h2_scans;
  _counters.h2_cards_examined += out.cards_examined;
  _counters.h2_cards_scanned += out.cards_scanned;
  _counters.h2_segment_bytes_walked += out.bytes_walked;
  _counters.h2_cards_cleaned += out.cards_cleaned;
  _counters.h2_boundary_cards_kept += out.boundary_cards_kept;
  _counters.backward_refs_found += out.refs.size();
  notify(GcEvent::after_card_scan);
}

MinorStats Runtime::minor_collect() {
  if (!minor_is_safe()) {
    major_collect_impl(false);
    MinorStats s;
    s.escalated = true;
    return s;
  }
  return minor_collect_impl();
}

// Copying collection of eden and the from-space. Roots are the root slots,
// old objects on dirty cards, and H2 slots found by the H2 card scan.
MinorStats Runtime::minor_collect_impl() {
  const auto started = std::chrono::steady_clock::now();
  MinorStats stats;
  scan_h2_cards(stats.h2_scan);

  BumpSpace& old = _h1.old();
  BumpSpace& to = _h1.to();
  const unsigned threshold = _h1.config().tenuring_threshold;

  auto evacuate = [&](std::uint64_t& slot) {
    const Address v = slot;
    if (v == 0 || !_h1.in_condemned(v)) return;
    std::uint64_t& hdr = word(v);
    if (mark_word::is_forwarded(hdr)) {
      slot = mark_word::forwardee(hdr);
      return;
    }
    const std::size_t size = descriptor_at(v).instance_size();
    const unsigned age = std::min(mark_word::age(hdr) + 1, mark_word::kMaxAge);
    std::optional<Address> dest;
    if (age < threshold) dest = to.try_allocate(size);
    const bool promoted = !dest;
    if (promoted) dest = _h1.allocate_old(size);
    // minor_is_safe() reserved room for every young byte in the old space.
    if (!dest) fail(ErrorCode::heap_corruption, "promotion failed during a guaranteed minor collection");
    std::memcpy(_memory->at(*dest), _memory->at(v), size);
    word(*dest) = mark_word::with_age(mark_word::clear_gc_bits(hdr), age);
    hdr = mark_word::forward_to(hdr, *dest);
    slot = *dest;
    ++stats.objects_copied;
    stats.bytes_copied += size;
    if (promoted) {
      ++stats.objects_promoted;
      stats.bytes_promoted += size;
    }
  };

  // Fields of an old object: evacuate, then keep the card dirty if a field
  // still points into the young generation.
  auto scan_old_object = [&](Address obj) {
    bool young_ref = false;
    for (std::uint32_t off : descriptor_at(obj).reference_offsets()) {
      std::uint64_t& slot = word(obj + off);
      evacuate(slot);
      if (slot != 0 && layout().in_young(slot)) young_ref = true;
    }
    if (young_ref) _h1.dirty_card(obj);
  };

  const Address old_scan_start = old.top;
  Address promoted_scan = old.top;
  Address survivor_scan = to.top;

  for_each_root(evacuate);

  CardTable& cards = _h1.cards();
  std::vector<std::size_t> dirty;
  const std::size_t used_cards = (old_scan_start - old.base + cards.segment_size() - 1) / cards.segment_size();
  for (std::size_t c = 0; c < used_cards; ++c) {
    if (cards.is_dirty(c)) {
      dirty.push_back(c);
      cards.clean(c);
    }
  }
  stats.old_cards_scanned = dirty.size();
  for (std::size_t c : dirty) {
    const Address start = cards.card_start(c);
    const Address limit = std::min<Address>(start + cards.segment_size(), old_scan_start);
    Address obj = _h1.old_starts().covering(c);
    while (obj < limit) {
      const std::size_t size = descriptor_at(obj).instance_size();
      if (obj >= start) scan_old_object(obj);
      obj += size;
    }
  }

  if (_h2) {
    for (const BackwardRef& b : _h2->backward_refs()) evacuate(word(b.slot));
    stats.backward_refs = _h2->backward_refs().size();
  }

  while (survivor_scan < to.top || promoted_scan < old.top) {
    while (survivor_scan < to.top) {
      const ClassDescriptor& d = descriptor_at(survivor_scan);
      for (std::uint32_t off : d.reference_offsets()) evacuate(word(survivor_scan + off));
      survivor_scan += d.instance_size();
    }
    while (promoted_scan < old.top) {
      const std::size_t size = descriptor_at(promoted_scan).instance_size();
      scan_old_object(promoted_scan);
      promoted_scan += size;
    }
  }

  if (_h2) {
    for (BackwardRef& b : _h2->backward_refs()) b.target = word(b.slot);
  }

  _h1.eden().reset();
  _h1.from().reset();
  _h1.swap_survivors();

  stats.duration = std::chrono::steady_clock::now() - started;
  ++_counters.minor_collections;
  _counters.minor_time += stats.duration;
  _counters.objects_copied += stats.objects_copied;
  _counters.bytes_copied += stats.bytes_copied;
  _counters.objects_promoted += stats.objects_promoted;
  notify(GcEvent::after_minor);
  return stats;
}

}  // namespace dualheap
