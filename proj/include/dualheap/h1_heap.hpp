#pragma once

#include <cstddef>
#include <optional>

#include "dualheap/address_space.hpp"
#include "dualheap/card_table.hpp"

namespace dualheap {

struct H1Config {
  std::size_t young_size = 16u << 20;
  std::size_t old_size = 48u << 20;
  unsigned tenuring_threshold = 2;
  std::size_t card_segment = 512;
};

// Throws a config error naming the violated constraint.
void validate(const H1Config& config);

struct BumpSpace {
  Address base = 0;
  Address end = 0;
  Address top = 0;

  std::size_t capacity() const { return end - base; }
  std::size_t used() const { return top - base; }
  std::size_t free() const { return end - top; }
  bool contains(Address a) const { return a >= base && a < end; }
  bool in_use(Address a) const { return a >= base && a < top; }
  void reset() { top = base; }

  std::optional<Address> try_allocate(std::size_t size) {
    if (free() < size) return std::nullopt;
    Address a = top;
    top += size;
    return a;
  }
};

// Space bookkeeping for the collected heap: eden plus two survivor halves
// (8:1:1) and a bump-allocated old generation with its old-to-young card
// table. Collection algorithms live in Runtime.
class H1Heap {
 public:
  H1Heap(const H1Config& config, const HeapLayout& layout);

  const H1Config& config() const { return _config; }

  BumpSpace& eden() { return _eden; }
  BumpSpace& from() { return _from; }
  BumpSpace& to() { return _to; }
  BumpSpace& old() { return _old; }
  const BumpSpace& eden() const { return _eden; }
  const BumpSpace& from() const { return _from; }
  const BumpSpace& to() const { return _to; }
  const BumpSpace& old() const { return _old; }

  void swap_survivors() { std::swap(_from, _to); }

  std::size_t young_used() const { return _eden.used() + _from.used(); }
  bool in_condemned(Address a) const { return _eden.contains(a) || _from.contains(a); }

  std::optional<Address> allocate_old(std::size_t size);

  CardTable& cards() { return _cards; }
  const CardTable& cards() const { return _cards; }
  ObjectStartTable& old_starts() { return _old_starts; }
  const ObjectStartTable& old_starts() const { return _old_starts; }

  // Marks the card of an old-generation object; no-op for other addresses.
  void dirty_card(Address object) {
    if (_old.contains(object)) _cards.dirty(object);
  }

 private:
  H1Config _config;
  BumpSpace _eden;
  BumpSpace _from;
  BumpSpace _to;
  BumpSpace _old;
  CardTable _cards;
  ObjectStartTable _old_starts;
};

}  // namespace dualheap
