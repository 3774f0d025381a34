#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dualheap/object_model.hpp"

namespace dualheap {

// One byte per fixed-size card segment of a contiguous address range.
class CardTable {
 public:
  enum : std::uint8_t { clean_card = 0, dirty_card = 1 };

  CardTable() = default;
  CardTable(Address covered_base, std::size_t covered_size, std::size_t segment_size);

  std::size_t segment_size() const { return _segment; }
  std::size_t size() const { return _cards.size(); }
  Address covered_base() const { return _base; }

  std::size_t index_for(Address a) const { return (a - _base) / _segment; }
  Address card_start(std::size_t index) const { return _base + index * _segment; }

  void dirty(Address a) { _cards[index_for(a)] = dirty_card; }
  void dirty_index(std::size_t index) { _cards[index] = dirty_card; }
  bool is_dirty(std::size_t index) const { return _cards[index] != clean_card; }
  void clean(std::size_t index) { _cards[index] = clean_card; }
  void clean_range(std::size_t first, std::size_t count);
  void clear();

  std::size_t count_dirty() const;

 private:
  Address _base = 0;
  std::size_t _segment = 1;
  std::vector<std::uint8_t> _cards;
};

// For each card, the start of the object covering the card's first byte.
// Spaces are bump allocated, so objects tile [base, top) and a walk can begin
// at the recorded object. Entries for cards at or beyond a space's top are
// stale and must be ignored by the caller.
class ObjectStartTable {
 public:
  ObjectStartTable() = default;
  ObjectStartTable(Address covered_base, std::size_t covered_size, std::size_t segment_size);

  void record(Address object, std::size_t size);
  Address covering(std::size_t card_index) const { return _starts[card_index]; }
  void clear();

 private:
  Address _base = 0;
  std::size_t _segment = 1;
  std::vector<Address> _starts;
};

}  // namespace dualheap
