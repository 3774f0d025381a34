#include "dualheap/card_table.hpp"

#include <algorithm>
#include <cstring>

namespace dualheap {

CardTable::CardTable(Address covered_base, std::size_t covered_size, std::size_t segment_size)
    : _base(covered_base),
      _segment(segment_size),
      _cards((covered_size + segment_size - 1) / segment_size, clean_card) {}

void CardTable::clean_range(std::size_t first, std::size_t count) {
  std::memset(_cards.data() + first, clean_card, count);
}

void CardTable::clear() { std::fill(_cards.begin(), _cards.end(), std::uint8_t(clean_card)); }

std::size_t CardTable::count_dirty() const {
  return std::size_t(std::count_if(_cards.begin(), _cards.end(), [](std::uint8_t c) { return c != clean_card; }));
}

ObjectStartTable::ObjectStartTable(Address covered_base, std::size_t covered_size, std::size_t segment_size)
    : _base(covered_base), _segment(segment_size), _starts((covered_size + segment_size - 1) / segment_size, 0) {}

void ObjectStartTable::record(Address object, std::size_t size) {
  std::size_t first = (object - _base + _segment - 1) / _segment;
  const std::size_t end = (object + size - _base + _segment - 1) / _segment;
  for (; first < end; ++first) _starts[first] = object;
}

void ObjectStartTable::clear() { std::fill(_starts.begin(), _starts.end(), Address{0}); }

}  // namespace dualheap
