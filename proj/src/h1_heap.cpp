#include "dualheap/h1_heap.hpp"

#include <string>

#include "dualheap/error.hpp"

namespace dualheap {

void validate(const H1Config& c) {
  if (c.card_segment == 0 || c.card_segment % kObjectAlignment != 0)
    fail(ErrorCode::config, "h1.card_segment must be a positive multiple of 8");
  if (c.young_size == 0 || c.young_size % c.card_segment != 0)
    fail(ErrorCode::config, "h1.young_size (" + std::to_string(c.young_size) +
                                ") must be a positive multiple of h1.card_segment (" +
                                std::to_string(c.card_segment) + ")");
  if (c.old_size == 0 || c.old_size % c.card_segment != 0)
    fail(ErrorCode::config, "h1.old_size (" + std::to_string(c.old_size) +
                                ") must be a positive multiple of h1.card_segment (" +
                                std::to_string(c.card_segment) + ")");
  if (c.young_size < 10 * 64)
    fail(ErrorCode::config, "h1.young_size is too small to split into eden and survivors");
  if (c.tenuring_threshold == 0 || c.tenuring_threshold > mark_word::kMaxAge)
    fail(ErrorCode::config, "h1.tenuring_threshold must be in [1, 63]");
}

H1Heap::H1Heap(const H1Config& config, const HeapLayout& layout) : _config(config) {
  const std::size_t survivor = config.young_size / 10 / kObjectAlignment * kObjectAlignment;
  const std::size_t eden = config.young_size - 2 * survivor;
  _eden = {layout.young_base, layout.young_base + eden, layout.young_base};
  _from = {_eden.end, _eden.end + survivor, _eden.end};
  _to = {_from.end, _from.end + survivor, _from.end};
  _old = {layout.old_base, layout.old_end, layout.old_base};
  _cards = CardTable(layout.old_base, config.old_size, config.card_segment);
  _old_starts = ObjectStartTable(layout.old_base, config.old_size, config.card_segment);
}

std::optional<Address> H1Heap::allocate_old(std::size_t size) {
  auto a = _old.try_allocate(size);
  if (a) _old_starts.record(*a, size);
  return a;
}

}  // namespace dualheap
