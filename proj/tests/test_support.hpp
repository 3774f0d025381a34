#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dualheap/runtime.hpp"

namespace testing_support {

using namespace dualheap;

inline RuntimeOptions small_options() {
  RuntimeOptions o;
  o.h1.young_size = 256u << 10;
  o.h1.old_size = 1u << 20;
  o.h2.h2_size = 8u << 20;
  o.h2.region_size = 64u << 10;
  o.h2.card_segment = 8u << 10;
  o.h2.stripe_size = 64u << 10;
  return o;
}

// Layout from a string of 'r' (reference), 't' (transient reference) and
// 's' (scalar), one word per character.
inline std::vector<FieldSpec> layout(const std::string& spec) {
  std::vector<FieldSpec> fields;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto offset = std::uint32_t(kHeaderSize + kWordSize * i);
    if (spec[i] == 's') {
      fields.push_back(FieldSpec::scalar(offset));
    } else {
      fields.push_back(FieldSpec::reference(offset, spec[i] == 't'));
    }
  }
  return fields;
}

// A singly linked chain through field 0; scalar field 1 holds the position.
// Returns the root slot of the head.
inline RootSlot build_chain(Runtime& rt, const ClassDescriptor& cls, std::size_t n) {
  RootSlot head = rt.add_root(rt.allocate(cls));
  rt.write_scalar(rt.root(head), 1, 0);
  RootSlot tail = rt.add_root(rt.root(head));
  for (std::size_t i = 1; i < n; ++i) {
    const ObjectHandle next = rt.allocate(cls);
    rt.write_scalar(next, 1, i);
    rt.write_ref(rt.root(tail), 0, next);
    rt.set_root(tail, next);
  }
  rt.drop_root(tail);
  return head;
}

inline std::vector<std::uint8_t> h2_image(const Runtime& rt) {
  std::vector<std::uint8_t> out;
  const H2Heap* h2 = rt.h2();
  if (!h2) return out;
  for (std::size_t r = 0; r < h2->region_count(); ++r) {
    if (!h2->region_allocated(r)) continue;
    const Address start = h2->region_start(r);
    const Address top = h2->region_top(r);
    out.push_back(std::uint8_t(r));
    out.push_back(std::uint8_t(r >> 8));
    for (Address a = start; a < top; a += kWordSize) {
      const std::uint64_t w = rt.load_word(a);
      for (int b = 0; b < 8; ++b) out.push_back(std::uint8_t(w >> (8 * b)));
    }
  }
  return out;
}

}  // namespace testing_support
