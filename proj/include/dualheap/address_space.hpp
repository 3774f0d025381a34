#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "dualheap/object_model.hpp"

namespace dualheap {

// Placement of the three spaces inside one reservation. Address 0 and a guard
// gap between H1 and H2 are never mapped, so an address just past the old
// generation is not mistaken for an H2 address.
struct HeapLayout {
  static constexpr Address kGuardSize = 64 * 1024;

  Address young_base = 0;
  Address young_end = 0;
  Address old_base = 0;
  Address old_end = 0;
  Address h2_base = 0;
  Address h2_end = 0;

  static HeapLayout compute(std::size_t young_size, std::size_t old_size, std::size_t h2_size);

  bool in_young(Address a) const { return a >= young_base && a < young_end; }
  bool in_old(Address a) const { return a >= old_base && a < old_end; }
  bool in_h1(Address a) const { return a >= young_base && a < old_end; }
  bool in_h2(Address a) const { return a >= h2_base && a < h2_end; }
  bool has_h2() const { return h2_end > h2_base; }
  Address reservation_size() const { return has_h2() ? h2_end : old_end; }

  std::optional<HeapSpace> classify(Address a) const {
    if (in_young(a)) return HeapSpace::h1_young;
    if (in_old(a)) return HeapSpace::h1_old;
    if (in_h2(a)) return HeapSpace::h2;
    return std::nullopt;
  }
};

// Owns the virtual memory behind a HeapLayout. H1 is anonymous memory; H2 is
// either a shared mapping of a sparse backing file or anonymous memory.
// Handles translate to host pointers with one addition for both heaps.
class AddressSpace {
 public:
  AddressSpace(const HeapLayout& layout, const std::string& h2_backing_path);
  ~AddressSpace();

  AddressSpace(const AddressSpace&) = delete;
  AddressSpace& operator=(const AddressSpace&) = delete;

  const HeapLayout& layout() const { return _layout; }

  std::byte* at(Address a) const { return _base + a; }
  std::uint64_t& word(Address a) const { return *reinterpret_cast<std::uint64_t*>(_base + a); }

  // File descriptor of the H2 backing file, or -1 for anonymous H2.
  int h2_fd() const { return _h2_fd; }
  const std::string& h2_path() const { return _h2_path; }

 private:
  HeapLayout _layout;
  std::byte* _base = nullptr;
  int _h2_fd = -1;
  std::string _h2_path;
};

}  // namespace dualheap
