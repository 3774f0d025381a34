#pragma once

#include <cstdint>
#include <vector>

#include "dualheap/runtime.hpp"

namespace dualheap::workload {

// Length-prefixed depth-first encoding of the non-transient closure of a
// root. Each record is [length, class id, fields...] in words; reference
// fields hold the 1-based record index of their target (0 for null) and
// transient fields are not encoded.
class BaselineSerializer {
 public:
  static std::vector<std::uint64_t> serialize(const Runtime& rt, ObjectHandle root);
  // Rebuilds the graph on the H1 heap; transient fields come back null.
  static ObjectHandle deserialize(Runtime& rt, const std::vector<std::uint64_t>& image);
  static std::size_t byte_size(const std::vector<std::uint64_t>& image) { return image.size() * sizeof(std::uint64_t); }
};

}  // namespace dualheap::workload
