#include "dualheap/object_model.hpp"

#include <algorithm>
#include <string>

#include "dualheap/error.hpp"

namespace dualheap {

const char* to_string(HeapSpace space) noexcept {
  switch (space) {
    case HeapSpace::h1_young: return "H1Young";
    case HeapSpace::h1_old: return "H1Old";
    case HeapSpace::h2: return "H2";
  }
  return "?";
}

const FieldSpec& ClassDescriptor::field(std::size_t index) const {
  if (index >= _fields.size()) {
    fail(ErrorCode::invalid_field, "field index " + std::to_string(index) + " out of range for class " +
                                       std::to_string(_class_id));
  }
  return _fields[index];
}

const ClassDescriptor& ClassRegistry::register_class(std::vector<FieldSpec> layout) {
  if (_classes.size() >= kMaxClassId) fail(ErrorCode::layout, "class id space exhausted");

  const std::size_t instance_size = kHeaderSize + kWordSize * layout.size();
  std::vector<std::uint32_t> offsets;
  offsets.reserve(layout.size());
  for (const FieldSpec& f : layout) {
    if (f.offset % kWordSize != 0)
      fail(ErrorCode::layout, "field offset " + std::to_string(f.offset) + " is not word aligned");
    if (f.offset < kHeaderSize)
      fail(ErrorCode::layout, "field offset " + std::to_string(f.offset) + " overlaps the header");
    if (f.offset + kWordSize > instance_size)
      fail(ErrorCode::layout, "field offset " + std::to_string(f.offset) + " outside instance of size " +
                                  std::to_string(instance_size));
    if (f.transient && f.kind != FieldKind::reference)
      fail(ErrorCode::layout, "scalar field at offset " + std::to_string(f.offset) + " marked transient");
    offsets.push_back(f.offset);
  }
  std::sort(offsets.begin(), offsets.end());
  if (std::adjacent_find(offsets.begin(), offsets.end()) != offsets.end())
    fail(ErrorCode::layout, "overlapping fields");

  ClassDescriptor& d = _classes.emplace_back();
  d._class_id = ClassId(_classes.size());
  d._instance_size = instance_size;
  d._fields = std::move(layout);
  for (const FieldSpec& f : d._fields) {
    if (f.kind == FieldKind::scalar) {
      d._scalar_offsets.push_back(f.offset);
      continue;
    }
    d._reference_offsets.push_back(f.offset);
    (f.transient ? d._transient_reference_offsets : d._persistent_reference_offsets).push_back(f.offset);
  }
  return d;
}

const ClassDescriptor& ClassRegistry::get(ClassId id) const {
  const ClassDescriptor* d = find(id);
  if (d == nullptr) fail(ErrorCode::invalid_handle, "unknown class id " + std::to_string(id));
  return *d;
}

ObjectHeader ObjectHeader::decode(std::uint64_t word0, std::uint64_t word1) {
  ObjectHeader h;
  h.class_id = mark_word::class_id(word0);
  h.age = mark_word::age(word0);
  h.tc = TcWord::decode(word1);
  if (mark_word::is_forwarded(word0)) h.forwarding = mark_word::forwardee(word0);
  return h;
}

}  // namespace dualheap
