#include "dualheap/workload/serializer.hpp"

#include <unordered_map>

#include "dualheap/error.hpp"

namespace dualheap::workload {

std::vector<std::uint64_t> BaselineSerializer::serialize(const Runtime& rt, ObjectHandle root) {
  std::vector<std::uint64_t> out;
  if (root.is_null()) return out;
  std::unordered_map<Address, std::uint64_t> index;
  std::vector<ObjectHandle> order;
  std::vector<ObjectHandle> stack{root};
  index.emplace(root.address(), 1);
  order.push_back(root);
  // Depth-first discovery; records are emitted in discovery order.
  while (!stack.empty()) {
    const ObjectHandle obj = stack.back();
    stack.pop_back();
    const ClassDescriptor& desc = rt.class_of(obj);
    for (std::size_t i = desc.field_count(); i-- > 0;) {
      const FieldSpec& f = desc.field(i);
      if (f.kind != FieldKind::reference || f.transient) continue;
      const ObjectHandle t = rt.read_ref(obj, i);
      if (t.is_null() || index.contains(t.address())) continue;
      index.emplace(t.address(), order.size() + 1);
      order.push_back(t);
      stack.push_back(t);
    }
  }
  for (ObjectHandle obj : order) {
    const ClassDescriptor& desc = rt.class_of(obj);
    const std::size_t len_at = out.size();
    out.push_back(0);
    out.push_back(desc.class_id());
    for (std::size_t i = 0; i < desc.field_count(); ++i) {
      const FieldSpec& f = desc.field(i);
      if (f.kind == FieldKind::scalar) {
        out.push_back(rt.read_scalar(obj, i));
      } else if (!f.transient) {
        const ObjectHandle t = rt.read_ref(obj, i);
        out.push_back(t.is_null() ? 0 : index.at(t.address()));
      }
    }
    out[len_at] = out.size() - len_at - 1;
  }
  return out;
}

ObjectHandle BaselineSerializer::deserialize(Runtime& rt, const std::vector<std::uint64_t>& image) {
  if (image.empty()) return ObjectHandle::null();
  std::vector<std::size_t> record_at;
  for (std::size_t pos = 0; pos < image.size(); pos += image[pos] + 1) {
    if (image[pos] == 0 || pos + image[pos] >= image.size())
      fail(ErrorCode::io, "truncated serialized record");
    record_at.push_back(pos);
  }
  std::vector<RootSlot> slots;
  slots.reserve(record_at.size());
  for (std::size_t pos : record_at)
    slots.push_back(rt.add_root(rt.allocate(rt.classes().get(ClassId(image[pos + 1])))));
  for (std::size_t r = 0; r < record_at.size(); ++r) {
    const ObjectHandle obj = rt.root(slots[r]);
    const ClassDescriptor& desc = rt.class_of(obj);
    std::size_t pos = record_at[r] + 2;
    for (std::size_t i = 0; i < desc.field_count(); ++i) {
      const FieldSpec& f = desc.field(i);
      if (f.kind == FieldKind::scalar) {
        rt.write_scalar(obj, i, image[pos++]);
      } else if (!f.transient) {
        const std::uint64_t target = image[pos++];
        if (target > slots.size()) fail(ErrorCode::io, "serialized reference out of range");
        if (target != 0) rt.write_ref(obj, i, rt.root(slots[target - 1]));
      }
    }
  }
  const ObjectHandle root = rt.root(slots[0]);
  for (RootSlot s : slots) rt.drop_root(s);
  return root;
}

}  // namespace dualheap::workload
