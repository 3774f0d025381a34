#include "dualheap/runtime.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "dualheap/error.hpp"

namespace dualheap {

namespace {

HeapLayout layout_for(const RuntimeOptions& o) {
  validate(o.h1);
  if (o.enable_h2) validate(o.h2);
  return HeapLayout::compute(o.h1.young_size, o.h1.old_size, o.enable_h2 ? o.h2.h2_size : 0);
}

}  // namespace

Runtime::Runtime(const RuntimeOptions& options)
    : _options(options),
      _memory(std::make_unique<AddressSpace>(layout_for(options), options.enable_h2 ? options.h2.backing_path : "")),
      _h1(options.h1, _memory->layout()) {
  if (options.enable_h2) _h2 = std::make_unique<H2Heap>(options.h2, *_memory, _classes);
  if (options.strategy.buffer_size == 0) fail(ErrorCode::config, "migration.buffer_size must be positive");
  if (options.strategy.queue_depth == 0) fail(ErrorCode::config, "migration.queue_depth must be positive");
}

Runtime::~Runtime() = default;

HeapSpace Runtime::classify_handle(ObjectHandle h) const {
  if (h.is_null()) fail(ErrorCode::invalid_handle, "null handle");
  auto space = layout().classify(h.address());
  if (!space) fail(ErrorCode::invalid_handle, "address " + std::to_string(h.address()) + " is outside every heap space");
  return *space;
}

const ClassDescriptor& Runtime::descriptor_at(Address obj) const {
  const ClassDescriptor* d = _classes.find(mark_word::class_id(word(obj)));
  if (d == nullptr) fail(ErrorCode::heap_corruption, "unparseable object at " + std::to_string(obj));
  return *d;
}

const ClassDescriptor& Runtime::class_of(ObjectHandle h) const {
  classify_handle(h);
  const ClassDescriptor* d = _classes.find(mark_word::class_id(word(h.address())));
  if (d == nullptr) fail(ErrorCode::invalid_handle, "no object at " + std::to_string(h.address()));
  return *d;
}

ObjectHeader Runtime::header(ObjectHandle h) const {
  classify_handle(h);
  ObjectHeader hdr = ObjectHeader::decode(word(h.address()), word(h.address() + kWordSize));
  return hdr;
}

ObjectHandle Runtime::allocate(const ClassDescriptor& desc) {
  const std::size_t size = desc.instance_size();
  if (size > _h1.eden().capacity())
    fail(ErrorCode::heap_exhausted, "object of " + std::to_string(size) + " bytes does not fit in eden");
  auto a = _h1.eden().try_allocate(size);
  if (!a) {
    minor_collect();
    a = _h1.eden().try_allocate(size);
  }
  if (!a) {
    major_collect();
    a = _h1.eden().try_allocate(size);
  }
  if (!a) fail(ErrorCode::heap_exhausted, "eden still full after a major collection");
  std::memset(_memory->at(*a), 0, size);
  word(*a) = mark_word::make(desc.class_id());
  return ObjectHandle(*a);
}

const FieldSpec& Runtime::checked_field(ObjectHandle obj, std::size_t field_index, FieldKind kind) const {
  const FieldSpec& f = class_of(obj).field(field_index);
  if (f.kind != kind)
    fail(ErrorCode::invalid_field, "field " + std::to_string(field_index) + " is a " +
                                       (f.kind == FieldKind::reference ? "reference" : "scalar") + " field");
  return f;
}

void Runtime::write_ref(ObjectHandle obj, std::size_t field_index, ObjectHandle target) {
  const FieldSpec& f = checked_field(obj, field_index, FieldKind::reference);
  if (target) classify_handle(target);
  const Address a = obj.address();
  const Address t = target.address();
  word(a + f.offset) = t;
  ++_barrier.writes;

  const HeapLayout& l = layout();
  if (l.in_h2(a)) {
    _h2->dirty_card(obj);
    ++_barrier.h2_card_marks;
    // Keep regions that now reference each other in one group.
    if (t != 0 && l.in_h2(t)) {
      const std::size_t from = _h2->region_index(a);
      const std::size_t to = _h2->region_index(t);
      if (from != to && !_h2->same_group(from, to)) {
        _h2->merge_groups(from, to);
        ++_barrier.group_merges;
      }
    }
  } else if (l.in_old(a) && t != 0 && l.in_young(t)) {
    _h1.dirty_card(a);
    ++_barrier.h1_card_marks;
  }
}

void Runtime::write_scalar(ObjectHandle obj, std::size_t field_index, std::uint64_t value) {
  const FieldSpec& f = checked_field(obj, field_index, FieldKind::scalar);
  const Address a = obj.address();
  word(a + f.offset) = value;
  ++_barrier.writes;
  if (layout().in_h2(a) && _options.h2_scalar_writes_dirty) {
    _h2->dirty_card(obj);
    ++_barrier.h2_card_marks;
  }
}

ObjectHandle Runtime::read_ref(ObjectHandle obj, std::size_t field_index) const {
  const FieldSpec& f = checked_field(obj, field_index, FieldKind::reference);
  return ObjectHandle(word(obj.address() + f.offset));
}

std::uint64_t Runtime::read_scalar(ObjectHandle obj, std::size_t field_index) const {
  const FieldSpec& f = checked_field(obj, field_index, FieldKind::scalar);
  return word(obj.address() + f.offset);
}

Runtime::RootEntry& Runtime::root_entry(RootSlot slot) {
  if (slot.index >= _roots.size() || !_roots[slot.index].live || _roots[slot.index].generation != slot.generation)
    fail(ErrorCode::invalid_slot, "unknown root slot " + std::to_string(slot.index));
  return _roots[slot.index];
}

const Runtime::RootEntry& Runtime::root_entry(RootSlot slot) const {
  return const_cast<Runtime*>(this)->root_entry(slot);
}

RootSlot Runtime::add_root(ObjectHandle h) {
  if (h) classify_handle(h);
  std::uint32_t index;
  if (!_free_roots.empty()) {
    index = _free_roots.back();
    _free_roots.pop_back();
  } else {
    index = std::uint32_t(_roots.size());
    _roots.emplace_back();
  }
  RootEntry& e = _roots[index];
  e.value = h.address();
  e.live = true;
  ++_live_roots;
  return RootSlot{index, e.generation};
}

void Runtime::drop_root(RootSlot slot) {
  RootEntry& e = root_entry(slot);
  e.live = false;
  e.value = 0;
  ++e.generation;
  --_live_roots;
  _free_roots.push_back(slot.index);
}

ObjectHandle Runtime::root(RootSlot slot) const { return ObjectHandle(root_entry(slot).value); }

void Runtime::set_root(RootSlot slot, ObjectHandle h) {
  if (h) classify_handle(h);
  root_entry(slot).value = h.address();
}

void Runtime::persist(ObjectHandle root_object, PartitionId partition) {
  classify_handle(root_object);
  const Address r = root_object.address();
  if (layout().in_h2(r)) return;
  word(r + kWordSize) = TcWord{true, partition}.encode();
  for (CacheEntry& e : _cache) {
    if (e.pending && root(e.slot) == root_object) {
      e.partition = partition;
      return;
    }
  }
  _cache.push_back(CacheEntry{add_root(root_object), partition, true});
}

void Runtime::unpersist(PartitionId partition) {
  for (auto it = _cache.begin(); it != _cache.end();) {
    if (it->partition != partition) {
      ++it;
      continue;
    }
    const Address r = root(it->slot).address();
    if (r != 0 && layout().in_h1(r)) word(r + kWordSize) = 0;
    drop_root(it->slot);
    it = _cache.erase(it);
  }
}

std::vector<ObjectHandle> Runtime::cached_roots(PartitionId partition) const {
  std::vector<ObjectHandle> out;
  for (const CacheEntry& e : _cache)
    if (e.partition == partition) out.push_back(root(e.slot));
  return out;
}

std::vector<PersistHint> Runtime::pending_hints() const {
  std::vector<PersistHint> out;
  for (const CacheEntry& e : _cache)
    if (e.pending) out.push_back({root(e.slot), e.partition});
  return out;
}

ClosureResult Runtime::etr_mark_closure(std::span<const PersistHint> hints) {
  ClosureResult result;
  const HeapLayout& l = layout();
  std::vector<Address> stack;
  for (const PersistHint& hint : hints) {
    const Address r = hint.root.address();
    if (r == 0 || !l.in_h1(r)) continue;
    auto visit = [&](Address a) {
      std::uint64_t& tc = word(a + kWordSize);
      if (tc & TcWord::kVisitedBit) return;
      tc = TcWord{true, hint.partition}.encode() | TcWord::kVisitedBit;
      result.objects.push_back(ObjectHandle(a));
      stack.push_back(a);
    };
    visit(r);
    while (!stack.empty()) {
      const Address a = stack.back();
      stack.pop_back();
      if (_options.policy == MarkingPolicy::root_only) continue;
      for (std::uint32_t off : descriptor_at(a).persistent_reference_offsets()) {
        const Address t = word(a + off);
        if (t != 0 && l.in_h1(t)) visit(t);
      }
    }
  }
  result.marked = result.objects.size();
  return result;
}

void Runtime::for_each_object(const std::function<void(ObjectHandle, const ClassDescriptor&)>& fn) const {
  for (const BumpSpace* space : {&_h1.old(), &_h1.from(), &_h1.eden()}) {
    for (Address obj = space->base; obj < space->top;) {
      const ClassDescriptor& d = descriptor_at(obj);
      fn(ObjectHandle(obj), d);
      obj += d.instance_size();
    }
  }
  if (!_h2) return;
  for (std::size_t r = 0; r < _h2->region_count(); ++r) {
    if (!_h2->region_allocated(r)) continue;
    _h2->for_each_object_in_region(r, [&](Address obj, std::size_t) { fn(ObjectHandle(obj), descriptor_at(obj)); });
  }
}

}  // namespace dualheap
