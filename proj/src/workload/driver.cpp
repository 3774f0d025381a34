#include "dualheap/workload/driver.hpp"

#include <algorithm>
#include <list>
#include <map>
#include <random>
#include <unordered_map>

#include "dualheap/error.hpp"
#include "dualheap/workload/serializer.hpp"

namespace dualheap::workload {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  h *= 0x100000001b3ull;
  return h ^ (h >> 29);
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::vector<ObjectHandle> persistent_targets(const Runtime& rt, ObjectHandle obj) {
  std::vector<ObjectHandle> out;
  const ClassDescriptor& desc = rt.class_of(obj);
  for (std::size_t i = 0; i < desc.field_count(); ++i) {
    const FieldSpec& f = desc.field(i);
    if (f.kind != FieldKind::reference || f.transient) continue;
    const ObjectHandle t = rt.read_ref(obj, i);
    if (!t.is_null()) out.push_back(t);
  }
  return out;
}

ObjectHandle random_walk(const Runtime& rt, ObjectHandle root, std::mt19937_64& rng, std::size_t* steps_taken) {
  const std::size_t steps = rng() % 16;
  ObjectHandle obj = root;
  std::size_t s = 0;
  for (; s < steps; ++s) {
    const std::vector<ObjectHandle> next = persistent_targets(rt, obj);
    if (next.empty()) break;
    obj = next[rng() % next.size()];
  }
  if (steps_taken) *steps_taken = s;
  return obj;
}

}  // namespace

RunMode parse_run_mode(const std::string& name) {
  if (name == "TC" || name == "tc") return RunMode::tc;
  if (name == "SD" || name == "sd") return RunMode::sd;
  if (name == "MO" || name == "mo") return RunMode::mo;
  fail(ErrorCode::config, "unknown mode '" + name + "' (expected TC, SD or MO)");
}

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::tc:
      return "TC";
    case RunMode::sd:
      return "SD";
    case RunMode::mo:
      return "MO";
  }
  return "?";
}

std::uint64_t RunMetrics::checksum_digest() const {
  std::uint64_t h = kFnvOffset;
  for (std::uint64_t c : checksums) h = mix(h, c);
  return h;
}

RuntimeOptions options_for_mode(RuntimeOptions base, RunMode mode) {
  switch (mode) {
    case RunMode::tc:
      base.enable_h2 = true;
      break;
    case RunMode::sd:
      base.enable_h2 = false;
      break;
    case RunMode::mo:
      base.enable_h2 = false;
      base.h1.old_size += base.h2.h2_size;
      break;
  }
  return base;
}

std::uint64_t scan_checksum(const Runtime& rt, ObjectHandle root) {
  if (root.is_null()) return 0;
  std::unordered_map<Address, std::uint64_t> index{{root.address(), 1}};
  std::vector<ObjectHandle> queue{root};
  std::uint64_t h = kFnvOffset;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const ObjectHandle obj = queue[head];
    const ClassDescriptor& desc = rt.class_of(obj);
    h = mix(h, desc.class_id());
    for (std::size_t i = 0; i < desc.field_count(); ++i) {
      const FieldSpec& f = desc.field(i);
      if (f.kind == FieldKind::scalar) {
        h = mix(h, rt.read_scalar(obj, i));
        continue;
      }
      if (f.transient) continue;
      const ObjectHandle t = rt.read_ref(obj, i);
      if (t.is_null()) {
        h = mix(h, 0);
        continue;
      }
      auto [it, inserted] = index.try_emplace(t.address(), queue.size() + 1);
      if (inserted) queue.push_back(t);
      h = mix(h, it->second);
    }
  }
  return mix(h, queue.size());
}

std::uint64_t point_checksum(const Runtime& rt, ObjectHandle root, std::uint64_t seed) {
  if (root.is_null()) return 0;
  std::mt19937_64 rng(seed);
  std::size_t steps = 0;
  const ObjectHandle obj = random_walk(rt, root, rng, &steps);
  const ClassDescriptor& desc = rt.class_of(obj);
  std::uint64_t h = mix(kFnvOffset, steps);
  h = mix(h, desc.class_id());
  for (std::size_t i = 0; i < desc.field_count(); ++i)
    if (desc.field(i).kind == FieldKind::scalar) h = mix(h, rt.read_scalar(obj, i));
  return h;
}

struct Driver::Impl {
  struct Partition {
    RootSlot slot;
    bool on_heap = true;
    bool persisted = false;
    std::size_t bytes = 0;
    std::vector<std::uint64_t> image;
  };

  Runtime& rt;
  RuntimeOptions base;
  DriverOptions options;
  RunMetrics metrics;
  std::size_t event_index = 0;

  std::map<std::uint32_t, std::string> class_layouts;
  std::map<std::pair<std::uint32_t, std::uint64_t>, const ClassDescriptor*> variants;
  const ClassDescriptor* scratch = nullptr;
  std::map<PartitionKey, Partition> partitions;
  std::list<PartitionKey> lru;  // most recently used first
  std::size_t cached_bytes = 0;

  Impl(Runtime& r, const RuntimeOptions& b, const DriverOptions& o) : rt(r), base(b), options(o) {
    scratch = &rt.register_class({FieldSpec::scalar(16)});
  }

  [[noreturn]] void trace_fail(const std::string& what) const { throw TraceError(event_index, what); }

  std::uint64_t event_seed(std::uint64_t seed) const {
    return options.seed == 0 ? seed : splitmix(seed ^ splitmix(options.seed));
  }

  Partition& existing(PartitionKey p) {
    auto it = partitions.find(p);
    if (it == partitions.end()) trace_fail("unknown partition " + std::to_string(p));
    return it->second;
  }

  const ClassDescriptor& variant(std::uint32_t cls, std::uint64_t transient_mask) {
    auto key = std::make_pair(cls, transient_mask);
    if (auto it = variants.find(key); it != variants.end()) return *it->second;
    const std::string& layout = class_layouts.at(cls);
    std::vector<FieldSpec> fields;
    std::size_t ref = 0;
    for (std::size_t i = 0; i < layout.size(); ++i) {
      const std::uint32_t offset = std::uint32_t(kHeaderSize + kWordSize * i);
      if (layout[i] == 's') {
        fields.push_back(FieldSpec::scalar(offset));
      } else {
        const bool t = layout[i] == 't' || ((transient_mask >> ref) & 1);
        fields.push_back(FieldSpec::reference(offset, t));
        ++ref;
      }
    }
    const ClassDescriptor& desc = rt.register_class(std::move(fields));
    variants.emplace(key, &desc);
    return desc;
  }

  void operator()(const DefineClass& e) {
    if (class_layouts.contains(e.id)) trace_fail("class " + std::to_string(e.id) + " defined twice");
    if (e.layout.size() > 64) trace_fail("class layouts are limited to 64 fields");
    class_layouts.emplace(e.id, e.layout);
  }

  void operator()(const BuildPartition& e) {
    if (!class_layouts.contains(e.class_id)) trace_fail("undefined class " + std::to_string(e.class_id));
    if (partitions.contains(e.partition)) trace_fail("partition " + std::to_string(e.partition) + " already built");
    const std::string& layout = class_layouts.at(e.class_id);
    std::vector<std::size_t> ref_fields;
    std::vector<std::size_t> scalar_fields;
    for (std::size_t i = 0; i < layout.size(); ++i) (layout[i] == 's' ? scalar_fields : ref_fields).push_back(i);
    if (e.fan_out > ref_fields.size())
      trace_fail("fan out " + std::to_string(e.fan_out) + " exceeds the " + std::to_string(ref_fields.size()) +
                 " reference fields of class " + std::to_string(e.class_id));

    const std::uint64_t seed = event_seed(e.seed);
    std::mt19937_64 rng(seed);
    std::binomial_distribution<unsigned> transient_count(e.fan_out, e.transient_fraction);
    const std::size_t n = e.object_count;
    std::vector<RootSlot> slots;
    slots.reserve(n);
    std::size_t bytes = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned k = e.transient_fraction > 0.0 ? transient_count(rng) : 0;
      std::uint64_t mask = 0;
      for (unsigned j = e.fan_out - k; j < e.fan_out; ++j) mask |= std::uint64_t{1} << j;
      const ClassDescriptor& desc = variant(e.class_id, mask);
      const ObjectHandle obj = rt.allocate(desc);
      bytes += desc.instance_size();
      for (std::size_t s = 0; s < scalar_fields.size(); ++s)
        rt.write_scalar(obj, scalar_fields[s], splitmix(seed ^ (i << 8) ^ s));
      slots.push_back(rt.add_root(obj));
      metrics.mutator_steps += 1 + scalar_fields.size();
    }
    for (std::size_t i = 0; i < n; ++i) {
      const ObjectHandle obj = rt.root(slots[i]);
      for (std::size_t j = 0; j < e.fan_out; ++j) {
        const std::size_t child = i * e.fan_out + j + 1;
        const std::size_t target = child < n ? child : rng() % n;
        rt.write_ref(obj, ref_fields[j], rt.root(slots[target]));
        ++metrics.mutator_steps;
      }
    }
    Partition part;
    part.slot = rt.add_root(rt.root(slots[0]));
    part.bytes = bytes;
    for (RootSlot s : slots) rt.drop_root(s);
    partitions.emplace(e.partition, std::move(part));
  }

  void evict_if_needed() {
    const double budget = options.sd_cache_fraction * double(base.h1.young_size + base.h1.old_size);
    while (double(cached_bytes) > budget && !lru.empty()) {
      const PartitionKey victim = lru.back();
      lru.pop_back();
      Partition& part = partitions.at(victim);
      part.image = BaselineSerializer::serialize(rt, rt.root(part.slot));
      metrics.bytes_serialized += BaselineSerializer::byte_size(part.image);
      rt.drop_root(part.slot);
      part.on_heap = false;
      cached_bytes -= part.bytes;
      ++metrics.partitions_evicted;
    }
  }

  void touch(PartitionKey p) {
    auto it = std::find(lru.begin(), lru.end(), p);
    if (it != lru.end()) lru.splice(lru.begin(), lru, it);
  }

  void operator()(const Persist& e) {
    Partition& part = existing(e.partition);
    if (part.persisted) return;
    part.persisted = true;
    switch (options.mode) {
      case RunMode::tc:
        rt.persist(rt.root(part.slot), e.partition);
        break;
      case RunMode::sd:
        lru.push_front(e.partition);
        cached_bytes += part.bytes;
        evict_if_needed();
        break;
      case RunMode::mo:
        break;
    }
  }

  // Root of the partition on the heap; evicted SD partitions are read back
  // into a temporary graph that is garbage after use.
  ObjectHandle materialize(Partition& part) {
    if (part.on_heap) return rt.root(part.slot);
    metrics.bytes_deserialized += BaselineSerializer::byte_size(part.image);
    return BaselineSerializer::deserialize(rt, part.image);
  }

  void operator()(const Access& e) {
    Partition& part = existing(e.partition);
    if (part.on_heap) touch(e.partition);
    const ObjectHandle root = materialize(part);
    const std::uint64_t c =
        e.kind == AccessKind::scan ? scan_checksum(rt, root) : point_checksum(rt, root, event_seed(e.seed));
    metrics.checksums.push_back(c);
    metrics.mutator_steps += 1;
  }

  void operator()(const Mutate& e) {
    Partition& part = existing(e.partition);
    if (part.on_heap) touch(e.partition);
    LocalRoot root(rt, materialize(part));
    std::mt19937_64 rng(event_seed(e.seed));
    for (std::uint64_t m = 0; m < e.count; ++m) {
      LocalRoot obj(rt, random_walk(rt, root.get(), rng, nullptr));
      const ClassDescriptor& desc = rt.class_of(obj.get());
      const std::uint64_t value = rng();
      for (std::size_t i = 0; i < desc.field_count(); ++i) {
        const FieldSpec& f = desc.field(i);
        if (f.kind == FieldKind::scalar) {
          rt.write_scalar(obj.get(), i, mix(rt.read_scalar(obj.get(), i), value));
          ++metrics.mutator_steps;
          break;
        }
      }
      for (std::size_t i = 0; i < desc.field_count(); ++i) {
        const FieldSpec& f = desc.field(i);
        if (f.kind == FieldKind::reference && f.transient) {
          const ObjectHandle s = rt.allocate(*scratch);
          rt.write_scalar(s, 0, value);
          rt.write_ref(obj.get(), i, s);
          metrics.mutator_steps += 3;
          break;
        }
      }
    }
    if (!part.on_heap) {
      part.image = BaselineSerializer::serialize(rt, root.get());
      metrics.bytes_serialized += BaselineSerializer::byte_size(part.image);
    }
  }

  void operator()(const Unpersist& e) {
    auto it = partitions.find(e.partition);
    if (it == partitions.end()) return;
    Partition& part = it->second;
    if (options.mode == RunMode::tc && part.persisted) rt.unpersist(e.partition);
    if (options.mode == RunMode::sd && part.persisted && part.on_heap) {
      lru.remove(e.partition);
      cached_bytes -= part.bytes;
    }
    if (part.on_heap) rt.drop_root(part.slot);
    partitions.erase(it);
  }

  void operator()(const GcHint& e) {
    if (e.kind == GcKind::minor) {
      rt.minor_collect();
    } else {
      rt.major_collect();
    }
  }
};

Driver::Driver(const RuntimeOptions& base, const DriverOptions& options)
    : _rt(std::make_unique<Runtime>(options_for_mode(base, options.mode))),
      _impl(std::make_unique<Impl>(*_rt, base, options)) {}

Driver::~Driver() = default;

void Driver::apply(const TraceEvent& event) {
  try {
    std::visit(*_impl, event);
  } catch (const TraceError&) {
    throw;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::invalid_handle || e.code() == ErrorCode::invalid_field ||
        e.code() == ErrorCode::invalid_slot || e.code() == ErrorCode::layout)
      throw TraceError(_impl->event_index, e.what());
    throw;
  }
  ++_impl->event_index;
  ++_impl->metrics.events;
}

RunMetrics Driver::finish() {
  RunMetrics m = _impl->metrics;
  m.gc = _rt->counters();
  m.barrier = _rt->barrier_stats();
  if (const H2Heap* h2 = _rt->h2()) {
    const DirtyCensus c = h2->census();
    m.h2_dirty_cards = c.dirty_cards;
    m.h2_boundary_dirty_cards = c.boundary_dirty_cards;
    m.h2_cards_in_use = c.cards_in_use;
  }
  return m;
}

ObjectHandle Driver::partition_root(PartitionKey p) const {
  auto it = _impl->partitions.find(p);
  if (it == _impl->partitions.end() || !it->second.on_heap) return ObjectHandle::null();
  return _rt->root(it->second.slot);
}

bool Driver::evicted(PartitionKey p) const {
  auto it = _impl->partitions.find(p);
  return it != _impl->partitions.end() && !it->second.on_heap;
}

RunMetrics run_trace(const std::vector<TraceEvent>& events, const RuntimeOptions& base, const DriverOptions& options) {
  Driver driver(base, options);
  for (const TraceEvent& e : events) driver.apply(e);
  return driver.finish();
}

}  // namespace dualheap::workload
