#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace dualheap {

using Address = std::uint64_t;
using ClassId = std::uint32_t;
using PartitionId = std::uint32_t;

inline constexpr std::size_t kWordSize = 8;
inline constexpr std::size_t kHeaderSize = 16;
inline constexpr std::size_t kObjectAlignment = 8;

// An address in the combined heap address space. Address 0 is null; the
// owning heap (H1 young, H1 old, H2) is implied by the address range.
class ObjectHandle {
 public:
  constexpr ObjectHandle() = default;
  constexpr explicit ObjectHandle(Address address) : _address(address) {}

  static constexpr ObjectHandle null() { return ObjectHandle(); }

  constexpr Address address() const { return _address; }
  constexpr bool is_null() const { return _address == 0; }
  constexpr explicit operator bool() const { return _address != 0; }

  friend constexpr auto operator<=>(ObjectHandle, ObjectHandle) = default;

 private:
  Address _address = 0;
};

enum class HeapSpace { h1_young, h1_old, h2 };

const char* to_string(HeapSpace space) noexcept;

enum class FieldKind : std::uint8_t { reference, scalar };

struct FieldSpec {
  std::uint32_t offset = 0;
  FieldKind kind = FieldKind::scalar;
  bool transient = false;

  static FieldSpec reference(std::uint32_t offset, bool transient = false) {
    return {offset, FieldKind::reference, transient};
  }
  static FieldSpec scalar(std::uint32_t offset) { return {offset, FieldKind::scalar, false}; }

  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

class ClassDescriptor {
 public:
  ClassId class_id() const { return _class_id; }
  std::size_t instance_size() const { return _instance_size; }
  std::size_t field_count() const { return _fields.size(); }
  const std::vector<FieldSpec>& fields() const { return _fields; }

  // Throws invalid_field for an out-of-range index.
  const FieldSpec& field(std::size_t index) const;

  std::span<const std::uint32_t> reference_offsets() const { return _reference_offsets; }
  // Reference fields that belong to the serialized (non-transient) closure.
  std::span<const std::uint32_t> persistent_reference_offsets() const {
    return _persistent_reference_offsets;
  }
  std::span<const std::uint32_t> transient_reference_offsets() const {
    return _transient_reference_offsets;
  }
  std::span<const std::uint32_t> scalar_offsets() const { return _scalar_offsets; }

  std::size_t transient_field_count() const { return _transient_reference_offsets.size(); }

 private:
  friend class ClassRegistry;

  ClassId _class_id = 0;
  std::size_t _instance_size = kHeaderSize;
  std::vector<FieldSpec> _fields;
  std::vector<std::uint32_t> _reference_offsets;
  std::vector<std::uint32_t> _persistent_reference_offsets;
  std::vector<std::uint32_t> _transient_reference_offsets;
  std::vector<std::uint32_t> _scalar_offsets;
};

// Owns class descriptors. Ids start at 1 and are never reused; descriptors
// are immutable and address-stable once registered.
class ClassRegistry {
 public:
  static constexpr ClassId kMaxClassId = (1u << 20) - 1;

  // Every field is one word. Offsets must be word aligned, start after the
  // header and tile the instance exactly, so instance_size is
  // kHeaderSize + 8 * layout.size().
  const ClassDescriptor& register_class(std::vector<FieldSpec> layout);

  const ClassDescriptor* find(ClassId id) const noexcept {
    return id == 0 || id > _classes.size() ? nullptr : &_classes[id - 1];
  }
  const ClassDescriptor& get(ClassId id) const;
  std::size_t size() const { return _classes.size(); }

 private:
  std::deque<ClassDescriptor> _classes;
};

// Header word 0 keeps the class id and age while leaving room for a
// forwarding address, so collectors can forward an object without losing
// the information they need to parse it.
//
//   [63..28] forwarding address >> 3   (valid when bit 0 is set)
//   [27..8]  class id
//   [7..2]   age
//   [1]      mark (major collection liveness)
//   [0]      forwarded
namespace mark_word {

inline constexpr std::uint64_t kForwardedBit = 1;
inline constexpr std::uint64_t kMarkBit = 2;
inline constexpr unsigned kAgeShift = 2;
inline constexpr std::uint64_t kAgeMask = 0x3f;
inline constexpr unsigned kClassShift = 8;
inline constexpr std::uint64_t kClassMask = 0xfffff;
inline constexpr unsigned kForwardShift = 28;
inline constexpr unsigned kMaxAge = 63;
// Forwarding addresses are stored as word indices in 36 bits.
inline constexpr Address kMaxAddress = Address{1} << 39;

constexpr std::uint64_t make(ClassId id, unsigned age = 0) {
  return (std::uint64_t(id & kClassMask) << kClassShift) |
         (std::uint64_t(age & kAgeMask) << kAgeShift);
}
constexpr ClassId class_id(std::uint64_t w) { return ClassId((w >> kClassShift) & kClassMask); }
constexpr unsigned age(std::uint64_t w) { return unsigned((w >> kAgeShift) & kAgeMask); }
constexpr bool is_marked(std::uint64_t w) { return (w & kMarkBit) != 0; }
constexpr bool is_forwarded(std::uint64_t w) { return (w & kForwardedBit) != 0; }
constexpr Address forwardee(std::uint64_t w) { return (w >> kForwardShift) << 3; }

constexpr std::uint64_t with_age(std::uint64_t w, unsigned a) {
  return (w & ~(kAgeMask << kAgeShift)) | (std::uint64_t(a & kAgeMask) << kAgeShift);
}
constexpr std::uint64_t forward_to(std::uint64_t w, Address to) {
  return (w & ((std::uint64_t{1} << kForwardShift) - 1)) | kForwardedBit |
         ((to >> 3) << kForwardShift);
}
// Drops mark and forwarding state, keeping class id and age.
constexpr std::uint64_t clear_gc_bits(std::uint64_t w) {
  return w & (((kClassMask << kClassShift) | (kAgeMask << kAgeShift)));
}

}  // namespace mark_word

// The second header word: cache-candidate flag plus partition id. Bit 1 is a
// collector-private "visited by the closure in this cycle" flag and is not
// part of the public value.
struct TcWord {
  bool marked = false;
  PartitionId partition = 0;

  static constexpr std::uint64_t kMarkedBit = 1;
  static constexpr std::uint64_t kVisitedBit = 2;
  static constexpr unsigned kPartitionShift = 32;

  constexpr std::uint64_t encode() const {
    return (marked ? kMarkedBit : 0) | (std::uint64_t(partition) << kPartitionShift);
  }
  static constexpr TcWord decode(std::uint64_t w) {
    return TcWord{(w & kMarkedBit) != 0, PartitionId(w >> kPartitionShift)};
  }

  friend bool operator==(const TcWord&, const TcWord&) = default;
};

struct ObjectHeader {
  ClassId class_id = 0;
  unsigned age = 0;
  TcWord tc;
  std::optional<Address> forwarding;

  static ObjectHeader decode(std::uint64_t word0, std::uint64_t word1);
};

}  // namespace dualheap
