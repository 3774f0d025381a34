#include <gtest/gtest.h>

#include "dualheap/error.hpp"
#include "dualheap/runtime.hpp"
#include "test_support.hpp"

using namespace dualheap;
using testing_support::layout;
using testing_support::small_options;

namespace {

ErrorCode error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::trace;
}

}  // namespace

TEST(ClassRegistry, RefAndScalarGive32Bytes) {
  ClassRegistry reg;
  const ClassDescriptor& d = reg.register_class({FieldSpec::reference(16), FieldSpec::scalar(24)});
  EXPECT_EQ(d.instance_size(), 32u);
  EXPECT_EQ(d.class_id(), 1u);
  EXPECT_EQ(&reg.get(d.class_id()), &d);
}

TEST(ClassRegistry, EmptyLayoutIsHeaderOnly) {
  ClassRegistry reg;
  EXPECT_EQ(reg.register_class({}).instance_size(), kHeaderSize);
}

TEST(ClassRegistry, TransientFieldIsRecorded) {
  ClassRegistry reg;
  const ClassDescriptor& d = reg.register_class({FieldSpec::reference(16, true), FieldSpec::reference(24)});
  EXPECT_EQ(d.transient_field_count(), 1u);
  ASSERT_EQ(d.persistent_reference_offsets().size(), 1u);
  EXPECT_EQ(d.persistent_reference_offsets()[0], 24u);
  EXPECT_EQ(d.reference_offsets().size(), 2u);
}

TEST(ClassRegistry, IdsAreUnique) {
  ClassRegistry reg;
  const ClassId a = reg.register_class({}).class_id();
  const ClassId b = reg.register_class({}).class_id();
  EXPECT_NE(a, b);
}

TEST(ClassRegistry, RejectsBadLayouts) {
  ClassRegistry reg;
  EXPECT_EQ(error_of([&] { reg.register_class({FieldSpec::scalar(16), FieldSpec::scalar(16)}); }), ErrorCode::layout);
  EXPECT_EQ(error_of([&] { reg.register_class({FieldSpec::scalar(8)}); }), ErrorCode::layout);
  EXPECT_EQ(error_of([&] { reg.register_class({FieldSpec::scalar(20)}); }), ErrorCode::layout);
  EXPECT_EQ(error_of([&] { reg.register_class({FieldSpec::scalar(32)}); }), ErrorCode::layout);
  EXPECT_EQ(error_of([&] { reg.register_class({FieldSpec{16, FieldKind::scalar, true}}); }), ErrorCode::layout);
  EXPECT_EQ(reg.size(), 0u);
}

TEST(ClassRegistry, FieldIndexOutOfRange) {
  ClassRegistry reg;
  const ClassDescriptor& d = reg.register_class({FieldSpec::scalar(16)});
  EXPECT_EQ(error_of([&] { d.field(1); }), ErrorCode::invalid_field);
}

TEST(MarkWord, FieldsRoundTrip) {
  std::uint64_t w = mark_word::make(12345, 7);
  EXPECT_EQ(mark_word::class_id(w), 12345u);
  EXPECT_EQ(mark_word::age(w), 7u);
  EXPECT_FALSE(mark_word::is_marked(w));
  w = mark_word::forward_to(w | mark_word::kMarkBit, 0x123456788);
  EXPECT_TRUE(mark_word::is_forwarded(w));
  EXPECT_TRUE(mark_word::is_marked(w));
  EXPECT_EQ(mark_word::forwardee(w), 0x123456788u);
  EXPECT_EQ(mark_word::class_id(w), 12345u);
  w = mark_word::clear_gc_bits(w);
  EXPECT_EQ(w, mark_word::make(12345, 7));
}

TEST(TcWord, RoundTrip) {
  for (PartitionId p : {0u, 1u, 3u, 0xffffffffu}) {
    for (bool m : {false, true}) {
      const TcWord t{m, p};
      const TcWord back = TcWord::decode(t.encode());
      EXPECT_EQ(back.marked, m);
      EXPECT_EQ(back.partition, p);
    }
  }
}

TEST(ClassifyHandle, RangesAndBounds) {
  Runtime rt(small_options());
  const HeapLayout& l = rt.layout();
  EXPECT_EQ(rt.classify_handle(ObjectHandle(l.young_base)), HeapSpace::h1_young);
  EXPECT_EQ(rt.classify_handle(ObjectHandle(l.young_end - 8)), HeapSpace::h1_young);
  EXPECT_EQ(rt.classify_handle(ObjectHandle(l.old_base)), HeapSpace::h1_old);
  EXPECT_EQ(rt.classify_handle(ObjectHandle(l.h2_base)), HeapSpace::h2);
  EXPECT_EQ(error_of([&] { rt.classify_handle(ObjectHandle(l.old_end)); }), ErrorCode::invalid_handle);
  EXPECT_EQ(error_of([&] { rt.classify_handle(ObjectHandle(l.h2_end)); }), ErrorCode::invalid_handle);
  EXPECT_EQ(error_of([&] { rt.classify_handle(ObjectHandle::null()); }), ErrorCode::invalid_handle);
}

TEST(ClassifyHandle, PartitionsLiveObjects) {
  Runtime rt(small_options());
  const ClassDescriptor& c = rt.register_class(layout("rs"));
  RootSlot head = testing_support::build_chain(rt, c, 3000);
  rt.persist(rt.root(head), 1);
  rt.major_collect();
  testing_support::build_chain(rt, c, 500);
  for (int i = 0; i < 3; ++i) rt.minor_collect();
  testing_support::build_chain(rt, c, 100);
  std::size_t counts[3] = {0, 0, 0};
  rt.for_each_object([&](ObjectHandle h, const ClassDescriptor&) { ++counts[int(rt.classify_handle(h))]; });
  EXPECT_GT(counts[int(HeapSpace::h1_young)], 0u);
  EXPECT_GT(counts[int(HeapSpace::h1_old)], 0u);
  EXPECT_EQ(counts[int(HeapSpace::h2)], 3000u);
}

TEST(ObjectHeader, PersistWritesTcWord) {
  Runtime rt(small_options());
  const ClassDescriptor& c = rt.register_class(layout("s"));
  LocalRoot r(rt, rt.allocate(c));
  rt.persist(r.get(), 42);
  const ObjectHeader h = rt.header(r.get());
  EXPECT_TRUE(h.tc.marked);
  EXPECT_EQ(h.tc.partition, 42u);
  EXPECT_EQ(h.class_id, c.class_id());
}
