#include <gtest/gtest.h>

#include "dualheap/error.hpp"
#include "dualheap/runtime.hpp"
#include "test_support.hpp"

using namespace dualheap;
using testing_support::build_chain;
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

struct MigratedFixture : ::testing::Test {
  // 300 objects of 64 bytes span the first three 8 KiB cards of a stripe.
  MigratedFixture() : rt(small_options()), cls(rt.register_class(layout("rsssss"))) {
    head = build_chain(rt, cls, 300);
    rt.persist(rt.root(head), 1);
    rt.major_collect();
    rt.h2()->scan_all();  // leaves only boundary cards dirty
  }
  ObjectHandle interior() {
    ObjectHandle cur = rt.root(head);
    for (int i = 0; i < 200; ++i) cur = rt.read_ref(cur, 0);
    return cur;
  }
  Runtime rt;
  const ClassDescriptor& cls;
  RootSlot head;
};

}  // namespace

TEST(WriteRef, OldToYoungDirtiesH1Card) {
  Runtime rt(small_options());
  const ClassDescriptor& c = rt.register_class(layout("rs"));
  LocalRoot old(rt, rt.allocate(c));
  rt.minor_collect();
  rt.minor_collect();
  ASSERT_EQ(rt.classify_handle(old.get()), HeapSpace::h1_old);
  rt.write_ref(old.get(), 0, rt.allocate(c));
  EXPECT_EQ(rt.h1().cards().count_dirty(), 1u);
  EXPECT_EQ(rt.barrier_stats().h1_card_marks, 1u);
}

TEST(WriteRef, YoungToYoungIsUnbarriered) {
  Runtime rt(small_options());
  const ClassDescriptor& c = rt.register_class(layout("rs"));
  const ObjectHandle a = rt.allocate(c);
  rt.write_ref(a, 0, rt.allocate(c));
  EXPECT_EQ(rt.h1().cards().count_dirty(), 0u);
  EXPECT_EQ(rt.h2()->cards().count_dirty(), 0u);
}

TEST_F(MigratedFixture, H2ToH1DirtiesH2Card) {
  const ObjectHandle obj = interior();
  const std::size_t card = rt.h2()->cards().index_for(obj.address());
  ASSERT_FALSE(rt.h2()->is_boundary_card(card));
  ASSERT_FALSE(rt.h2()->cards().is_dirty(card));
  LocalRoot keep(rt, obj);
  rt.write_ref(keep.get(), 0, rt.allocate(cls));
  EXPECT_TRUE(rt.h2()->cards().is_dirty(card));
  EXPECT_EQ(rt.barrier_stats().h2_card_marks, 1u);
}

TEST_F(MigratedFixture, H2ScalarWriteDirtiesThenScanCleans) {
  const ObjectHandle obj = interior();
  const std::size_t card = rt.h2()->cards().index_for(obj.address());
  rt.write_scalar(obj, 1, 99);
  EXPECT_TRUE(rt.h2()->cards().is_dirty(card));
  const CardScanResult r = rt.h2()->scan_all();
  EXPECT_TRUE(r.refs.empty());
  EXPECT_FALSE(rt.h2()->cards().is_dirty(card));
  EXPECT_EQ(rt.read_scalar(obj, 1), 99u);
}

TEST(WriteScalar, FilterToggleSkipsH2Card) {
  RuntimeOptions o = small_options();
  o.h2_scalar_writes_dirty = false;
  Runtime rt(o);
  const ClassDescriptor& c = rt.register_class(layout("rsssss"));
  RootSlot h = build_chain(rt, c, 300);
  rt.persist(rt.root(h), 1);
  rt.major_collect();
  rt.h2()->scan_all();
  const std::size_t before = rt.h2()->cards().count_dirty();
  ObjectHandle interior = rt.root(h);
  for (int i = 0; i < 200; ++i) interior = rt.read_ref(interior, 0);
  rt.write_scalar(interior, 1, 1);
  EXPECT_EQ(rt.h2()->cards().count_dirty(), before);
}

TEST(WriteScalar, H1WriteNeverMarksCards) {
  Runtime rt(small_options());
  const ClassDescriptor& c = rt.register_class(layout("rs"));
  LocalRoot old(rt, rt.allocate(c));
  rt.minor_collect();
  rt.minor_collect();
  rt.write_scalar(old.get(), 1, 3);
  EXPECT_EQ(rt.h1().cards().count_dirty(), 0u);
}

TEST(FieldAccess, KindAndHandleErrors) {
  Runtime rt(small_options());
  const ClassDescriptor& c = rt.register_class(layout("rs"));
  const ObjectHandle a = rt.allocate(c);
  EXPECT_EQ(error_of([&] { rt.write_ref(a, 1, a); }), ErrorCode::invalid_field);
  EXPECT_EQ(error_of([&] { rt.write_scalar(a, 0, 1); }), ErrorCode::invalid_field);
  EXPECT_EQ(error_of([&] { rt.read_scalar(a, 0); }), ErrorCode::invalid_field);
  EXPECT_EQ(error_of([&] { rt.read_ref(a, 1); }), ErrorCode::invalid_field);
  EXPECT_EQ(error_of([&] { rt.read_ref(a, 2); }), ErrorCode::invalid_field);
  EXPECT_EQ(error_of([&] { rt.write_scalar(ObjectHandle::null(), 1, 1); }), ErrorCode::invalid_handle);
}

TEST(FieldAccess, ReadAfterWrite) {
  Runtime rt(small_options());
  const ClassDescriptor& c = rt.register_class(layout("rs"));
  const ObjectHandle a = rt.allocate(c);
  const ObjectHandle b = rt.allocate(c);
  rt.write_ref(a, 0, b);
  rt.write_scalar(a, 1, 0xdeadbeef);
  EXPECT_EQ(rt.read_ref(a, 0), b);
  EXPECT_EQ(rt.read_scalar(a, 1), 0xdeadbeefu);
}

TEST_F(MigratedFixture, H2FieldsKeepPreMigrationValues) {
  ObjectHandle cur = rt.root(head);
  for (std::uint64_t i = 0; i < 300; ++i, cur = rt.read_ref(cur, 0)) {
    EXPECT_EQ(rt.classify_handle(cur), HeapSpace::h2);
    EXPECT_EQ(rt.read_scalar(cur, 1), i);
  }
  EXPECT_TRUE(cur.is_null());
}

TEST(Roots, SlotFollowsObjectAcrossCollections) {
  Runtime rt(small_options());
  const ClassDescriptor& c = rt.register_class(layout("rs"));
  const ObjectHandle a = rt.allocate(c);
  rt.write_scalar(a, 1, 31337);
  const RootSlot s = rt.add_root(a);
  rt.major_collect();
  EXPECT_EQ(rt.read_scalar(rt.root(s), 1), 31337u);
  EXPECT_EQ(rt.classify_handle(rt.root(s)), HeapSpace::h1_old);
}

TEST(Roots, DropTwiceIsInvalidSlot) {
  Runtime rt(small_options());
  const ClassDescriptor& c = rt.register_class(layout("rs"));
  const RootSlot s = rt.add_root(rt.allocate(c));
  rt.drop_root(s);
  EXPECT_EQ(error_of([&] { rt.drop_root(s); }), ErrorCode::invalid_slot);
  EXPECT_EQ(error_of([&] { rt.root(s); }), ErrorCode::invalid_slot);
  EXPECT_EQ(error_of([&] { rt.drop_root(RootSlot{999, 0}); }), ErrorCode::invalid_slot);
}

TEST(Roots, ReusedSlotRejectsStaleId) {
  Runtime rt(small_options());
  const ClassDescriptor& c = rt.register_class(layout("rs"));
  const RootSlot s = rt.add_root(rt.allocate(c));
  rt.drop_root(s);
  const RootSlot t = rt.add_root(rt.allocate(c));
  EXPECT_EQ(s.index, t.index);
  EXPECT_EQ(error_of([&] { rt.root(s); }), ErrorCode::invalid_slot);
  EXPECT_NO_THROW(rt.root(t));
}

TEST(Roots, DroppedGraphDisappears) {
  Runtime rt(small_options());
  const ClassDescriptor& c = rt.register_class(layout("rs"));
  RootSlot h = build_chain(rt, c, 500);
  rt.drop_root(h);
  rt.major_collect();
  std::size_t n = 0;
  rt.for_each_object([&](ObjectHandle, const ClassDescriptor&) { ++n; });
  EXPECT_EQ(n, 0u);
}
