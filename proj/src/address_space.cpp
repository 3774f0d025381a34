#include "dualheap/address_space.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "dualheap/error.hpp"

namespace dualheap {

namespace {

Address align_up(Address v, Address alignment) { return (v + alignment - 1) / alignment * alignment; }

std::string errno_text() { return std::strerror(errno); }

}  // namespace

HeapLayout HeapLayout::compute(std::size_t young_size, std::size_t old_size, std::size_t h2_size) {
  HeapLayout l;
  l.young_base = kGuardSize;
  l.young_end = l.young_base + young_size;
  l.old_base = l.young_end;
  l.old_end = l.old_base + old_size;
  if (h2_size > 0) {
    l.h2_base = align_up(l.old_end + kGuardSize, kGuardSize);
    l.h2_end = l.h2_base + h2_size;
  } else {
    l.h2_base = l.h2_end = 0;
  }
  if (l.reservation_size() >= mark_word::kMaxAddress)
    fail(ErrorCode::config, "combined heap size exceeds the addressable range");
  return l;
}

AddressSpace::AddressSpace(const HeapLayout& layout, const std::string& h2_backing_path)
    : _layout(layout), _h2_path(h2_backing_path) {
  const std::size_t total = _layout.reservation_size();
  void* reserved = ::mmap(nullptr, total, PROT_NONE, MAP_PRIVATE | MAP_ANONYMOUS | MAP_NORESERVE, -1, 0);
  if (reserved == MAP_FAILED) fail(ErrorCode::io, "cannot reserve heap: " + errno_text());
  _base = static_cast<std::byte*>(reserved);

  const std::size_t h1_size = _layout.old_end - _layout.young_base;
  if (::mmap(_base + _layout.young_base, h1_size, PROT_READ | PROT_WRITE,
             MAP_PRIVATE | MAP_ANONYMOUS | MAP_NORESERVE | MAP_FIXED, -1, 0) == MAP_FAILED) {
    const std::string why = errno_text();
    ::munmap(_base, total);
    fail(ErrorCode::io, "cannot map H1: " + why);
  }

  if (!_layout.has_h2()) return;
  const std::size_t h2_size = _layout.h2_end - _layout.h2_base;
  void* h2 = MAP_FAILED;
  if (_h2_path.empty()) {
    h2 = ::mmap(_base + _layout.h2_base, h2_size, PROT_READ | PROT_WRITE,
                MAP_PRIVATE | MAP_ANONYMOUS | MAP_NORESERVE | MAP_FIXED, -1, 0);
  } else {
    _h2_fd = ::open(_h2_path.c_str(), O_RDWR | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (_h2_fd >= 0 && ::ftruncate(_h2_fd, off_t(h2_size)) == 0) {
      h2 = ::mmap(_base + _layout.h2_base, h2_size, PROT_READ | PROT_WRITE, MAP_SHARED | MAP_FIXED, _h2_fd, 0);
    }
  }
  if (h2 == MAP_FAILED) {
    const std::string why = errno_text();
    if (_h2_fd >= 0) ::close(_h2_fd);
    ::munmap(_base, total);
    fail(ErrorCode::io, "cannot map H2" + (_h2_path.empty() ? std::string() : " over " + _h2_path) + ": " + why);
  }
}

AddressSpace::~AddressSpace() {
  if (_base != nullptr) ::munmap(_base, _layout.reservation_size());
  if (_h2_fd >= 0) ::close(_h2_fd);
}

}  // namespace dualheap
