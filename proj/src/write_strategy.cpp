#include "dualheap/write_strategy.hpp"

#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "dualheap/error.hpp"

namespace dualheap {

const char* to_string(WriteMode mode) noexcept {
  return mode == WriteMode::direct_copy ? "direct_copy" : "batched_async";
}

void DirectCopyWriter::write(Address dest, const std::byte* image, std::size_t size) {
  std::memcpy(_memory.at(dest), image, size);
  _stats.bytes += size;
  ++_stats.objects;
}

BatchedAsyncWriter::BatchedAsyncWriter(const AddressSpace& memory, const WriteStrategy& strategy)
    : _memory(memory), _strategy(strategy) {
  if (_strategy.buffer_size == 0) fail(ErrorCode::config, "migration.buffer_size must be positive");
  if (_strategy.queue_depth == 0) fail(ErrorCode::config, "migration.queue_depth must be positive");
  _pending.data.reserve(_strategy.buffer_size);
  _flusher = std::thread([this] { flush_loop(); });
}

BatchedAsyncWriter::~BatchedAsyncWriter() {
  {
    std::lock_guard guard(_lock);
    _closing = true;
  }
  _changed.notify_all();
  if (_flusher.joinable()) _flusher.join();
}

void BatchedAsyncWriter::write(Address dest, const std::byte* image, std::size_t size) {
  _stats.bytes += size;
  ++_stats.objects;
  if (size > _strategy.buffer_size) {
    ++_stats.large_objects;
    Batch own;
    own.data.assign(image, image + size);
    own.extents.push_back({dest, 0, size});
    submit(std::move(own));
    return;
  }
  append(dest, image, size);
}

void BatchedAsyncWriter::append(Address dest, const std::byte* image, std::size_t size) {
  while (size > 0) {
    const std::size_t room = _strategy.buffer_size - _pending.data.size();
    const std::size_t n = std::min(room, size);
    const std::size_t offset = _pending.data.size();
    _pending.data.insert(_pending.data.end(), image, image + n);
    if (!_pending.extents.empty() && _pending.extents.back().dest + _pending.extents.back().length == dest &&
        _pending.extents.back().offset + _pending.extents.back().length == offset) {
      _pending.extents.back().length += n;
    } else {
      _pending.extents.push_back({dest, offset, n});
    }
    dest += n;
    image += n;
    size -= n;
    if (_pending.data.size() == _strategy.buffer_size) {
      submit(std::move(_pending));
      _pending = Batch();
      _pending.data.reserve(_strategy.buffer_size);
    }
  }
}

void BatchedAsyncWriter::submit(Batch batch) {
  ++_stats.flush_ops;
  std::unique_lock guard(_lock);
  _changed.wait(guard, [&] { return _in_flight < _strategy.queue_depth || _error; });
  if (_error) std::rethrow_exception(_error);
  _queue.push_back(std::move(batch));
  ++_in_flight;
  guard.unlock();
  _changed.notify_all();
}

void BatchedAsyncWriter::finish() {
  if (!_pending.extents.empty()) {
    submit(std::move(_pending));
    _pending = Batch();
  }
  std::unique_lock guard(_lock);
  _changed.wait(guard, [&] { return _in_flight == 0 || _error; });
  if (_error) std::rethrow_exception(_error);
}

void BatchedAsyncWriter::flush_loop() {
  for (;;) {
    std::unique_lock guard(_lock);
    _changed.wait(guard, [&] { return !_queue.empty() || _closing; });
    if (_queue.empty()) return;
    Batch batch = std::move(_queue.front());
    _queue.pop_front();
    guard.unlock();
    try {
      execute(batch);
    } catch (...) {
      guard.lock();
      _error = std::current_exception();
      guard.unlock();
    }
    guard.lock();
    --_in_flight;
    guard.unlock();
    _changed.notify_all();
  }
}

void BatchedAsyncWriter::execute(const Batch& batch) {
  const int fd = _memory.h2_fd();
  const Address h2_base = _memory.layout().h2_base;
  for (const Extent& e : batch.extents) {
    if (fd < 0) {
      std::memcpy(_memory.at(e.dest), batch.data.data() + e.offset, e.length);
      continue;
    }
    std::size_t done = 0;
    while (done < e.length) {
      const ssize_t n = ::pwrite(fd, batch.data.data() + e.offset + done, e.length - done,
                                 off_t(e.dest - h2_base + done));
      if (n < 0) {
        if (errno == EINTR) continue;
        fail(ErrorCode::io, std::string("pwrite to H2 backing file failed: ") + std::strerror(errno));
      }
      done += std::size_t(n);
    }
  }
}

std::unique_ptr<H2Writer> make_writer(const AddressSpace& memory, const WriteStrategy& strategy) {
  if (strategy.mode == WriteMode::direct_copy) return std::make_unique<DirectCopyWriter>(memory);
  return std::make_unique<BatchedAsyncWriter>(memory, strategy);
}

}  // namespace dualheap
