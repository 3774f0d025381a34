#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "dualheap/address_space.hpp"

namespace dualheap {

enum class WriteMode { direct_copy, batched_async };

const char* to_string(WriteMode mode) noexcept;

struct WriteStrategy {
  WriteMode mode = WriteMode::direct_copy;
  std::size_t buffer_size = 2u << 20;
  std::size_t queue_depth = 64;
};

struct WriterStats {
  std::size_t bytes = 0;
  std::size_t objects = 0;
  std::size_t flush_ops = 0;
  std::size_t large_objects = 0;  // objects bigger than the staging buffer
};

// Moves object images into H2 during the compaction phase. Callers pass a
// fully prepared image; finish() returns only once every byte has landed.
class H2Writer {
 public:
  virtual ~H2Writer() = default;

  virtual void write(Address dest, const std::byte* image, std::size_t size) = 0;
  virtual void finish() = 0;

  const WriterStats& stats() const { return _stats; }

 protected:
  WriterStats _stats;
};

// memcpy through the mapping; one outstanding write at a time.
class DirectCopyWriter final : public H2Writer {
 public:
  explicit DirectCopyWriter(const AddressSpace& memory) : _memory(memory) {}

  void write(Address dest, const std::byte* image, std::size_t size) override;
  void finish() override {}

 private:
  const AddressSpace& _memory;
};

// Packs objects into a staging buffer and hands full buffers to a background
// flusher through a bounded queue of in-flight batches. With a backing file
// each extent is written with pwrite; anonymous H2 is written by memcpy.
class BatchedAsyncWriter final : public H2Writer {
 public:
  BatchedAsyncWriter(const AddressSpace& memory, const WriteStrategy& strategy);
  ~BatchedAsyncWriter() override;

  void write(Address dest, const std::byte* image, std::size_t size) override;
  void finish() override;

 private:
  struct Extent {
    Address dest;
    std::size_t offset;
    std::size_t length;
  };
  struct Batch {
    std::vector<std::byte> data;
    std::vector<Extent> extents;
  };

  void append(Address dest, const std::byte* image, std::size_t size);
  void submit(Batch batch);
  void flush_loop();
  void execute(const Batch& batch);

  const AddressSpace& _memory;
  WriteStrategy _strategy;
  Batch _pending;

  std::mutex _lock;
  std::condition_variable _changed;
  std::deque<Batch> _queue;
  std::size_t _in_flight = 0;
  bool _closing = false;
  std::exception_ptr _error;
  std::thread _flusher;
};

std::unique_ptr<H2Writer> make_writer(const AddressSpace& memory, const WriteStrategy& strategy);

}  // namespace dualheap
