#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dualheap {

enum class ErrorCode {
  layout,
  invalid_handle,
  invalid_field,
  invalid_slot,
  heap_exhausted,
  region_exhausted,
  heap_corruption,
  trace,
  config,
  io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return _code; }

 private:
  ErrorCode _code;
};

// Raised while replaying a trace; carries the zero-based index of the
// offending event.
class TraceError : public Error {
 public:
  TraceError(std::size_t event_index, const std::string& what);

  std::size_t event_index() const noexcept { return _event_index; }

 private:
  std::size_t _event_index;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace dualheap
