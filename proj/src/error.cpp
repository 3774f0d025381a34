#include "dualheap/error.hpp"

namespace dualheap {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::layout: return "layout error";
    case ErrorCode::invalid_handle: return "invalid handle";
    case ErrorCode::invalid_field: return "invalid field";
    case ErrorCode::invalid_slot: return "invalid slot";
    case ErrorCode::heap_exhausted: return "heap exhausted";
    case ErrorCode::region_exhausted: return "region exhausted";
    case ErrorCode::heap_corruption: return "heap corruption";
    case ErrorCode::trace: return "trace error";
    case ErrorCode::config: return "config error";
    case ErrorCode::io: return "I/O error";
  }
  return "unknown error";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), _code(code) {}

TraceError::TraceError(std::size_t event_index, const std::string& what)
    : Error(ErrorCode::trace, "event " + std::to_string(event_index) + ": " + what),
      _event_index(event_index) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace dualheap
