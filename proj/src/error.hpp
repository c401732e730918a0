#pragma once

#include <stdexcept>
#include <string>

namespace prnn {

enum class Errc {
  invalid_argument,
  malformed_header,
  truncated_chunk,
  unsupported_format,
  out_of_range,
  unmatched_note_off,
  unclosed_note,
  restrike_open_pitch,
  segment_too_long,
  factor_out_of_range,
  sequence_too_short,
  trace_mismatch,
  non_finite,
  version_mismatch,
  corrupt_checksum,
  io_failure,
  empty_manifest,
  parse_error,
};

// Single exception type carrying a machine-readable code; the C API maps
// these codes onto prnn_status values at the library boundary.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace prnn
