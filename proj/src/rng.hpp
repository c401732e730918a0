#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "error.hpp"

namespace prnn {

// Deterministic random source. std::mt19937_64 has a fully specified
// algorithm; the derived draws below avoid std::*_distribution (whose
// output is implementation-defined) so streams reproduce across standard
// library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random mantissa bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). Modulo bias is negligible for the small n
  // used here (corpus sizes, variant counts).
  uint64_t below(uint64_t n) { return engine_() % n; }

  // Engine state as text; operator<</>> round-trip is guaranteed by the
  // standard, which makes checkpointed training resumable mid-stream.
  std::string save_state() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void restore_state(const std::string& state) {
    std::istringstream is(state);
    is >> engine_;
    if (!is) fail(Errc::parse_error, "malformed rng state string");
  }

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace prnn
