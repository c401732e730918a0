#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "midi.hpp"

namespace prnn {

// Event vocabulary over which performances are modeled. Fixed index layout:
//   [0,   128)  NOTE_ON, one per MIDI pitch
//   [128, 256)  NOTE_OFF, one per MIDI pitch
//   [256, 381)  TIME_SHIFT of 1..125 steps, one step = 8 ms
//   [381, 413)  VELOCITY bin 0..31, applied to subsequent NOTE_ONs
inline constexpr int kNoteOnBase = 0;
inline constexpr int kNoteOffBase = 128;
inline constexpr int kTimeShiftBase = 256;
inline constexpr int kVelocityBase = 381;
inline constexpr int kVocabSize = 413;
inline constexpr int kVocabSizeNoVelocity = 381;  // velocity events stripped
inline constexpr int kMaxShiftSteps = 125;
inline constexpr int kVelocityBinCount = 32;

// A decoder that sees NOTE_ONs before any VELOCITY event plays them
// mezzo-forte.
inline constexpr int kDefaultVelocityBin = 20;

enum class EventKind { NoteOn, NoteOff, TimeShift, VelocityBin };

struct PerformanceEvent {
  EventKind kind;
  int value;  // pitch 0..127, shift steps 1..125, or velocity bin 0..31
  friend bool operator==(const PerformanceEvent&, const PerformanceEvent&) = default;
};

struct QuantizationConfig {
  int dt_ms = 8;
  int velocity_bins = 32;
  int max_shift_steps = 125;  // dt_ms * max_shift_steps == 1000
};

struct EventSequence {
  std::vector<int> events;  // vocabulary indices
  std::string source_id;
  double duration_s = 0.0;  // sum of time shifts after quantization
};

int event_to_index(const PerformanceEvent& e);
PerformanceEvent index_to_event(int index);

// bin = floor(v / 4) clamped to 31; decode returns the bin center 4b + 2.
int velocity_to_bin(int velocity);
int bin_to_velocity(int bin);

// Seconds -> 8 ms grid index, nearest with ties rounding up.
int64_t quantize_step(double seconds, const QuantizationConfig& cfg = {});

// Converts notes to the canonical event sequence. Times are rounded to the
// 8 ms grid (ties up); notes that collapse to zero length are extended one
// step. At each occupied grid time the emission order is: NOTE_OFFs by
// ascending pitch, then NOTE_ONs grouped by velocity bin (bins ascending,
// pitches ascending within a bin), each group preceded by a VELOCITY event
// when the running velocity state changes. Gaps become maximal TIME_SHIFTs
// plus a remainder. With include_velocity = false no VELOCITY events are
// emitted and NOTE_ONs are ordered by pitch alone.
EventSequence encode(std::span<const PerfNote> notes, const QuantizationConfig& cfg = {},
                     bool include_velocity = true);

struct DecodeStats {
  int dropped_note_offs = 0;    // lenient: NOTE_OFF with nothing open
  int closed_at_end = 0;        // lenient: still open when the sequence ended
  int restrikes = 0;            // lenient: NOTE_ON over an open pitch
  int zero_length_extended = 0; // note closed at its own onset, stretched one step
  int total() const { return dropped_note_offs + closed_at_end + restrikes + zero_length_extended; }
};

struct DecodeResult {
  std::vector<PerfNote> notes;
  DecodeStats stats;
};

// Plays an event sequence back into notes. The cursor starts at t = 0 with
// the default velocity bin. strict = true raises Errc::unmatched_note_off,
// restrike_open_pitch or unclosed_note instead of repairing.
DecodeResult decode(const EventSequence& seq, const QuantizationConfig& cfg = {},
                    bool strict = false);

// Text dump, one event per line: "NOTE_ON 60", "NOTE_OFF 60",
// "TIME_SHIFT 125", "VELOCITY 25". Blank lines and lines starting with '#'
// are ignored on input.
std::string events_to_text(const EventSequence& seq);
EventSequence events_from_text(const std::string& text);

}  // namespace prnn
