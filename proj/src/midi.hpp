#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace prnn {

// One sounded note with absolute times in seconds.
struct PerfNote {
  int pitch = 0;         // 0..127
  double onset_s = 0.0;  // >= 0
  double offset_s = 0.0; // > onset_s
  int velocity = 0;      // 1..127
  friend bool operator==(const PerfNote&, const PerfNote&) = default;
};

// Half-open sustain interval [on_s, off_s). Intervals within one
// performance are disjoint and sorted.
struct PedalInterval {
  double on_s = 0.0;
  double off_s = 0.0;
  friend bool operator==(const PedalInterval&, const PedalInterval&) = default;
};

// Channel voice event at an absolute tick. Only note and controller events
// are retained; everything else is dropped during parsing.
struct RawEvent {
  int64_t tick = 0;
  uint8_t status = 0;  // full status byte including channel
  uint8_t data1 = 0;
  uint8_t data2 = 0;
};

struct TempoChange {
  int64_t tick = 0;
  int64_t us_per_quarter = 500000;
};

struct MidiFile {
  int format = 0;    // 0 or 1
  int division = 0;  // ticks per quarter note, > 0
  std::vector<std::vector<RawEvent>> tracks;
  std::vector<TempoChange> tempo_map;  // sorted by tick, first entry at tick 0
};

struct ExtractStats {
  int dangling_note_offs = 0;   // note-off with no open note: dropped
  int dangling_note_ons = 0;    // open at end of file: closed at last event time
  int restrikes_closed = 0;     // note-on over an open pitch: previous closed
  int zero_length_dropped = 0;  // on/off at the same instant: dropped
  int total() const {
    return dangling_note_offs + dangling_note_ons + restrikes_closed + zero_length_dropped;
  }
};

struct Performance {
  std::vector<PerfNote> notes;    // sorted by (onset, pitch)
  std::vector<PedalInterval> pedals;
  ExtractStats stats;
};

// Piecewise-linear tick -> seconds map built from a tempo map.
class TickTimer {
 public:
  explicit TickTimer(const MidiFile& file);
  double seconds(int64_t tick) const;

 private:
  struct Segment {
    int64_t tick;
    double seconds;
    double us_per_quarter;
  };
  std::vector<Segment> segments_;
  double tick_denom_;  // division * 1e6
};

// Parses a Standard MIDI File (formats 0 and 1). Running status is
// handled; unknown meta and sysex events are skipped. Throws Error with
// Errc::malformed_header, truncated_chunk or unsupported_format.
MidiFile parse_smf(std::span<const uint8_t> bytes);

// Converts raw events into notes and pedal intervals with times in
// seconds. Lenient: repairs are counted in stats rather than raised.
Performance extract_performance(const MidiFile& file);

// Serializes notes (and optionally pedal intervals) as a format-0 SMF with
// division 480 and a fixed 500000 us/quarter tempo. At a given tick note-off
// events precede note-ons.
std::vector<uint8_t> write_smf(std::span<const PerfNote> notes,
                               std::span<const PedalInterval> pedals = {});

}  // namespace prnn
