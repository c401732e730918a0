#include "events.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "error.hpp"

namespace prnn {

namespace {

void validate_config(const QuantizationConfig& cfg) {
  if (cfg.dt_ms * cfg.max_shift_steps != 1000 || cfg.max_shift_steps != kMaxShiftSteps ||
      cfg.velocity_bins != kVelocityBinCount)
    fail(Errc::invalid_argument, "quantization config does not match the fixed vocabulary layout");
}

}  // namespace

int event_to_index(const PerformanceEvent& e) {
  switch (e.kind) {
    case EventKind::NoteOn:
      if (e.value < 0 || e.value > 127) fail(Errc::out_of_range, "NOTE_ON pitch out of range");
      return kNoteOnBase + e.value;
    case EventKind::NoteOff:
      if (e.value < 0 || e.value > 127) fail(Errc::out_of_range, "NOTE_OFF pitch out of range");
      return kNoteOffBase + e.value;
    case EventKind::TimeShift:
      if (e.value < 1 || e.value > kMaxShiftSteps)
        fail(Errc::out_of_range, "TIME_SHIFT steps out of range");
      return kTimeShiftBase + e.value - 1;
    case EventKind::VelocityBin:
      if (e.value < 0 || e.value >= kVelocityBinCount)
        fail(Errc::out_of_range, "VELOCITY bin out of range");
      return kVelocityBase + e.value;
  }
  fail(Errc::out_of_range, "unknown event kind");
}

PerformanceEvent index_to_event(int index) {
  if (index < 0 || index >= kVocabSize)
    fail(Errc::out_of_range, "event index " + std::to_string(index) + " outside [0, 413)");
  if (index < kNoteOffBase) return {EventKind::NoteOn, index - kNoteOnBase};
  if (index < kTimeShiftBase) return {EventKind::NoteOff, index - kNoteOffBase};
  if (index < kVelocityBase) return {EventKind::TimeShift, index - kTimeShiftBase + 1};
  return {EventKind::VelocityBin, index - kVelocityBase};
}

int velocity_to_bin(int velocity) {
  if (velocity < 1 || velocity > 127) fail(Errc::out_of_range, "velocity outside [1, 127]");
  return std::min(velocity / 4, kVelocityBinCount - 1);
}

int bin_to_velocity(int bin) {
  if (bin < 0 || bin >= kVelocityBinCount) fail(Errc::out_of_range, "velocity bin outside [0, 32)");
  return std::min(4 * bin + 2, 127);
}

int64_t quantize_step(double seconds, const QuantizationConfig& cfg) {
  double steps = seconds * (1000.0 / cfg.dt_ms);
  return static_cast<int64_t>(std::floor(steps + 0.5));
}

EventSequence encode(std::span<const PerfNote> notes, const QuantizationConfig& cfg,
                     bool include_velocity) {
  validate_config(cfg);
  const double step_s = cfg.dt_ms / 1000.0;

  struct QNote {
    int64_t on, off;
    int pitch, bin;
  };
  std::vector<QNote> quantized;
  quantized.reserve(notes.size());
  for (const auto& n : notes) {
    if (n.pitch < 0 || n.pitch > 127 || n.velocity < 1 || n.velocity > 127 ||
        n.onset_s < 0.0 || n.offset_s <= n.onset_s)
      fail(Errc::invalid_argument, "note violates PerfNote invariants");
    int64_t on = quantize_step(n.onset_s, cfg);
    int64_t off = quantize_step(n.offset_s, cfg);
    if (off <= on) off = on + 1;  // zero-length after rounding: extend one step
    quantized.push_back({on, off, n.pitch, velocity_to_bin(n.velocity)});
  }

  // Rounding can create same-pitch collisions that valid input did not have.
  // Truncate the earlier note to the next onset; if nothing remains, drop it.
  std::stable_sort(quantized.begin(), quantized.end(), [](const QNote& a, const QNote& b) {
    if (a.pitch != b.pitch) return a.pitch < b.pitch;
    return a.on < b.on;
  });
  std::vector<QNote> clean;
  clean.reserve(quantized.size());
  for (size_t i = 0; i < quantized.size(); ++i) {
    QNote q = quantized[i];
    if (i + 1 < quantized.size() && quantized[i + 1].pitch == q.pitch)
      q.off = std::min(q.off, quantized[i + 1].on);
    if (q.off > q.on) clean.push_back(q);
  }

  struct Group {
    std::vector<int> offs;                     // pitches
    std::vector<std::pair<int, int>> ons;      // (bin, pitch)
  };
  std::map<int64_t, Group> grid;
  for (const auto& q : clean) {
    grid[q.on].ons.emplace_back(q.bin, q.pitch);
    grid[q.off].offs.push_back(q.pitch);
  }

  EventSequence seq;
  int64_t cursor = 0;
  int velocity_state = -1;  // unset: the first NOTE_ON group always emits VELOCITY
  for (auto& [time, group] : grid) {
    int64_t gap = time - cursor;
    while (gap > 0) {
      int steps = static_cast<int>(std::min<int64_t>(gap, cfg.max_shift_steps));
      seq.events.push_back(event_to_index({EventKind::TimeShift, steps}));
      gap -= steps;
    }
    cursor = time;
    std::sort(group.offs.begin(), group.offs.end());
    for (int pitch : group.offs) seq.events.push_back(event_to_index({EventKind::NoteOff, pitch}));
    if (include_velocity) {
      std::sort(group.ons.begin(), group.ons.end());
      for (const auto& [bin, pitch] : group.ons) {
        if (bin != velocity_state) {
          seq.events.push_back(event_to_index({EventKind::VelocityBin, bin}));
          velocity_state = bin;
        }
        seq.events.push_back(event_to_index({EventKind::NoteOn, pitch}));
      }
    } else {
      std::sort(group.ons.begin(), group.ons.end(),
                [](const auto& a, const auto& b) { return a.second < b.second; });
      for (const auto& [bin, pitch] : group.ons)
        seq.events.push_back(event_to_index({EventKind::NoteOn, pitch}));
    }
  }
  seq.duration_s = static_cast<double>(cursor) * step_s;
  return seq;
}

DecodeResult decode(const EventSequence& seq, const QuantizationConfig& cfg, bool strict) {
  validate_config(cfg);
  const double step_s = cfg.dt_ms / 1000.0;

  struct Open {
    bool active = false;
    int64_t onset = 0;
    int velocity = 0;
  };
  std::array<Open, 128> open{};
  DecodeResult result;
  int64_t cursor = 0;
  int velocity_state = kDefaultVelocityBin;

  auto close_note = [&](int pitch, int64_t at) {
    Open& o = open[pitch];
    int64_t off = at;
    if (off <= o.onset) {
      off = o.onset + 1;
      ++result.stats.zero_length_extended;
    }
    result.notes.push_back({pitch, static_cast<double>(o.onset) * step_s,
                            static_cast<double>(off) * step_s, o.velocity});
    o.active = false;
  };

  for (size_t i = 0; i < seq.events.size(); ++i) {
    PerformanceEvent e = index_to_event(seq.events[i]);
    switch (e.kind) {
      case EventKind::NoteOn: {
        if (open[e.value].active) {
          if (strict)
            fail(Errc::restrike_open_pitch,
                 "NOTE_ON for open pitch " + std::to_string(e.value) + " at event " +
                     std::to_string(i));
          ++result.stats.restrikes;
          close_note(e.value, cursor);
        }
        open[e.value] = {true, cursor, bin_to_velocity(velocity_state)};
        break;
      }
      case EventKind::NoteOff: {
        if (!open[e.value].active) {
          if (strict)
            fail(Errc::unmatched_note_off,
                 "NOTE_OFF without open pitch " + std::to_string(e.value) + " at event " +
                     std::to_string(i));
          ++result.stats.dropped_note_offs;
          break;
        }
        close_note(e.value, cursor);
        break;
      }
      case EventKind::TimeShift:
        cursor += e.value;
        break;
      case EventKind::VelocityBin:
        velocity_state = e.value;
        break;
    }
  }

  for (int pitch = 0; pitch < 128; ++pitch) {
    if (open[pitch].active) {
      if (strict)
        fail(Errc::unclosed_note, "pitch " + std::to_string(pitch) + " still open at end");
      ++result.stats.closed_at_end;
      close_note(pitch, cursor);
    }
  }

  std::sort(result.notes.begin(), result.notes.end(), [](const PerfNote& a, const PerfNote& b) {
    if (a.onset_s != b.onset_s) return a.onset_s < b.onset_s;
    return a.pitch < b.pitch;
  });
  return result;
}

std::string events_to_text(const EventSequence& seq) {
  std::ostringstream os;
  for (int index : seq.events) {
    PerformanceEvent e = index_to_event(index);
    switch (e.kind) {
      case EventKind::NoteOn: os << "NOTE_ON " << e.value << '\n'; break;
      case EventKind::NoteOff: os << "NOTE_OFF " << e.value << '\n'; break;
      case EventKind::TimeShift: os << "TIME_SHIFT " << e.value << '\n'; break;
      case EventKind::VelocityBin: os << "VELOCITY " << e.value << '\n'; break;
    }
  }
  return os.str();
}

EventSequence events_from_text(const std::string& text) {
  EventSequence seq;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ls(line);
    std::string word;
    long value = 0;
    if (!(ls >> word >> value))
      fail(Errc::parse_error, "line " + std::to_string(line_no) + ": expected '<EVENT> <value>'");
    EventKind kind;
    if (word == "NOTE_ON")
      kind = EventKind::NoteOn;
    else if (word == "NOTE_OFF")
      kind = EventKind::NoteOff;
    else if (word == "TIME_SHIFT")
      kind = EventKind::TimeShift;
    else if (word == "VELOCITY")
      kind = EventKind::VelocityBin;
    else
      fail(Errc::parse_error, "line " + std::to_string(line_no) + ": unknown event '" + word + "'");
    seq.events.push_back(event_to_index({kind, static_cast<int>(value)}));
    if (kind == EventKind::TimeShift) seq.duration_s += value * 0.008;
  }
  return seq;
}

}  // namespace prnn
