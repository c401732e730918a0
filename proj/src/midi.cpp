#include "midi.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <optional>
#include <string>

#include "error.hpp"

namespace prnn {

namespace {

constexpr int64_t kDefaultTempo = 500000;  // us per quarter note

struct ByteReader {
  std::span<const uint8_t> data;
  size_t pos = 0;

  size_t remaining() const { return data.size() - pos; }
  bool eof() const { return pos >= data.size(); }

  uint8_t peek() const {
    if (eof()) fail(Errc::truncated_chunk, "unexpected end of data");
    return data[pos];
  }
  uint8_t u8() {
    uint8_t b = peek();
    ++pos;
    return b;
  }
  uint32_t be16() { return static_cast<uint32_t>(u8()) << 8 | u8(); }
  uint32_t be32() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = v << 8 | u8();
    return v;
  }
  // Variable-length quantity, at most 4 bytes per the SMF spec.
  uint32_t vlq() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      uint8_t b = u8();
      v = v << 7 | (b & 0x7f);
      if ((b & 0x80) == 0) return v;
    }
    fail(Errc::truncated_chunk, "variable-length quantity longer than 4 bytes");
  }
  void skip(size_t n) {
    if (n > remaining()) fail(Errc::truncated_chunk, "chunk data overruns file");
    pos += n;
  }
};

void parse_track(std::span<const uint8_t> chunk, std::vector<RawEvent>& events,
                 std::vector<TempoChange>& tempo_map) {
  ByteReader r{chunk};
  int64_t tick = 0;
  uint8_t running = 0;
  while (!r.eof()) {
    tick += r.vlq();
    uint8_t status;
    if (r.peek() < 0x80) {
      if (running == 0) fail(Errc::truncated_chunk, "data byte without running status");
      status = running;
    } else {
      status = r.u8();
    }
    if (status == 0xff) {  // meta
      uint8_t type = r.u8();
      uint32_t len = r.vlq();
      if (len > r.remaining()) fail(Errc::truncated_chunk, "meta event overruns chunk");
      if (type == 0x51 && len == 3) {
        int64_t tempo = static_cast<int64_t>(r.data[r.pos]) << 16 |
                        static_cast<int64_t>(r.data[r.pos + 1]) << 8 |
                        static_cast<int64_t>(r.data[r.pos + 2]);
        tempo_map.push_back({tick, tempo});
      }
      r.skip(len);
      if (type == 0x2f) return;  // end of track
      running = 0;               // meta events cancel running status
    } else if (status == 0xf0 || status == 0xf7) {  // sysex
      uint32_t len = r.vlq();
      r.skip(len);
      running = 0;
    } else if (status >= 0xf1) {
      fail(Errc::truncated_chunk, "unexpected system status byte in track");
    } else {
      running = status;
      uint8_t hi = status >> 4;
      uint8_t d1 = r.u8();
      uint8_t d2 = (hi == 0xc || hi == 0xd) ? 0 : r.u8();
      if ((d1 & 0x80) || (d2 & 0x80)) fail(Errc::truncated_chunk, "data byte has high bit set");
      events.push_back({tick, status, d1, d2});
    }
  }
}

}  // namespace

TickTimer::TickTimer(const MidiFile& file) {
  tick_denom_ = static_cast<double>(file.division) * 1e6;
  double sec = 0.0;
  int64_t prev_tick = 0;
  double prev_tempo = kDefaultTempo;
  bool first = true;
  for (const auto& tc : file.tempo_map) {
    if (!first) sec += static_cast<double>(tc.tick - prev_tick) * prev_tempo / tick_denom_;
    segments_.push_back({tc.tick, sec, static_cast<double>(tc.us_per_quarter)});
    prev_tick = tc.tick;
    prev_tempo = static_cast<double>(tc.us_per_quarter);
    first = false;
  }
  if (segments_.empty()) segments_.push_back({0, 0.0, static_cast<double>(kDefaultTempo)});
}

double TickTimer::seconds(int64_t tick) const {
  // Last segment whose start tick is <= tick.
  size_t i = segments_.size() - 1;
  while (i > 0 && segments_[i].tick > tick) --i;
  const Segment& s = segments_[i];
  return s.seconds + static_cast<double>(tick - s.tick) * s.us_per_quarter / tick_denom_;
}

MidiFile parse_smf(std::span<const uint8_t> bytes) {
  ByteReader r{bytes};
  if (bytes.size() < 8 || std::memcmp(bytes.data(), "MThd", 4) != 0)
    fail(Errc::malformed_header, "missing MThd chunk");
  r.pos = 4;
  uint32_t header_len = r.be32();
  if (header_len < 6 || header_len > r.remaining())
    fail(Errc::malformed_header, "bad MThd length");
  int format = static_cast<int>(r.be16());
  r.be16();  // declared track count; the chunk walk below is authoritative
  uint32_t division = r.be16();
  if (format == 2) fail(Errc::unsupported_format, "SMF format 2 is not supported");
  if (format > 2) fail(Errc::malformed_header, "unknown SMF format " + std::to_string(format));
  if (division & 0x8000) fail(Errc::unsupported_format, "SMPTE division is not supported");
  if (division == 0) fail(Errc::malformed_header, "division must be positive");
  r.skip(header_len - 6);

  MidiFile file;
  file.format = format;
  file.division = static_cast<int>(division);

  while (!r.eof()) {
    if (r.remaining() < 8) fail(Errc::truncated_chunk, "trailing bytes too short for a chunk");
    char id[4];
    for (char& c : id) c = static_cast<char>(r.u8());
    uint32_t len = r.be32();
    if (len > r.remaining()) fail(Errc::truncated_chunk, "chunk length overruns file");
    if (std::memcmp(id, "MTrk", 4) != 0) {
      r.skip(len);  // alien chunk
      continue;
    }
    std::vector<RawEvent> events;
    parse_track(bytes.subspan(r.pos, len), events, file.tempo_map);
    r.skip(len);
    file.tracks.push_back(std::move(events));
  }

  std::stable_sort(file.tempo_map.begin(), file.tempo_map.end(),
                   [](const TempoChange& a, const TempoChange& b) { return a.tick < b.tick; });
  // Last tempo wins at equal ticks.
  std::vector<TempoChange> dedup;
  for (const auto& tc : file.tempo_map) {
    if (!dedup.empty() && dedup.back().tick == tc.tick)
      dedup.back() = tc;
    else
      dedup.push_back(tc);
  }
  file.tempo_map = std::move(dedup);
  if (file.tempo_map.empty() || file.tempo_map.front().tick != 0)
    file.tempo_map.insert(file.tempo_map.begin(), {0, kDefaultTempo});
  return file;
}

Performance extract_performance(const MidiFile& file) {
  TickTimer timer(file);

  // Merge tracks into one stream ordered by tick, stable within a track.
  struct Indexed {
    const RawEvent* ev;
    size_t order;
  };
  std::vector<Indexed> stream;
  size_t order = 0;
  for (const auto& track : file.tracks)
    for (const auto& ev : track) stream.push_back({&ev, order++});
  std::stable_sort(stream.begin(), stream.end(), [](const Indexed& a, const Indexed& b) {
    if (a.ev->tick != b.ev->tick) return a.ev->tick < b.ev->tick;
    return a.order < b.order;
  });

  Performance perf;
  struct Open {
    bool active = false;
    double onset = 0.0;
    int velocity = 0;
  };
  std::array<Open, 128> open{};
  bool pedal_down = false;
  double pedal_on_t = 0.0;
  int64_t last_tick = 0;

  auto close_note = [&](int pitch, double t, int* drop_counter) {
    Open& o = open[pitch];
    if (t > o.onset) {
      perf.notes.push_back({pitch, o.onset, t, o.velocity});
    } else if (drop_counter) {
      ++*drop_counter;
    }
    o.active = false;
  };

  for (const auto& it : stream) {
    const RawEvent& ev = *it.ev;
    last_tick = std::max(last_tick, ev.tick);
    const double t = timer.seconds(ev.tick);
    const uint8_t hi = ev.status >> 4;
    const int pitch = ev.data1;
    if (hi == 0x9 && ev.data2 > 0) {
      if (open[pitch].active) {
        // Restrike of an open pitch: close the old note at the restrike time.
        ++perf.stats.restrikes_closed;
        close_note(pitch, t, &perf.stats.zero_length_dropped);
      }
      open[pitch] = {true, t, ev.data2};
    } else if (hi == 0x8 || (hi == 0x9 && ev.data2 == 0)) {
      if (open[pitch].active)
        close_note(pitch, t, &perf.stats.zero_length_dropped);
      else
        ++perf.stats.dangling_note_offs;
    } else if (hi == 0xb && ev.data1 == 64) {
      if (ev.data2 >= 64) {
        if (!pedal_down) {
          pedal_down = true;
          pedal_on_t = t;
        }
      } else if (pedal_down) {
        if (t > pedal_on_t) perf.pedals.push_back({pedal_on_t, t});
        pedal_down = false;
      }
    }
  }

  const double t_end = timer.seconds(last_tick);
  for (int p = 0; p < 128; ++p) {
    if (open[p].active) {
      ++perf.stats.dangling_note_ons;
      close_note(p, t_end, &perf.stats.zero_length_dropped);
    }
  }
  if (pedal_down && t_end > pedal_on_t) perf.pedals.push_back({pedal_on_t, t_end});

  std::sort(perf.notes.begin(), perf.notes.end(), [](const PerfNote& a, const PerfNote& b) {
    if (a.onset_s != b.onset_s) return a.onset_s < b.onset_s;
    if (a.pitch != b.pitch) return a.pitch < b.pitch;
    return a.offset_s < b.offset_s;
  });
  std::sort(perf.pedals.begin(), perf.pedals.end(),
            [](const PedalInterval& a, const PedalInterval& b) { return a.on_s < b.on_s; });
  return perf;
}

std::vector<uint8_t> write_smf(std::span<const PerfNote> notes,
                               std::span<const PedalInterval> pedals) {
  constexpr int kDivision = 480;
  // At 500000 us/quarter and 480 ticks/quarter there are exactly 960 ticks
  // per second, so round-off per event is at most half a tick.
  auto to_tick = [](double seconds) { return static_cast<int64_t>(std::llround(seconds * 960.0)); };

  for (const auto& n : notes) {
    if (n.pitch < 0 || n.pitch > 127 || n.velocity < 1 || n.velocity > 127 ||
        n.onset_s < 0.0 || n.offset_s <= n.onset_s)
      fail(Errc::invalid_argument, "note violates PerfNote invariants");
  }

  // Event class decides order at equal ticks: releases before attacks.
  enum { kPedalOff = 0, kNoteOff = 1, kNoteOn = 2, kPedalOn = 3 };
  struct WriteEvent {
    int64_t tick;
    int cls;
    uint8_t status, d1, d2;
  };
  std::vector<WriteEvent> events;
  events.reserve(notes.size() * 2 + pedals.size() * 2);
  for (const auto& n : notes) {
    events.push_back({to_tick(n.onset_s), kNoteOn, 0x90, static_cast<uint8_t>(n.pitch),
                      static_cast<uint8_t>(n.velocity)});
    events.push_back({to_tick(n.offset_s), kNoteOff, 0x80, static_cast<uint8_t>(n.pitch), 0});
  }
  for (const auto& p : pedals) {
    if (p.off_s <= p.on_s) fail(Errc::invalid_argument, "pedal interval must have off > on");
    events.push_back({to_tick(p.on_s), kPedalOn, 0xb0, 64, 127});
    events.push_back({to_tick(p.off_s), kPedalOff, 0xb0, 64, 0});
  }
  std::sort(events.begin(), events.end(), [](const WriteEvent& a, const WriteEvent& b) {
    if (a.tick != b.tick) return a.tick < b.tick;
    if (a.cls != b.cls) return a.cls < b.cls;
    return a.d1 < b.d1;
  });

  std::vector<uint8_t> track;
  auto put_vlq = [&track](int64_t v) {
    uint8_t buf[5];
    int n = 0;
    do {
      buf[n++] = static_cast<uint8_t>(v & 0x7f);
      v >>= 7;
    } while (v > 0);
    while (n > 1) track.push_back(buf[--n] | 0x80);
    track.push_back(buf[0]);
  };

  // Fixed tempo meta at tick 0: 500000 us/quarter.
  put_vlq(0);
  for (uint8_t b : {0xff, 0x51, 0x03, 0x07, 0xa1, 0x20}) track.push_back(b);
  int64_t prev_tick = 0;
  for (const auto& ev : events) {
    put_vlq(ev.tick - prev_tick);
    prev_tick = ev.tick;
    track.push_back(ev.status);
    track.push_back(ev.d1);
    track.push_back(ev.d2);
  }
  put_vlq(0);
  for (uint8_t b : {0xff, 0x2f, 0x00}) track.push_back(b);

  std::vector<uint8_t> out;
  auto put_be16 = [&out](uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
  };
  auto put_be32 = [&out](uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<uint8_t>(v >> s));
  };
  for (char c : {'M', 'T', 'h', 'd'}) out.push_back(static_cast<uint8_t>(c));
  put_be32(6);
  put_be16(0);  // format 0
  put_be16(1);  // one track
  put_be16(kDivision);
  for (char c : {'M', 'T', 'r', 'k'}) out.push_back(static_cast<uint8_t>(c));
  put_be32(static_cast<uint32_t>(track.size()));
  out.insert(out.end(), track.begin(), track.end());
  return out;
}

}  // namespace prnn
