#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "midi.hpp"
#include "rng.hpp"

namespace prnn {

// A window of a performance with note times relative to the window start.
struct Clip {
  std::vector<PerfNote> notes;
  double duration_s = 0.0;
  std::string source_id;
};

enum class AugmentMode { None, Less, More };

// How transposition and stretch variants combine under the Less policy:
// the full 9 x 5 cross product, or the 9 + 5 - 1 union (original counted
// once). More always pairs each transposition with one freshly drawn
// stretch factor.
enum class AugmentCombine { CrossProduct, Union };

inline constexpr double kLessStretches[] = {0.95, 0.975, 1.025, 1.05};
inline constexpr int kLessTransposeMax = 4;   // -4..+4 excluding 0
inline constexpr int kMoreTransposeLow = -6;  // -6..+5 excluding 0
inline constexpr int kMoreTransposeHigh = 5;
inline constexpr double kMoreStretchLow = 0.9;
inline constexpr double kMoreStretchHigh = 1.1;

// Moves every note offset that falls inside a pedal interval to that
// interval's end. A same-pitch restrike before the extended offset
// truncates the earlier note at the restrike, so no-overlap is preserved.
// Note count is unchanged. Pedal intervals must be disjoint and sorted.
std::vector<PerfNote> extend_with_pedal(std::span<const PerfNote> notes,
                                        std::span<const PedalInterval> pedals);

// Partitions a performance at multiples of clip_len_s. A note belongs to
// the clip containing its onset; offsets crossing the boundary are
// truncated. All clips in the span are emitted, including silent ones.
std::vector<Clip> split_clips(std::span<const PerfNote> notes, double clip_len_s,
                              const std::string& source_id);

// Fixed window [start_s, start_s + seg_len_s) of a clip.
Clip crop_window(const Clip& clip, double start_s, double seg_len_s);

// Uniform-random window of seg_len_s seconds. Consumes exactly one draw.
Clip crop_segment(const Clip& clip, double seg_len_s, Rng& rng);

// Shifts all pitches; returns nullopt when any pitch leaves [0, 127].
std::optional<Clip> transpose(const Clip& clip, int semitones);

// Scales all times by factor in [0.5, 2.0].
Clip time_stretch(const Clip& clip, double factor);

// One (transposition, stretch) pair drawn per the policy; used when
// assembling training batches.
struct AugmentDraw {
  int semitones = 0;
  double stretch = 1.0;
};
AugmentDraw draw_augmentation(AugmentMode mode, AugmentCombine combine, Rng& rng);

// All variants of a clip under a policy, rejected transpositions omitted.
// Less/CrossProduct: up to 45; Less/Union: up to 13; More: up to 12 with
// one stretch factor drawn per variant. None: just the original.
std::vector<Clip> enumerate_augmentations(const Clip& clip, AugmentMode mode,
                                          AugmentCombine combine, Rng& rng);

}  // namespace prnn
