#include "preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "error.hpp"

namespace prnn {

std::vector<PerfNote> extend_with_pedal(std::span<const PerfNote> notes,
                                        std::span<const PedalInterval> pedals) {
  for (size_t i = 1; i < pedals.size(); ++i)
    if (pedals[i].on_s < pedals[i - 1].off_s)
      fail(Errc::invalid_argument, "pedal intervals must be disjoint and sorted");

  std::vector<PerfNote> out(notes.begin(), notes.end());
  double max_offset = 0.0;
  for (const auto& n : out) max_offset = std::max(max_offset, n.offset_s);

  for (auto& n : out) {
    // Pedal is down during [on, off); an offset inside gets delayed to off.
    for (const auto& p : pedals) {
      if (p.on_s > n.offset_s) break;
      if (n.offset_s >= p.on_s && n.offset_s < p.off_s) {
        n.offset_s = std::isfinite(p.off_s) ? p.off_s : max_offset;
        break;
      }
    }
  }

  // Extension may run a note into the next strike of the same pitch;
  // truncate the earlier note there.
  std::vector<size_t> order(out.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (out[a].pitch != out[b].pitch) return out[a].pitch < out[b].pitch;
    return out[a].onset_s < out[b].onset_s;
  });
  for (size_t i = 0; i + 1 < order.size(); ++i) {
    PerfNote& cur = out[order[i]];
    const PerfNote& next = out[order[i + 1]];
    if (cur.pitch == next.pitch && cur.offset_s > next.onset_s) cur.offset_s = next.onset_s;
  }
  return out;
}

std::vector<Clip> split_clips(std::span<const PerfNote> notes, double clip_len_s,
                              const std::string& source_id) {
  if (clip_len_s <= 0.0) fail(Errc::invalid_argument, "clip length must be positive");
  double end = 0.0;
  for (const auto& n : notes) end = std::max(end, n.offset_s);
  if (notes.empty() || end <= 0.0) return {};

  const int count = static_cast<int>(std::ceil(end / clip_len_s));
  std::vector<Clip> clips(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    clips[i].duration_s = std::min(clip_len_s, end - i * clip_len_s);
    clips[i].source_id = source_id;
  }
  for (const auto& n : notes) {
    int i = static_cast<int>(std::floor(n.onset_s / clip_len_s));
    i = std::clamp(i, 0, count - 1);
    const double base = i * clip_len_s;
    PerfNote rel = n;
    rel.onset_s = n.onset_s - base;
    rel.offset_s = std::min(n.offset_s, base + clip_len_s) - base;
    if (rel.offset_s > rel.onset_s) clips[i].notes.push_back(rel);
  }
  return clips;
}

Clip crop_window(const Clip& clip, double start_s, double seg_len_s) {
  Clip out;
  out.duration_s = seg_len_s;
  out.source_id = clip.source_id;
  const double end = start_s + seg_len_s;
  for (const auto& n : clip.notes) {
    if (n.onset_s < start_s || n.onset_s >= end) continue;
    PerfNote rel = n;
    rel.onset_s = n.onset_s - start_s;
    rel.offset_s = std::min(n.offset_s, end) - start_s;
    if (rel.offset_s > rel.onset_s) out.notes.push_back(rel);
  }
  return out;
}

Clip crop_segment(const Clip& clip, double seg_len_s, Rng& rng) {
  if (seg_len_s <= 0.0) fail(Errc::invalid_argument, "segment length must be positive");
  if (seg_len_s > clip.duration_s)
    fail(Errc::segment_too_long, "segment length exceeds clip duration");
  const double start = rng.uniform(0.0, clip.duration_s - seg_len_s);
  return crop_window(clip, start, seg_len_s);
}

std::optional<Clip> transpose(const Clip& clip, int semitones) {
  Clip out = clip;
  for (auto& n : out.notes) {
    n.pitch += semitones;
    if (n.pitch < 0 || n.pitch > 127) return std::nullopt;
  }
  return out;
}

Clip time_stretch(const Clip& clip, double factor) {
  if (!(factor >= 0.5 && factor <= 2.0))
    fail(Errc::factor_out_of_range, "stretch factor outside [0.5, 2.0]");
  Clip out = clip;
  out.duration_s = clip.duration_s * factor;
  for (auto& n : out.notes) {
    n.onset_s *= factor;
    n.offset_s *= factor;
  }
  return out;
}

AugmentDraw draw_augmentation(AugmentMode mode, AugmentCombine combine, Rng& rng) {
  switch (mode) {
    case AugmentMode::None:
      return {};
    case AugmentMode::Less: {
      if (combine == AugmentCombine::CrossProduct) {
        int semis = static_cast<int>(rng.below(2 * kLessTransposeMax + 1)) - kLessTransposeMax;
        int si = static_cast<int>(rng.below(5));
        double stretch = si == 0 ? 1.0 : kLessStretches[si - 1];
        return {semis, stretch};
      }
      // Union: one of the 13 variants, uniformly.
      int pick = static_cast<int>(rng.below(13));
      if (pick < 9) return {pick - kLessTransposeMax, 1.0};
      return {0, kLessStretches[pick - 9]};
    }
    case AugmentMode::More: {
      int span = kMoreTransposeHigh - kMoreTransposeLow + 1;  // 12
      int semis = kMoreTransposeLow + static_cast<int>(rng.below(span));
      return {semis, rng.uniform(kMoreStretchLow, kMoreStretchHigh)};
    }
  }
  fail(Errc::invalid_argument, "unknown augmentation mode");
}

std::vector<Clip> enumerate_augmentations(const Clip& clip, AugmentMode mode,
                                          AugmentCombine combine, Rng& rng) {
  std::vector<Clip> out;
  switch (mode) {
    case AugmentMode::None:
      out.push_back(clip);
      break;
    case AugmentMode::Less: {
      if (combine == AugmentCombine::CrossProduct) {
        for (int semis = -kLessTransposeMax; semis <= kLessTransposeMax; ++semis) {
          auto shifted = transpose(clip, semis);
          if (!shifted) continue;
          out.push_back(*shifted);
          for (double s : kLessStretches) out.push_back(time_stretch(*shifted, s));
        }
      } else {
        for (int semis = -kLessTransposeMax; semis <= kLessTransposeMax; ++semis) {
          auto shifted = transpose(clip, semis);
          if (shifted) out.push_back(*shifted);
        }
        for (double s : kLessStretches) out.push_back(time_stretch(clip, s));
      }
      break;
    }
    case AugmentMode::More: {
      for (int semis = kMoreTransposeLow; semis <= kMoreTransposeHigh; ++semis) {
        auto shifted = transpose(clip, semis);
        double stretch = rng.uniform(kMoreStretchLow, kMoreStretchHigh);
        if (shifted) out.push_back(time_stretch(*shifted, stretch));
      }
      break;
    }
  }
  return out;
}

}  // namespace prnn
