#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace prnn {

struct ManifestEntry {
  std::string path;  // absolute once loaded
  int clip_index = 0;
  bool heldout = false;
};

// Line-oriented dataset manifest. Settings that shape the clip pipeline
// (pedal extension, clip length) travel with the entries so that training
// reconstructs exactly the clips that were counted at prep time.
//
// File grammar: '#'-prefixed lines are comments, except "# key=value"
// header lines for the settings below; every other line is
// "path<TAB>clip_index<TAB>{train|heldout}". Relative paths are resolved
// against the manifest's own directory.
struct Manifest {
  double clip_len_s = 30.0;
  bool extend_pedal = false;
  std::vector<ManifestEntry> entries;

  size_t count(bool heldout) const {
    size_t n = 0;
    for (const auto& e : entries) n += (e.heldout == heldout);
    return n;
  }
};

// FNV-1a, used for the deterministic train/heldout split.
uint64_t stable_hash(std::string_view s);

// Scans a directory tree for .mid/.midi files (sorted for determinism),
// splits each into clips, and assigns whole files to the heldout split when
// hash(file path) % 10000 < heldout_fraction * 10000.
Manifest build_manifest(const std::string& corpus_dir, bool extend_pedal, double clip_len_s,
                        double heldout_fraction);

void save_manifest(const Manifest& manifest, const std::string& path);
Manifest load_manifest(const std::string& path);

}  // namespace prnn
