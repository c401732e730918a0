#include "manifest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "error.hpp"
#include "io_util.hpp"
#include "midi.hpp"
#include "preprocess.hpp"

namespace fs = std::filesystem;

namespace prnn {

uint64_t stable_hash(std::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

bool is_midi_path(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".mid" || ext == ".midi";
}

}  // namespace

Manifest build_manifest(const std::string& corpus_dir, bool extend_pedal, double clip_len_s,
                        double heldout_fraction) {
  if (clip_len_s <= 0.0) fail(Errc::invalid_argument, "clip length must be positive");
  if (heldout_fraction < 0.0 || heldout_fraction > 1.0)
    fail(Errc::invalid_argument, "heldout fraction outside [0, 1]");
  std::error_code ec;
  if (!fs::is_directory(corpus_dir, ec))
    fail(Errc::io_failure, "not a directory: " + corpus_dir);

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(corpus_dir)) {
    if (entry.is_regular_file() && is_midi_path(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(Errc::empty_manifest, "no MIDI files under " + corpus_dir);

  const auto heldout_cut = static_cast<uint64_t>(std::llround(heldout_fraction * 10000.0));
  Manifest manifest;
  manifest.clip_len_s = clip_len_s;
  manifest.extend_pedal = extend_pedal;
  for (const auto& file : files) {
    auto bytes = read_file_bytes(file.string());
    Performance perf = extract_performance(parse_smf(bytes));
    std::vector<PerfNote> notes =
        extend_pedal ? extend_with_pedal(perf.notes, perf.pedals) : std::move(perf.notes);
    auto clips = split_clips(notes, clip_len_s, file.string());
    const std::string abs = fs::absolute(file).lexically_normal().string();
    const bool heldout = stable_hash(abs) % 10000 < heldout_cut;
    for (size_t i = 0; i < clips.size(); ++i)
      manifest.entries.push_back({abs, static_cast<int>(i), heldout});
  }
  return manifest;
}

void save_manifest(const Manifest& manifest, const std::string& path) {
  const fs::path dir = fs::absolute(path).parent_path();
  std::ostringstream os;
  os << "# perfrnn dataset manifest\n";
  os << "# clip_len_s=" << manifest.clip_len_s << "\n";
  os << "# extend_pedal=" << (manifest.extend_pedal ? 1 : 0) << "\n";
  for (const auto& e : manifest.entries) {
    fs::path p(e.path);
    std::error_code ec;
    fs::path rel = fs::relative(p, dir, ec);
    const std::string shown = (ec || rel.empty()) ? p.string() : rel.string();
    if (shown.find('\t') != std::string::npos)
      fail(Errc::invalid_argument, "manifest paths may not contain tabs: " + shown);
    os << shown << '\t' << e.clip_index << '\t' << (e.heldout ? "heldout" : "train") << '\n';
  }
  write_file_text(path, os.str());
}

Manifest load_manifest(const std::string& path) {
  const fs::path dir = fs::absolute(path).parent_path();
  std::istringstream is(read_file_text(path));
  Manifest manifest;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      // Header settings ride in comments: "# key=value".
      size_t eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      key.erase(key.find_last_not_of(' ') + 1);
      const std::string value = line.substr(eq + 1);
      if (key == "clip_len_s")
        manifest.clip_len_s = std::stod(value);
      else if (key == "extend_pedal")
        manifest.extend_pedal = value != "0";
      continue;
    }
    size_t t1 = line.find('\t');
    size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      fail(Errc::parse_error,
           path + ":" + std::to_string(line_no) + ": expected path<TAB>clip<TAB>split");
    ManifestEntry entry;
    fs::path p(line.substr(0, t1));
    entry.path = (p.is_absolute() ? p : dir / p).lexically_normal().string();
    entry.clip_index = std::stoi(line.substr(t1 + 1, t2 - t1 - 1));
    const std::string tag = line.substr(t2 + 1);
    if (tag == "train")
      entry.heldout = false;
    else if (tag == "heldout")
      entry.heldout = true;
    else
      fail(Errc::parse_error,
           path + ":" + std::to_string(line_no) + ": unknown split tag '" + tag + "'");
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

}  // namespace prnn
