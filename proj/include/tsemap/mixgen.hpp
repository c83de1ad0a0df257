#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tsemap/error.hpp"
#include "tsemap/rng.hpp"
#include "tsemap/signal.hpp"
#include "tsemap/wav.hpp"

namespace tsemap {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Factor vocabulary

/// Where interfering speech comes from. `real_syn` draws each interferer
/// independently from the real or the synthetic pool.
enum class InterSource { real, syn, real_syn };

inline std::string to_string(InterSource s) {
  switch (s) {
    case InterSource::real: return "real";
    case InterSource::syn: return "syn";
    case InterSource::real_syn: return "real/syn";
  }
  return "?";
}

inline InterSource parse_inter_source(const std::string& s) {
  if (s == "real") return InterSource::real;
  if (s == "syn") return InterSource::syn;
  if (s == "real/syn") return InterSource::real_syn;
  fail("unknown inter_source: '" + s + "' (expected real, syn or real/syn)");
}

/// Choices for each mixing factor. SNR is either a finite list or, when
/// `snr_range` is set, a continuous uniform range.
struct FactorGrid {
  std::vector<double> snr_choices;
  std::optional<std::pair<double, double>> snr_range;
  std::vector<double> overlap_choices;
  std::vector<int> speaker_counts;
  std::vector<InterSource> source_types;

  void validate() const {
    if (snr_range) {
      if (!snr_choices.empty()) fail("grid: give either snr_db choices or snr_range, not both");
      if (!(std::isfinite(snr_range->first) && std::isfinite(snr_range->second)) ||
          snr_range->first > snr_range->second) {
        fail("grid: snr_range must satisfy low <= high");
      }
    } else {
      if (snr_choices.empty()) fail("grid: no SNR choices");
      for (double s : snr_choices) {
        if (!std::isfinite(s)) fail("grid: non-finite SNR choice");
      }
    }
    if (overlap_choices.empty()) fail("grid: no overlap_ratio choices");
    for (double r : overlap_choices) {
      if (!(r >= 0.0 && r <= 1.0)) fail("grid: overlap_ratio outside [0, 1]");
    }
    if (speaker_counts.empty()) fail("grid: no num_interferers choices");
    for (int k : speaker_counts) {
      if (k < 1) fail("grid: num_interferers must be >= 1");
    }
    if (source_types.empty()) fail("grid: no inter_source choices");
  }

  bool needs_syn_pool() const {
    return std::any_of(source_types.begin(), source_types.end(),
                       [](InterSource s) { return s != InterSource::real; });
  }

  /// The uniform training grid used to build datamaps: SNR {0,5,10,15} dB,
  /// overlap {0, 0.2, 0.4}, 1-3 interferers, all three source types.
  static FactorGrid training_default() {
    return FactorGrid{{0.0, 5.0, 10.0, 15.0},
                      std::nullopt,
                      {0.0, 0.2, 0.4},
                      {1, 2, 3},
                      {InterSource::real, InterSource::syn, InterSource::real_syn}};
  }
};

inline FactorGrid grid_from_json(const nlohmann::json& j) {
  FactorGrid g;
  try {
    if (j.contains("snr_db")) g.snr_choices = j.at("snr_db").get<std::vector<double>>();
    if (j.contains("snr_range")) {
      const auto r = j.at("snr_range").get<std::vector<double>>();
      if (r.size() != 2) fail("grid: snr_range needs [low, high]");
      g.snr_range = std::make_pair(r[0], r[1]);
    }
    g.overlap_choices = j.at("overlap_ratio").get<std::vector<double>>();
    g.speaker_counts = j.at("num_interferers").get<std::vector<int>>();
    for (const auto& s : j.at("inter_source")) {
      g.source_types.push_back(parse_inter_source(s.get<std::string>()));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("grid: ") + e.what());
  }
  g.validate();
  return g;
}

inline ojson grid_to_json(const FactorGrid& g) {
  ojson j;
  if (g.snr_range) {
    j["snr_range"] = {g.snr_range->first, g.snr_range->second};
  } else {
    j["snr_db"] = g.snr_choices;
  }
  j["overlap_ratio"] = g.overlap_choices;
  j["num_interferers"] = g.speaker_counts;
  ojson src = ojson::array();
  for (auto s : g.source_types) src.push_back(to_string(s));
  j["inter_source"] = src;
  return j;
}

struct MixtureSpec {
  double snr_db = 0.0;
  int num_interferers = 1;
  double overlap_ratio = 0.0;
  InterSource inter_source = InterSource::real;
  std::uint64_t seed = 0;
  std::string example_id;

  friend bool operator==(const MixtureSpec&, const MixtureSpec&) = default;
};

/// Draws each factor independently and uniformly. The result depends only
/// on (grid, example_id, master_seed).
inline MixtureSpec sample_spec(const FactorGrid& grid, const std::string& example_id,
                               std::uint64_t master_seed) {
  grid.validate();
  MixtureSpec spec;
  spec.example_id = example_id;
  spec.seed = derive_seed(master_seed, example_id);
  Rng rng(spec.seed);
  if (grid.snr_range) {
    spec.snr_db = rng.uniform(grid.snr_range->first, grid.snr_range->second);
  } else {
    spec.snr_db = grid.snr_choices[rng.index(grid.snr_choices.size())];
  }
  spec.overlap_ratio = grid.overlap_choices[rng.index(grid.overlap_choices.size())];
  spec.num_interferers = grid.speaker_counts[rng.index(grid.speaker_counts.size())];
  spec.inter_source = grid.source_types[rng.index(grid.source_types.size())];
  return spec;
}

// ---------------------------------------------------------------------------
// Placement

enum class Placement { head, tail };

inline std::string to_string(Placement p) { return p == Placement::head ? "head" : "tail"; }

struct PlacedInterferer {
  AudioBuffer track;
  std::size_t active_begin = 0;
  std::size_t active_length = 0;
  Placement side = Placement::head;
  std::size_t source_offset = 0;  // trim offset into the source; 0 when looped
  bool looped = false;
  bool no_interference = false;   // overlap_ratio 1: nothing active
};

/// Repeats `src` until it is `length` samples long, joining copies with a
/// linear crossfade of `crossfade` samples.
inline std::vector<double> loop_to_length(std::span<const double> src, std::size_t length,
                                          std::size_t crossfade) {
  if (src.empty()) fail("cannot loop an empty signal");
  crossfade = std::min(crossfade, src.size() / 2);
  std::vector<double> out(src.begin(), src.end());
  while (out.size() < length) {
    const std::size_t base = out.size() - crossfade;
    for (std::size_t j = 0; j < crossfade; ++j) {
      const double w = static_cast<double>(j + 1) / static_cast<double>(crossfade + 1);
      out[base + j] = out[base + j] * (1.0 - w) + src[j] * w;
    }
    out.insert(out.end(), src.begin() + static_cast<std::ptrdiff_t>(crossfade), src.end());
  }
  out.resize(length);
  return out;
}

/// Positions `interferer` inside a track of `target_len` samples. The
/// overlap ratio counts the fraction of the target WITHOUT interference
/// (0 = fully overlapped, 1 = no overlap): the interferer is active over a
/// contiguous span of round((1 - ratio) * target_len) samples that abuts the
/// head or the tail of the target. Longer sources are trimmed from a random
/// offset, shorter ones are looped with a 10 ms crossfade.
inline PlacedInterferer place_with_overlap(std::size_t target_len, const AudioBuffer& interferer,
                                           double overlap_ratio,
                                           std::optional<Placement> placement, Rng& rng) {
  if (!(overlap_ratio >= 0.0 && overlap_ratio <= 1.0)) fail("overlap_ratio outside [0, 1]");
  if (interferer.empty()) fail("empty interferer");
  PlacedInterferer out;
  out.side = placement ? *placement : (rng.coin() ? Placement::tail : Placement::head);
  out.active_length = static_cast<std::size_t>(
      std::llround((1.0 - overlap_ratio) * static_cast<double>(target_len)));
  out.active_length = std::min(out.active_length, target_len);
  out.active_begin = out.side == Placement::head ? 0 : target_len - out.active_length;

  std::vector<double> track(target_len, 0.0);
  if (out.active_length == 0) {
    out.no_interference = true;
    out.track = AudioBuffer(std::move(track), interferer.sample_rate());
    return out;
  }
  const auto& src = interferer.samples();
  std::vector<double> active;
  if (src.size() >= out.active_length) {
    out.source_offset = rng.index(src.size() - out.active_length + 1);
    active.assign(src.begin() + static_cast<std::ptrdiff_t>(out.source_offset),
                  src.begin() + static_cast<std::ptrdiff_t>(out.source_offset + out.active_length));
  } else {
    out.looped = true;
    const auto xf = static_cast<std::size_t>(std::llround(0.01 * interferer.sample_rate()));
    active = loop_to_length(src, out.active_length, xf);
  }
  std::copy(active.begin(), active.end(),
            track.begin() + static_cast<std::ptrdiff_t>(out.active_begin));
  out.track = AudioBuffer(std::move(track), interferer.sample_rate());
  return out;
}

// ---------------------------------------------------------------------------
// Synthesis

/// Interfering utterance with its pool of origin (real or syn) and path.
struct TaggedAudio {
  AudioBuffer audio;
  InterSource source = InterSource::real;
  std::string path;
};

struct InterfererInfo {
  std::string path;
  InterSource source = InterSource::real;
  std::string speaker;
  Placement side = Placement::head;
  std::size_t source_offset = 0;
  bool looped = false;
};

struct MixtureRecord {
  std::string example_id;
  std::string mixture_path;
  std::string target_path;
  std::string enrollment_path;
  std::string target_speaker;
  std::vector<InterfererInfo> interferers;
  double realized_snr_db = 0.0;
  double realized_overlap_ratio = 0.0;  // per interferer (all share one span length)
  double union_overlap_ratio = 0.0;     // fraction of the target free of any interferer
  double normalization_gain = 1.0;
  MixtureSpec spec;
};

struct SynthesisOptions {
  double peak_target = 0.99;
  /// Level of the optional noise track relative to the equalized
  /// interference sum, in dB.
  double noise_relative_db = 0.0;
};

struct SynthesisResult {
  AudioBuffer mixture;
  AudioBuffer target;        // target stem as it appears in the mixture
  AudioBuffer interference;  // positioned, scaled interference(+noise) sum
  std::vector<AudioBuffer> interferer_tracks;  // positioned and scaled, per interferer
  MixtureRecord record;
};

/// Builds y = s + sum_k u_k + n at the requested SNR. Interferers are
/// placed, equalized to the energy of the first one, summed (with noise),
/// and the sum is scaled to realize spec.snr_db against the target. If the
/// mixture peak exceeds the peak target, every stem gets the same gain.
inline SynthesisResult synthesize(const MixtureSpec& spec, const AudioBuffer& target,
                                  const std::vector<TaggedAudio>& interferers,
                                  const std::optional<AudioBuffer>& noise, Rng& rng,
                                  const SynthesisOptions& options = {}) {
  if (target.empty()) fail("empty target");
  if (static_cast<int>(interferers.size()) != spec.num_interferers) {
    fail("synthesize: expected " + std::to_string(spec.num_interferers) +
         " interferers, got " + std::to_string(interferers.size()));
  }
  const int rate = target.sample_rate();
  for (const auto& it : interferers) {
    if (it.audio.sample_rate() != rate) {
      fail("sample rate mismatch: target " + std::to_string(rate) + " Hz, interferer " +
           std::to_string(it.audio.sample_rate()) + " Hz (" + it.path + ")");
    }
  }
  if (noise && noise->sample_rate() != rate) fail("sample rate mismatch: noise");

  const std::size_t n = target.size();
  SynthesisResult res;
  MixtureRecord& rec = res.record;
  rec.example_id = spec.example_id;
  rec.spec = spec;

  std::vector<PlacedInterferer> placed;
  placed.reserve(interferers.size());
  for (const auto& it : interferers) {
    placed.push_back(place_with_overlap(n, it.audio, spec.overlap_ratio, std::nullopt, rng));
    const auto& p = placed.back();
    if (p.no_interference || energy(p.track) <= 0.0) {
      fail("degenerate interferer (zero energy after placement): " + it.path);
    }
    InterfererInfo info;
    info.path = it.path;
    info.source = it.source;
    info.side = p.side;
    info.source_offset = p.source_offset;
    info.looped = p.looped;
    rec.interferers.push_back(std::move(info));
  }

  // Equal energy among interferers, referenced to the first.
  const double ref_energy = energy(placed.front().track);
  std::vector<AudioBuffer> tracks;
  for (const auto& p : placed) {
    const double e = energy(p.track);
    tracks.push_back(e == ref_energy ? p.track : scaled(p.track, std::sqrt(ref_energy / e)));
  }
  AudioBuffer sum = tracks.front();
  for (std::size_t k = 1; k < tracks.size(); ++k) sum = add(sum, tracks[k]);

  if (noise) {
    Rng noise_rng(splitmix64(spec.seed ^ 0x6E6F697365ULL));
    auto nt = place_with_overlap(n, *noise, 0.0, Placement::head, noise_rng).track;
    const double en = energy(nt);
    if (en > 0.0) {
      const double g = std::sqrt(energy(sum) * std::pow(10.0, options.noise_relative_db / 10.0) / en);
      sum = add(sum, scaled(nt, g));
    }
  }

  const double g = gain_for_snr(target, sum, spec.snr_db);
  AudioBuffer interference = g == 1.0 ? sum : scaled(sum, g);
  for (auto& t : tracks) {
    if (g != 1.0) t = scaled(t, g);
  }
  AudioBuffer tgt = target;
  AudioBuffer mixture = add(tgt, interference);

  const auto norm = peak_normalize(mixture, options.peak_target);
  rec.normalization_gain = norm.gain;
  if (norm.gain != 1.0) {
    tgt = scaled(tgt, norm.gain);
    interference = scaled(interference, norm.gain);
    for (auto& t : tracks) t = scaled(t, norm.gain);
    mixture = add(tgt, interference);
  }

  rec.realized_snr_db = snr_db(tgt, interference);
  rec.realized_overlap_ratio =
      1.0 - static_cast<double>(placed.front().active_length) / static_cast<double>(n);
  std::size_t covered = 0;
  for (std::size_t t = 0; t < n; ++t) {
    for (const auto& p : placed) {
      if (t >= p.active_begin && t < p.active_begin + p.active_length) {
        ++covered;
        break;
      }
    }
  }
  rec.union_overlap_ratio = 1.0 - static_cast<double>(covered) / static_cast<double>(n);

  res.mixture = std::move(mixture);
  res.target = std::move(tgt);
  res.interference = std::move(interference);
  res.interferer_tracks = std::move(tracks);
  return res;
}

// ---------------------------------------------------------------------------
// Pools and manifests

/// speaker id -> utterance paths. Ordered so iteration is deterministic.
using Pool = std::map<std::string, std::vector<std::string>>;

/// Reads `speaker_id<TAB>wav_path` lines. Relative wav paths resolve
/// against the listing's directory and are stored absolute. Blank lines
/// and '#' comments skip.
inline Pool read_pool(const fs::path& listing) {
  std::ifstream in(listing);
  if (!in) io_fail("cannot open pool listing " + listing.string());
  Pool pool;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      fail(listing.string() + ":" + std::to_string(lineno) + ": expected speaker_id<TAB>wav_path");
    }
    fs::path wav = line.substr(tab + 1);
    if (wav.is_relative()) wav = fs::absolute(listing.parent_path() / wav);
    pool[line.substr(0, tab)].push_back(wav.lexically_normal().generic_string());
  }
  return pool;
}

struct PoolSet {
  Pool target;
  Pool real;
  Pool syn;
};

/// Pool index: a JSON object naming the three listings,
/// {"target": "...tsv", "real": "...tsv", "syn": "...tsv"}; "syn" is
/// optional. Paths resolve against the index file's directory.
inline PoolSet read_pool_index(const fs::path& index) {
  std::ifstream in(index);
  if (!in) io_fail("cannot open pool index " + index.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(index.string() + ": " + e.what());
  }
  auto resolve = [&](const std::string& key) {
    fs::path p = j.at(key).get<std::string>();
    return p.is_relative() ? index.parent_path() / p : p;
  };
  PoolSet ps;
  try {
    ps.target = read_pool(resolve("target"));
    ps.real = read_pool(resolve("real"));
    if (j.contains("syn")) ps.syn = read_pool(resolve("syn"));
  } catch (const nlohmann::json::exception& e) {
    fail(index.string() + ": " + e.what());
  }
  return ps;
}

inline ojson record_to_json(const MixtureRecord& r) {
  ojson j;
  j["example_id"] = r.example_id;
  j["mixture_path"] = r.mixture_path;
  j["target_path"] = r.target_path;
  j["enrollment_path"] = r.enrollment_path;
  ojson inter = ojson::array();
  for (const auto& i : r.interferers) {
    ojson o;
    o["path"] = i.path;
    o["source"] = to_string(i.source);
    inter.push_back(o);
  }
  j["interferers"] = inter;
  j["snr_db"] = r.spec.snr_db;
  j["realized_snr_db"] = r.realized_snr_db;
  j["overlap_ratio"] = r.spec.overlap_ratio;
  j["realized_overlap_ratio"] = r.realized_overlap_ratio;
  j["num_interferers"] = r.spec.num_interferers;
  j["inter_source"] = to_string(r.spec.inter_source);
  j["normalization_gain"] = r.normalization_gain;
  j["seed"] = r.spec.seed;
  return j;
}

inline MixtureRecord record_from_json(const nlohmann::json& j) {
  MixtureRecord r;
  try {
    r.example_id = j.at("example_id").get<std::string>();
    r.mixture_path = j.at("mixture_path").get<std::string>();
    r.target_path = j.at("target_path").get<std::string>();
    r.enrollment_path = j.at("enrollment_path").get<std::string>();
    for (const auto& o : j.at("interferers")) {
      InterfererInfo info;
      info.path = o.at("path").get<std::string>();
      info.source = parse_inter_source(o.at("source").get<std::string>());
      r.interferers.push_back(std::move(info));
    }
    r.realized_snr_db = j.at("realized_snr_db").get<double>();
    r.realized_overlap_ratio = j.at("realized_overlap_ratio").get<double>();
    r.normalization_gain = j.at("normalization_gain").get<double>();
    r.spec.example_id = r.example_id;
    r.spec.snr_db = j.at("snr_db").get<double>();
    r.spec.overlap_ratio = j.at("overlap_ratio").get<double>();
    r.spec.num_interferers = j.at("num_interferers").get<int>();
    r.spec.inter_source = parse_inter_source(j.at("inter_source").get<std::string>());
    r.spec.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("manifest record: ") + e.what());
  }
  return r;
}

inline void write_manifest(const fs::path& path, const std::vector<MixtureRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) io_fail("cannot write " + path.string());
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
  if (!out) io_fail("write failed: " + path.string());
}

inline std::vector<MixtureRecord> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) io_fail("cannot open manifest " + path.string());
  std::vector<MixtureRecord> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(record_from_json(j));
    if (!seen.insert(out.back().example_id).second) {
      fail(path.string() + ": duplicate example_id " + out.back().example_id);
    }
  }
  return out;
}

/// Resolves a manifest-relative path.
inline fs::path resolve_manifest_path(const fs::path& manifest, const std::string& p) {
  fs::path q = p;
  return q.is_relative() ? manifest.parent_path() / q : q;
}

struct BuildOptions {
  unsigned jobs = 1;
  WavEncoding encoding = WavEncoding::float32;
  SynthesisOptions synthesis;
};

inline std::string example_name(std::size_t index) {
  std::ostringstream os;
  os << "mix_" << std::setw(6) << std::setfill('0') << index;
  return os.str();
}

namespace mixgen_detail {

inline std::string pick(const std::vector<std::string>& v, Rng& rng) { return v[rng.index(v.size())]; }

/// Uniform draw among pool speakers not in `used`.
inline std::string pick_speaker(const Pool& pool, const std::set<std::string>& used, Rng& rng,
                                const char* pool_name) {
  std::vector<std::string> free;
  for (const auto& [spk, _] : pool) {
    if (!used.count(spk)) free.push_back(spk);
  }
  if (free.empty()) {
    fail(std::string("pool exhaustion: no unused speaker left in the ") + pool_name + " pool");
  }
  return free[rng.index(free.size())];
}

}  // namespace mixgen_detail

/// Generates `count` mixtures into `out_dir`: audio/<id>_mix.wav and
/// audio/<id>_target.wav, manifest.jsonl (one MixtureRecord per line) and
/// placements.jsonl (how each interferer was placed and adapted). Output is
/// a function of (pools, grid, count, master_seed) only; the worker count
/// does not affect any byte.
inline std::vector<MixtureRecord> build_manifest(const PoolSet& pools, const FactorGrid& grid,
                                                 std::size_t count, std::uint64_t master_seed,
                                                 const fs::path& out_dir,
                                                 const BuildOptions& options = {}) {
  grid.validate();
  for (double r : grid.overlap_choices) {
    if (r >= 1.0) fail("grid: overlap_ratio 1 leaves no interference, SNR undefined");
  }
  if (count == 0) return {};
  if (pools.target.empty()) fail("target pool is empty");
  for (const auto& [spk, utts] : pools.target) {
    if (utts.size() < 2) {
      fail("pool exhaustion: target speaker '" + spk + "' has no second utterance for enrollment");
    }
  }
  const bool uses_real = std::any_of(grid.source_types.begin(), grid.source_types.end(),
                                     [](InterSource s) { return s != InterSource::syn; });
  if (uses_real && pools.real.empty()) fail("real interferer pool is empty");
  if (grid.needs_syn_pool() && pools.syn.empty()) {
    fail("grid draws synthetic interferers but no syn pool was given");
  }

  const fs::path audio_dir = out_dir / "audio";
  std::error_code ec;
  fs::create_directories(audio_dir, ec);
  if (ec) io_fail("cannot create " + audio_dir.string() + ": " + ec.message());

  std::vector<MixtureRecord> records(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};

  auto work = [&](std::size_t i) {
    using namespace mixgen_detail;
    const std::string id = example_name(i);
    MixtureSpec spec = sample_spec(grid, id, master_seed);
    Rng rng(splitmix64(spec.seed + 1));

    std::vector<std::string> speakers;
    for (const auto& [spk, _] : pools.target) speakers.push_back(spk);
    const std::string tspk = speakers[rng.index(speakers.size())];
    std::vector<std::string> utts = pools.target.at(tspk);
    const std::size_t ti = rng.index(utts.size());
    const std::string target_src = utts[ti];
    utts.erase(utts.begin() + static_cast<std::ptrdiff_t>(ti));
    const std::string enrollment = pick(utts, rng);

    std::set<std::string> used{tspk};
    std::vector<TaggedAudio> inter;
    std::vector<std::string> inter_speakers;
    for (int k = 0; k < spec.num_interferers; ++k) {
      InterSource src = spec.inter_source;
      if (src == InterSource::real_syn) src = rng.coin() ? InterSource::syn : InterSource::real;
      const Pool& pool = src == InterSource::real ? pools.real : pools.syn;
      const std::string spk = pick_speaker(pool, used, rng, src == InterSource::real ? "real" : "syn");
      used.insert(spk);
      const std::string path = pick(pool.at(spk), rng);
      inter.push_back({read_wav(path), src, path});
      inter_speakers.push_back(spk);
    }

    const AudioBuffer target = read_wav(target_src);
    auto res = synthesize(spec, target, inter, std::nullopt, rng, options.synthesis);
    for (std::size_t k = 0; k < inter_speakers.size(); ++k) {
      res.record.interferers[k].speaker = inter_speakers[k];
    }
    res.record.mixture_path = "audio/" + id + "_mix.wav";
    res.record.target_path = "audio/" + id + "_target.wav";
    res.record.enrollment_path = enrollment;
    res.record.target_speaker = tspk;
    write_wav(out_dir / res.record.mixture_path, res.mixture, options.encoding);
    write_wav(out_dir / res.record.target_path, res.target, options.encoding);
    records[i] = std::move(res.record);
  };

  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        work(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned jobs = std::max(1U, std::min<unsigned>(options.jobs, static_cast<unsigned>(count)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  write_manifest(out_dir / "manifest.jsonl", records);
  std::ofstream placements(out_dir / "placements.jsonl", std::ios::binary | std::ios::trunc);
  if (!placements) io_fail("cannot write " + (out_dir / "placements.jsonl").string());
  for (const auto& r : records) {
    ojson j;
    j["example_id"] = r.example_id;
    j["target_speaker"] = r.target_speaker;
    j["union_overlap_ratio"] = r.union_overlap_ratio;
    ojson arr = ojson::array();
    for (const auto& i : r.interferers) {
      arr.push_back(ojson{{"speaker", i.speaker},
                          {"placement", to_string(i.side)},
                          {"source_offset", i.source_offset},
                          {"looped", i.looped}});
    }
    j["interferers"] = arr;
    placements << j.dump() << '\n';
  }
  return records;
}

}  // namespace tsemap
