#pragma once

// Fixtures shared by the unit and acceptance suites: temporary directories,
// random buffers and a synthetic speech pool written to disk.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "tsemap/rng.hpp"
#include "tsemap/signal.hpp"
#include "tsemap/wav.hpp"

namespace tsemap::testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "tsemap") {
    std::string tmpl = (fs::temp_directory_path() / (tag + "-XXXXXX")).string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

/// Uniform samples in [-amp, amp], rounded to float so float32 files keep
/// them exactly.
inline AudioBuffer random_buffer(std::size_t n, Rng& rng, double amp = 0.5, int rate = 16000) {
  std::vector<double> x(n);
  for (auto& v : x) v = static_cast<double>(static_cast<float>(rng.uniform(-amp, amp)));
  return AudioBuffer(std::move(x), rate);
}

/// Harmonic tone under a syllable-rate envelope plus a little noise. Never
/// exactly zero, so "active" spans can be counted sample by sample.
inline AudioBuffer speech_like(std::size_t n, int rate, Rng& rng, double amp = 0.3) {
  const double f0 = rng.uniform(90.0, 240.0);
  const double syll = rng.uniform(3.0, 6.0);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double time = static_cast<double>(t) / rate;
    double v = 0.0;
    for (int h = 1; h <= 5; ++h) v += std::sin(2.0 * std::numbers::pi * f0 * h * time + h * phase) / h;
    const double env = 0.55 + 0.45 * std::sin(2.0 * std::numbers::pi * syll * time + phase);
    v = amp * 0.5 * env * v + 0.01 * amp * rng.normal();
    if (v == 0.0) v = 1e-6;
    x[t] = static_cast<double>(static_cast<float>(v));
    if (x[t] == 0.0) x[t] = 1e-6;
  }
  return AudioBuffer(std::move(x), rate);
}

struct PoolFixtureConfig {
  int rate = 8000;
  int target_speakers = 12;
  int utterances_per_target = 3;
  int real_speakers = 12;
  int syn_speakers = 12;
  int utterances_per_interferer = 2;
  double min_seconds = 0.4;
  double max_seconds = 1.2;
  std::uint64_t seed = 7;
};

/// Writes a synthetic corpus and a pool index `pools.json` under `dir`.
inline fs::path write_pool_fixture(const fs::path& dir, const PoolFixtureConfig& cfg = {}) {
  fs::create_directories(dir / "wav");
  Rng rng(cfg.seed);
  auto write_pool = [&](const std::string& name, int speakers, int utts) {
    std::ofstream tsv(dir / (name + ".tsv"));
    for (int s = 0; s < speakers; ++s) {
      const std::string spk = name + "_spk" + std::to_string(s);
      for (int u = 0; u < utts; ++u) {
        const auto n = static_cast<std::size_t>(rng.uniform(cfg.min_seconds, cfg.max_seconds) * cfg.rate);
        const std::string rel = "wav/" + spk + "_u" + std::to_string(u) + ".wav";
        write_wav(dir / rel, speech_like(n, cfg.rate, rng), WavEncoding::float32);
        tsv << spk << '\t' << rel << '\n';
      }
    }
  };
  write_pool("target", cfg.target_speakers, cfg.utterances_per_target);
  write_pool("real", cfg.real_speakers, cfg.utterances_per_interferer);
  write_pool("syn", cfg.syn_speakers, cfg.utterances_per_interferer);
  std::ofstream idx(dir / "pools.json");
  idx << R"({"target": "target.tsv", "real": "real.tsv", "syn": "syn.tsv"})" << '\n';
  return dir / "pools.json";
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

/// Every regular file under `root`, relative path -> contents.
inline std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
  }
  return out;
}

}  // namespace tsemap::testing
