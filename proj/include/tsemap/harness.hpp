#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tsemap/csv.hpp"
#include "tsemap/dynamics.hpp"
#include "tsemap/error.hpp"
#include "tsemap/mixgen.hpp"
#include "tsemap/rng.hpp"
#include "tsemap/signal.hpp"

namespace tsemap {

// ---------------------------------------------------------------------------
// Oracle extractor

/// Stand-in extractor that keeps a fraction `beta` of the true interference:
/// estimate = target + beta * interference. Its SDR is known in closed form,
/// snr_db(target, interference) - 20 log10(beta).
class OracleExtractor {
 public:
  explicit OracleExtractor(double beta) : beta_(beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) fail("oracle beta must lie in [0, 1]");
  }

  double beta() const noexcept { return beta_; }

  /// `target` and `interference` must be the stems `mixture` was built from.
  AudioBuffer extract(const AudioBuffer& mixture, const AudioBuffer& target,
                      const AudioBuffer& interference) const {
    require_same_shape(mixture, target, "oracle_extract");
    require_same_shape(mixture, interference, "oracle_extract");
    std::vector<double> out(target.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = target[i] + beta_ * interference[i];
    return AudioBuffer(std::move(out), target.sample_rate());
  }

 private:
  double beta_;
};

inline AudioBuffer oracle_extract(const AudioBuffer& mixture, const AudioBuffer& target,
                                  const AudioBuffer& interference, double beta) {
  return OracleExtractor(beta).extract(mixture, target, interference);
}

// ---------------------------------------------------------------------------
// Simulated learner

/// Asymptotic ΔSNR ceiling of an example as a function of its mixing
/// factors: intercept + snr_slope*SNR - speaker_penalty*(K-1)
/// - overlap_penalty*(1-overlap)*[K>1] - syn_penalty*(syn fraction).
/// `constant`, when set, replaces the whole expression.
struct AsymptoteModel {
  double intercept = 6.0;
  double snr_slope = 0.4;
  double speaker_penalty = 1.5;
  double overlap_penalty = 2.0;
  double syn_penalty = 0.0;
  std::optional<double> constant;

  double operator()(const MixtureRecord& r) const {
    if (constant) return *constant;
    const auto& s = r.spec;
    double syn_fraction = 0.0;
    if (!r.interferers.empty()) {
      for (const auto& i : r.interferers) syn_fraction += i.source == InterSource::syn ? 1.0 : 0.0;
      syn_fraction /= static_cast<double>(r.interferers.size());
    } else {
      syn_fraction = s.inter_source == InterSource::syn ? 1.0 : s.inter_source == InterSource::real_syn ? 0.5 : 0.0;
    }
    const double k = static_cast<double>(s.num_interferers);
    return intercept + snr_slope * s.snr_db - speaker_penalty * (k - 1.0) -
           overlap_penalty * (1.0 - s.overlap_ratio) * (s.num_interferers > 1 ? 1.0 : 0.0) -
           syn_penalty * syn_fraction;
  }
};

/// Per-example parameter override. An override applies when every selector
/// that is set matches; later overrides win.
struct LearnerOverride {
  std::optional<std::pair<std::size_t, std::size_t>> index_range;  // manifest rows [lo, hi)
  std::vector<int> num_interferers;
  std::vector<InterSource> inter_source;
  std::vector<double> overlap_ratio;
  std::vector<double> snr_db;

  std::optional<double> asymptote;
  std::optional<double> time_constant;
  std::optional<double> noise_std;

  bool matches(std::size_t index, const MixtureSpec& s) const {
    constexpr double eps = 1e-9;
    auto near_any = [&](const std::vector<double>& v, double x) {
      return v.empty() || std::any_of(v.begin(), v.end(), [&](double y) { return std::abs(x - y) < eps; });
    };
    if (index_range && (index < index_range->first || index >= index_range->second)) return false;
    if (!num_interferers.empty() &&
        std::find(num_interferers.begin(), num_interferers.end(), s.num_interferers) == num_interferers.end()) {
      return false;
    }
    if (!inter_source.empty() &&
        std::find(inter_source.begin(), inter_source.end(), s.inter_source) == inter_source.end()) {
      return false;
    }
    return near_any(overlap_ratio, s.overlap_ratio) && near_any(snr_db, s.snr_db);
  }
};

struct LearnerParams {
  AsymptoteModel asymptote;
  double time_constant = 5.0;  // epochs
  double noise_std = 0.5;      // dB
  std::uint64_t seed = 0;
  std::vector<LearnerOverride> overrides;

  void validate() const {
    auto check = [](double tau, double sigma) {
      if (!(tau > 0.0) || !std::isfinite(tau)) fail("learner: time_constant must be > 0");
      if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail("learner: noise_std must be >= 0");
    };
    check(time_constant, noise_std);
    for (const auto& o : overrides) check(o.time_constant.value_or(1.0), o.noise_std.value_or(0.0));
  }
};

/// Effective (L, tau, sigma) for one example.
struct ExampleCurve {
  double asymptote, time_constant, noise_std;

  double value(int epoch) const {
    return asymptote * (1.0 - std::exp(-static_cast<double>(epoch) / time_constant));
  }
};

inline ExampleCurve example_curve(const LearnerParams& p, std::size_t index, const MixtureRecord& r) {
  ExampleCurve c{p.asymptote(r), p.time_constant, p.noise_std};
  for (const auto& o : p.overrides) {
    if (!o.matches(index, r.spec)) continue;
    if (o.asymptote) c.asymptote = *o.asymptote;
    if (o.time_constant) c.time_constant = *o.time_constant;
    if (o.noise_std) c.noise_std = *o.noise_std;
  }
  return c;
}

inline LearnerParams learner_from_json(const nlohmann::json& j) {
  LearnerParams p;
  try {
    if (j.contains("asymptote")) {
      const auto& a = j.at("asymptote");
      if (a.is_number()) {
        p.asymptote.constant = a.get<double>();
      } else {
        p.asymptote.intercept = a.value("intercept", p.asymptote.intercept);
        p.asymptote.snr_slope = a.value("snr_slope", p.asymptote.snr_slope);
        p.asymptote.speaker_penalty = a.value("speaker_penalty", p.asymptote.speaker_penalty);
        p.asymptote.overlap_penalty = a.value("overlap_penalty", p.asymptote.overlap_penalty);
        p.asymptote.syn_penalty = a.value("syn_penalty", p.asymptote.syn_penalty);
        if (a.contains("constant")) p.asymptote.constant = a.at("constant").get<double>();
      }
    }
    p.time_constant = j.value("time_constant", p.time_constant);
    p.noise_std = j.value("noise_std", p.noise_std);
    p.seed = j.value("seed", p.seed);
    if (j.contains("overrides")) {
      for (const auto& o : j.at("overrides")) {
        LearnerOverride ov;
        const auto sel = o.value("where", nlohmann::json::object());
        if (sel.contains("index_range")) {
          const auto r = sel.at("index_range").get<std::vector<std::size_t>>();
          if (r.size() != 2 || r[0] > r[1]) fail("learner: index_range needs [lo, hi)");
          ov.index_range = std::make_pair(r[0], r[1]);
        }
        if (sel.contains("num_interferers")) ov.num_interferers = sel.at("num_interferers").get<std::vector<int>>();
        if (sel.contains("inter_source")) {
          for (const auto& s : sel.at("inter_source")) ov.inter_source.push_back(parse_inter_source(s.get<std::string>()));
        }
        if (sel.contains("overlap_ratio")) ov.overlap_ratio = sel.at("overlap_ratio").get<std::vector<double>>();
        if (sel.contains("snr_db")) ov.snr_db = sel.at("snr_db").get<std::vector<double>>();
        if (o.contains("asymptote")) ov.asymptote = o.at("asymptote").get<double>();
        if (o.contains("time_constant")) ov.time_constant = o.at("time_constant").get<double>();
        if (o.contains("noise_std")) ov.noise_std = o.at("noise_std").get<double>();
        p.overrides.push_back(std::move(ov));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("learner config: ") + e.what());
  }
  p.validate();
  return p;
}

inline LearnerParams read_learner(const fs::path& path) {
  std::ifstream in(path);
  if (!in) io_fail("cannot open learner config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(path.string() + ": " + e.what());
  }
  return learner_from_json(j);
}

/// Per-epoch ΔSNR trajectories M(e) = L (1 - exp(-e / tau)) + noise for
/// epochs 1..E, one per manifest record, in manifest order. Each example
/// draws from its own stream seeded by (seed, example_id).
inline std::vector<Trajectory> simulate_trajectories(const std::vector<MixtureRecord>& manifest,
                                                     const LearnerParams& params, int epochs,
                                                     std::uint64_t seed, unsigned jobs = 1) {
  if (manifest.empty()) fail("simulate: empty manifest");
  if (epochs < 3) fail("simulate: need at least 3 epochs");
  params.validate();
  std::vector<Trajectory> out(manifest.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < manifest.size(); i = next++) {
      const auto& r = manifest[i];
      const ExampleCurve c = example_curve(params, i, r);
      Rng rng(derive_seed(seed, r.example_id));
      Trajectory t;
      t.example_id = r.example_id;
      for (int e = 1; e <= epochs; ++e) {
        t.epochs.push_back(e);
        const double noise = c.noise_std > 0.0 ? rng.normal(0.0, c.noise_std) : 0.0;
        t.values.push_back(c.value(e) + noise);
      }
      out[i] = std::move(t);
    }
  };
  jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(manifest.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

inline void write_metric_log(const fs::path& path, const std::vector<Trajectory>& trajectories,
                             const std::string& metric = "delta_snr") {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) io_fail("cannot write " + path.string());
  out << "example_id,epoch,metric,value\n";
  for (const auto& t : trajectories) {
    for (std::size_t k = 0; k < t.values.size(); ++k) {
      out << t.example_id << ',' << t.epochs[k] << ',' << metric << ',' << format_number(t.values[k]) << '\n';
    }
  }
  if (!out) io_fail("write failed: " + path.string());
}

}  // namespace tsemap
