// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "tsemap/cli.hpp"
#include "tsemap/tsemap.hpp"

namespace {

using namespace tsemap;
namespace tt = tsemap::testing;

// Pinned tolerances and budgets.
constexpr double kSnrTolDb = 0.01;                  // AC1
constexpr double kOverlapTolSamples = 1.0;          // AC1, per interferer
constexpr double kMixRuntimeSec = 120.0;            // AC1
constexpr double kStatTol = 1e-12;                  // AC2
constexpr double kShiftRelTol = 1e-12;              // AC4, arbitrary real shifts
constexpr double kOracleTolDb = 1e-6;               // AC5
constexpr double kAmbiguousShare = 0.80;            // AC6
constexpr double kPipelineRuntimeSec = 300.0;       // AC6
constexpr std::uint64_t kFrozenSeed = 20240917;     // AC6

const fs::path kConfigs = fs::path(TSEMAP_SOURCE_DIR) / "configs";

struct Check {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

int cli_run(std::vector<std::string> args) {
  std::ostringstream err;
  const int code = cli::run(std::move(args), err);
  if (code != 0) std::cerr << err.str();
  return code;
}

// ---------------------------------------------------------------------------

Check ac1_mixture_fidelity(const fs::path& pools_json, const fs::path& work) {
  Check c;
  const auto pools = read_pool_index(pools_json);
  const auto grid = FactorGrid::training_default();
  const std::uint64_t seed = 101;
  const auto t0 = std::chrono::steady_clock::now();
  const auto recs = build_manifest(pools, grid, 1000, seed, work / "ac1");
  const double secs = seconds_since(t0);

  double max_snr_err = 0.0, max_ov_err = 0.0;
  std::map<std::string, nlohmann::json> placements;
  for (const auto& line : tt::lines_of(work / "ac1/placements.jsonl")) {
    auto j = nlohmann::json::parse(line);
    placements[j.at("example_id").get<std::string>()] = j;
  }
  for (const auto& r : recs) {
    const auto mix = read_wav(work / "ac1" / r.mixture_path);
    const auto tgt = read_wav(work / "ac1" / r.target_path);
    const auto inter = subtract(mix, tgt);
    max_snr_err = std::max(max_snr_err, std::abs(snr_db(tgt, inter) - r.spec.snr_db));
    const std::size_t n = tgt.size();
    const auto active = static_cast<std::size_t>(std::llround((1.0 - r.spec.overlap_ratio) * n));
    max_ov_err = std::max(max_ov_err, std::abs(r.realized_overlap_ratio - r.spec.overlap_ratio) * n);
    // Outside the predicted union of spans the stored interference is exactly zero.
    std::vector<bool> covered(n, false);
    for (const auto& in : placements.at(r.example_id).at("interferers")) {
      const bool head = in.at("placement") == "head";
      for (std::size_t t = 0; t < active; ++t) covered[head ? t : n - 1 - t] = true;
    }
    for (std::size_t t = 0; t < n; ++t) {
      if (!covered[t] && inter[t] != 0.0) {
        c.require(false, r.example_id + ": interference outside its span at sample " + std::to_string(t));
        break;
      }
    }
  }

  // Per-interferer active spans counted sample by sample on the same specs.
  Rng src_rng(7);
  double max_count_err = 0.0;
  for (std::size_t i = 0; i < 1000; ++i) {
    const auto spec = sample_spec(grid, example_name(i), seed);
    Rng rng(spec.seed);
    const auto target = tt::speech_like(8000 + src_rng.index(24000), 16000, src_rng);
    std::vector<TaggedAudio> inter;
    for (int k = 0; k < spec.num_interferers; ++k) {
      inter.push_back({tt::speech_like(4000 + src_rng.index(40000), 16000, src_rng), InterSource::real, "mem"});
    }
    const auto res = synthesize(spec, target, inter, std::nullopt, rng);
    max_snr_err = std::max(max_snr_err, std::abs(snr_db(res.target, res.interference) - spec.snr_db));
    for (const auto& track : res.interferer_tracks) {
      std::size_t nz = 0;
      for (double v : track.samples()) nz += v != 0.0;
      max_count_err = std::max(max_count_err, std::abs(static_cast<double>(nz) -
                                                       (1.0 - spec.overlap_ratio) * target.size()));
    }
  }
  c.require(recs.size() == 1000, "expected 1000 records");
  c.require(max_snr_err < kSnrTolDb, "SNR error " + num(max_snr_err) + " dB");
  c.require(max_ov_err <= kOverlapTolSamples && max_count_err <= kOverlapTolSamples,
            "overlap error " + num(std::max(max_ov_err, max_count_err)) + " samples");
  c.require(secs < kMixRuntimeSec, "build took " + num(secs) + " s");
  if (c.ok) {
    c.detail = "1000 mixtures in " + num(secs) + " s; max |SNR err| " + num(max_snr_err) +
               " dB; max overlap err " + num(std::max(max_ov_err, max_count_err)) + " samples";
  }
  return c;
}

Check ac2_datamap_oracle() {
  Check c;
  Rng rng(202);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> v(49);
    const double base = rng.uniform(-10, 20), sd = rng.uniform(0, 4);
    for (auto& x : v) x = rng.normal(base, sd);
    long double m = 0.0L;
    for (double x : v) m += x;
    m /= v.size();
    long double ss = 0.0L;
    for (double x : v) ss += (x - m) * (x - m);
    const long double s = std::sqrt(ss / v.size());
    worst = std::max({worst, std::abs(confidence(v) - static_cast<double>(m)),
                      std::abs(variability(v) - static_cast<double>(s))});
  }
  c.require(worst <= kStatTol, "statistics differ by " + num(worst));
  auto counts_of = [&](std::size_t n) {
    std::vector<DatamapPoint> pts;
    for (std::size_t i = 0; i < n; ++i) {
      pts.push_back({"p" + std::to_string(i), rng.normal(), std::abs(rng.normal()), Region::unlabeled});
    }
    RegionCounts k;
    for (const auto& p : classify_regions(pts)) {
      if (p.region == Region::ambiguous) ++k.ambiguous;
      if (p.region == Region::easy) ++k.easy;
      if (p.region == Region::hard) ++k.hard;
      if (p.region == Region::unlabeled) ++k.unlabeled;
    }
    return k;
  };
  c.require(counts_of(100) == RegionCounts{30, 35, 14, 21}, "n=100 counts differ from 30/35/14/21");
  c.require(counts_of(10) == RegionCounts{3, 3, 1, 3}, "n=10 counts differ from 3/3/1/3");
  if (c.ok) c.detail = "10^4 trajectories, max deviation " + num(worst) + "; n=100 30/35/14/21; n=10 3/3/1/3";
  return c;
}

Check ac3_region_semantics() {
  Check c;
  Rng rng(303);
  auto before = [](double a, const std::string& ia, double b, const std::string& ib) {
    return a > b || (a == b && ia < ib);
  };
  for (int trial = 0; trial < 1000 && c.ok; ++trial) {
    const std::size_t n = 5 + rng.index(400);
    std::vector<DatamapPoint> pts;
    const bool coarse = trial % 2 == 1;  // force ties on half the trials
    for (std::size_t i = 0; i < n; ++i) {
      double conf = rng.normal(5, 3), var = std::abs(rng.normal());
      if (coarse) {
        conf = std::round(conf);
        var = std::round(var * 2) / 2;
      }
      pts.push_back({"x" + std::to_string(rng.index(1u << 30)) + "_" + std::to_string(i), conf, var, Region::unlabeled});
    }
    const auto out = classify_regions(pts);
    std::vector<const DatamapPoint*> amb, rest, easy, unl, hard;
    for (const auto& p : out) {
      (p.region == Region::ambiguous ? amb : rest).push_back(&p);
      if (p.region == Region::easy) easy.push_back(&p);
      if (p.region == Region::unlabeled) unl.push_back(&p);
      if (p.region == Region::hard) hard.push_back(&p);
    }
    for (auto* a : amb) {
      for (auto* b : rest) c.require(before(a->variability, a->example_id, b->variability, b->example_id), "ambiguous not dominant in variability");
    }
    auto conf_dominates = [&](const std::vector<const DatamapPoint*>& hi, const std::vector<const DatamapPoint*>& lo, const char* what) {
      for (auto* a : hi) {
        for (auto* b : lo) c.require(before(a->confidence, a->example_id, b->confidence, b->example_id), what);
      }
    };
    conf_dominates(easy, unl, "easy not above unlabeled in confidence");
    conf_dominates(unl, hard, "unlabeled not above hard in confidence");
    conf_dominates(easy, hard, "easy not above hard in confidence");
  }
  if (c.ok) c.detail = "1000 randomized trials, half with heavy ties";
  return c;
}

Check ac4_shift_invariance() {
  Check c;
  Rng rng(404);
  auto make = [&](bool dyadic) {
    std::vector<Trajectory> t;
    for (int i = 0; i < 80; ++i) {
      Trajectory tr{"s" + std::to_string(i), {}, {}};
      const double sd = rng.uniform(0.1, 3.0);
      // 32 retained epochs keep the mean a power-of-two division.
      const int last = dyadic ? 33 : 50;
      for (int e = 2; e <= last; ++e) {
        double v = rng.normal(4.0, sd);
        if (dyadic) v = std::round(v * 64.0) / 64.0;
        tr.epochs.push_back(e);
        tr.values.push_back(v);
      }
      t.push_back(std::move(tr));
    }
    return t;
  };
  std::size_t exact_trials = 0, real_trials = 0;
  double worst_rel = 0.0;
  for (int trial = 0; trial < 400 && c.ok; ++trial) {
    const bool dyadic = trial % 2 == 0;
    const auto base = make(dyadic);
    double shift = rng.uniform(-100.0, 100.0);
    if (dyadic) shift = std::round(shift * 16.0) / 16.0;
    auto moved = base;
    for (auto& t : moved) {
      for (auto& v : t.values) v += shift;
    }
    const auto a = classify_regions(datamap_points(base));
    const auto b = classify_regions(datamap_points(moved));
    for (std::size_t i = 0; i < a.size(); ++i) {
      c.require(a[i].region == b[i].region, "region changed under shift " + num(shift));
      if (dyadic) {
        // Values, shift, sums and the mean are exact in binary: equality is bitwise.
        c.require(b[i].confidence == a[i].confidence + shift, "confidence not shifted exactly by " + num(shift));
        c.require(b[i].variability == a[i].variability, "variability changed under exact shift");
      } else {
        const double scale = std::max({1.0, std::abs(shift), std::abs(a[i].confidence)});
        const double err = std::max(std::abs(b[i].confidence - (a[i].confidence + shift)),
                                    std::abs(b[i].variability - a[i].variability)) / scale;
        worst_rel = std::max(worst_rel, err);
        c.require(err <= kShiftRelTol, "shift error " + num(err) + " relative");
      }
    }
    (dyadic ? exact_trials : real_trials)++;
  }
  if (c.ok) {
    c.detail = std::to_string(exact_trials) + " exactly representable shifts bit-exact; " +
               std::to_string(real_trials) + " arbitrary shifts within " + num(worst_rel) +
               " relative (rounding); regions unchanged";
  }
  return c;
}

Check ac5_oracle_closed_form() {
  Check c;
  Rng rng(505);
  double worst = 0.0;
  const auto s = tt::speech_like(32000, 16000, rng);
  const auto i0 = tt::speech_like(32000, 16000, rng);
  for (double snr : {0.0, 5.0, 10.0, 15.0}) {
    const auto inter = scaled(i0, gain_for_snr(s, i0, snr));
    const auto mix = add(s, inter);
    for (double beta : {1.0, 0.5, 0.1, 0.01}) {
      const auto est = OracleExtractor(beta).extract(mix, s, inter);
      worst = std::max(worst, std::abs(sdr_db(s, est) - (snr_db(s, inter) - 20.0 * std::log10(beta))));
    }
    c.require(isdr_db(s, mix, mix) == 0.0, "iSDR of the mixture is not exactly 0");
  }
  c.require(worst <= kOracleTolDb, "closed-form deviation " + num(worst) + " dB");
  if (c.ok) c.detail = "16 beta x SNR cells, max deviation " + num(worst) + " dB; iSDR(mixture) = 0";
  return c;
}

Check ac6_end_to_end(const fs::path& pools_json, const fs::path& work) {
  Check c;
  const fs::path dir = work / "ac6";
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "learner.json");
    f << R"({"asymptote": {"intercept": 6, "snr_slope": 0.4, "speaker_penalty": 1.5, "overlap_penalty": 2},
      "time_constant": 5, "noise_std": 0.1,
      "overrides": [{"where": {"index_range": [750, 1000]}, "noise_std": 3.0}]})";
  }
  const auto t0 = std::chrono::steady_clock::now();
  const std::string seed = std::to_string(kFrozenSeed);
  c.require(cli_run({"mix", "--pools", pools_json.string(), "--grid", (kConfigs / "grids/training.json").string(),
                     "--count", "1000", "--seed", seed, "--out", (dir / "mix").string()}) == 0, "mix failed");
  if (!c.ok) return c;
  c.require(cli_run({"simulate", "--manifest", (dir / "mix/manifest.jsonl").string(), "--learner",
                     (dir / "learner.json").string(), "--epochs", "50", "--seed", seed, "--out",
                     (dir / "sim.csv").string()}) == 0, "simulate failed");
  if (!c.ok) return c;
  c.require(cli_run({"datamap", "--log", (dir / "sim.csv").string(), "--out", (dir / "maps").string()}) == 0,
            "datamap failed");
  if (!c.ok) return c;
  const double secs = seconds_since(t0);
  const auto regions = read_region_map(dir / "maps/regions.csv");
  std::size_t noisy = 0, noisy_amb = 0;
  for (std::size_t i = 750; i < 1000; ++i) {
    ++noisy;
    noisy_amb += regions.at(example_name(i)) == Region::ambiguous;
  }
  const double share = static_cast<double>(noisy_amb) / noisy;
  c.require(share >= kAmbiguousShare, "only " + num(100 * share) + "% of the high-noise group is ambiguous");
  c.require(secs < kPipelineRuntimeSec, "pipeline took " + num(secs) + " s");
  if (c.ok) {
    c.detail = std::to_string(noisy_amb) + "/" + std::to_string(noisy) + " high-noise examples ambiguous (" +
               num(100 * share) + "%), " + num(secs) + " s";
  }
  return c;
}

Check ac7_curricula(const fs::path& work) {
  Check c;
  const std::map<std::string, std::string> table = {
      {"baseline-cl.json", "[[1,0,10,0,real], [2,0,10,0,real], [3,0,10,0,real]]"},
      {"snr.json", "[[1,5,10,0,real], [2,0,10,0,real], [3,0,5,0,real]]"},
      {"overlap-ratio.json", "[[1,0,10,0,real], [2,0,10,0.2,real], [3,0,10,0.4,real]]"},
      {"inter-source-syn.json", "[[1,0,10,0,syn], [2,0,10,0,syn], [3,0,10,0,syn]]"},
      {"inter-source-real-syn.json", "[[1,0,10,0,real/syn], [2,0,10,0,real/syn], [3,0,10,0,real/syn]]"},
      {"speaker-count.json", "[[1,0,10,0,real], [1,0,10,0,real], [1,0,10,0,real]]"},
      {"multi-factor.json", "[[1,5,10,0,real/syn], [2,0,10,0.2,real/syn], [3,0,5,0.4,real/syn]]"},
  };
  std::size_t parsed = 0;
  for (const auto& [file, row] : table) {
    const auto path = kConfigs / "curricula" / file;
    const auto raw = nlohmann::json::parse(tt::slurp(path));
    c.require(raw.at("stages").get<std::string>() == row, file + " does not carry the row verbatim");
    const auto cur = read_curriculum(path);
    c.require(validate_curriculum(cur).empty(), file + " fails validation");
    auto want = parse_stage_list(row);
    c.require(want.size() == cur.stages.size(), file + " stage count");
    for (std::size_t i = 0; i < want.size() && i < cur.stages.size(); ++i) {
      want[i].epoch_budget = cur.stages[i].epoch_budget;
      c.require(want[i] == cur.stages[i], file + " stage " + std::to_string(i) + " differs");
    }
    emit_curriculum_stages(cur, std::nullopt, 0, work / "ac7" / file);
    ++parsed;
  }
  c.require(epoch_schedule(50, 3) == std::vector<int>{17, 17, 16}, "epoch_schedule(50, 3) != (17, 17, 16)");

  Rng rng(707);
  std::vector<DatamapPoint> pts;
  for (int i = 0; i < 1000; ++i) pts.push_back({example_name(i), rng.normal(5, 3), std::abs(rng.normal()), Region::unlabeled});
  std::map<std::string, Region> map;
  for (const auto& p : classify_regions(pts)) map[p.example_id] = p.region;
  std::size_t orderings = 0;
  for (const char* f : {"eah", "eha", "aeh", "ahe", "hea", "hae"}) {
    for (const char* variant : {"cumulative", "forgetting"}) {
      auto sch = schedule_from_json(nlohmann::json::parse(tt::slurp(kConfigs / "schedules" / (std::string(f) + ".json"))));
      sch.retention = parse_retention(variant);
      const auto run = emit_region_stages(map, sch, 50, 0, work / "ac7" / (std::string(f) + "-" + variant));
      std::set<std::string> prev, uni;
      std::size_t total = 0;
      for (const auto& st : run.stages) {
        const std::set<std::string> cur(st.example_ids.begin(), st.example_ids.end());
        if (sch.retention == Retention::cumulative) {
          c.require(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()), std::string(f) + " cumulative pools not nested");
        }
        prev = cur;
        total += cur.size();
        uni.insert(cur.begin(), cur.end());
      }
      if (sch.retention == Retention::forgetting) c.require(total == uni.size(), std::string(f) + " forgetting pools overlap");
    }
    ++orderings;
  }
  const auto fgt = schedule_from_json(nlohmann::json::parse(tt::slurp(kConfigs / "schedules/eah-forgetting.json")));
  c.require(fgt.retention == Retention::forgetting && ordering_string(fgt.ordering) == "E/A/H", "forgetting config");
  if (c.ok) {
    c.detail = std::to_string(orderings) + " orderings x 2 retentions valid; " + std::to_string(parsed) +
               " curricula verbatim; epochs (17, 17, 16)";
  }
  return c;
}

Check ac8_fixed_quantity() {
  Check c;
  Rng rng(808);
  auto classified = [&](std::size_t n) {
    std::vector<DatamapPoint> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back({example_name(i), rng.normal(), std::abs(rng.normal()), Region::unlabeled});
    std::map<std::string, Region> m;
    for (const auto& p : classify_regions(pts)) m[p.example_id] = p.region;
    return m;
  };
  // 3500 points: the smallest datamap whose hard region (floor(0.2 * 2450) = 490) covers a 490 target.
  const auto big = classified(3500);
  const auto avail = count_regions(big);
  for (auto [t, r] : {std::pair{PlanTarget::easy, Region::easy}, std::pair{PlanTarget::ambiguous, Region::ambiguous},
                      std::pair{PlanTarget::hard, Region::hard}}) {
    const auto plan = fixed_quantity_plan(avail, t, 700);
    for (Region x : {Region::easy, Region::ambiguous, Region::hard}) {
      c.require(plan.counts.at(x) == (x == r ? 490u : 105u), to_string(t) + " plan is not 490/105/105");
    }
    const auto ids = select_plan_examples(plan, big, 1);
    std::map<Region, std::size_t> got;
    for (const auto& id : ids) ++got[big.at(id)];
    c.require(got == plan.counts, to_string(t) + " selection does not match plan counts");
  }
  // From the 1000-point datamap, 70% budgets exceed what each target region holds.
  const auto small = count_regions(classified(1000));
  std::size_t errors = 0;
  std::string msg;
  for (auto t : {PlanTarget::easy, PlanTarget::ambiguous, PlanTarget::hard}) {
    try {
      fixed_quantity_plan(small, t, 700);
    } catch (const Error& e) {
      ++errors;
      msg = e.what();
    }
  }
  c.require(errors == 3, "shortfall was not reported for every target");
  if (c.ok) c.detail = "490/105/105 for easy, ambiguous, hard; shortfall raised (" + msg + ")";
  return c;
}

Check ac9_determinism(const fs::path& pools_json, const fs::path& work) {
  Check c;
  auto pipeline = [&](const fs::path& d, const std::string& jobs) {
    const std::string m = (d / "mix").string();
    std::vector<std::vector<std::string>> cmds = {
        {"mix", "--pools", pools_json.string(), "--grid", (kConfigs / "grids/training.json").string(), "--count", "120",
         "--seed", "9", "--out", m, "--jobs", jobs},
        {"simulate", "--manifest", m + "/manifest.jsonl", "--learner", (kConfigs / "learner.json").string(), "--epochs",
         "30", "--seed", "9", "--out", (d / "sim.csv").string(), "--jobs", jobs},
        {"datamap", "--log", (d / "sim.csv").string(), "--out", (d / "maps").string()},
        {"plot", "--datamap", (d / "maps/datamap.csv").string(), "--out", (d / "plot/map.svg").string()},
        {"plan", "--regions", (d / "maps/regions.csv").string(), "--target", "all", "--seed", "9", "--out",
         (d / "plan.json").string()},
        {"schedule", "--regions", (d / "maps/regions.csv").string(), "--order", "E/A/H", "--plan",
         (d / "plan.json").string(), "--seed", "9", "--out", (d / "sched").string()},
        {"schedule", "--curriculum", (kConfigs / "curricula/multi-factor.json").string(), "--manifest",
         m + "/manifest.jsonl", "--seed", "9", "--out", (d / "cur").string()},
        {"oracle", "--manifest", m + "/manifest.jsonl", "--beta", "0.3", "--out", (d / "est").string()},
        {"eval", "--manifest", m + "/manifest.jsonl", "--estimates", (d / "est").string(), "--out",
         (d / "eval.csv").string()},
    };
    for (auto& cmd : cmds) {
      const std::string name = cmd[0];
      if (cli_run(cmd) != 0) return name;
    }
    return std::string();
  };
  std::vector<std::map<std::string, std::string>> trees;
  for (const auto& [tag, jobs] : std::vector<std::pair<std::string, std::string>>{{"a", "1"}, {"b", "1"}, {"c", "4"}}) {
    const auto failed = pipeline(work / "ac9" / tag, jobs);
    c.require(failed.empty(), "command failed: " + failed);
    if (!c.ok) return c;
    trees.push_back(tt::snapshot_tree(work / "ac9" / tag));
  }
  c.require(trees[0] == trees[1], "rerun with the same seed differs");
  c.require(trees[0] == trees[2], "output depends on --jobs");
  if (c.ok) c.detail = std::to_string(trees[0].size()) + " files byte-identical across reruns and --jobs 1/4";
  return c;
}

}  // namespace

int main() {
  tt::TempDir work("tsemap-acceptance");
  tt::PoolFixtureConfig cfg;
  cfg.rate = 16000;
  cfg.target_speakers = 20;
  cfg.real_speakers = 20;
  cfg.syn_speakers = 20;
  cfg.min_seconds = 0.8;
  cfg.max_seconds = 2.5;
  const fs::path pools = tt::write_pool_fixture(work / "pools", cfg);

  struct Criterion {
    const char* id;
    const char* name;
    std::function<Check()> run;
  };
  const std::vector<Criterion> criteria = {
      {"AC1", "mixture fidelity", [&] { return ac1_mixture_fidelity(pools, work.path()); }},
      {"AC2", "datamap oracle equivalence", [] { return ac2_datamap_oracle(); }},
      {"AC3", "region-rule semantics", [] { return ac3_region_semantics(); }},
      {"AC4", "shift invariance", [] { return ac4_shift_invariance(); }},
      {"AC5", "oracle metric closed form", [] { return ac5_oracle_closed_form(); }},
      {"AC6", "end-to-end pipeline", [&] { return ac6_end_to_end(pools, work.path()); }},
      {"AC7", "curriculum semantics", [&] { return ac7_curricula(work.path()); }},
      {"AC8", "fixed-quantity plans", [] { return ac8_fixed_quantity(); }},
      {"AC9", "determinism", [&] { return ac9_determinism(pools, work.path()); }},
  };
  int failures = 0;
  for (const auto& cr : criteria) {
    Check r;
    try {
      r = cr.run();
    } catch (const std::exception& e) {
      r.ok = false;
      r.detail = std::string("exception: ") + e.what();
    }
    failures += !r.ok;
    std::cout << cr.id << ' ' << (r.ok ? "PASS" : "FAIL") << "  " << cr.name << ": " << r.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
