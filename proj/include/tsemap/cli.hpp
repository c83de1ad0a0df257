#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsemap/dynamics.hpp"
#include "tsemap/error.hpp"
#include "tsemap/harness.hpp"
#include "tsemap/metrics.hpp"
#include "tsemap/mixgen.hpp"
#include "tsemap/scheduler.hpp"
#include "tsemap/wav.hpp"

namespace tsemap::cli {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

inline unsigned default_jobs() {
  if (const char* env = std::getenv("TSEMAP_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

inline void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) io_fail(std::string(what) + " not found: " + p.string());
}

inline void require_dir(const fs::path& p, const char* what) {
  if (!fs::is_directory(p)) io_fail(std::string(what) + " not found: " + p.string());
}

inline nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) io_fail("cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(p.string() + ": " + e.what());
  }
}

inline void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) ensure_dir(file.parent_path());
}

struct Options {
  // shared
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned jobs = default_jobs();
  bool verbose = false;
  // mix
  std::string pools, grid, encoding = "float32";
  std::size_t count = 0;
  // simulate / eval / oracle
  std::string manifest, learner, estimates;
  int epochs = 50;
  double beta = 0.1;
  // datamap / plot
  std::string log, rule, datamap;
  bool keep_first_epoch = false, raw_loss = false;
  // schedule / plan
  std::string regions, order, retention = "cumulative", include_unlabeled = "never",
                       weighting = "uniform", schedule_file, curriculum, plan_file, target;
  double budget_fraction = 0.7;
  std::optional<std::size_t> budget;
};

inline void log_if(const Options& o, const std::string& msg) {
  if (o.verbose) std::cerr << msg << '\n';
}

inline void cmd_mix(const Options& o) {
  require_file(o.pools, "pool index");
  require_file(o.grid, "grid config");
  const PoolSet pools = read_pool_index(o.pools);
  const FactorGrid grid = grid_from_json(read_json(o.grid));
  BuildOptions bo;
  bo.jobs = o.jobs;
  bo.encoding = parse_wav_encoding(o.encoding);
  const auto recs = build_manifest(pools, grid, o.count, *o.seed, o.out, bo);
  if (o.count == 0) {
    // No audio is written for an empty build; the manifest exists but is empty.
    ensure_dir(o.out);
    write_manifest(fs::path(o.out) / "manifest.jsonl", recs);
  }
  log_if(o, "mix: wrote " + std::to_string(recs.size()) + " mixtures to " + o.out);
}

inline void cmd_simulate(const Options& o) {
  require_file(o.manifest, "manifest");
  require_file(o.learner, "learner config");
  const auto recs = read_manifest(o.manifest);
  const LearnerParams params = read_learner(o.learner);
  const auto traj = simulate_trajectories(recs, params, o.epochs, *o.seed, o.jobs);
  ensure_parent(o.out);
  write_metric_log(o.out, traj);
  log_if(o, "simulate: " + std::to_string(traj.size()) + " trajectories x " + std::to_string(o.epochs) + " epochs");
}

inline void cmd_datamap(const Options& o) {
  require_file(o.log, "metric log");
  if (!o.rule.empty()) require_file(o.rule, "region rule");
  const RegionRule rule = o.rule.empty() ? RegionRule{} : rule_from_json(read_json(o.rule));
  IngestOptions io;
  io.discard_first_epoch = !o.keep_first_epoch;
  io.negate_loss = !o.raw_loss;
  const auto traj = ingest_metric_log(fs::path(o.log), io);
  const auto points = classify_regions(datamap_points(traj), rule);
  const fs::path dir = o.out;
  ensure_dir(dir);
  render_datamap_svg(points, dir / "datamap.svg");
  write_region_map(dir / "regions.csv", points);
  const auto c = region_counts(points.size(), rule);
  log_if(o, "datamap: " + std::to_string(points.size()) + " examples: ambiguous " + std::to_string(c.ambiguous) +
                ", easy " + std::to_string(c.easy) + ", hard " + std::to_string(c.hard) + ", unlabeled " +
                std::to_string(c.unlabeled));
}

inline void cmd_plot(const Options& o) {
  require_file(o.datamap, "datamap csv");
  const auto points = read_datamap_csv(o.datamap);
  ensure_parent(o.out);
  fs::path svg = o.out;
  fs::path csv = svg;
  csv.replace_extension(".csv");
  if (fs::exists(csv) && fs::equivalent(csv, o.datamap)) {
    fail("plot: output would overwrite the input datamap " + o.datamap);
  }
  render_datamap_svg(points, svg);
}

inline void cmd_schedule(const Options& o) {
  const std::uint64_t seed = o.seed.value_or(0);
  if (!o.curriculum.empty()) {
    require_file(o.curriculum, "curriculum config");
    if (!o.manifest.empty()) require_file(o.manifest, "manifest");
    const Curriculum c = read_curriculum(o.curriculum);
    std::optional<std::vector<MixtureRecord>> pool;
    if (!o.manifest.empty()) pool = read_manifest(o.manifest);
    emit_curriculum_stages(c, pool, seed, o.out);
    log_if(o, "schedule: curriculum '" + c.name + "' with " + std::to_string(c.stages.size()) + " stages");
    return;
  }
  if (o.regions.empty()) fail("schedule: give --curriculum or --regions");
  require_file(o.regions, "region map");
  if (!o.schedule_file.empty()) require_file(o.schedule_file, "schedule config");
  if (!o.plan_file.empty()) require_file(o.plan_file, "plan");
  if (!o.rule.empty()) require_file(o.rule, "region rule");
  RegionSchedule sch;
  if (!o.schedule_file.empty()) {
    sch = schedule_from_json(read_json(o.schedule_file));
  } else {
    if (o.order.empty()) fail("schedule: --order or --schedule is required with --regions");
    sch.ordering = parse_ordering(o.order);
    sch.retention = parse_retention(o.retention);
    sch.include_unlabeled = parse_unlabeled_policy(o.include_unlabeled);
    sch.weighting = parse_weighting(o.weighting);
  }
  const auto region_map = read_region_map(o.regions);
  std::optional<std::vector<std::string>> selection;
  if (!o.plan_file.empty()) {
    const auto pj = read_json(o.plan_file);
    try {
      selection = pj.at("examples").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      fail(o.plan_file + ": " + e.what());
    }
  }
  std::optional<RegionRule> rule;
  if (!o.rule.empty()) rule = rule_from_json(read_json(o.rule));
  emit_region_stages(region_map, sch, o.epochs, seed, o.out, selection, rule);
  log_if(o, "schedule: " + ordering_string(sch.ordering) + " " + to_string(sch.retention));
}

inline void cmd_plan(const Options& o) {
  require_file(o.regions, "region map");
  const auto region_map = read_region_map(o.regions);
  const PlanTarget target = parse_plan_target(o.target);
  std::size_t budget = 0;
  if (o.budget) {
    budget = *o.budget;
  } else {
    if (!(o.budget_fraction >= 0.0 && o.budget_fraction <= 1.0)) fail("plan: --budget-fraction must lie in [0, 1]");
    budget = static_cast<std::size_t>(std::floor(o.budget_fraction * static_cast<double>(region_map.size()) + 1e-9));
  }
  const SamplingPlan plan = fixed_quantity_plan(count_regions(region_map), target, budget);
  const auto examples = select_plan_examples(plan, region_map, *o.seed);
  nlohmann::ordered_json j;
  j["target"] = to_string(plan.target);
  j["budget"] = plan.budget;
  j["seed"] = *o.seed;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (const auto& [r, c] : plan.counts) counts[to_string(r)] = c;
  if (plan.uniform > 0) counts["all"] = plan.uniform;
  j["counts"] = counts;
  j["examples"] = examples;
  ensure_parent(o.out);
  std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
  if (!out) io_fail("cannot write " + o.out);
  out << j.dump(2) << '\n';
  log_if(o, "plan: " + std::to_string(examples.size()) + " examples for target " + o.target);
}

inline void cmd_eval(const Options& o) {
  require_file(o.manifest, "manifest");
  require_dir(o.estimates, "estimates directory");
  const auto recs = read_manifest(o.manifest);
  ensure_parent(o.out);
  std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
  if (!out) io_fail("cannot write " + o.out);
  out << "example_id,sdr_db,input_sdr_db,isdr_db\n";
  for (const auto& r : recs) {
    const AudioBuffer ref = read_wav(resolve_manifest_path(o.manifest, r.target_path));
    const AudioBuffer mix = read_wav(resolve_manifest_path(o.manifest, r.mixture_path));
    const fs::path est_path = fs::path(o.estimates) / (r.example_id + ".wav");
    require_file(est_path, "estimate");
    const AudioBuffer est = read_wav(est_path);
    const EvalResult e = evaluate(r.example_id, ref, mix, est);
    out << e.example_id << ',' << format_number(e.sdr_db) << ',' << format_number(e.input_sdr_db) << ','
        << format_number(e.isdr_db) << '\n';
  }
  if (!out) io_fail("write failed: " + o.out);
  log_if(o, "eval: " + std::to_string(recs.size()) + " examples");
}

inline void cmd_oracle(const Options& o) {
  require_file(o.manifest, "manifest");
  const OracleExtractor ex(o.beta);
  const auto recs = read_manifest(o.manifest);
  ensure_dir(o.out);
  for (const auto& r : recs) {
    const AudioBuffer tgt = read_wav(resolve_manifest_path(o.manifest, r.target_path));
    const AudioBuffer mix = read_wav(resolve_manifest_path(o.manifest, r.mixture_path));
    const AudioBuffer est = ex.extract(mix, tgt, subtract(mix, tgt));
    write_wav(fs::path(o.out) / (r.example_id + ".wav"), est, WavEncoding::float32);
  }
  log_if(o, "oracle: " + std::to_string(recs.size()) + " estimates at beta " + format_number(o.beta));
}

/// Runs one subcommand. `args` excludes the program name. Diagnostics go
/// to `err`; machine output only to files.
inline int run(std::vector<std::string> args, std::ostream& err = std::cerr) {
  CLI::App app{
      "tsemap: speech mixture synthesis, training-dynamics datamaps and curriculum schedules.\n"
      "Note: SDR in `eval` is the energy-ratio SDR, 10 log10(|s|^2 / |s - s_hat|^2),\n"
      "the negated SNR loss; it is NOT the projection-based BSS-eval SDR."};
  app.require_subcommand(1);
  Options o;
  app.add_flag("-v,--verbose", o.verbose, "Progress messages on stderr");

  auto* mix = app.add_subcommand("mix", "Generate mixtures and a manifest");
  mix->add_option("--pools", o.pools, "Pool index JSON {target, real, syn}")->required();
  mix->add_option("--grid", o.grid, "Factor grid JSON")->required();
  mix->add_option("--count", o.count, "Number of mixtures")->required();
  mix->add_option("--seed", o.seed, "Master seed")->required();
  mix->add_option("--out", o.out, "Output directory")->required();
  mix->add_option("--jobs", o.jobs, "Worker threads (default $TSEMAP_JOBS or 1)")->check(CLI::PositiveNumber);
  mix->add_option("--encoding", o.encoding, "float32 or pcm16")->check(CLI::IsMember({"float32", "pcm16"}));

  auto* sim = app.add_subcommand("simulate", "Simulated per-epoch ΔSNR metric log");
  sim->add_option("--manifest", o.manifest)->required();
  sim->add_option("--learner", o.learner, "Learner config JSON")->required();
  sim->add_option("--epochs", o.epochs, "Epochs (>= 3)");
  sim->add_option("--seed", o.seed)->required();
  sim->add_option("--out", o.out, "Output CSV")->required();
  sim->add_option("--jobs", o.jobs)->check(CLI::PositiveNumber);

  auto* dm = app.add_subcommand("datamap", "Confidence/variability map with regions");
  dm->add_option("--log", o.log, "Metric log CSV")->required();
  dm->add_option("--rule", o.rule, "Region rule JSON");
  dm->add_option("--out", o.out, "Output directory")->required();
  dm->add_flag("--keep-first-epoch", o.keep_first_epoch, "Do not discard epoch 1");
  dm->add_flag("--raw-loss", o.raw_loss, "Keep snr_loss values unnegated");

  auto* plot = app.add_subcommand("plot", "Render an SVG from datamap.csv");
  plot->add_option("--datamap", o.datamap)->required();
  plot->add_option("--out", o.out, "Output SVG")->required();

  auto* sch = app.add_subcommand("schedule", "Emit per-stage manifests");
  sch->add_option("--regions", o.regions, "Region map CSV");
  sch->add_option("--order", o.order, "Region ordering, e.g. E/A/H");
  sch->add_option("--retention", o.retention)->check(CLI::IsMember({"cumulative", "forgetting"}));
  sch->add_option("--include-unlabeled", o.include_unlabeled)
      ->check(CLI::IsMember({"never", "final_stage", "always"}));
  sch->add_option("--weighting", o.weighting)->check(CLI::IsMember({"uniform", "region_balanced"}));
  sch->add_option("--schedule", o.schedule_file, "Region schedule JSON");
  sch->add_option("--epochs", o.epochs, "Total epochs");
  sch->add_option("--plan", o.plan_file, "Restrict to a fixed-quantity plan");
  sch->add_option("--rule", o.rule, "Region rule recorded in run.json");
  sch->add_option("--curriculum", o.curriculum, "Factor curriculum JSON");
  sch->add_option("--manifest", o.manifest, "Pool manifest for factor curricula");
  sch->add_option("--seed", o.seed);
  sch->add_option("--out", o.out, "Output directory")->required();

  auto* plan = app.add_subcommand("plan", "Fixed-quantity region sampling plan");
  plan->add_option("--regions", o.regions)->required();
  plan->add_option("--target", o.target, "easy, ambiguous, hard or all")->required();
  plan->add_option("--budget-fraction", o.budget_fraction);
  plan->add_option("--budget", o.budget, "Absolute budget (overrides the fraction)");
  plan->add_option("--seed", o.seed)->required();
  plan->add_option("--out", o.out, "Output JSON")->required();

  auto* ev = app.add_subcommand("eval", "Energy-ratio SDR / iSDR of estimates");
  ev->add_option("--manifest", o.manifest)->required();
  ev->add_option("--estimates", o.estimates, "Directory of <example_id>.wav")->required();
  ev->add_option("--out", o.out, "Output CSV")->required();

  auto* orc = app.add_subcommand("oracle", "Write oracle-extractor estimates");
  orc->add_option("--manifest", o.manifest)->required();
  orc->add_option("--beta", o.beta, "Residual interference factor in [0, 1]");
  orc->add_option("--out", o.out, "Output directory")->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    err << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (*mix) cmd_mix(o);
    else if (*sim) cmd_simulate(o);
    else if (*dm) cmd_datamap(o);
    else if (*plot) cmd_plot(o);
    else if (*sch) cmd_schedule(o);
    else if (*plan) cmd_plan(o);
    else if (*ev) cmd_eval(o);
    else if (*orc) cmd_oracle(o);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::io ? kExitIo : kExitValidation;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}

inline int run(int argc, char** argv) {
  return run(std::vector<std::string>(argv + 1, argv + argc));
}

}  // namespace tsemap::cli
