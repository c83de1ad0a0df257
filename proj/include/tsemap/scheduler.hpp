#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsemap/csv.hpp"
#include "tsemap/dynamics.hpp"
#include "tsemap/error.hpp"
#include "tsemap/mixgen.hpp"
#include "tsemap/rng.hpp"

namespace tsemap {

// ---------------------------------------------------------------------------
// Factor curricula

/// One stage, in the `[num_speakers, snr_low, snr_high, overlap_ratio,
/// inter_source]` vocabulary plus an epoch budget (0 = unassigned).
struct StageSpec {
  int num_speakers = 1;
  double snr_low = 0.0;
  double snr_high = 0.0;
  double overlap_ratio = 0.0;
  InterSource inter_source = InterSource::real;
  int epoch_budget = 0;

  friend bool operator==(const StageSpec&, const StageSpec&) = default;
};

struct Curriculum {
  std::string name;
  std::vector<StageSpec> stages;
};

struct Violation {
  int stage = -1;  // -1: curriculum-level
  std::string field;
  std::string message;
};

inline std::vector<Violation> validate_curriculum(const Curriculum& c) {
  std::vector<Violation> v;
  if (c.stages.empty()) {
    v.push_back({-1, "stages", "no stages"});
    return v;
  }
  for (std::size_t i = 0; i < c.stages.size(); ++i) {
    const auto& s = c.stages[i];
    const int k = static_cast<int>(i);
    if (s.num_speakers < 1) v.push_back({k, "num_speakers", "must be >= 1"});
    if (!std::isfinite(s.snr_low)) v.push_back({k, "snr_low", "must be finite"});
    if (!std::isfinite(s.snr_high)) v.push_back({k, "snr_high", "must be finite"});
    if (s.snr_low > s.snr_high) v.push_back({k, "snr_low", "snr_low exceeds snr_high"});
    if (!(s.overlap_ratio >= 0.0 && s.overlap_ratio <= 1.0)) {
      v.push_back({k, "overlap_ratio", "must lie in [0, 1]"});
    }
    if (s.epoch_budget < 1) v.push_back({k, "epoch_budget", "must be >= 1"});
  }
  return v;
}

inline std::string format_violation(const Violation& v) {
  return (v.stage < 0 ? std::string("curriculum") : "stage " + std::to_string(v.stage)) + ": " +
         v.field + ": " + v.message;
}

/// Budgets that differ by at most one and sum to `total_epochs`; earlier
/// stages take the remainder.
inline std::vector<int> epoch_schedule(int total_epochs, int num_stages) {
  if (num_stages < 1) fail("epoch_schedule: need at least one stage");
  if (total_epochs < num_stages) {
    fail("epoch_schedule: " + std::to_string(total_epochs) + " epochs cannot cover " +
         std::to_string(num_stages) + " stages");
  }
  std::vector<int> out(static_cast<std::size_t>(num_stages), total_epochs / num_stages);
  for (int i = 0; i < total_epochs % num_stages; ++i) ++out[static_cast<std::size_t>(i)];
  return out;
}

namespace curriculum_detail {

/// Tokens of the compact bracket syntax, e.g. `[[1,0,10,0,real], ...]`.
inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> toks;
  std::string atom;
  auto flush = [&] {
    if (!atom.empty()) toks.push_back(atom);
    atom.clear();
  };
  for (char ch : text) {
    if (ch == '[' || ch == ']' || ch == ',') {
      flush();
      toks.emplace_back(1, ch);
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      atom += ch;
    }
  }
  flush();
  return toks;
}

inline StageSpec stage_from_atoms(const std::vector<std::string>& a, std::size_t index) {
  const std::string where = "stage " + std::to_string(index);
  if (a.size() != 5 && a.size() != 6) {
    fail(where + ": expected [num_speakers, snr_low, snr_high, overlap_ratio, inter_source"
                 "(, epoch_budget)]");
  }
  StageSpec s;
  s.num_speakers = static_cast<int>(parse_int(a[0], where + " num_speakers"));
  s.snr_low = parse_double(a[1], where + " snr_low");
  s.snr_high = parse_double(a[2], where + " snr_high");
  s.overlap_ratio = parse_double(a[3], where + " overlap_ratio");
  std::string src = a[4];
  if (src.size() >= 2 && src.front() == '"' && src.back() == '"') src = src.substr(1, src.size() - 2);
  s.inter_source = parse_inter_source(src);
  if (a.size() == 6) s.epoch_budget = static_cast<int>(parse_int(a[5], where + " epoch_budget"));
  return s;
}

}  // namespace curriculum_detail

/// Parses the compact stage-list syntax: `[[1,5,10,0,real/syn], [2,0,10,0.2,real/syn]]`.
inline std::vector<StageSpec> parse_stage_list(const std::string& text) {
  using namespace curriculum_detail;
  const auto toks = tokenize(text);
  std::size_t i = 0;
  auto expect = [&](const char* t) {
    if (i >= toks.size() || toks[i] != t) {
      fail(std::string("stage list: expected '") + t + "' at token " + std::to_string(i));
    }
    ++i;
  };
  std::vector<StageSpec> stages;
  expect("[");
  while (i < toks.size() && toks[i] == "[") {
    ++i;
    std::vector<std::string> atoms;
    while (i < toks.size() && toks[i] != "]") {
      if (toks[i] == "[") fail("stage list: nested brackets inside a stage");
      if (toks[i] != ",") atoms.push_back(toks[i]);
      ++i;
    }
    expect("]");
    stages.push_back(stage_from_atoms(atoms, stages.size()));
    if (i < toks.size() && toks[i] == ",") ++i;
  }
  expect("]");
  if (i != toks.size()) fail("stage list: trailing tokens");
  return stages;
}

/// Curriculum config. `stages` is either the compact string syntax or a
/// JSON array of objects {num_speakers, snr_low, snr_high, overlap_ratio,
/// inter_source[, epoch_budget]}. Unassigned budgets are filled from
/// `total_epochs` (default 50) split evenly across stages.
inline Curriculum curriculum_from_json(const nlohmann::json& j) {
  Curriculum c;
  try {
    c.name = j.value("name", std::string("curriculum"));
    const auto& st = j.at("stages");
    if (st.is_string()) {
      c.stages = parse_stage_list(st.get<std::string>());
    } else {
      for (const auto& o : st) {
        StageSpec s;
        if (o.is_array()) {
          std::vector<std::string> atoms;
          for (const auto& a : o) atoms.push_back(a.is_string() ? a.get<std::string>() : a.dump());
          s = curriculum_detail::stage_from_atoms(atoms, c.stages.size());
        } else {
          s.num_speakers = o.at("num_speakers").get<int>();
          s.snr_low = o.at("snr_low").get<double>();
          s.snr_high = o.at("snr_high").get<double>();
          s.overlap_ratio = o.at("overlap_ratio").get<double>();
          s.inter_source = parse_inter_source(o.at("inter_source").get<std::string>());
          s.epoch_budget = o.value("epoch_budget", 0);
        }
        c.stages.push_back(s);
      }
    }
    const int total = j.value("total_epochs", 50);
    const bool any_unset = std::any_of(c.stages.begin(), c.stages.end(),
                                       [](const StageSpec& s) { return s.epoch_budget == 0; });
    if (any_unset && !c.stages.empty() && total >= static_cast<int>(c.stages.size())) {
      const auto budgets = epoch_schedule(total, static_cast<int>(c.stages.size()));
      for (std::size_t i = 0; i < c.stages.size(); ++i) {
        if (c.stages[i].epoch_budget == 0) c.stages[i].epoch_budget = budgets[i];
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("curriculum: ") + e.what());
  }
  return c;
}

inline Curriculum read_curriculum(const fs::path& path) {
  std::ifstream in(path);
  if (!in) io_fail("cannot open curriculum " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(path.string() + ": " + e.what());
  }
  return curriculum_from_json(j);
}

inline nlohmann::ordered_json stage_to_json(const StageSpec& s) {
  return {{"num_speakers", s.num_speakers},   {"snr_low", s.snr_low},
          {"snr_high", s.snr_high},           {"overlap_ratio", s.overlap_ratio},
          {"inter_source", to_string(s.inter_source)}, {"epoch_budget", s.epoch_budget}};
}

/// The mixing grid that realizes one stage.
inline FactorGrid stage_grid(const StageSpec& s) {
  FactorGrid g;
  g.snr_range = std::make_pair(s.snr_low, s.snr_high);
  g.overlap_choices = {s.overlap_ratio};
  g.speaker_counts = {s.num_speakers};
  g.source_types = {s.inter_source};
  return g;
}

inline bool stage_matches(const StageSpec& s, const MixtureSpec& m) {
  constexpr double eps = 1e-9;
  return m.num_interferers == s.num_speakers && m.snr_db >= s.snr_low - eps &&
         m.snr_db <= s.snr_high + eps && std::abs(m.overlap_ratio - s.overlap_ratio) < eps &&
         m.inter_source == s.inter_source;
}

// ---------------------------------------------------------------------------
// Region curricula

enum class Retention { cumulative, forgetting };
enum class UnlabeledPolicy { never, final_stage, always };
/// How a cumulative stage samples its union: uniformly per example, or with
/// per-example weights that give each region in the stage equal mass.
enum class Weighting { uniform, region_balanced };

struct RegionSchedule {
  std::array<Region, 3> ordering{Region::easy, Region::ambiguous, Region::hard};
  Retention retention = Retention::cumulative;
  UnlabeledPolicy include_unlabeled = UnlabeledPolicy::never;
  Weighting weighting = Weighting::uniform;
};

inline char region_letter(Region r) {
  switch (r) {
    case Region::easy: return 'E';
    case Region::ambiguous: return 'A';
    case Region::hard: return 'H';
    default: return '?';
  }
}

inline std::string ordering_string(const std::array<Region, 3>& o) {
  return std::string{region_letter(o[0]), '/', region_letter(o[1]), '/', region_letter(o[2])};
}

/// "E/A/H", "H/E/A", ...; each of E, A, H exactly once.
inline std::array<Region, 3> parse_ordering(const std::string& s) {
  std::vector<Region> out;
  for (char ch : s) {
    if (ch == '/' || ch == ' ') continue;
    switch (ch) {
      case 'E': case 'e': out.push_back(Region::easy); break;
      case 'A': case 'a': out.push_back(Region::ambiguous); break;
      case 'H': case 'h': out.push_back(Region::hard); break;
      default: fail("ordering: unknown region letter '" + std::string(1, ch) + "' in " + s);
    }
  }
  if (out.size() != 3) fail("ordering must name three regions: " + s);
  std::set<Region> uniq(out.begin(), out.end());
  if (uniq.size() != 3) fail("ordering is not a permutation of E, A, H: " + s);
  return {out[0], out[1], out[2]};
}

inline std::string to_string(Retention r) { return r == Retention::cumulative ? "cumulative" : "forgetting"; }

inline Retention parse_retention(const std::string& s) {
  if (s == "cumulative") return Retention::cumulative;
  if (s == "forgetting") return Retention::forgetting;
  fail("retention must be cumulative or forgetting: " + s);
}

inline std::string to_string(UnlabeledPolicy p) {
  switch (p) {
    case UnlabeledPolicy::never: return "never";
    case UnlabeledPolicy::final_stage: return "final_stage";
    case UnlabeledPolicy::always: return "always";
  }
  return "?";
}

inline UnlabeledPolicy parse_unlabeled_policy(const std::string& s) {
  if (s == "never") return UnlabeledPolicy::never;
  if (s == "final_stage") return UnlabeledPolicy::final_stage;
  if (s == "always") return UnlabeledPolicy::always;
  fail("include_unlabeled must be never, final_stage or always: " + s);
}

inline std::string to_string(Weighting w) { return w == Weighting::uniform ? "uniform" : "region_balanced"; }

inline Weighting parse_weighting(const std::string& s) {
  if (s == "uniform") return Weighting::uniform;
  if (s == "region_balanced") return Weighting::region_balanced;
  fail("weighting must be uniform or region_balanced: " + s);
}

inline RegionSchedule schedule_from_json(const nlohmann::json& j) {
  RegionSchedule s;
  try {
    s.ordering = parse_ordering(j.at("ordering").get<std::string>());
    s.retention = parse_retention(j.value("retention", std::string("cumulative")));
    s.include_unlabeled = parse_unlabeled_policy(j.value("include_unlabeled", std::string("never")));
    s.weighting = parse_weighting(j.value("weighting", std::string("uniform")));
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("region schedule: ") + e.what());
  }
  return s;
}

/// The regions a stage draws from under the schedule's retention policy.
inline std::vector<Region> stage_regions(const RegionSchedule& sch, std::size_t stage_index) {
  if (stage_index >= 3) fail("stage index " + std::to_string(stage_index) + " out of range (3 stages)");
  std::vector<Region> regions;
  if (sch.retention == Retention::forgetting) {
    regions.push_back(sch.ordering[stage_index]);
  } else {
    regions.assign(sch.ordering.begin(), sch.ordering.begin() + static_cast<std::ptrdiff_t>(stage_index) + 1);
  }
  if (sch.include_unlabeled == UnlabeledPolicy::always ||
      (sch.include_unlabeled == UnlabeledPolicy::final_stage && stage_index == 2)) {
    regions.push_back(Region::unlabeled);
  }
  return regions;
}

/// Example ids (sorted) available to one stage.
inline std::vector<std::string> stage_pool(const RegionSchedule& sch, std::size_t stage_index,
                                           const std::map<std::string, Region>& region_map) {
  const auto regions = stage_regions(sch, stage_index);
  std::vector<std::string> out;
  for (const auto& [id, r] : region_map) {
    if (std::find(regions.begin(), regions.end(), r) != regions.end()) out.push_back(id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fixed-quantity plans

enum class PlanTarget { easy, ambiguous, hard, all };

inline std::string to_string(PlanTarget t) {
  switch (t) {
    case PlanTarget::easy: return "easy";
    case PlanTarget::ambiguous: return "ambiguous";
    case PlanTarget::hard: return "hard";
    case PlanTarget::all: return "all";
  }
  return "?";
}

inline PlanTarget parse_plan_target(const std::string& s) {
  if (s == "easy") return PlanTarget::easy;
  if (s == "ambiguous") return PlanTarget::ambiguous;
  if (s == "hard") return PlanTarget::hard;
  if (s == "all") return PlanTarget::all;
  fail("plan target must be easy, ambiguous, hard or all: " + s);
}

struct SamplingPlan {
  PlanTarget target = PlanTarget::all;
  std::size_t budget = 0;
  std::map<Region, std::size_t> counts;  // empty for target `all`
  std::size_t uniform = 0;               // draws over the whole set (target `all`)

  std::size_t total() const {
    std::size_t t = uniform;
    for (const auto& [_, c] : counts) t += c;
    return t;
  }
};

/// 70% of the budget to the target region, 15% to each other labeled
/// region (floors; the remainder goes to the target). Target `all` draws
/// the whole budget uniformly. A region without enough examples is an
/// error; proportions are never rebalanced.
inline SamplingPlan fixed_quantity_plan(const std::map<Region, std::size_t>& available,
                                        PlanTarget target, std::size_t budget) {
  SamplingPlan plan;
  plan.target = target;
  plan.budget = budget;
  if (budget == 0) return plan;
  auto have = [&](Region r) {
    const auto it = available.find(r);
    return it == available.end() ? std::size_t{0} : it->second;
  };
  if (target == PlanTarget::all) {
    std::size_t total = 0;
    for (const auto& [_, c] : available) total += c;
    if (budget > total) {
      fail("region shortfall: all needs " + std::to_string(budget) + ", has " +
           std::to_string(total) + " (deficit " + std::to_string(budget - total) + ")");
    }
    plan.uniform = budget;
    return plan;
  }
  const Region tgt = target == PlanTarget::easy        ? Region::easy
                     : target == PlanTarget::ambiguous ? Region::ambiguous
                                                       : Region::hard;
  const std::size_t side = budget * 15 / 100;
  const std::size_t main = budget * 70 / 100;
  for (Region r : {Region::easy, Region::ambiguous, Region::hard}) plan.counts[r] = side;
  plan.counts[tgt] = main + (budget - main - 2 * side);
  for (const auto& [r, need] : plan.counts) {
    if (need > have(r)) {
      fail("region shortfall: " + to_string(r) + " needs " + std::to_string(need) + ", has " +
           std::to_string(have(r)) + " (deficit " + std::to_string(need - have(r)) + ")");
    }
  }
  return plan;
}

inline std::map<Region, std::size_t> count_regions(const std::map<std::string, Region>& region_map) {
  std::map<Region, std::size_t> out;
  for (const auto& [_, r] : region_map) ++out[r];
  return out;
}

/// Picks concrete examples for a plan: a seeded shuffle of each region's
/// sorted ids, truncated to the plan count. Returned ids are sorted.
inline std::vector<std::string> select_plan_examples(const SamplingPlan& plan,
                                                     const std::map<std::string, Region>& region_map,
                                                     std::uint64_t seed) {
  std::vector<std::string> out;
  auto draw = [&](std::vector<std::string> ids, std::size_t k, const std::string& tag) {
    Rng rng(derive_seed(seed, "plan/" + tag));
    rng.shuffle(ids);
    out.insert(out.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k));
  };
  if (plan.uniform > 0) {
    std::vector<std::string> ids;
    for (const auto& [id, _] : region_map) ids.push_back(id);
    if (ids.size() < plan.uniform) fail("plan exceeds the region map");
    draw(std::move(ids), plan.uniform, "all");
  }
  for (const auto& [r, k] : plan.counts) {
    std::vector<std::string> ids;
    for (const auto& [id, rr] : region_map) {
      if (rr == r) ids.push_back(id);
    }
    if (ids.size() < k) fail("region shortfall: " + to_string(r));
    draw(std::move(ids), k, to_string(r));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Stage manifests

/// One stage of a run: header lines start with '#', then one example id
/// per line (optionally `id<TAB>weight`).
struct StageManifest {
  std::size_t index = 0;
  int epochs = 0;
  std::vector<Region> regions;        // region curricula
  std::optional<StageSpec> filter;    // factor curricula
  std::vector<std::string> example_ids;
  std::vector<double> weights;        // empty unless region_balanced
};

inline void write_stage_manifest(const fs::path& path, const StageManifest& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) io_fail("cannot write " + path.string());
  out << "# tsemap stage manifest\n# stage: " << m.index << "\n# epochs: " << m.epochs << '\n';
  if (!m.regions.empty()) {
    out << "# regions:";
    for (Region r : m.regions) out << ' ' << to_string(r);
    out << '\n';
  }
  if (m.filter) out << "# filter: " << stage_to_json(*m.filter).dump() << '\n';
  for (std::size_t i = 0; i < m.example_ids.size(); ++i) {
    out << m.example_ids[i];
    if (!m.weights.empty()) out << '\t' << format_number(m.weights[i]);
    out << '\n';
  }
  if (!out) io_fail("write failed: " + path.string());
}

inline StageManifest read_stage_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) io_fail("cannot open stage manifest " + path.string());
  StageManifest m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto value = [&](const std::string& key) -> std::optional<std::string> {
        const std::string prefix = "# " + key + ": ";
        if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
        return std::nullopt;
      };
      if (auto v = value("stage")) m.index = static_cast<std::size_t>(parse_int(*v, "stage"));
      if (auto v = value("epochs")) m.epochs = static_cast<int>(parse_int(*v, "epochs"));
      if (auto v = value("regions")) {
        std::istringstream is(*v);
        std::string r;
        while (is >> r) m.regions.push_back(parse_region(r));
      }
      if (auto v = value("filter")) {
        nlohmann::json cfg;
        cfg["stages"] = nlohmann::json::array({nlohmann::json::parse(*v)});
        m.filter = curriculum_from_json(cfg).stages.front();
      }
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      m.example_ids.push_back(line);
    } else {
      m.example_ids.push_back(line.substr(0, tab));
      m.weights.push_back(parse_double(line.substr(tab + 1), path.string()));
    }
  }
  return m;
}

struct RunDescriptor {
  nlohmann::ordered_json json;
  std::vector<StageManifest> stages;
};

inline void write_run_descriptor(const fs::path& out_dir, const RunDescriptor& run) {
  std::ofstream out(out_dir / "run.json", std::ios::binary | std::ios::trunc);
  if (!out) io_fail("cannot write " + (out_dir / "run.json").string());
  out << run.json.dump(2) << '\n';
}

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) io_fail("cannot create " + dir.string() + ": " + ec.message());
}

/// Region curriculum: three stage manifests stage_<i>.txt plus run.json.
/// When `selection` is given (a fixed-quantity plan), stage pools are
/// restricted to it.
inline RunDescriptor emit_region_stages(const std::map<std::string, Region>& region_map,
                                        const RegionSchedule& schedule, int total_epochs,
                                        std::uint64_t seed, const fs::path& out_dir,
                                        const std::optional<std::vector<std::string>>& selection = {},
                                        const std::optional<RegionRule>& rule = {},
                                        const std::string& name = "") {
  const auto budgets = epoch_schedule(total_epochs, 3);
  std::set<std::string> selected;
  if (selection) selected.insert(selection->begin(), selection->end());

  RunDescriptor run;
  for (std::size_t i = 0; i < 3; ++i) {
    StageManifest m;
    m.index = i;
    m.epochs = budgets[i];
    m.regions = stage_regions(schedule, i);
    for (const auto& id : stage_pool(schedule, i, region_map)) {
      if (!selection || selected.count(id)) m.example_ids.push_back(id);
    }
    if (m.example_ids.empty()) {
      fail("empty stage pool: stage " + std::to_string(i) + " (" + ordering_string(schedule.ordering) + ")");
    }
    if (schedule.weighting == Weighting::region_balanced) {
      std::map<Region, std::size_t> per;
      for (const auto& id : m.example_ids) ++per[region_map.at(id)];
      const double n = static_cast<double>(m.example_ids.size());
      const double groups = static_cast<double>(per.size());
      for (const auto& id : m.example_ids) {
        m.weights.push_back(n / (groups * static_cast<double>(per[region_map.at(id)])));
      }
    }
    run.stages.push_back(std::move(m));
  }

  ensure_dir(out_dir);
  auto& j = run.json;
  j["name"] = name.empty() ? ordering_string(schedule.ordering) + " " + to_string(schedule.retention) : name;
  j["kind"] = "region";
  j["seed"] = seed;
  j["ordering"] = ordering_string(schedule.ordering);
  j["retention"] = to_string(schedule.retention);
  j["include_unlabeled"] = to_string(schedule.include_unlabeled);
  j["weighting"] = to_string(schedule.weighting);
  j["region_rule"] = rule_to_json(rule.value_or(RegionRule{}));
  j["total_epochs"] = total_epochs;
  j["epoch_budgets"] = budgets;
  j["plan_restricted"] = selection.has_value();
  nlohmann::ordered_json st = nlohmann::ordered_json::array();
  for (const auto& m : run.stages) {
    const std::string file = "stage_" + std::to_string(m.index) + ".txt";
    write_stage_manifest(out_dir / file, m);
    nlohmann::ordered_json regions = nlohmann::ordered_json::array();
    for (Region r : m.regions) regions.push_back(to_string(r));
    st.push_back({{"index", m.index}, {"manifest", file}, {"regions", regions},
                  {"epochs", m.epochs}, {"count", m.example_ids.size()}});
  }
  j["stages"] = st;
  write_run_descriptor(out_dir, run);
  return run;
}

/// Factor curriculum: per-stage manifests carrying the stage filter, a
/// stage_<i>.grid.json that drives mixture generation, and run.json. With a
/// pool manifest, each stage also lists the matching example ids.
inline RunDescriptor emit_curriculum_stages(const Curriculum& c,
                                            const std::optional<std::vector<MixtureRecord>>& pool,
                                            std::uint64_t seed, const fs::path& out_dir) {
  const auto violations = validate_curriculum(c);
  if (!violations.empty()) {
    std::string msg = "invalid curriculum '" + c.name + "':";
    for (const auto& v : violations) msg += "\n  " + format_violation(v);
    fail(msg);
  }
  RunDescriptor run;
  for (std::size_t i = 0; i < c.stages.size(); ++i) {
    StageManifest m;
    m.index = i;
    m.epochs = c.stages[i].epoch_budget;
    m.filter = c.stages[i];
    if (pool) {
      for (const auto& r : *pool) {
        if (stage_matches(c.stages[i], r.spec)) m.example_ids.push_back(r.example_id);
      }
      std::sort(m.example_ids.begin(), m.example_ids.end());
      if (m.example_ids.empty()) fail("empty stage pool: stage " + std::to_string(i) + " of '" + c.name + "'");
    }
    run.stages.push_back(std::move(m));
  }
  ensure_dir(out_dir);
  auto& j = run.json;
  j["name"] = c.name;
  j["kind"] = "factor";
  j["seed"] = seed;
  int total = 0;
  std::vector<int> budgets;
  for (const auto& s : c.stages) {
    budgets.push_back(s.epoch_budget);
    total += s.epoch_budget;
  }
  j["total_epochs"] = total;
  j["epoch_budgets"] = budgets;
  nlohmann::ordered_json st = nlohmann::ordered_json::array();
  for (const auto& m : run.stages) {
    const std::string file = "stage_" + std::to_string(m.index) + ".txt";
    const std::string grid = "stage_" + std::to_string(m.index) + ".grid.json";
    write_stage_manifest(out_dir / file, m);
    std::ofstream g(out_dir / grid, std::ios::binary | std::ios::trunc);
    if (!g) io_fail("cannot write " + (out_dir / grid).string());
    g << grid_to_json(stage_grid(*m.filter)).dump(2) << '\n';
    nlohmann::ordered_json o{{"index", m.index}, {"manifest", file}, {"grid", grid},
                             {"filter", stage_to_json(*m.filter)}, {"epochs", m.epochs}};
    if (pool) o["count"] = m.example_ids.size();
    st.push_back(o);
  }
  j["stages"] = st;
  write_run_descriptor(out_dir, run);
  return run;
}

}  // namespace tsemap
