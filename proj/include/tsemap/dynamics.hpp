#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsemap/csv.hpp"
#include "tsemap/error.hpp"

namespace tsemap {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Training-dynamics trajectories

/// Per-example metric values over epochs, higher = better (ΔSNR in dB).
struct Trajectory {
  std::string example_id;
  std::vector<int> epochs;
  std::vector<double> values;
};

struct IngestOptions {
  bool discard_first_epoch = true;
  /// Negate rows whose metric is `snr_loss` so the datamap keeps the
  /// "higher is better" orientation of ΔSNR.
  bool negate_loss = true;
};

/// Reads a metric log with header `example_id,epoch,metric,value`.
///
/// All rows must carry the same metric name. Every example must cover the
/// same epoch set; duplicates, gaps and logs of fewer than three epochs
/// are rejected. Trajectories come back sorted by example_id, so row order
/// in the file does not matter.
inline std::vector<Trajectory> ingest_metric_log(std::istream& in, const IngestOptions& opt = {},
                                                 const std::string& name = "<log>") {
  std::string line;
  if (!std::getline(in, line)) fail(name + ": empty metric log");
  const auto header = split_csv(line);
  if (header != std::vector<std::string>{"example_id", "epoch", "metric", "value"}) {
    fail(name + ": header must be example_id,epoch,metric,value");
  }
  std::map<std::string, std::map<int, double>> rows;
  std::string metric;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::string where = name + ":" + std::to_string(lineno);
    const auto f = split_csv(line);
    if (f.size() != 4) fail(where + ": expected 4 fields");
    if (f[0].empty()) fail(where + ": empty example_id");
    const long long epoch = parse_int(f[1], where);
    if (epoch < 1) fail(where + ": epochs start at 1");
    if (metric.empty()) {
      metric = f[2];
    } else if (f[2] != metric) {
      fail(where + ": mixed metrics '" + metric + "' and '" + f[2] + "'");
    }
    double v = parse_double(f[3], where);
    if (metric == "snr_loss" && opt.negate_loss) v = -v;
    auto& traj = rows[f[0]];
    if (!traj.emplace(static_cast<int>(epoch), v).second) {
      fail(where + ": duplicate row for (" + f[0] + ", epoch " + std::to_string(epoch) + ")");
    }
  }
  if (rows.empty()) fail(name + ": no data rows");

  std::set<int> all_epochs;
  for (const auto& [_, t] : rows) {
    for (const auto& [e, __] : t) all_epochs.insert(e);
  }
  std::vector<std::string> offenders;
  for (const auto& [id, t] : rows) {
    if (t.size() != all_epochs.size()) offenders.push_back(id);
  }
  if (!offenders.empty()) {
    std::string msg = name + ": missing epochs for " + std::to_string(offenders.size()) +
                      " example(s):";
    for (std::size_t i = 0; i < offenders.size() && i < 10; ++i) msg += " " + offenders[i];
    if (offenders.size() > 10) msg += " ...";
    fail(msg);
  }
  if (all_epochs.size() < 3) {
    fail(name + ": need at least 3 epochs, found " + std::to_string(all_epochs.size()));
  }

  std::vector<Trajectory> out;
  out.reserve(rows.size());
  for (const auto& [id, t] : rows) {
    Trajectory traj;
    traj.example_id = id;
    for (const auto& [e, v] : t) {
      if (opt.discard_first_epoch && e == 1) continue;
      traj.epochs.push_back(e);
      traj.values.push_back(v);
    }
    if (traj.values.size() < 2) fail(name + ": fewer than 2 retained epochs for " + id);
    out.push_back(std::move(traj));
  }
  return out;
}

inline std::vector<Trajectory> ingest_metric_log(const fs::path& path, const IngestOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) io_fail("cannot open metric log " + path.string());
  return ingest_metric_log(in, opt, path.string());
}

/// Mean of the retained epoch values.
inline double confidence(std::span<const double> values) {
  if (values.empty()) fail("confidence of an empty trajectory");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

/// Population standard deviation (divisor E) of the retained values.
inline double variability(std::span<const double> values) {
  const double mu = confidence(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

inline double confidence(const Trajectory& t) { return confidence(t.values); }
inline double variability(const Trajectory& t) { return variability(t.values); }

// ---------------------------------------------------------------------------
// Regions

enum class Region { easy, ambiguous, hard, unlabeled };

inline std::string to_string(Region r) {
  switch (r) {
    case Region::easy: return "easy";
    case Region::ambiguous: return "ambiguous";
    case Region::hard: return "hard";
    case Region::unlabeled: return "unlabeled";
  }
  return "?";
}

inline Region parse_region(const std::string& s) {
  if (s == "easy") return Region::easy;
  if (s == "ambiguous") return Region::ambiguous;
  if (s == "hard") return Region::hard;
  if (s == "unlabeled") return Region::unlabeled;
  fail("unknown region label: '" + s + "'");
}

struct DatamapPoint {
  std::string example_id;
  double confidence = 0.0;
  double variability = 0.0;
  Region region = Region::unlabeled;
};

inline std::vector<DatamapPoint> datamap_points(const std::vector<Trajectory>& trajectories) {
  std::vector<DatamapPoint> out;
  out.reserve(trajectories.size());
  for (const auto& t : trajectories) {
    out.push_back({t.example_id, confidence(t), variability(t), Region::unlabeled});
  }
  return out;
}

/// Split rule: the `ambiguous_fraction` most variable points are ambiguous;
/// of the remaining r points the top `easy_fraction_of_rest` by confidence
/// are easy and the bottom `hard_fraction_of_rest` are hard.
struct RegionRule {
  double ambiguous_fraction = 0.30;
  double easy_fraction_of_rest = 0.50;
  double hard_fraction_of_rest = 0.20;

  void validate() const {
    for (double f : {ambiguous_fraction, easy_fraction_of_rest, hard_fraction_of_rest}) {
      if (!(f >= 0.0 && f <= 1.0)) fail("region rule: fractions must lie in [0, 1]");
    }
    if (easy_fraction_of_rest + hard_fraction_of_rest > 1.0 + 1e-12) {
      fail("region rule: easy + hard fractions of rest exceed 1");
    }
  }
};

inline RegionRule rule_from_json(const nlohmann::json& j) {
  RegionRule r;
  try {
    r.ambiguous_fraction = j.value("ambiguous_fraction", r.ambiguous_fraction);
    r.easy_fraction_of_rest = j.value("easy_fraction_of_rest", r.easy_fraction_of_rest);
    r.hard_fraction_of_rest = j.value("hard_fraction_of_rest", r.hard_fraction_of_rest);
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("region rule: ") + e.what());
  }
  r.validate();
  return r;
}

inline nlohmann::ordered_json rule_to_json(const RegionRule& r) {
  return {{"ambiguous_fraction", r.ambiguous_fraction},
          {"easy_fraction_of_rest", r.easy_fraction_of_rest},
          {"hard_fraction_of_rest", r.hard_fraction_of_rest}};
}

struct RegionCounts {
  std::size_t ambiguous = 0, easy = 0, hard = 0, unlabeled = 0;
  friend bool operator==(const RegionCounts&, const RegionCounts&) = default;
};

/// Floor-rule counts for n points.
inline RegionCounts region_counts(std::size_t n, const RegionRule& rule) {
  auto take = [](double f, std::size_t m) {
    return static_cast<std::size_t>(std::floor(f * static_cast<double>(m) + 1e-9));
  };
  RegionCounts c;
  c.ambiguous = take(rule.ambiguous_fraction, n);
  const std::size_t rest = n - c.ambiguous;
  c.easy = take(rule.easy_fraction_of_rest, rest);
  c.hard = take(rule.hard_fraction_of_rest, rest);
  c.unlabeled = rest - c.easy - c.hard;
  return c;
}

/// Assigns regions. Ties at every percentile boundary break by ascending
/// example_id, so the assignment is a function of the point set alone.
/// Output keeps the input order.
inline std::vector<DatamapPoint> classify_regions(std::vector<DatamapPoint> points,
                                                  const RegionRule& rule = {}) {
  rule.validate();
  const std::size_t n = points.size();
  if (n < 5) fail("insufficient examples for region split (need >= 5, got " + std::to_string(n) + ")");
  {
    std::set<std::string> ids;
    for (const auto& p : points) {
      if (!ids.insert(p.example_id).second) fail("duplicate example_id in datamap: " + p.example_id);
    }
  }
  const RegionCounts c = region_counts(n, rule);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].variability != points[b].variability) {
      return points[a].variability > points[b].variability;
    }
    return points[a].example_id < points[b].example_id;
  });
  for (auto& p : points) p.region = Region::unlabeled;
  for (std::size_t k = 0; k < c.ambiguous; ++k) points[idx[k]].region = Region::ambiguous;

  std::vector<std::size_t> rest(idx.begin() + static_cast<std::ptrdiff_t>(c.ambiguous), idx.end());
  std::sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].confidence != points[b].confidence) {
      return points[a].confidence > points[b].confidence;
    }
    return points[a].example_id < points[b].example_id;
  });
  for (std::size_t k = 0; k < c.easy; ++k) points[rest[k]].region = Region::easy;
  for (std::size_t k = 0; k < c.hard; ++k) points[rest[rest.size() - 1 - k]].region = Region::hard;
  return points;
}

// ---------------------------------------------------------------------------
// Outputs

inline void write_datamap_csv(const fs::path& path, const std::vector<DatamapPoint>& points) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) io_fail("cannot write " + path.string());
  out << "example_id,confidence,variability,region\n";
  for (const auto& p : points) {
    out << p.example_id << ',' << format_number(p.confidence) << ','
        << format_number(p.variability) << ',' << to_string(p.region) << '\n';
  }
  if (!out) io_fail("write failed: " + path.string());
}

inline void write_region_map(const fs::path& path, const std::vector<DatamapPoint>& points) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) io_fail("cannot write " + path.string());
  out << "example_id,region\n";
  for (const auto& p : points) out << p.example_id << ',' << to_string(p.region) << '\n';
  if (!out) io_fail("write failed: " + path.string());
}

/// Reads any CSV with `example_id` and `region` columns (regions.csv or
/// datamap.csv).
inline std::map<std::string, Region> read_region_map(const fs::path& path) {
  std::ifstream in(path);
  if (!in) io_fail("cannot open region map " + path.string());
  std::string line;
  if (!std::getline(in, line)) fail(path.string() + ": empty region map");
  const auto header = split_csv(line);
  const auto col = [&](const char* name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(path.string() + ": missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t id_col = col("example_id"), region_col = col("region");
  std::map<std::string, Region> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (f.size() != header.size()) fail(where + ": wrong field count");
    if (!out.emplace(f[id_col], parse_region(f[region_col])).second) {
      fail(where + ": duplicate example_id " + f[id_col]);
    }
  }
  return out;
}

/// Points read back from a datamap CSV.
inline std::vector<DatamapPoint> read_datamap_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) io_fail("cannot open datamap " + path.string());
  std::string line;
  if (!std::getline(in, line) ||
      split_csv(line) != std::vector<std::string>{"example_id", "confidence", "variability", "region"}) {
    fail(path.string() + ": header must be example_id,confidence,variability,region");
  }
  std::vector<DatamapPoint> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const auto f = split_csv(line);
    if (f.size() != 4) fail(where + ": expected 4 fields");
    out.push_back({f[0], parse_double(f[1], where), parse_double(f[2], where), parse_region(f[3])});
  }
  return out;
}

namespace svg_detail {

struct Range {
  double lo, hi;
};

/// Data range padded by 5% of its span on both sides.
inline Range padded_range(double lo, double hi) {
  double pad = 0.05 * (hi - lo);
  if (pad <= 0.0) pad = std::max(0.05 * std::abs(lo), 0.5);
  return {lo - pad, hi + pad};
}

inline std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string xml_escape(const std::string& in) {
  std::string out;
  for (char ch : in) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

inline const char* color(Region r) {
  switch (r) {
    case Region::easy: return "#2ca02c";
    case Region::ambiguous: return "#ff7f0e";
    case Region::hard: return "#d62728";
    case Region::unlabeled: return "#9e9e9e";
  }
  return "#000000";
}

inline const char* label(Region r) {
  switch (r) {
    case Region::easy: return "easy-to-learn";
    case Region::ambiguous: return "ambiguous";
    case Region::hard: return "hard-to-learn";
    case Region::unlabeled: return "unlabeled";
  }
  return "?";
}

}  // namespace svg_detail

/// Scatter of variability (x) against confidence (y), one marker per point
/// colored by region. The plot area is a nested <svg class="plot-area">
/// whose viewBox is the padded data range (y negated, so up is larger).
/// A companion CSV with the same stem is written next to the SVG.
inline void render_datamap_svg(const std::vector<DatamapPoint>& points, const fs::path& svg_path) {
  using namespace svg_detail;
  if (points.empty()) fail("render_datamap_svg: no points");
  double xmin = points[0].variability, xmax = xmin;
  double ymin = points[0].confidence, ymax = ymin;
  std::map<Region, std::size_t> counts;
  for (const auto& p : points) {
    xmin = std::min(xmin, p.variability);
    xmax = std::max(xmax, p.variability);
    ymin = std::min(ymin, p.confidence);
    ymax = std::max(ymax, p.confidence);
    ++counts[p.region];
  }
  const Range xr = padded_range(xmin, xmax), yr = padded_range(ymin, ymax);

  constexpr double W = 760, H = 560, L = 80, T = 30, PW = 500, PH = 450;
  auto px = [&](double x) { return L + (x - xr.lo) / (xr.hi - xr.lo) * PW; };
  auto py = [&](double y) { return T + (yr.hi - y) / (yr.hi - yr.lo) * PH; };

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << PW << "\" height=\"" << PH
    << "\" fill=\"none\" stroke=\"#333\"/>\n";

  s << "<g class=\"ticks\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xr.lo + (xr.hi - xr.lo) * k / 4.0;
    const double yv = yr.lo + (yr.hi - yr.lo) * k / 4.0;
    s << "<line x1=\"" << px(xv) << "\" y1=\"" << T + PH << "\" x2=\"" << px(xv) << "\" y2=\""
      << T + PH + 5 << "\" stroke=\"#333\"/>"
      << "<text class=\"tick-label x\" x=\"" << px(xv) << "\" y=\"" << T + PH + 18
      << "\" text-anchor=\"middle\">" << fixed(xv) << "</text>\n";
    s << "<line x1=\"" << L - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << L << "\" y2=\"" << py(yv)
      << "\" stroke=\"#333\"/>"
      << "<text class=\"tick-label y\" x=\"" << L - 8 << "\" y=\"" << py(yv) + 4
      << "\" text-anchor=\"end\">" << fixed(yv) << "</text>\n";
  }
  s << "</g>\n";
  s << "<text x=\"" << L + PW / 2 << "\" y=\"" << H - 15
    << "\" text-anchor=\"middle\">variability (std of ΔSNR, dB)</text>\n"
    << "<text transform=\"translate(20," << T + PH / 2
    << ") rotate(-90)\" text-anchor=\"middle\">confidence (mean ΔSNR, dB)</text>\n";

  s << "<svg class=\"plot-area\" x=\"" << L << "\" y=\"" << T << "\" width=\"" << PW << "\" height=\""
    << PH << "\" viewBox=\"" << format_number(xr.lo) << ' ' << format_number(-yr.hi) << ' '
    << format_number(xr.hi - xr.lo) << ' ' << format_number(yr.hi - yr.lo)
    << "\" preserveAspectRatio=\"none\">\n";
  for (const auto& p : points) {
    s << "<path class=\"marker region-" << to_string(p.region) << "\" d=\"M"
      << format_number(p.variability) << ' ' << format_number(-p.confidence)
      << "h0\" stroke=\"" << color(p.region)
      << "\" stroke-width=\"6\" stroke-linecap=\"round\" vector-effect=\"non-scaling-stroke\""
      << " stroke-opacity=\"0.7\"><title>" << xml_escape(p.example_id) << "</title></path>\n";
  }
  s << "</svg>\n";

  s << "<g class=\"legend\">\n";
  int row = 0;
  for (Region r : {Region::easy, Region::ambiguous, Region::hard, Region::unlabeled}) {
    const double y = T + 20 + 22 * row++;
    s << "<g class=\"legend-entry\"><circle cx=\"" << L + PW + 20 << "\" cy=\"" << y
      << "\" r=\"5\" fill=\"" << color(r) << "\"/><text x=\"" << L + PW + 32 << "\" y=\"" << y + 4
      << "\">" << label(r) << " (" << counts[r] << ")</text></g>\n";
  }
  s << "</g>\n</svg>\n";

  std::ofstream out(svg_path, std::ios::binary | std::ios::trunc);
  if (!out) io_fail("cannot write " + svg_path.string());
  out << s.str();
  if (!out) io_fail("write failed: " + svg_path.string());
  fs::path csv = svg_path;
  csv.replace_extension(".csv");
  write_datamap_csv(csv, points);
}

}  // namespace tsemap
