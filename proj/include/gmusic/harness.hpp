#pragma once
// Error-scaling experiment: fixed configuration, independent noise draws per
// (m, r) cell, percentile errors and log-log slopes.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gmusic/error.hpp"
#include "gmusic/io.hpp"
#include "gmusic/optimizer.hpp"
#include "gmusic/signal.hpp"

namespace gmusic {

/// Offset between the base seed and the seed of the ground-truth configuration,
/// keeping the configuration stream apart from the per-trial noise streams.
inline constexpr std::uint64_t config_seed_offset = 1000003;

struct ExperimentSpec {
  int d = 2;
  std::vector<int> ms{8, 16, 32, 64};
  std::size_t s = 16;
  double min_separation = 0.125;
  AmplitudeLaw amplitudes = AmplitudeLaw::PlusMinusOne;
  double sigma0 = 0.25;
  std::vector<double> rs{-0.5, 0.0, 0.5};
  int trials = 10;
  double percentile = 90.0;
  std::uint64_t base_seed = 1;
  bool resample_config_per_cell = false;
  bool real_noise_convention = false;
  PipelineOptions pipeline;
  std::string out_dir;
  json source; // the parsed config, hashed into output metadata

  void validate() const {
    require(d >= 1, "experiment: d must be positive");
    require(!ms.empty() && !rs.empty(), "experiment: m and r lists must be nonempty");
    for (int m : ms)
      require(m >= 1, "experiment: every m must be a positive integer");
    require(s >= 1, "experiment: s must be positive");
    require(min_separation > 0.0, "experiment: min_separation must be positive");
    require(sigma0 >= 0.0, "experiment: sigma0 must be nonnegative");
    require(trials >= 1, "experiment: trials must be at least 1");
    require(percentile > 0.0 && percentile <= 100.0, "experiment: percentile must lie in (0, 100]");
  }
};

inline PipelineOptions pipeline_options_from_json(const json &j, PipelineOptions o = {}) {
  o.ratio_threshold = get_or(j, "ratio_threshold", o.ratio_threshold);
  o.kappa = get_or(j, "kappa", o.kappa);
  o.alpha1 = get_or(j, "alpha1", o.alpha1);
  o.eps_target = get_or(j, "eps_target", o.eps_target);
  o.svd_tol = get_or(j, "svd_tol", o.svd_tol);
  o.order_hint = get_or<Eigen::Index>(j, "order_hint", o.order_hint);
  o.fix_order = get_or(j, "fix_order", o.fix_order);
  require(o.ratio_threshold > 0.0 && o.ratio_threshold <= 1.0, "pipeline: ratio_threshold must lie in (0, 1]");
  require(o.kappa > 0.0, "pipeline: kappa must be positive");
  require(o.alpha1 > 0.0 && o.alpha1 < 1.0, "pipeline: alpha1 must lie in (0, 1)");
  require(o.svd_tol > 0.0, "pipeline: svd_tol must be positive");
  return o;
}

inline ExperimentSpec experiment_from_json(const json &j) {
  if (!j.is_object())
    throw InvalidArgument("experiment: config must be a JSON object");
  ExperimentSpec e;
  e.source = j;
  e.d = get_or(j, "d", e.d);
  e.ms = get_or(j, "m", e.ms);
  e.s = get_or(j, "s", e.s);
  e.min_separation = get_or(j, "min_separation", e.min_separation);
  e.amplitudes = amplitude_law_from_string(get_or<std::string>(j, "amplitudes", "pm1"));
  require(e.amplitudes != AmplitudeLaw::Given, "experiment: amplitude law must be random");
  e.sigma0 = get_or(j, "sigma0", e.sigma0);
  e.rs = get_or(j, "r", e.rs);
  e.trials = get_or(j, "trials", e.trials);
  e.percentile = get_or(j, "percentile", e.percentile);
  e.base_seed = get_or(j, "base_seed", e.base_seed);
  e.resample_config_per_cell = get_or(j, "resample_config_per_cell", e.resample_config_per_cell);
  e.real_noise_convention = get_or(j, "real_noise_convention", e.real_noise_convention);
  e.out_dir = get_or<std::string>(j, "out", "");
  PipelineOptions base;
  base.order_hint = static_cast<Eigen::Index>(e.s);
  e.pipeline = pipeline_options_from_json(j.contains("pipeline") ? j.at("pipeline") : json::object(), base);
  e.validate();
  return e;
}

/// Nearest-rank percentile: the ceil(P/100 · n)-th smallest value.
inline double nearest_rank_percentile(std::vector<double> v, double percentile) {
  require(!v.empty(), "nearest_rank_percentile: empty sample");
  require(percentile > 0.0 && percentile <= 100.0, "nearest_rank_percentile: percentile must lie in (0, 100]");
  std::sort(v.begin(), v.end());
  auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * static_cast<double>(v.size())));
  rank = std::clamp<std::size_t>(rank, 1, v.size());
  return v[rank - 1];
}

struct LineFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  std::size_t points = 0;
};

/// Ordinary least squares y = a + b x.
inline LineFit ols(const std::vector<double> &x, const std::vector<double> &y) {
  require(x.size() == y.size(), "ols: size mismatch");
  LineFit f;
  f.points = x.size();
  if (x.size() < 2)
    return f;
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0)
    return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

struct TrialRecord {
  int m = 0;
  double r = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double error = std::numeric_limits<double>::quiet_NaN();
  Eigen::Index detected_order = 0;
  std::size_t clusters = 0;
  long matvecs = 0;
  bool ok = false;
  std::string status;
  double seconds = 0.0;
};

struct CellSummary {
  int m = 0;
  double r = 0.0;
  double percentile_error = std::numeric_limits<double>::quiet_NaN();
  int trials_ok = 0;
  bool complete = false;
  long matvecs = 0;
  double seconds = 0.0;
};

struct SlopeSummary {
  double r = 0.0;
  LineFit fit;
  std::vector<int> excluded_m;
  std::string note;
};

struct ExperimentResult {
  std::vector<TrialRecord> trials;
  std::vector<CellSummary> cells;
  std::vector<SlopeSummary> slopes;
  ParameterConfig config;
  double seconds = 0.0;

  const CellSummary *cell(int m, double r) const {
    for (const auto &c : cells)
      if (c.m == m && c.r == r)
        return &c;
    return nullptr;
  }
  const SlopeSummary *slope(double r) const {
    for (const auto &s : slopes)
      if (s.r == r)
        return &s;
    return nullptr;
  }
};

inline TrialRecord run_trial(const ExperimentSpec &spec, const ParameterConfig &cfg, int m, double r, int trial) {
  TrialRecord rec;
  rec.m = m;
  rec.r = r;
  rec.trial = trial;
  rec.seed = spec.base_seed + static_cast<std::uint64_t>(trial);
  auto t0 = std::chrono::steady_clock::now();
  try {
    const KernelGeometry geom = KernelGeometry::cube(m, spec.d);
    SampleSet samples = synthesize_samples(cfg, geom);
    if (spec.sigma0 > 0.0) {
      NoiseModel noise = NoiseModel::gaussian(spec.sigma0, r);
      noise.real_parts_unit_variance = spec.real_noise_convention;
      samples.values += sample_noise(noise, samples.sites(), rec.seed);
    }
    PipelineOptions opt = spec.pipeline;
    opt.seed = rec.seed;
    opt.truth = cfg;
    PipelineReport rep = run_gradient_music(samples, opt);
    rec.detected_order = rep.detected_order;
    rec.clusters = rep.clusters.size();
    rec.matvecs = rep.matvecs;
    rec.error = rep.matching_error;
    rec.ok = !std::isnan(rec.error);
    rec.status = rec.ok ? "ok" : "unmatched";
    for (const auto &f : rep.flags)
      if (f.find("cluster count") != std::string::npos)
        rec.status = rec.ok ? "ok-flagged" : "unmatched";
  } catch (const std::exception &e) {
    rec.ok = false;
    rec.status = std::string("failed: ") + e.what();
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

inline ExperimentResult run_experiment(const ExperimentSpec &spec, int threads = 1) {
  spec.validate();
  ExperimentResult res;
  auto t_start = std::chrono::steady_clock::now();
  const Domain torus = Domain::torus(spec.d);
  res.config = random_separated_config(spec.s, spec.min_separation, spec.amplitudes, torus,
                                       spec.base_seed + config_seed_offset);
  threads = std::max(1, threads);
  std::size_t cell_index = 0;
  for (double r : spec.rs) {
    for (int m : spec.ms) {
      ParameterConfig cfg = res.config;
      if (spec.resample_config_per_cell)
        cfg = random_separated_config(spec.s, spec.min_separation, spec.amplitudes, torus,
                                      spec.base_seed + config_seed_offset + 1 + cell_index);
      ++cell_index;
      std::vector<TrialRecord> recs(static_cast<std::size_t>(spec.trials));
      std::atomic<int> next{0};
      auto worker = [&] {
        for (int t = next++; t < spec.trials; t = next++)
          recs[static_cast<std::size_t>(t)] = run_trial(spec, cfg, m, r, t);
      };
      std::vector<std::thread> pool;
      for (int w = 1; w < std::min(threads, spec.trials); ++w)
        pool.emplace_back(worker);
      worker();
      for (auto &th : pool)
        th.join();

      CellSummary cell;
      cell.m = m;
      cell.r = r;
      std::vector<double> errs;
      for (const auto &rec : recs) {
        cell.matvecs += rec.matvecs;
        cell.seconds += rec.seconds;
        if (rec.ok) {
          errs.push_back(rec.error);
          ++cell.trials_ok;
        }
      }
      cell.complete = cell.trials_ok == spec.trials;
      if (cell.complete)
        cell.percentile_error = nearest_rank_percentile(errs, spec.percentile);
      res.cells.push_back(cell);
      res.trials.insert(res.trials.end(), recs.begin(), recs.end());
    }
  }

  std::vector<int> ms_sorted = spec.ms;
  std::sort(ms_sorted.begin(), ms_sorted.end());
  for (double r : spec.rs) {
    SlopeSummary sl;
    sl.r = r;
    std::vector<double> x, y;
    bool degenerate = spec.sigma0 == 0.0;
    for (std::size_t i = 0; i < ms_sorted.size(); ++i) {
      const int m = ms_sorted[i];
      const CellSummary *c = res.cell(m, r);
      if (!c || !c->complete || !(c->percentile_error > 0.0)) {
        degenerate = true;
        continue;
      }
      // outside the landscape regime the error exceeds τ; drop the smallest m then
      if (i == 0 && c->percentile_error > default_tau(KernelGeometry::cube(m, spec.d))) {
        sl.excluded_m.push_back(m);
        continue;
      }
      x.push_back(std::log(static_cast<double>(m)));
      y.push_back(std::log(c->percentile_error));
    }
    if (degenerate) {
      sl.note = "skipped: degenerate or incomplete series";
    } else {
      sl.fit = ols(x, y);
      if (!sl.excluded_m.empty())
        sl.note = "excluded smallest m (error above tau)";
    }
    res.slopes.push_back(sl);
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return res;
}

inline std::string raw_csv(const ExperimentSpec &spec, const ExperimentResult &res) {
  CsvWriter w({"m", "r", "trial", "seed", "error", "detected_order", "clusters", "matvecs", "status"},
              csv_metadata(spec.base_seed, spec.source));
  for (const auto &t : res.trials) {
    std::string status = t.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    w.row({std::to_string(t.m), fmt(t.r), std::to_string(t.trial), std::to_string(t.seed), fmt(t.error),
           std::to_string(t.detected_order), std::to_string(t.clusters), std::to_string(t.matvecs), status});
  }
  return w.str();
}

inline std::string summary_csv(const ExperimentSpec &spec, const ExperimentResult &res) {
  CsvWriter w({"kind", "r", "m", "value", "count", "note"}, csv_metadata(spec.base_seed, spec.source));
  for (const auto &c : res.cells)
    w.row({"percentile_error", fmt(c.r), std::to_string(c.m), fmt(c.percentile_error), std::to_string(c.trials_ok),
           c.complete ? "complete" : "incomplete"});
  for (const auto &s : res.slopes) {
    std::string ex;
    for (int m : s.excluded_m)
      ex += (ex.empty() ? "excluded m=" : ";") + std::to_string(m);
    std::string note = s.note.empty() ? ex : s.note + (ex.empty() ? "" : " " + ex);
    std::replace(note.begin(), note.end(), ',', ';');
    w.row({"slope", fmt(s.r), "", fmt(s.fit.slope), std::to_string(s.fit.points), note});
  }
  return w.str();
}

inline json experiment_report(const ExperimentSpec &spec, const ExperimentResult &res) {
  json cells = json::array(), slopes = json::array();
  for (const auto &c : res.cells)
    cells.push_back({{"m", c.m},
                     {"r", c.r},
                     {"percentile_error", std::isnan(c.percentile_error) ? json(nullptr) : json(c.percentile_error)},
                     {"trials_ok", c.trials_ok},
                     {"complete", c.complete},
                     {"matvecs", c.matvecs},
                     {"seconds", c.seconds}});
  for (const auto &s : res.slopes)
    slopes.push_back({{"r", s.r},
                      {"slope", std::isnan(s.fit.slope) ? json(nullptr) : json(s.fit.slope)},
                      {"points", s.fit.points},
                      {"excluded_m", s.excluded_m},
                      {"note", s.note}});
  return {{"version", version_string},
          {"config_hash", hex64(fnv1a(spec.source.dump()))},
          {"base_seed", spec.base_seed},
          {"config_seed", spec.base_seed + config_seed_offset},
          {"trial_seed_rule", "base_seed + trial_index"},
          {"truth", to_json(res.config)},
          {"cells", cells},
          {"slopes", slopes},
          {"seconds", res.seconds}};
}

inline void write_experiment(const std::filesystem::path &dir, const ExperimentSpec &spec,
                             const ExperimentResult &res) {
  save_text(dir / "raw.csv", raw_csv(spec, res));
  save_text(dir / "summary.csv", summary_csv(spec, res));
  save_json(dir / "report.json", experiment_report(spec, res));
}

} // namespace gmusic
