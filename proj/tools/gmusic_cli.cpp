// Command-line front end: synth, estimate, landscape, verify, experiment, minimax.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "gmusic/gmusic.hpp"

namespace fs = std::filesystem;
using namespace gmusic;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_runtime = 1;
constexpr int exit_usage = 2;
constexpr int exit_audit = 3;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  int threads = 1;
  bool dump_grid = false;
  bool dump_trajectories = false;
};

struct AuditFailure : Error {
  using Error::Error;
};

json load_config(const Flags &f, bool required) {
  if (f.config.empty()) {
    if (required)
      throw InvalidArgument("--config is required for this subcommand");
    return json::object();
  }
  json j = load_json(f.config);
  if (!j.is_object())
    throw InvalidArgument("config: top level must be a JSON object");
  return j;
}

std::uint64_t seed_of(const Flags &f, const json &cfg) {
  return f.seed ? *f.seed : get_or<std::uint64_t>(cfg, "seed", 0);
}

fs::path relative_to_config(const Flags &f, const std::string &p) {
  fs::path path(p);
  if (path.is_absolute() || f.config.empty())
    return path;
  return fs::path(f.config).parent_path() / path;
}

// Ground truth from "config" or a random draw from "random".
std::optional<ParameterConfig> truth_from(const json &cfg, const KernelGeometry &geom, std::uint64_t seed) {
  if (cfg.contains("config"))
    return config_from_json(cfg.at("config"), geom.d);
  if (cfg.contains("random")) {
    const json &r = cfg.at("random");
    const auto s = get_req<std::size_t>(r, "s");
    const double sep = get_req<double>(r, "min_separation");
    const AmplitudeLaw law = amplitude_law_from_string(get_or<std::string>(r, "amplitudes", "pm1"));
    require(law != AmplitudeLaw::Given, "config: random amplitudes must be pm1 or unit");
    return random_separated_config(s, sep, law, geom.omega, seed + config_seed_offset);
  }
  return std::nullopt;
}

NoiseModel noise_from(const json &cfg) {
  if (!cfg.contains("noise"))
    return NoiseModel::none();
  const json &n = cfg.at("noise");
  const std::string kind = get_or<std::string>(n, "kind", "gaussian");
  if (kind == "none")
    return NoiseModel::none();
  if (kind != "gaussian")
    throw InvalidArgument("config: noise kind must be 'none' or 'gaussian'");
  NoiseModel m = NoiseModel::gaussian(get_req<double>(n, "sigma0"), get_or(n, "r", 0.0));
  require(m.sigma0 >= 0.0, "config: sigma0 must be nonnegative");
  m.real_parts_unit_variance = get_or(n, "real_parts_unit_variance", false);
  return m;
}

struct Problem {
  SampleSet samples;
  std::optional<ParameterConfig> truth;
};

// Samples come from a file ("samples") or are synthesized from the config.
Problem problem_from(const Flags &f, const json &cfg, std::uint64_t seed) {
  Problem p;
  if (cfg.contains("samples")) {
    p.samples = samples_from_json(load_json(relative_to_config(f, get_req<std::string>(cfg, "samples"))));
    if (cfg.contains("truth"))
      p.truth = config_from_json(cfg.at("truth"), p.samples.geom.d);
    return p;
  }
  const KernelGeometry geom = geometry_from_json(field(cfg, "geometry"));
  require(geom.is_cube(), "config: sampled data exist only for the cube geometry");
  p.truth = truth_from(cfg, geom, seed);
  if (!p.truth)
    throw InvalidArgument("config: need 'samples', 'config' or 'random'");
  p.truth->validate(geom.omega);
  p.samples = synthesize_samples(*p.truth, geom);
  NoiseModel noise = noise_from(cfg);
  if (noise.kind != NoiseModel::Kind::None)
    p.samples.values += sample_noise(noise, p.samples.sites(), seed);
  return p;
}

PipelineOptions pipeline_from(const json &cfg, std::uint64_t seed, const std::optional<ParameterConfig> &truth) {
  PipelineOptions o;
  if (truth)
    o.order_hint = static_cast<Eigen::Index>(truth->s());
  o = pipeline_options_from_json(cfg.contains("pipeline") ? cfg.at("pipeline") : json::object(), o);
  o.seed = seed;
  o.truth = truth;
  return o;
}

json with_meta(json j, std::uint64_t seed, const json &cfg) {
  j["meta"] = {{"version", version_string}, {"seed", seed}, {"config_hash", hex64(fnv1a(cfg.dump()))}};
  return j;
}

std::string grid_csv(const Grid &grid, const Eigen::VectorXd &values, std::uint64_t seed, const json &cfg) {
  std::vector<std::string> header;
  const int d = grid.domain().dim();
  for (int k = 0; k < d; ++k)
    header.push_back("w" + std::to_string(k + 1));
  header.push_back("q");
  CsvWriter w(header, csv_metadata(seed, cfg));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.point(i);
    std::vector<std::string> row;
    for (int k = 0; k < d; ++k)
      row.push_back(fmt(x[k]));
    row.push_back(fmt(values[static_cast<Eigen::Index>(i)]));
    w.row(row);
  }
  return w.str();
}

std::string trajectories_csv(const PipelineReport &rep, int d, std::uint64_t seed, const json &cfg) {
  std::vector<std::string> header{"cluster", "step"};
  for (int k = 0; k < d; ++k)
    header.push_back("w" + std::to_string(k + 1));
  header.push_back("q");
  CsvWriter w(header, csv_metadata(seed, cfg));
  for (std::size_t c = 0; c < rep.trajectories.size(); ++c)
    for (std::size_t t = 0; t < rep.trajectories[c].size(); ++t) {
      std::vector<std::string> row{std::to_string(c), std::to_string(t)};
      for (int k = 0; k < d; ++k)
        row.push_back(fmt(rep.trajectories[c][t][k]));
      row.push_back(fmt(rep.trajectory_values[c][t]));
      w.row(row);
    }
  return w.str();
}

int cmd_synth(const Flags &f) {
  const json cfg = load_config(f, true);
  const std::uint64_t seed = seed_of(f, cfg);
  Problem p = problem_from(f, cfg, seed);
  const fs::path out(f.out);
  save_json(out / "samples.json", with_meta(to_json(p.samples), seed, cfg));
  save_text(out / "samples.csv", samples_csv(p.samples, seed, cfg));
  save_json(out / "truth.json", with_meta({{"geometry", to_json(p.samples.geom)}, {"config", to_json(*p.truth)}}, seed, cfg));
  std::cout << "wrote " << p.samples.values.size() << " samples to " << (out / "samples.json").string() << "\n";
  return exit_ok;
}

int cmd_estimate(const Flags &f) {
  const json cfg = load_config(f, true);
  const std::uint64_t seed = seed_of(f, cfg);
  Problem p = problem_from(f, cfg, seed);
  PipelineOptions opt = pipeline_from(cfg, seed, p.truth);
  opt.record_trajectories = f.dump_trajectories;
  opt.keep_grid_values = f.dump_grid;
  PipelineReport rep = run_gradient_music(p.samples, opt);
  const fs::path out(f.out);
  save_json(out / "report.json", with_meta(to_json(rep), seed, cfg));
  if (f.dump_grid) {
    Grid grid = Grid::lattice(p.samples.geom.omega, rep.grid_counts);
    save_text(out / "grid.csv", grid_csv(grid, rep.grid_values, seed, cfg));
  }
  if (f.dump_trajectories)
    save_text(out / "trajectories.csv", trajectories_csv(rep, p.samples.geom.d, seed, cfg));
  std::cout << "detected order " << rep.detected_order << ", " << rep.estimates.size() << " estimates";
  if (!std::isnan(rep.matching_error))
    std::cout << ", matching error " << fmt(rep.matching_error);
  std::cout << "\n";
  for (const auto &flag : rep.flags)
    std::cout << "flag: " << flag << "\n";
  return exit_ok;
}

int cmd_landscape(const Flags &f) {
  const json cfg = load_config(f, true);
  const std::uint64_t seed = seed_of(f, cfg);
  const fs::path out(f.out);
  json diag = json::object();

  if (cfg.contains("geometry") && get_or<std::string>(cfg.at("geometry"), "kind", "cube") == "ball") {
    // noiseless analytic landscape on the parameter box
    const KernelGeometry geom = geometry_from_json(cfg.at("geometry"));
    auto truth = truth_from(cfg, geom, seed);
    if (!truth)
      throw InvalidArgument("config: the ball landscape needs 'config' or 'random'");
    truth->validate(geom.omega);
    MusicEvaluator ev = MusicEvaluator::analytic(truth->theta, geom);
    const long n = get_or(cfg, "grid_per_axis", 64L);
    Grid grid = Grid::lattice(geom.omega, std::vector<long>(static_cast<std::size_t>(geom.d), n));
    GridValues gv = grid_evaluate(ev, grid);
    save_text(out / "contour.csv", grid_csv(grid, gv.values, seed, cfg));
    diag["truth"] = to_json(*truth);
    diag["grid_note"] = gv.note;
    save_json(out / "diagnostics.json", with_meta(diag, seed, cfg));
    return exit_ok;
  }

  Problem p = problem_from(f, cfg, seed);
  const KernelGeometry &geom = p.samples.geom;
  PipelineOptions opt = pipeline_from(cfg, seed, p.truth);
  HankelOperator H(p.samples);
  SvdOptions so;
  so.tol = opt.svd_tol;
  so.seed = seed;
  so.significance = opt.ratio_threshold;
  const Eigen::Index k = std::min<Eigen::Index>(H.size(), opt.order_hint > 0 ? 2 * opt.order_hint + 4 : 16);
  SingularSpectrum spec = truncated_svd(H, k, so);
  const Eigen::Index s = opt.fix_order && opt.order_hint > 0 ? opt.order_hint : detect_model_order(spec, opt.ratio_threshold);
  SubspaceBasis basis = spec.left_basis(geom, s);
  MusicEvaluator ev = MusicEvaluator::from_basis(basis);
  Hyperparams hp = default_hyperparams(geom, 1e-3, opt.kappa);
  Grid grid = make_uniform_grid(geom.omega, hp.mesh_target, opt.grid_budget);
  GridValues gv = grid_evaluate(ev, grid);
  save_text(out / "contour.csv", grid_csv(grid, gv.values, seed, cfg));
  diag["detected_order"] = s;
  diag["singular_values"] = std::vector<double>(spec.values.data(), spec.values.data() + spec.values.size());
  diag["grid_counts"] = grid.counts();
  diag["grid_mesh"] = grid.mesh();
  auto clusters = threshold_and_cluster(grid, gv.values, opt.alpha1);
  json reps = json::array();
  for (const auto &c : clusters)
    reps.push_back({{"point", to_json(c.representative)}, {"value", c.rep_value}, {"size", c.size}});
  diag["clusters"] = reps;
  if (p.truth) {
    KernelQuantities kq = kernel_quantities(geom);
    ConfigQuantities cq = kernel_matrix(p.truth->theta, geom);
    Grid probe = make_uniform_grid(geom.omega, 0.5 * grid.mesh(), opt.grid_budget);
    energy_terms(p.truth->theta, geom, probe, cq);
    const double pd = subspace_distance(basis, exact_basis(p.truth->theta, geom));
    auto [d1, d2] = default_deltas(geom);
    diag["projector_distance"] = pd;
    diag["admissibility"] = to_json(check_admissibility(kq, cq, pd, d1, d2));
    diag["kernel"] = {{"tau", kq.tau}, {"tail_sup", kq.tail_sup}, {"grad_sup", kq.grad_sup}, {"trace_psi", kq.trace}};
    diag["config"] = {{"lambda_min", cq.lambda_min}, {"lambda_max", cq.lambda_max}, {"E0", cq.E0}, {"E1", cq.E1},
                      {"separation", cq.separation}, {"probe_mesh", cq.probe_mesh}};
  }
  save_json(out / "diagnostics.json", with_meta(diag, seed, cfg));
  std::cout << "grid " << grid.size() << " points, " << clusters.size() << " clusters below alpha1\n";
  return exit_ok;
}

json audit_json(const std::vector<AuditEntry> &entries, bool &all_pass) {
  json a = json::array();
  for (const auto &e : entries) {
    a.push_back(to_json(e));
    all_pass = all_pass && e.pass;
  }
  return a;
}

int cmd_verify(const Flags &f) {
  const json cfg = load_config(f, false);
  const std::uint64_t seed = seed_of(f, cfg);
  std::vector<KernelGeometry> geoms;
  if (cfg.contains("geometries")) {
    for (const auto &g : cfg.at("geometries"))
      geoms.push_back(geometry_from_json(g));
  } else {
    geoms = {KernelGeometry::cube(4, 1), KernelGeometry::cube(4, 2), KernelGeometry::cube(16, 2), KernelGeometry::cube(64, 2),
             KernelGeometry::ball(2.0, 2), KernelGeometry::ball(4.0, 3)};
  }
  bool pass = true;
  json report = json::object(), kernel = json::array(), configs = json::array(), wedin = json::array();
  for (const auto &g : geoms) {
    kernel.push_back({{"geometry", to_json(g)}, {"audit", audit_json(kernel_bound_audit(g, default_tau(g)), pass)}});

    // two atoms spread over most of the domain; the audit keeps the bounds whose
    // separation hypotheses hold for β = mΔ
    {
      const double room = g.is_cube() ? 0.5 * std::sqrt(static_cast<double>(g.d)) : std::sqrt(static_cast<double>(g.d));
      ParameterConfig c = random_separated_config(2, 0.6 * room, AmplitudeLaw::PlusMinusOne, g.omega, seed);
      Grid probe = make_uniform_grid(g.omega, 0.25 / g.m, std::size_t{1} << 22);
      configs.push_back({{"geometry", to_json(g)}, {"audit", audit_json(config_bound_audit(c.theta, g, probe), pass)}});
    }

    if (g.is_cube() && std::pow(2.0 * g.cube_m() + 1.0, g.d) <= static_cast<double>(dense_cutoff)) {
      const double sep = std::min(0.4, 4.0 / g.m);
      ParameterConfig c = random_separated_config(2, sep, AmplitudeLaw::PlusMinusOne, g.omega, seed + 1);
      SampleSet y = synthesize_samples(c, g);
      SampleSet eta{g, sample_noise(NoiseModel::gaussian(1e-3), y.sites(), seed + 2)};
      WedinReport w = wedin_audit(y, eta, 2, seed);
      pass = pass && w.pass;
      wedin.push_back({{"geometry", to_json(g)}, {"report", to_json(w)}});
    }
  }
  report["kernel_bounds"] = kernel;
  report["config_bounds"] = configs;
  report["wedin"] = wedin;
  report["pass"] = pass;
  save_json(fs::path(f.out) / "verify.json", with_meta(report, seed, cfg));
  std::cout << (pass ? "all audits pass" : "audit failures, see verify.json") << "\n";
  if (!pass)
    throw AuditFailure("verify: audit failure");
  return exit_ok;
}

int cmd_experiment(const Flags &f) {
  const json cfg = load_config(f, true);
  ExperimentSpec spec = experiment_from_json(cfg);
  if (f.seed)
    spec.base_seed = *f.seed;
  const fs::path out = f.out != "." || spec.out_dir.empty() ? fs::path(f.out) : relative_to_config(f, spec.out_dir);
  ExperimentResult res = run_experiment(spec, f.threads);
  write_experiment(out, spec, res);
  if (f.dump_grid) {
    // landscape of the first noisy trial at the smallest m and first r
    const int m = *std::min_element(spec.ms.begin(), spec.ms.end());
    const KernelGeometry geom = KernelGeometry::cube(m, spec.d);
    SampleSet y = synthesize_samples(res.config, geom);
    if (spec.sigma0 > 0.0) {
      NoiseModel nm = NoiseModel::gaussian(spec.sigma0, spec.rs.front());
      nm.real_parts_unit_variance = spec.real_noise_convention;
      y.values += sample_noise(nm, y.sites(), spec.base_seed);
    }
    PipelineOptions opt = spec.pipeline;
    opt.seed = spec.base_seed;
    opt.keep_grid_values = true;
    PipelineReport rep = run_gradient_music(y, opt);
    Grid grid = Grid::lattice(geom.omega, rep.grid_counts);
    save_text(out / "contour.csv", grid_csv(grid, rep.grid_values, spec.base_seed, cfg));
  }
  for (const auto &s : res.slopes)
    std::cout << "r = " << fmt(s.r) << ": slope " << fmt(s.fit.slope) << (s.note.empty() ? "" : " (" + s.note + ")")
              << "\n";
  return exit_ok;
}

int cmd_minimax(const Flags &f) {
  const json cfg = load_config(f, true);
  const std::uint64_t seed = seed_of(f, cfg);
  const KernelGeometry geom = geometry_from_json(field(cfg, "geometry"));
  double p = 2.0;
  if (cfg.contains("p") && cfg.at("p").is_string()) {
    if (cfg.at("p").get<std::string>() != "inf")
      throw InvalidArgument("config: p must be a number or \"inf\"");
    p = INFINITY;
  } else {
    p = get_or(cfg, "p", 2.0);
  }
  AdversarialPair pair = adversarial_pair(geom, get_req<std::size_t>(cfg, "s"), get_or(cfg, "beta", 1.0), p,
                                          get_req<double>(cfg, "eps"), get_or(cfg, "c_d", -1.0));
  const fs::path out(f.out);
  json pj = to_json(pair);
  if (get_or(cfg, "stress", false) && geom.is_cube()) {
    PipelineOptions opt = pipeline_from(cfg, seed, std::nullopt);
    opt.order_hint = static_cast<Eigen::Index>(pair.config.s());
    StressReport st = estimator_stress(pair, [&](const SampleSet &y) { return run_gradient_music(y, opt).estimates; });
    pj["stress"] = {{"error_vs_config", st.error_vs_config},
                    {"error_vs_alternate", st.error_vs_alternate},
                    {"lower_bound", st.lower_bound},
                    {"pass", st.pass}};
  }
  save_json(out / "pair.json", with_meta(pj, seed, cfg));
  save_json(out / "config.json", with_meta({{"geometry", to_json(geom)}, {"config", to_json(pair.config)}}, seed, cfg));
  save_json(out / "alternate.json",
            with_meta({{"geometry", to_json(geom)}, {"config", to_json(pair.alternate)}}, seed, cfg));
  std::vector<std::string> header;
  for (int k = 0; k < geom.d; ++k)
    header.push_back("x" + std::to_string(k + 1));
  header.push_back("re");
  header.push_back("im");
  CsvWriter w(header, csv_metadata(seed, cfg));
  for (std::size_t i = 0; i < pair.sites.size(); ++i) {
    std::vector<std::string> row;
    for (int k = 0; k < geom.d; ++k)
      row.push_back(fmt(pair.sites[i][k]));
    row.push_back(fmt(pair.eta[static_cast<Eigen::Index>(i)].real()));
    row.push_back(fmt(pair.eta[static_cast<Eigen::Index>(i)].imag()));
    w.row(row);
  }
  save_text(out / "noise.csv", w.str());
  std::cout << "delta " << fmt(pair.delta) << ", noise norm " << fmt(pair.norm(p)) << "\n";
  if (pj.contains("stress") && !pj["stress"]["pass"].get<bool>())
    throw AuditFailure("minimax: estimator stress check failed");
  return exit_ok;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Gradient-MUSIC spectral estimation"};
  app.set_version_flag("--version", version_string);
  app.require_subcommand(1);
  Flags flags;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", flags.config, "JSON config file");
    sub->add_option("--seed", flags.seed, "random seed");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--dump-grid", flags.dump_grid, "write grid values");
    sub->add_flag("--dump-trajectories", flags.dump_trajectories, "write descent trajectories");
  };
  struct Entry {
    const char *name;
    const char *help;
    int (*run)(const Flags &);
  };
  const Entry entries[] = {{"synth", "synthesize samples", cmd_synth},
                           {"estimate", "run the pipeline on samples", cmd_estimate},
                           {"landscape", "dump landscape grid values and diagnostics", cmd_landscape},
                           {"verify", "run the bound audits", cmd_verify},
                           {"experiment", "run an error-scaling experiment", cmd_experiment},
                           {"minimax", "emit an adversarial pair", cmd_minimax}};
  std::vector<std::pair<CLI::App *, int (*)(const Flags &)>> subs;
  for (const auto &e : entries) {
    CLI::App *sub = app.add_subcommand(e.name, e.help);
    add_common(sub);
    subs.emplace_back(sub, e.run);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return exit_usage;
  }

  try {
    for (auto &[sub, run] : subs)
      if (sub->parsed())
        return run(flags);
  } catch (const AuditFailure &e) {
    std::cerr << e.what() << "\n";
    return exit_audit;
  } catch (const InvalidArgument &e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_runtime;
  }
  return exit_usage;
}
