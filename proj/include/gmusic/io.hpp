#pragma once
// JSON and CSV serialization for configurations, samples, spectra and reports.

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "gmusic/error.hpp"
#include "gmusic/geometry.hpp"
#include "gmusic/hankel.hpp"
#include "gmusic/kernel.hpp"
#include "gmusic/minimax.hpp"
#include "gmusic/optimizer.hpp"
#include "gmusic/signal.hpp"

namespace gmusic {

using json = nlohmann::json;

inline constexpr const char *version_string = "0.1.0";
/// Version tag of the canonical enumeration of X and X⋆ (lexicographic, first axis slowest).
inline constexpr const char *enumeration_version = "lex-first-slowest-v1";

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string &bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

/// Shortest round-trip decimal form of a double.
inline std::string fmt(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// JSON field helpers with readable errors

inline const json &field(const json &j, const std::string &key) {
  if (!j.is_object() || !j.contains(key))
    throw InvalidArgument("config: missing field '" + key + "'");
  return j.at(key);
}

template <class T> T get_or(const json &j, const std::string &key, T fallback) {
  if (!j.is_object() || !j.contains(key))
    return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception &e) {
    throw InvalidArgument("config: field '" + key + "' has the wrong type (" + e.what() + ")");
  }
}

template <class T> T get_req(const json &j, const std::string &key) {
  const json &v = field(j, key);
  try {
    return v.get<T>();
  } catch (const json::exception &e) {
    throw InvalidArgument("config: field '" + key + "' has the wrong type (" + e.what() + ")");
  }
}

inline json load_json(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw InvalidArgument("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw InvalidArgument("malformed JSON in " + path.string() + ": " + e.what());
  }
}

inline void save_text(const std::filesystem::path &path, const std::string &text) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write " + path.string());
  out << text;
}

inline void save_json(const std::filesystem::path &path, const json &j) { save_text(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Value types

inline json to_json(const Point &p) {
  json a = json::array();
  for (Eigen::Index k = 0; k < p.size(); ++k)
    a.push_back(p[k]);
  return a;
}

inline Point point_from_json(const json &j, int d) {
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    throw InvalidArgument("config: expected a point with " + std::to_string(d) + " coordinates");
  Point p(d);
  for (int k = 0; k < d; ++k) {
    if (!j[static_cast<std::size_t>(k)].is_number())
      throw InvalidArgument("config: point coordinates must be numbers");
    p[k] = j[static_cast<std::size_t>(k)].get<double>();
  }
  return p;
}

inline json to_json(const cplx &z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json &j) {
  if (j.is_number())
    return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw InvalidArgument("config: complex values are numbers or [re, im] pairs");
}

inline json to_json(const KernelGeometry &g) {
  return {{"kind", g.name()}, {"m", g.m}, {"d", g.d}};
}

inline KernelGeometry geometry_from_json(const json &j) {
  const std::string kind = get_or<std::string>(j, "kind", "cube");
  const int d = get_req<int>(j, "d");
  if (kind == "cube") {
    const double m = get_req<double>(j, "m");
    if (m != std::floor(m))
      throw InvalidArgument("config: cube aperture m must be an integer");
    return KernelGeometry::cube(static_cast<int>(m), d);
  }
  if (kind == "ball")
    return KernelGeometry::ball(get_req<double>(j, "m"), d);
  throw InvalidArgument("config: unknown geometry kind '" + kind + "'");
}

inline json to_json(const ParameterConfig &c) {
  json t = json::array(), a = json::array();
  for (const auto &p : c.theta)
    t.push_back(to_json(p));
  for (const auto &z : c.a)
    a.push_back(to_json(z));
  return {{"theta", t}, {"a", a}};
}

inline ParameterConfig config_from_json(const json &j, int d) {
  ParameterConfig c;
  const json &t = field(j, "theta");
  if (!t.is_array())
    throw InvalidArgument("config: 'theta' must be an array of points");
  for (const auto &p : t)
    c.theta.push_back(point_from_json(p, d));
  if (j.contains("a")) {
    for (const auto &z : j.at("a"))
      c.a.push_back(complex_from_json(z));
  } else {
    c.a.assign(c.theta.size(), cplx(1.0, 0.0));
  }
  if (c.a.size() != c.theta.size())
    throw InvalidArgument("config: 'theta' and 'a' differ in length");
  return c;
}

inline json to_json(const SampleSet &s) {
  json v = json::array();
  for (Eigen::Index i = 0; i < s.values.size(); ++i)
    v.push_back(to_json(s.values[i]));
  return {{"geometry", to_json(s.geom)}, {"enumeration", enumeration_version}, {"values", v}};
}

inline SampleSet samples_from_json(const json &j) {
  SampleSet s;
  s.geom = geometry_from_json(field(j, "geometry"));
  const json &v = field(j, "values");
  if (!v.is_array())
    throw InvalidArgument("samples: 'values' must be an array");
  s.values.resize(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    s.values[static_cast<Eigen::Index>(i)] = complex_from_json(v[i]);
  s.validate();
  return s;
}

inline AmplitudeLaw amplitude_law_from_string(const std::string &s) {
  if (s == "pm1" || s == "+-1" || s == "plus_minus_one")
    return AmplitudeLaw::PlusMinusOne;
  if (s == "unit" || s == "unit_modulus")
    return AmplitudeLaw::UnitModulus;
  if (s == "given")
    return AmplitudeLaw::Given;
  throw InvalidArgument("config: unknown amplitude law '" + s + "'");
}

inline json to_json(const LandscapeDiagnostics &g) {
  return {{"epsilon", g.epsilon},       {"rho", g.rho},
          {"alpha0", g.alpha0},         {"alpha1", g.alpha1},
          {"cond1_lhs", g.cond1_lhs},   {"cond1_rhs", g.cond1_rhs},
          {"cond2_lhs", g.cond2_lhs},   {"cond2_rhs", g.cond2_rhs},
          {"cond3_lhs", g.cond3_lhs},   {"cond3_rhs", g.cond3_rhs},
          {"grad_sup_bound", g.grad_sup_bound}, {"hessian_window", {g.hessian_lo, g.hessian_hi}},
          {"tau_ok", g.tau_ok},         {"admissible", g.admissible}};
}

inline json to_json(const AuditEntry &e) {
  return {{"quantity", e.quantity}, {"bound", e.bound}, {"observed", e.observed}, {"witness", e.witness}, {"pass", e.pass}};
}

inline json to_json(const WedinReport &w) {
  return {{"hypothesis_holds", w.hypothesis_holds},
          {"skipped_reason", w.skipped_reason},
          {"sigma_s_clean", w.sigma_s_clean},
          {"sigma_s_noisy", w.sigma_s_noisy},
          {"noise_norm", w.noise_norm},
          {"projector_gap", w.projector_gap},
          {"projector_bound", w.projector_bound},
          {"wedin_bound", w.wedin_bound},
          {"noise_bounds", {{"p1", w.noise_bound_p1}, {"p2", w.noise_bound_p2}, {"pinf", w.noise_bound_pinf}}},
          {"dense", w.dense},
          {"pass", w.pass}};
}

/// Report without wall-clock fields so it can be compared byte for byte.
inline json to_json(const PipelineReport &r, bool include_timing = true) {
  json est = json::array(), init = json::array(), amps = json::array();
  for (const auto &p : r.estimates)
    est.push_back(to_json(p));
  for (const auto &p : r.initializers)
    init.push_back(to_json(p));
  for (const auto &z : r.amplitudes)
    amps.push_back(to_json(z));
  json j = {{"detected_order", r.detected_order},
            {"singular_values", r.singular_values},
            {"svd_method", r.svd_method},
            {"initializers", init},
            {"estimates", est},
            {"amplitudes", amps},
            {"final_values", r.final_values},
            {"iterations", r.iterations},
            {"eps_target", r.eps_target},
            {"step_size", r.hyper.h},
            {"max_iterations", r.hyper.n},
            {"alpha1", r.hyper.alpha1},
            {"mesh_target", r.hyper.mesh_target},
            {"grid_counts", r.grid_counts},
            {"grid_mesh", r.grid_mesh},
            {"matvecs", r.matvecs},
            {"flags", r.flags}};
  j["matching_error"] = std::isnan(r.matching_error) ? json(nullptr) : json(r.matching_error);
  if (include_timing)
    j["seconds"] = r.seconds;
  return j;
}

inline json to_json(const AdversarialPair &p) {
  return {{"geometry", to_json(p.geom)},
          {"config", to_json(p.config)},
          {"alternate", to_json(p.alternate)},
          {"delta", p.delta},
          {"p", std::isinf(p.p) ? json("inf") : json(p.p)},
          {"epsilon", p.epsilon},
          {"beta", p.beta},
          {"norms", {{"l1", p.norm(1.0)}, {"l2", p.norm(2.0)}, {"linf", p.norm(INFINITY)}}},
          {"pointwise_bound", p.pointwise_bound()},
          {"data_residual", p.data_residual()},
          {"approximate_norms", p.approximate}};
}

// ---------------------------------------------------------------------------
// CSV with a '#' metadata preamble

class CsvWriter {
public:
  CsvWriter(std::vector<std::string> header, std::vector<std::pair<std::string, std::string>> meta = {})
      : header_(std::move(header)), meta_(std::move(meta)) {}

  void row(const std::vector<std::string> &cells) {
    require(cells.size() == header_.size(), "CsvWriter: row width does not match header");
    rows_.push_back(cells);
  }

  std::string str() const {
    std::ostringstream os;
    for (const auto &[k, v] : meta_)
      os << "# " << k << ": " << v << "\n";
    write_line(os, header_);
    for (const auto &r : rows_)
      write_line(os, r);
    return os.str();
  }

  void save(const std::filesystem::path &path) const { save_text(path, str()); }

private:
  static void write_line(std::ostream &os, const std::vector<std::string> &cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i)
        os << ',';
      os << cells[i];
    }
    os << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::vector<std::string>> rows_;
};

inline std::vector<std::pair<std::string, std::string>> csv_metadata(std::uint64_t seed, const json &config) {
  return {{"version", version_string}, {"seed", std::to_string(seed)}, {"config_hash", hex64(fnv1a(config.dump()))}};
}

/// Sample values as CSV: site coordinates, Re, Im.
inline std::string samples_csv(const SampleSet &s, std::uint64_t seed, const json &config) {
  std::vector<std::string> header;
  for (int k = 0; k < s.geom.d; ++k)
    header.push_back("x" + std::to_string(k + 1));
  header.push_back("re");
  header.push_back("im");
  CsvWriter w(header, csv_metadata(seed, config));
  const PointSet sites = s.sites();
  for (std::size_t i = 0; i < sites.size(); ++i) {
    std::vector<std::string> r;
    for (int k = 0; k < s.geom.d; ++k)
      r.push_back(std::to_string(static_cast<long>(sites[i][k])));
    r.push_back(fmt(s.values[static_cast<Eigen::Index>(i)].real()));
    r.push_back(fmt(s.values[static_cast<Eigen::Index>(i)].imag()));
    w.row(r);
  }
  return w.str();
}

/// Spectrum descriptor in JSON plus raw little-endian doubles (interleaved re/im
/// of the left vectors, column major) in a sidecar file.
inline void save_spectrum(const std::filesystem::path &json_path, const SingularSpectrum &spec,
                          const KernelGeometry &geom) {
  std::filesystem::path bin = json_path;
  bin.replace_extension(".bin");
  json j = {{"geometry", to_json(geom)},
            {"enumeration", enumeration_version},
            {"values", std::vector<double>(spec.values.data(), spec.values.data() + spec.values.size())},
            {"residuals", spec.residuals},
            {"method", spec.method},
            {"left_vectors", {{"file", bin.filename().string()}, {"rows", spec.left.rows()}, {"cols", spec.left.cols()},
                              {"layout", "column-major complex128 (re, im)"}}}};
  save_json(json_path, j);
  std::ofstream out(bin, std::ios::binary);
  out.write(reinterpret_cast<const char *>(spec.left.data()),
            static_cast<std::streamsize>(sizeof(cplx) * static_cast<std::size_t>(spec.left.size())));
}

} // namespace gmusic
