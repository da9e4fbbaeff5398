#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "seplab/bounds.hpp"
#include "seplab/distributions.hpp"
#include "seplab/error.hpp"
#include "seplab/networks.hpp"
#include "seplab/numerics.hpp"
#include "seplab/sample_io.hpp"
#include "seplab/witness.hpp"

namespace seplab {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kConfigSchema = "seplab.config/1";

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"verify-fourier", "sep3v2", "sep2vrkhs",
                                                 "bounds-table", "kappa", "sigma-table"};
  return names;
}

struct ExperimentConfig {
  std::string experiment;
  int d_min = 2;
  int d_max = 10;
  std::uint64_t seed = 0;
  std::int64_t mc_samples = 100000;
  int features = 1000;
  std::optional<double> sigma, x0, eps, ell;
  std::string format = "csv";
  std::string out = ".";
};

// "2..10" or "7".
inline std::pair<int, int> parse_d_range(const std::string& s) {
  auto to_int = [&](const std::string& t) {
    int v = 0;
    auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
      throw Error(ErrorKind::ConfigInvalid, "bad dimension range '" + s + "'");
    return v;
  };
  const auto dots = s.find("..");
  if (dots == std::string::npos) {
    const int v = to_int(s);
    return {v, v};
  }
  return {to_int(s.substr(0, dots)), to_int(s.substr(dots + 2))};
}

inline void validate(const ExperimentConfig& c) {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::ConfigInvalid, m); };
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end()) bad("unknown experiment '" + c.experiment + "'");
  if (c.d_min < 1 || c.d_max < c.d_min) bad("dimension range must satisfy 1 <= lo <= hi");
  if (c.d_max > 100000) bad("dimension range too large");
  if (c.mc_samples < 1000) bad("mc_samples must be >= 1000");
  if (c.features < 100) bad("features must be >= 100");
  if (c.format != "csv" && c.format != "json") bad("format must be csv or json");
  if (c.sigma && !(*c.sigma > 0.0)) bad("sigma must be > 0");
  if (c.ell && !(*c.ell > 0.0)) bad("ell must be > 0");
  if (c.eps && !(*c.eps > 0.0 && *c.eps < 1.0)) bad("eps must lie in (0, 1)");
  if (c.x0 && !(*c.x0 > 0.0 && *c.x0 < 0.25)) throw Error(ErrorKind::BadPlateau, "x0 must lie in (0, 1/4)");
  if (c.experiment == "verify-fourier" && c.d_max > 12) bad("verify-fourier enumerates 4^d points; d <= 12");
  if ((c.experiment == "sep3v2" || c.experiment == "bounds-table") && c.d_min < 2) bad(c.experiment + " needs d >= 2");
}

// The config file: {"schema": "seplab.config/1", "experiment", "d_range": [lo, hi],
// "seed", "mc_samples", "features", "overrides": {"sigma", "x0", "eps", "ell"},
// "format", "out"}. Everything except the schema is optional.
inline void apply_config_json(ExperimentConfig& c, const nlohmann::json& j) {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::ConfigInvalid, m); };
  if (!j.is_object()) bad("config must be a JSON object");
  if (!j.contains("schema") || j["schema"] != kConfigSchema)
    bad(std::string("config schema must be \"") + kConfigSchema + "\"");
  static const std::vector<std::string> known = {"schema", "experiment", "d_range", "seed", "mc_samples",
                                                 "features", "overrides", "format", "out"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) bad("unknown config field '" + it.key() + "'");
  try {
    if (j.contains("experiment")) c.experiment = j["experiment"].get<std::string>();
    if (j.contains("d_range")) {
      const auto& r = j["d_range"];
      if (r.is_string()) std::tie(c.d_min, c.d_max) = parse_d_range(r.get<std::string>());
      else if (r.is_array() && r.size() == 2) {
        c.d_min = r[0].get<int>();
        c.d_max = r[1].get<int>();
      } else bad("d_range must be [lo, hi] or \"lo..hi\"");
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("mc_samples")) c.mc_samples = j["mc_samples"].get<std::int64_t>();
    if (j.contains("features")) c.features = j["features"].get<int>();
    if (j.contains("format")) c.format = j["format"].get<std::string>();
    if (j.contains("out")) c.out = j["out"].get<std::string>();
    if (j.contains("overrides")) {
      const auto& o = j["overrides"];
      if (!o.is_object()) bad("overrides must be an object");
      for (auto it = o.begin(); it != o.end(); ++it) {
        const double v = it.value().get<double>();
        if (it.key() == "sigma") c.sigma = v;
        else if (it.key() == "x0") c.x0 = v;
        else if (it.key() == "eps") c.eps = v;
        else if (it.key() == "ell") c.ell = v;
        else bad("unknown override '" + it.key() + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("config field has the wrong type: ") + e.what());
  }
}

inline ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }
  apply_config_json(base, j);
  return base;
}

// Everything that affects the numbers; out and format are left out.
inline nlohmann::ordered_json canonical_config(const ExperimentConfig& c) {
  nlohmann::ordered_json o = nlohmann::ordered_json::object();
  if (c.sigma) o["sigma"] = *c.sigma;
  if (c.x0) o["x0"] = *c.x0;
  if (c.eps) o["eps"] = *c.eps;
  if (c.ell) o["ell"] = *c.ell;
  return {{"schema", kConfigSchema}, {"experiment", c.experiment}, {"d_range", {c.d_min, c.d_max}},
          {"seed", c.seed}, {"mc_samples", c.mc_samples}, {"features", c.features}, {"overrides", o}};
}

inline std::string config_hash(const ExperimentConfig& c) {
  const std::string s = canonical_config(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// One output row; keys keep insertion order and every row has a boolean "pass".
using ReportRow = nlohmann::ordered_json;

struct Report {
  ExperimentConfig config;
  std::vector<ReportRow> rows;

  bool all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.at("pass").get<bool>(); });
  }
};

namespace detail {

inline std::uint64_t experiment_stream(const std::string& name, int d) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return (h << 20) ^ std::uint64_t(d);
}

inline GridPairSpec grid_spec_for(const ExperimentConfig& c, int d) {
  GridPairSpec s;
  s.d = d;
  s.x0 = c.x0.value_or(0.125);
  s.eps = c.eps.value_or(0.125);
  s.sigma = c.sigma ? *c.sigma : sigma_d_grid(d, s.eps, s.x0);
  s.validate();
  return s;
}

inline SinePairSpec sine_spec_for(const ExperimentConfig& c, int d) {
  SinePairSpec s{d, c.sigma ? *c.sigma : sigma_d_sine(d), c.ell ? *c.ell : std::sqrt(double(d))};
  s.validate();
  return s;
}

inline ReportRow row_verify_fourier(const ExperimentConfig& c, int d, RngStream& rng) {
  const auto spec = grid_spec_for(c, d);
  const double bmax = d + std::sqrt(double(d));
  const int cases = 20;
  double max_abs = 0.0, max_rel = 0.0, max_imag = 0.0;
  bool ok = true;
  for (int k = 0; k < cases; ++k) {
    const Vec th = sample_sphere(d, rng);
    const double b = bmax * (2.0 * rng.uniform() - 1.0);
    const double ex = grid_witness_exact(spec, th, b);
    const auto fw = grid_witness_fourier_detail(spec, th, b);
    const double ad = std::abs(ex - fw.value);
    // relative error only where the witness has not underflowed
    const double rd = std::abs(ex) > 1e-12 ? ad / std::abs(ex) : 0.0;
    max_abs = std::max(max_abs, ad);
    max_rel = std::max(max_rel, rd);
    max_imag = std::max(max_imag, std::abs(fw.imag_residual));
    ok = ok && (ad <= 1e-6 || rd <= 1e-4);
  }
  ok = ok && max_imag <= 1e-8;
  return {{"d", d}, {"sigma", spec.sigma}, {"n_cases", cases}, {"max_abs_diff", max_abs},
          {"max_rel_diff", max_rel}, {"max_imag_residual", max_imag}, {"pass", ok}};
}

inline SearchConfig experiment_search_config() {
  SearchConfig s;
  s.n_starts = 4;
  s.max_iters = 40;
  return s;
}

inline ReportRow row_sep3v2(const ExperimentConfig& c, int d, RngStream& rng) {
  const auto spec = grid_spec_for(c, d);
  const auto relu = ActivationSpec::relu();
  const auto search = two_layer_ipm_search(spec, relu, experiment_search_config(), rng);
  const double bound = upper_bound_2l_explicit(d, spec.sigma, std::nullopt, relu).total;
  const auto cert = three_layer_certificate(spec, std::size_t(c.mc_samples), rng);
  const auto& g = cert.gap;
  const double ci_low = g.estimate.value - 3.0 * g.estimate.std_error;
  const bool oriented = (g.mean_plus - g.mean_minus) * g.orientation > 0.0;
  const bool ok = search.value <= bound && oriented && cert.passes;
  return {{"d", d}, {"d2L_search", search.value}, {"d2L_bound", bound}, {"d3L_mc", g.estimate.value},
          {"d3L_ci_low", ci_low}, {"d3L_formula", cert.formula}, {"pass", ok}};
}

inline ReportRow row_sep2vrkhs(const ExperimentConfig& c, int d, RngStream& rng) {
  const auto spec = sine_spec_for(c, d);
  const auto relu = ActivationSpec::relu();
  const double w = sec4_two_layer_lower(spec, relu);
  const auto mmd = mmd_estimate(spec, relu, c.features, rng);
  const double rkhs = rkhs_upper_bound_explicit(spec, relu).total;
  const bool ok = w > 0.0 && mmd.value <= rkhs + 3.0 * mmd.std_error;
  return {{"d", d}, {"witness_2l", w}, {"mmd_est", mmd.value}, {"mmd_se", mmd.std_error},
          {"rkhs_bound", rkhs}, {"pass", ok}};
}

inline ReportRow row_bounds_table(const ExperimentConfig& c, int d, RngStream&) {
  const auto spec = grid_spec_for(c, d);
  const auto ub = upper_bound_2l_explicit(d, spec.sigma);
  const auto F = build_F(spec);
  const double pn_b = path_norm_b(F), pn_b_bound = path_norm_b_bound_F(d, spec.x0);
  const double pn_nb = path_norm_nb(F), formula = path_norm_nb_F(d, spec.x0);
  const bool ok = std::abs(pn_nb - formula) <= 1e-12 * formula && pn_b <= pn_b_bound;
  return {{"d", d}, {"sigma", spec.sigma}, {"kappa_d", std::pow(kappa_value(), d)},
          {"B1", ub.term("B1")}, {"B2", ub.term("B2")}, {"interior", ub.term("interior")},
          {"tail", ub.term("tail")}, {"total", ub.total}, {"pn_b", pn_b}, {"pn_b_bound", pn_b_bound},
          {"pn_nb", pn_nb}, {"pn_nb_formula", formula}, {"pass", ok}};
}

inline ReportRow row_kappa(const ExperimentConfig&, int, RngStream&) {
  const auto k = kappa();
  const double closed = 4.0 / (3.0 * std::sqrt(3.0));
  const double arg = std::atan(1.0 / std::sqrt(2.0));
  const bool ok = std::abs(k.value - closed) <= 1e-12 && std::abs(k.maximizer - arg) <= 1e-10 &&
                  k.critical_points.size() == 6;
  return {{"kappa", k.value}, {"maximizer", k.maximizer}, {"closed_form", closed},
          {"critical_points", k.critical_points.size()}, {"pass", ok}};
}

inline ReportRow row_sigma_table(const ExperimentConfig& c, int d, RngStream&) {
  const double eps = c.eps.value_or(0.125), x0 = c.x0.value_or(0.125);
  const double sg = sigma_d_grid(d, eps, x0), ss = sigma_d_sine(d);
  const double rg = sigma_grid_residual(d, eps, x0, sg), rs = sigma_sine_residual(d, ss);
  const bool decreasing = d == 1 || sg < sigma_d_grid(d - 1, eps, x0);
  const bool ok = std::abs(rg) <= 1e-12 && std::abs(rs) <= 1e-12 && decreasing && sg <= 1.0 / 6.0 && ss <= 2.0;
  return {{"d", d}, {"sigma_grid", sg}, {"grid_residual", rg}, {"sigma_grid_log", sg * std::log(d + 1.0)},
          {"sigma_sine", ss}, {"sine_residual", rs}, {"pass", ok}};
}

inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SEPLAB_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = std::min<unsigned>(n, unsigned(v));
  }
  return n;
}

}  // namespace detail

// Rows are computed in parallel, one RNG stream per (experiment, d), and emitted
// in order of d, so the output does not depend on the worker count.
inline Report run(const ExperimentConfig& cfg, unsigned workers) {
  validate(cfg);
  using RowFn = ReportRow (*)(const ExperimentConfig&, int, RngStream&);
  RowFn fn = nullptr;
  if (cfg.experiment == "verify-fourier") fn = detail::row_verify_fourier;
  else if (cfg.experiment == "sep3v2") fn = detail::row_sep3v2;
  else if (cfg.experiment == "sep2vrkhs") fn = detail::row_sep2vrkhs;
  else if (cfg.experiment == "bounds-table") fn = detail::row_bounds_table;
  else if (cfg.experiment == "kappa") fn = detail::row_kappa;
  else fn = detail::row_sigma_table;

  std::vector<int> ds;
  if (cfg.experiment == "kappa") ds = {0};
  else
    for (int d = cfg.d_min; d <= cfg.d_max; ++d) ds.push_back(d);

  Report rep{cfg, std::vector<ReportRow>(ds.size())};
  std::vector<std::exception_ptr> errors(ds.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < ds.size(); i = next++) {
      try {
        RngStream rng(cfg.seed, detail::experiment_stream(cfg.experiment, ds[i]));
        rep.rows[i] = fn(cfg, ds[i], rng);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned nw = std::clamp<unsigned>(workers, 1u, unsigned(ds.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < nw; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rep;
}

inline Report run(const ExperimentConfig& cfg) { return run(cfg, detail::worker_count()); }

inline nlohmann::ordered_json report_metadata(const Report& r) {
  return {{"version", kVersion}, {"experiment", r.config.experiment}, {"seed", r.config.seed},
          {"config_hash", config_hash(r.config)}};
}

namespace detail {

inline std::string csv_cell(const nlohmann::ordered_json& v) {
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace detail

inline void write_csv(const Report& r, std::ostream& os) {
  const auto meta = report_metadata(r);
  for (const auto& [k, v] : meta.items()) os << "# " << k << ": " << detail::csv_cell(v) << '\n';
  if (r.rows.empty()) return;
  bool first = true;
  for (const auto& [k, v] : r.rows.front().items()) {
    os << (first ? "" : ",") << k;
    first = false;
  }
  os << '\n';
  for (const auto& row : r.rows) {
    first = true;
    for (const auto& [k, v] : row.items()) {
      os << (first ? "" : ",") << detail::csv_cell(v);
      first = false;
    }
    os << '\n';
  }
}

inline void write_json(const Report& r, std::ostream& os) {
  nlohmann::ordered_json j = {{"metadata", report_metadata(r)}, {"rows", r.rows}};
  os << j.dump(2) << '\n';
}

struct LoadedReport {
  nlohmann::ordered_json metadata;
  std::vector<ReportRow> rows;
};

inline LoadedReport read_json_report(std::istream& is) {
  try {
    const auto j = nlohmann::ordered_json::parse(is);
    return {j.at("metadata"), j.at("rows").get<std::vector<ReportRow>>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::IoFailure, std::string("not a report: ") + e.what());
  }
}

// Writes DIR/<experiment>.<csv|json>; returns the path.
inline std::filesystem::path emit(const Report& r) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(r.config.out, ec);
  if (ec) throw Error(ErrorKind::IoFailure, "cannot create output directory " + r.config.out + ": " + ec.message());
  const fs::path path = fs::path(r.config.out) / (r.config.experiment + "." + r.config.format);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  if (r.config.format == "csv") write_csv(r, os);
  else write_json(r, os);
  if (!os) throw Error(ErrorKind::IoFailure, "failed writing " + path.string());
  return path;
}

}  // namespace seplab
