#pragma once

// Experiment configuration and execution behind the `perimetry` tool.
//
// A configuration is a JSON object; command-line flags are turned into the
// same object and the two are merged with the file taking precedence. Every
// run produces a CSV table and a JSON summary, both stamped with a hash of
// the resolved configuration (worker count and output paths excluded) and
// the seed.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "perimetry/boolean_lab.hpp"
#include "perimetry/counterexample.hpp"
#include "perimetry/dilation_lab.hpp"
#include "perimetry/shape_io.hpp"
#include "perimetry/suite.hpp"

namespace perimetry {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSuiteFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitBudget = 3;

inline const std::set<std::string>& known_commands() {
  static const std::set<std::string> c{"derivative", "covariogram", "qvariation", "contact", "counterexample", "suite"};
  return c;
}

struct ExperimentConfig {
  std::string command;
  json shape;  // inline shape document
  json spec;   // inline Boolean model document
  std::vector<Vector> q;
  std::vector<double> r;
  std::vector<double> u;
  std::uint64_t seed = 1;
  std::int64_t samples = 0;  // 0: command default
  std::int64_t points = 0;   // 0: command default
  int workers = 1;
  int m_max = 12;
  std::string level = "smoke";
  std::string method = "auto";
  double precision = 0.0;
  bool inject_fault = false;
  std::string csv_path;
  std::string json_path;
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// "0,0;1,0" -> {(0,0), (1,0)}.
inline std::vector<Vector> parse_points(const std::string& text, const std::string& where) {
  std::vector<Vector> out;
  std::stringstream all(text);
  std::string tuple;
  while (std::getline(all, tuple, ';')) {
    std::vector<double> c;
    std::stringstream ts(tuple);
    std::string tok;
    while (std::getline(ts, tok, ',')) {
      const auto b = tok.find_first_not_of(" \t"), e = tok.find_last_not_of(" \t");
      if (b == std::string::npos) throw ValidationError(where + ": empty coordinate in '" + text + "'");
      const std::string t = tok.substr(b, e - b + 1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc{} || ptr != t.data() + t.size()) throw ValidationError(where + ": bad number '" + t + "'");
      c.push_back(v);
    }
    if (c.empty() || static_cast<int>(c.size()) > kMaxDim) throw ValidationError(where + ": bad point '" + tuple + "'");
    out.push_back(Vector::from(c));
  }
  if (out.empty()) throw ValidationError(where + ": no points given");
  for (const auto& p : out)
    if (p.dim() != out.front().dim()) throw ValidationError(where + ": points of mixed dimension");
  return out;
}

inline std::vector<double> parse_numbers(const std::string& text, const std::string& where) {
  std::vector<double> out;
  for (const auto& p : parse_points(text, where))
    for (int a = 0; a < p.dim(); ++a) out.push_back(p[a]);
  return out;
}

namespace detail {

inline std::string line_ref(const std::string& source, const std::string& text, const std::string& key) {
  if (text.empty()) return source;
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return source;
  std::size_t line = 1;
  for (std::size_t i = 0; i < pos; ++i) line += text[i] == '\n';
  return source + ":" + std::to_string(line);
}

inline json boolean_spec_to_json(const BooleanModelSpec& s) {
  json g;
  std::visit(
      [&](const auto& law) {
        using G = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<G, FixedDisc>) {
          g = {{"type", "disc"}, {"radius", law.radius}};
        } else if constexpr (std::is_same_v<G, DiscRadiusLaw>) {
          g = {{"type", "disc_law"}, {"radii", law.radii}, {"probabilities", law.probabilities}};
        } else {
          g = {{"type", "box"}, {"half_extents", law.half_extents}, {"angle", law.angle}};
        }
      },
      s.grain);
  return {{"dim", s.dim},
          {"intensity", s.intensity},
          {"grain", g},
          {"window", {{"min", vector_to_json(s.window.lo)}, {"max", vector_to_json(s.window.hi)}}},
          {"margin", s.margin}};
}

}  // namespace detail

/// Boolean model document:
///   {"dim": 2, "intensity": 5, "grain": {"type": "disc", "radius": 0.1},
///    "window": {"min": [0, 0], "max": [1, 1]}, "margin": 0}
/// Grain types: disc {radius}, disc_law {radii, probabilities},
/// box {half_extents, angle}.
inline BooleanModelSpec boolean_spec_from_json(const json& j, const std::string& path = "$") {
  if (!j.is_object()) throw ValidationError(path + ": Boolean model spec must be an object");
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (k != "dim" && k != "intensity" && k != "grain" && k != "window" && k != "margin") {
      throw ValidationError(path + ": unknown key '" + k + "'");
    }
  }
  BooleanModelSpec s;
  s.dim = j.contains("dim") ? static_cast<int>(detail::json_number(j.at("dim"), path + ".dim")) : 2;
  s.intensity = detail::json_number(detail::require_key(j, "intensity", path), path + ".intensity");
  const auto& g = detail::require_key(j, "grain", path);
  const auto& type = detail::require_key(g, "type", path + ".grain");
  if (!type.is_string()) throw ValidationError(path + ".grain.type: expected a string");
  auto numbers = [&](const json& a, const std::string& p) {
    if (!a.is_array()) throw ValidationError(p + ": expected an array");
    std::vector<double> v;
    for (std::size_t i = 0; i < a.size(); ++i) v.push_back(detail::json_number(a[i], p + "[" + std::to_string(i) + "]"));
    return v;
  };
  const std::string t = type.get<std::string>();
  if (t == "disc") {
    s.grain = FixedDisc{detail::json_number(detail::require_key(g, "radius", path + ".grain"), path + ".grain.radius")};
  } else if (t == "disc_law") {
    s.grain = DiscRadiusLaw{numbers(detail::require_key(g, "radii", path + ".grain"), path + ".grain.radii"),
                            numbers(detail::require_key(g, "probabilities", path + ".grain"), path + ".grain.probabilities")};
  } else if (t == "box") {
    FixedBox b;
    b.half_extents = numbers(detail::require_key(g, "half_extents", path + ".grain"), path + ".grain.half_extents");
    if (g.contains("angle")) b.angle = detail::json_number(g.at("angle"), path + ".grain.angle");
    s.grain = b;
  } else {
    throw ValidationError(path + ".grain.type: unknown grain type '" + t + "'");
  }
  if (j.contains("window")) {
    const auto& w = j.at("window");
    s.window = Box{vector_from_json(detail::require_key(w, "min", path + ".window"), path + ".window.min"),
                   vector_from_json(detail::require_key(w, "max", path + ".window"), path + ".window.max")};
  } else {
    s.window = Box{Vector(s.dim), Vector(s.dim)};
    for (int a = 0; a < s.dim; ++a) s.window.hi[a] = 1.0;
  }
  if (j.contains("margin")) s.margin = detail::json_number(j.at("margin"), path + ".margin");
  s.validate();
  return s;
}

/// Reads a configuration file. Relative file references inside it are
/// resolved against the file's directory.
inline json load_config_file(const std::string& file, std::string* text_out = nullptr) {
  std::ifstream in(file);
  if (!in) throw ValidationError(file + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  json j = parse_json_text(text, file);
  if (!j.is_object()) throw ValidationError(file + ":1: config must be a JSON object");
  const auto dir = std::filesystem::path(file).parent_path();
  for (const char* key : {"shape", "spec", "csv", "json"}) {
    if (j.contains(key) && j.at(key).is_string()) {
      const std::filesystem::path p(j.at(key).get<std::string>());
      if (p.is_relative() && !dir.empty()) j[key] = (dir / p).string();
    }
  }
  if (text_out) *text_out = text;
  return j;
}

/// Overlays `file` on `flags`; keys present in both take the file value and
/// produce a warning when the values differ.
inline json merge_config(const json& flags, const json& file, std::vector<std::string>& warnings) {
  json out = flags;
  for (const auto& [k, v] : file.items()) {
    if (flags.contains(k) && flags.at(k) != v) warnings.push_back("config file value for '" + k + "' overrides the command-line flag");
    out[k] = v;
  }
  return out;
}

/// Validates a merged configuration object and resolves file references.
inline ExperimentConfig config_from_json(const json& j, const std::string& source = "config", const std::string& text = "") {
  static const std::set<std::string> keys{"command", "shape",     "spec",      "q",      "r",            "u",   "seed",
                                          "samples", "points",    "workers",   "m_max",  "level",        "method",
                                          "precision", "inject_fault", "csv", "json"};
  if (!j.is_object()) throw ValidationError(source + ": config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (!keys.count(k)) throw ValidationError(detail::line_ref(source, text, k) + ": unknown key '" + k + "'");
  }
  auto where = [&](const std::string& k) { return detail::line_ref(source, text, k) + ": key '" + k + "'"; };
  auto get_string = [&](const std::string& k) -> std::string {
    if (!j.at(k).is_string()) throw ValidationError(where(k) + ": expected a string");
    return j.at(k).get<std::string>();
  };
  auto get_int = [&](const std::string& k, std::int64_t lo, std::int64_t hi) -> std::int64_t {
    const auto& v = j.at(k);
    if (!v.is_number_integer() && !v.is_number_unsigned()) throw ValidationError(where(k) + ": expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < lo || x > hi) throw ValidationError(where(k) + ": value " + std::to_string(x) + " out of range");
    return x;
  };
  auto get_numbers = [&](const std::string& k) -> std::vector<double> {
    const auto& v = j.at(k);
    if (v.is_string()) return parse_numbers(v.get<std::string>(), where(k));
    if (!v.is_array()) throw ValidationError(where(k) + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ValidationError(where(k) + ": expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  };

  ExperimentConfig c;
  if (!j.contains("command")) throw ValidationError(source + ": missing key 'command'");
  c.command = get_string("command");
  if (!known_commands().count(c.command)) throw ValidationError(where("command") + ": unknown command '" + c.command + "'");
  if (j.contains("shape")) {
    c.shape = j.at("shape").is_string() ? load_json_file(get_string("shape")) : j.at("shape");
    (void)shape_from_json(c.shape, j.at("shape").is_string() ? get_string("shape") : where("shape"));
  }
  if (j.contains("spec")) {
    const json doc = j.at("spec").is_string() ? load_json_file(get_string("spec")) : j.at("spec");
    c.spec = detail::boolean_spec_to_json(boolean_spec_from_json(doc, j.at("spec").is_string() ? get_string("spec") : where("spec")));
  }
  if (j.contains("q")) {
    const auto& v = j.at("q");
    if (v.is_string()) {
      c.q = parse_points(v.get<std::string>(), where("q"));
    } else if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) c.q.push_back(vector_from_json(v[i], where("q") + "[" + std::to_string(i) + "]"));
      if (c.q.empty()) throw ValidationError(where("q") + ": no points given");
    } else {
      throw ValidationError(where("q") + ": expected \"x,y;x,y\" or an array of points");
    }
  }
  if (j.contains("r")) c.r = get_numbers("r");
  if (j.contains("u")) c.u = get_numbers("u");
  if (j.contains("seed")) c.seed = static_cast<std::uint64_t>(get_int("seed", 0, std::numeric_limits<std::int64_t>::max()));
  if (j.contains("samples")) c.samples = get_int("samples", 1, std::int64_t{1} << 40);
  if (j.contains("points")) c.points = get_int("points", 1, std::int64_t{1} << 30);
  if (j.contains("workers")) c.workers = static_cast<int>(get_int("workers", 0, 4096));
  if (j.contains("m_max")) c.m_max = static_cast<int>(get_int("m_max", 4, 20));
  if (j.contains("level")) {
    c.level = get_string("level");
    if (c.level != "smoke" && c.level != "full") throw ValidationError(where("level") + ": expected 'smoke' or 'full'");
  }
  if (j.contains("method")) {
    c.method = get_string("method");
    if (c.method != "auto" && c.method != "exact" && c.method != "grid" && c.method != "monte-carlo") {
      throw ValidationError(where("method") + ": expected auto, exact, grid or monte-carlo");
    }
  }
  if (j.contains("precision")) {
    if (!j.at("precision").is_number()) throw ValidationError(where("precision") + ": expected a number");
    c.precision = j.at("precision").get<double>();
  }
  if (j.contains("inject_fault")) {
    if (!j.at("inject_fault").is_boolean()) throw ValidationError(where("inject_fault") + ": expected true or false");
    c.inject_fault = j.at("inject_fault").get<bool>();
  }
  if (j.contains("csv")) c.csv_path = get_string("csv");
  if (j.contains("json")) c.json_path = get_string("json");
  return c;
}

/// The configuration as run, without worker count and output paths.
inline json resolved_config(const ExperimentConfig& c) {
  json q = json::array();
  for (const auto& p : c.q) q.push_back(vector_to_json(p));
  return {{"command", c.command}, {"shape", c.shape},     {"spec", c.spec},           {"q", q},
          {"r", c.r},             {"u", c.u},             {"seed", c.seed},           {"samples", c.samples},
          {"points", c.points},   {"m_max", c.m_max},     {"level", c.level},         {"method", c.method},
          {"precision", c.precision}, {"inject_fault", c.inject_fault}};
}

/// FNV-1a 64 of the canonical dump of the resolved configuration.
inline std::uint64_t config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : resolved_config(c).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  for (int i = 15; i >= 0; --i) {
    buf[i] = "0123456789abcdef"[v & 15];
    v >>= 4;
  }
  buf[16] = 0;
  return buf;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

class CsvWriter {
 public:
  CsvWriter(const ExperimentConfig& c, std::vector<std::string> header) {
    out_ << "# config_hash=" << hex64(config_hash(c)) << " seed=" << c.seed << " command=" << c.command << "\n";
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << quote(cells[i]);
    out_ << "\n";
  }

  static std::string num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
  }
  static std::string num(std::int64_t v) { return std::to_string(v); }

  std::string str() const { return out_.str(); }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }

  std::ostringstream out_;
};

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct RunOutput {
  int exit_code = kExitOk;
  std::string csv;
  json summary;
  std::vector<std::string> messages;
};

namespace detail {

inline json estimate_json(const Estimate& e) {
  return {{"value", e.value}, {"std_err", e.std_err}, {"samples", e.samples}, {"method", method_name(e.method)}};
}

inline SamplerConfig sampler_config(const ExperimentConfig& c) {
  SamplerConfig s;
  s.seed = c.seed;
  s.workers = c.workers;
  if (c.samples > 0) s.samples = c.samples;
  if (c.method == "exact") s.method = SamplingMethod::exact;
  if (c.method == "grid") s.method = SamplingMethod::grid;
  if (c.method == "monte-carlo") s.method = SamplingMethod::monte_carlo;
  return s;
}

inline Shape require_shape(const ExperimentConfig& c) {
  if (c.shape.is_null()) throw ValidationError(c.command + ": a shape is required (--shape)");
  return shape_from_json(c.shape, "shape");
}

inline StructuringElement require_q(const ExperimentConfig& c, int dim) {
  if (c.q.empty()) throw ValidationError(c.command + ": a structuring element is required (--q)");
  StructuringElement Q(c.q);
  if (Q.dim() != dim) throw ValidationError(c.command + ": Q has dimension " + std::to_string(Q.dim()) + ", expected " + std::to_string(dim));
  return Q;
}

inline RSchedule schedule(const ExperimentConfig& c) {
  RSchedule s;
  s.explicit_r = c.r;
  return s;
}

inline RunOutput run_derivative(const ExperimentConfig& c) {
  const Shape A = require_shape(c);
  const auto Q = require_q(c, A.dim());
  const auto rep = derivative_report(A, Q, schedule(c), sampler_config(c), c.precision);
  CsvWriter csv(c, {"r", "excess", "excess_std_err", "ratio", "ratio_std_err", "rhs"});
  for (std::size_t i = 0; i < rep.r_values.size(); ++i) {
    csv.row({CsvWriter::num(rep.r_values[i]), CsvWriter::num(rep.excess[i].value), CsvWriter::num(rep.excess[i].std_err),
             CsvWriter::num(rep.ratios[i]), CsvWriter::num(rep.ratio_err[i]), CsvWriter::num(rep.rhs_exact)});
  }
  RunOutput out;
  out.csv = csv.str();
  out.summary = {{"extrapolated", estimate_json(rep.extrapolated)},
                 {"rhs", rep.rhs_exact},
                 {"extrapolation_spread", rep.extrapolation_spread},
                 {"linear_fit", rep.linear_fit},
                 {"flagged", rep.flagged}};
  if (rep.flagged) {
    out.exit_code = kExitBudget;
    out.messages.push_back("derivative: requested precision not reached");
  }
  return out;
}

inline RunOutput run_covariogram(const ExperimentConfig& c) {
  const Shape A = require_shape(c);
  Vector u = c.u.empty() ? Vector::unit(A.dim(), 0) : Vector::from(c.u);
  if (u.dim() != A.dim()) throw ValidationError("covariogram: direction u has the wrong dimension");
  if (u.norm() == 0.0) throw ValidationError("covariogram: direction u must be nonzero");
  u = normalized(u);
  const auto rep = covariogram_derivative(A, u, schedule(c), sampler_config(c));
  CsvWriter csv(c, {"r", "slope", "std_err", "rhs"});
  for (std::size_t i = 0; i < rep.r_values.size(); ++i) {
    csv.row({CsvWriter::num(rep.r_values[i]), CsvWriter::num(rep.slopes[i]), CsvWriter::num(rep.slope_err[i]), CsvWriter::num(rep.rhs)});
  }
  RunOutput out;
  out.csv = csv.str();
  out.summary = {{"extrapolated", estimate_json(rep.extrapolated)}, {"rhs", rep.rhs}, {"linear_fit", rep.linear_fit}, {"u", vector_to_json(u)}};
  return out;
}

inline RunOutput run_qvariation(const ExperimentConfig& c) {
  const Shape A = require_shape(c);
  const auto Q = require_q(c, A.dim());
  const auto S = surface_measure(A, 4096);
  const int n = A.dim();
  std::vector<std::pair<std::string, double>> rows{
      {"qvariation", qvariation(S, Q)},
      {"qvariation_reflected", qvariation(S, Q.negated())},
      {"rhs_theorem1", rhs_theorem1(S, Q)},
      {"perimeter", S.total_mass()},
      {"circumradius", circumradius(Q)},
      {"inradius_in_span", inradius_in_span(Q, sphere_quadrature(n, n == 3 ? 2000 : 256)).radius},
      {"subspace_variation", subspace_variation(S, span_basis(Q.points()))}};
  if (n <= 3) rows.emplace_back("mean_width", mean_width(Q));
  CsvWriter csv(c, {"quantity", "value"});
  RunOutput out;
  for (const auto& [k, v] : rows) {
    csv.row({k, CsvWriter::num(v)});
    out.summary[k] = v;
  }
  out.csv = csv.str();
  return out;
}

inline RunOutput run_contact(const ExperimentConfig& c) {
  if (c.spec.is_null()) throw ValidationError("contact: a Boolean model spec is required (--spec)");
  const auto spec = boolean_spec_from_json(c.spec, "spec");
  const auto Q = c.q.empty() ? StructuringElement{Vector::unit(spec.dim, 0)} : require_q(c, spec.dim);
  const auto r = c.r.empty() ? default_contact_schedule(spec) : c.r;
  EstimationConfig ec{c.seed, c.samples > 0 ? c.samples : 2000, c.points > 0 ? c.points : 64, c.workers};
  const auto cd = contact_distribution(spec, Q, r, ec);
  CsvWriter csv(c, {"r", "H", "std_err"});
  for (const auto& p : cd.points) csv.row({CsvWriter::num(p.r), CsvWriter::num(p.H.value), CsvWriter::num(p.H.std_err)});
  RunOutput out;
  out.csv = csv.str();
  out.summary["volume_fraction_points"] = estimate_json(cd.volume_fraction);
  if (spec.dim == 2) {
    const auto h = hprime_check(spec, Q, r, ec);
    json D = json::array();
    for (std::size_t k = 0; k < h.r_values.size(); ++k) D.push_back({{"r", h.r_values[k]}, {"D", estimate_json(h.D[k])}});
    out.summary["volume_fraction"] = estimate_json(h.volume_fraction);
    out.summary["specific_perimeter"] = estimate_json(h.specific_perimeter);
    out.summary["slope"] = estimate_json(h.slope);
    out.summary["rose_integral"] = h.rose_integral;
    out.summary["rhs_rose"] = estimate_json(h.rhs_rose);
    out.summary["z_rose"] = h.z_rose;
    out.summary["isotropic"] = h.isotropic;
    out.summary["increments"] = D;
    if (h.isotropic) {
      out.summary["mean_width"] = h.mean_width;
      out.summary["rhs_mean_width"] = estimate_json(h.rhs_mean_width);
      out.summary["z_mean_width"] = h.z_mean_width;
    }
  } else {
    out.messages.push_back("contact: slope check needs n = 2; only H_Q was estimated");
  }
  return out;
}

inline RunOutput run_counterexample(const ExperimentConfig& c) {
  CounterexampleConfig cc{c.seed, c.samples > 0 ? c.samples : 200000, c.workers};
  const auto ce = counterexample(c.m_max, cc);
  CsvWriter csv(c, {"m", "r", "ratio_lower", "ratio_upper", "std_err", "analytic_bound", "ring_bound", "samples", "undecided"});
  for (const auto& row : ce.rows) {
    csv.row({CsvWriter::num(std::int64_t{row.m}), CsvWriter::num(row.r), CsvWriter::num(row.ratio_lower), CsvWriter::num(row.ratio_upper),
             CsvWriter::num(row.std_err), CsvWriter::num(row.analytic_bound), CsvWriter::num(row.ring_bound), CsvWriter::num(row.samples),
             CsvWriter::num(row.undecided)});
  }
  RunOutput out;
  out.csv = csv.str();
  json rings = json::array();
  for (const auto& g : ce.rings) {
    rings.push_back({{"m", g.m},
                     {"inner", g.inner},
                     {"outer", g.outer},
                     {"net_spacing", g.delta},
                     {"points", g.points},
                     {"radius", g.radius},
                     {"q_spacing", g.eta},
                     {"ring_area", g.ring_area},
                     {"set_area", g.set_area},
                     {"set_perimeter", g.set_perimeter}});
  }
  out.summary = {{"m_max", ce.m_max}, {"perimeter", ce.perimeter}, {"qvariation_bound", ce.qvariation_bound}, {"rings", rings}};
  if (c.m_max >= 6) out.summary["growth_ratio_vs_m6"] = ce.rows.back().ratio_lower / ce.rows[2].ratio_lower;
  return out;
}

inline RunOutput run_suite_command(const ExperimentConfig& c) {
  SuiteOptions opt;
  opt.level = c.level == "full" ? SuiteLevel::full : SuiteLevel::smoke;
  opt.seed = c.seed;
  opt.workers = c.workers;
  opt.inject_corrupt_normal = c.inject_fault;
  const auto rep = run_suite(opt);
  CsvWriter csv(c, {"check", "passed", "detail"});
  json checks = json::array();
  RunOutput out;
  for (const auto& ch : rep.checks) {
    csv.row({ch.name, ch.passed ? "1" : "0", ch.detail});
    checks.push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
    if (!ch.passed) out.messages.push_back("FAILED " + ch.name + ": " + ch.detail);
  }
  out.csv = csv.str();
  out.summary = {{"level", c.level}, {"passed", rep.passed()}, {"checks", checks}};
  if (!rep.passed()) out.exit_code = kExitSuiteFailure;
  return out;
}

}  // namespace detail

/// Runs one experiment. Validation and budget problems surface as exit codes
/// with the message in `messages`; nothing is written to disk.
inline RunOutput run(const ExperimentConfig& c) {
  RunOutput out;
  try {
    if (c.command == "derivative") out = detail::run_derivative(c);
    else if (c.command == "covariogram") out = detail::run_covariogram(c);
    else if (c.command == "qvariation") out = detail::run_qvariation(c);
    else if (c.command == "contact") out = detail::run_contact(c);
    else if (c.command == "counterexample") out = detail::run_counterexample(c);
    else if (c.command == "suite") out = detail::run_suite_command(c);
    else throw ValidationError("unknown command '" + c.command + "'");
  } catch (const ValidationError& e) {
    out = RunOutput{};
    out.exit_code = kExitValidation;
    out.messages.push_back(std::string("error: ") + e.what());
    return out;
  } catch (const BudgetError& e) {
    out = RunOutput{};
    out.exit_code = kExitBudget;
    out.messages.push_back(std::string("error: ") + e.what());
    return out;
  }
  json summary = {{"command", c.command},
                  {"config", resolved_config(c)},
                  {"config_hash", hex64(config_hash(c))},
                  {"seed", c.seed},
                  {"workers", resolve_workers(c.workers)},
                  {"exit_code", out.exit_code},
                  {"result", out.summary}};
  out.summary = std::move(summary);
  return out;
}

/// Runs and writes the CSV and JSON outputs named in the configuration.
inline int execute(const ExperimentConfig& c, std::ostream& log, std::ostream& stdout_stream) {
  auto out = run(c);
  for (const auto& m : out.messages) log << m << "\n";
  if (out.summary.is_null()) return out.exit_code;
  auto write = [&](const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
      log << "error: cannot write " << path << "\n";
      return false;
    }
    f << body;
    return static_cast<bool>(f);
  };
  if (!c.csv_path.empty() && !write(c.csv_path, out.csv)) return kExitValidation;
  const std::string summary = out.summary.dump(2) + "\n";
  if (!c.json_path.empty()) {
    if (!write(c.json_path, summary)) return kExitValidation;
  } else {
    stdout_stream << summary;
  }
  return out.exit_code;
}

}  // namespace perimetry
