#include "hypstab/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "hypstab/parallel.hpp"
#include "json.hpp"

namespace hypstab {

using json = nlohmann::json;

namespace {

// ---- config reading ----

[[noreturn]] void bad(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) bad(path, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
      bad(path.empty() ? k : path + "." + k, "unknown key");
    }
  }
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double number(const json& v, const std::string& path) {
  if (!v.is_number()) bad(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(path, "expected a finite number");
  return x;
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) bad(path, "expected an integer");
  return v.get<int>();
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) bad(path, "expected a string");
  return v.get<std::string>();
}

bool boolean(const json& v, const std::string& path) {
  if (!v.is_boolean()) bad(path, "expected true or false");
  return v.get<bool>();
}

std::string index_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

bool is_matrix_shaped(const json& v) {
  return v.is_array() && !v.empty() && v[0].is_array() && (v[0].empty() || !v[0][0].is_array());
}

Matrix real_matrix(const json& v, const std::string& path) {
  if (!is_matrix_shaped(v)) bad(path, "expected an array of rows");
  const auto rows = v.size();
  const auto cols = v[0].size();
  if (cols == 0) bad(path, "empty row");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string rp = index_path(path, i);
    if (!v[i].is_array() || v[i].size() != cols) bad(rp, "rows differ in length");
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = number(v[i][j], index_path(rp, j));
    }
  }
  return m;
}

std::vector<std::vector<std::string>> text_matrix(const json& v, const std::string& path) {
  if (!is_matrix_shaped(v)) bad(path, "expected an array of rows");
  const auto cols = v[0].size();
  std::vector<std::vector<std::string>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string rp = index_path(path, i);
    if (!v[i].is_array() || v[i].size() != cols) bad(rp, "rows differ in length");
    std::vector<std::string> row;
    for (std::size_t j = 0; j < cols; ++j) {
      const json& e = v[i][j];
      if (e.is_string()) {
        row.push_back(e.get<std::string>());
      } else if (e.is_number()) {
        row.push_back(format_double(number(e, index_path(rp, j))));
      } else {
        bad(index_path(rp, j), "expected an expression string or a number");
      }
    }
    out.push_back(std::move(row));
  }
  return out;
}

// A0 / A1: one matrix per space dimension; a bare matrix is accepted for s = 1.
std::vector<json> per_dimension(const json& v, const std::string& path) {
  if (is_matrix_shaped(v)) return {v};
  if (!v.is_array() || v.empty()) bad(path, "expected a matrix or a list of matrices");
  std::vector<json> out(v.begin(), v.end());
  return out;
}

CoefficientMatrix coefficient(const json& v, const std::string& path, const SystemSpec& spec) {
  const auto t = text_matrix(v, path);
  if (static_cast<int>(t.size()) != spec.n || static_cast<int>(t[0].size()) != spec.n) {
    bad(path, "expected a " + std::to_string(spec.n) + "x" + std::to_string(spec.n) + " matrix");
  }
  try {
    return parse_matrix_expr(t, spec.variables());
  } catch (const ParseError& e) {
    bad(path, e.what());
  }
}

SystemSpec parse_problem(const json& p) {
  const std::string path = "problem";
  only_keys(p, path, {"s", "n", "A0", "B0", "eps", "A1", "B1", "delta"});
  if (!p.contains("A0")) bad(path, "missing A0");
  if (!p.contains("B0")) bad(path, "missing B0");
  const Matrix b0 = real_matrix(p["B0"], "problem.B0");
  std::vector<Matrix> a0;
  const auto a0j = per_dimension(p["A0"], "problem.A0");
  for (std::size_t k = 0; k < a0j.size(); ++k) {
    a0.push_back(real_matrix(a0j[k], a0j.size() == 1 && is_matrix_shaped(p["A0"]) ? "problem.A0" : index_path("problem.A0", k)));
  }
  const double delta = p.contains("delta") ? number(p["delta"], "problem.delta") : 1.0;
  if (!(delta > 0.0)) bad("problem.delta", "must be positive");
  SystemSpec spec = SystemSpec::constant(a0, b0, delta);
  if (p.contains("s") && integer(p["s"], "problem.s") != spec.s) bad("problem.s", "does not match the number of A0 matrices");
  if (p.contains("n") && integer(p["n"], "problem.n") != spec.n) bad("problem.n", "does not match the size of B0");
  if (spec.s < 1 || spec.s > 2) bad("problem.A0", "space dimension must be 1 or 2");
  for (std::size_t k = 0; k < a0.size(); ++k) {
    if (a0[k].rows() != b0.rows() || a0[k].cols() != b0.rows()) bad("problem.A0", "matrices must match the size of B0");
  }
  if (b0.rows() != b0.cols()) bad("problem.B0", "must be square");
  if (p.contains("eps")) spec.eps = number(p["eps"], "problem.eps");
  if (p.contains("A1")) {
    const auto a1j = per_dimension(p["A1"], "problem.A1");
    if (static_cast<int>(a1j.size()) != spec.s) bad("problem.A1", "need one matrix per space dimension");
    spec.A1.clear();
    for (std::size_t k = 0; k < a1j.size(); ++k) spec.A1.push_back(coefficient(a1j[k], index_path("problem.A1", k), spec));
  }
  if (p.contains("B1")) spec.B1 = coefficient(p["B1"], "problem.B1", spec);
  try {
    spec.validate();
  } catch (const Error& e) {
    bad(path, e.what());
  }
  return spec;
}

void parse_analysis(const json& a, AnalysisSettings& out) {
  const std::string path = "analysis";
  only_keys(a, path, {"lattice_radius", "sphere_samples", "delta", "tol", "mode", "real_omega", "samples", "u_max",
                      "t_max", "seed"});
  if (a.contains("lattice_radius")) out.lattice_radius = integer(a["lattice_radius"], join(path, "lattice_radius"));
  if (a.contains("sphere_samples")) out.sphere_samples = integer(a["sphere_samples"], join(path, "sphere_samples"));
  if (a.contains("delta")) out.delta = number(a["delta"], join(path, "delta"));
  if (a.contains("tol")) out.tol = number(a["tol"], join(path, "tol"));
  if (a.contains("mode")) out.mode = text(a["mode"], join(path, "mode"));
  if (a.contains("real_omega")) out.real_omega = boolean(a["real_omega"], join(path, "real_omega"));
  if (a.contains("samples")) out.box.count = integer(a["samples"], join(path, "samples"));
  if (a.contains("u_max")) out.box.u_max = number(a["u_max"], join(path, "u_max"));
  if (a.contains("t_max")) out.box.t_max = number(a["t_max"], join(path, "t_max"));
  if (a.contains("seed")) {
    if (!a["seed"].is_number_unsigned()) bad(join(path, "seed"), "expected a non-negative integer");
    out.box.seed = a["seed"].get<std::uint64_t>();
  }
  if (out.lattice_radius < 1) bad(join(path, "lattice_radius"), "must be at least 1");
  if (out.sphere_samples < 1) bad(join(path, "sphere_samples"), "must be at least 1");
  if (out.delta && !(*out.delta > 0.0)) bad(join(path, "delta"), "must be positive");
  if (!(out.tol > 0.0)) bad(join(path, "tol"), "must be positive");
  if (out.mode != "auto" && out.mode != "standard" && out.mode != "relaxed") {
    bad(join(path, "mode"), "expected auto, standard or relaxed");
  }
  if (out.box.count < 1) bad(join(path, "samples"), "must be at least 1");
  if (!(out.box.u_max >= 0.0)) bad(join(path, "u_max"), "must be non-negative");
}

void parse_symmetrizer(const json& a, SymmetrizerSettings& out) {
  const std::string path = "symmetrizer";
  only_keys(a, path, {"cutoff_C", "lattice_radius", "route"});
  if (a.contains("cutoff_C")) {
    const json& c = a["cutoff_C"];
    if (c.is_string()) {
      if (c.get<std::string>() != "auto") bad(join(path, "cutoff_C"), "expected \"auto\" or a number");
    } else {
      out.cutoff = number(c, join(path, "cutoff_C"));
      if (!(*out.cutoff >= 1.0)) bad(join(path, "cutoff_C"), "must be at least 1");
    }
  }
  if (a.contains("lattice_radius")) out.lattice_radius = integer(a["lattice_radius"], join(path, "lattice_radius"));
  if (out.lattice_radius < 1) bad(join(path, "lattice_radius"), "must be at least 1");
  if (a.contains("route")) {
    const std::string r = text(a["route"], join(path, "route"));
    if (r == "general") {
      out.route = AsymptoticRoute::kGeneral;
    } else if (r == "symmetric") {
      out.route = AsymptoticRoute::kSymmetric;
    } else if (r != "auto") {
      bad(join(path, "route"), "expected auto, general or symmetric");
    }
  }
}

void parse_simulation(const json& a, SimulationSettings& out, int n) {
  const std::string path = "simulation";
  only_keys(a, path, {"N", "dt", "T_final", "cfl_safety", "dealias", "sobolev_p", "record_every", "blowup_factor",
                      "initial", "H", "margin"});
  SimConfig& c = out.config;
  if (a.contains("N")) c.N = integer(a["N"], join(path, "N"));
  if (a.contains("dt")) c.dt = number(a["dt"], join(path, "dt"));
  if (a.contains("T_final")) c.T_final = number(a["T_final"], join(path, "T_final"));
  if (a.contains("cfl_safety")) c.cfl_safety = number(a["cfl_safety"], join(path, "cfl_safety"));
  if (a.contains("dealias")) c.dealias = boolean(a["dealias"], join(path, "dealias"));
  if (a.contains("sobolev_p")) c.sobolev_p = integer(a["sobolev_p"], join(path, "sobolev_p"));
  if (a.contains("record_every")) c.record_every = integer(a["record_every"], join(path, "record_every"));
  if (a.contains("blowup_factor")) c.blowup_factor = number(a["blowup_factor"], join(path, "blowup_factor"));
  if (a.contains("margin")) out.margin = number(a["margin"], join(path, "margin"));
  if (a.contains("H")) {
    out.H = text(a["H"], join(path, "H"));
    if (out.H != "table" && out.H != "frozen" && out.H != "identity") {
      bad(join(path, "H"), "expected table, frozen or identity");
    }
  }
  if (a.contains("initial")) {
    const json& init = a["initial"];
    if (!init.is_array() || static_cast<int>(init.size()) != n) {
      bad(join(path, "initial"), "expected " + std::to_string(n) + " expression strings");
    }
    out.initial.clear();
    for (std::size_t i = 0; i < init.size(); ++i) {
      const json& e = init[i];
      if (e.is_number()) {
        out.initial.push_back(format_double(number(e, index_path(join(path, "initial"), i))));
      } else {
        out.initial.push_back(text(e, index_path(join(path, "initial"), i)));
      }
    }
  }
  try {
    c.validate();
  } catch (const Error& e) {
    bad(path, e.what());
  }
}

void parse_output(const json& a, OutputSettings& out) {
  const std::string path = "output";
  only_keys(a, path, {"directory", "formats"});
  if (a.contains("directory")) out.directory = text(a["directory"], join(path, "directory"));
  if (a.contains("formats")) {
    const json& f = a["formats"];
    if (!f.is_array()) bad(join(path, "formats"), "expected an array");
    out.csv = out.json = out.table = false;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const std::string name = text(f[i], index_path(join(path, "formats"), i));
      if (name == "csv") {
        out.csv = true;
      } else if (name == "json") {
        out.json = true;
      } else if (name == "table") {
        out.table = true;
      } else {
        bad(index_path(join(path, "formats"), i), "expected csv, json or table");
      }
    }
  }
}

// ---- reporting helpers ----

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string vec_text(const Vector& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + ")";
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json header(const RunConfig& cfg, const char* command) {
  return json{{"tool", "hypstab"}, {"version", kVersion}, {"config_hash", hex64(cfg.hash)}, {"command", command}};
}

std::filesystem::path out_dir(const RunConfig& cfg, const RunOptions& opts) {
  std::filesystem::path dir = opts.out_dir.value_or(cfg.output.directory);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write " + p.string());
  os << bytes;
  if (!os) throw Error("failed writing " + p.string());
}

void write_json(const RunConfig& cfg, const RunOptions& opts, const std::string& name, const json& j) {
  if (!cfg.output.json) return;
  write_file(out_dir(cfg, opts) / name, j.dump(2) + "\n");
}

json witnesses_json(const std::vector<Witness>& ws) {
  json arr = json::array();
  for (const auto& w : ws) {
    json omega = json::array();
    for (Eigen::Index i = 0; i < w.omega.size(); ++i) omega.push_back(w.omega[i]);
    arr.push_back({{"omega", omega}, {"re", w.eigenvalue.real()}, {"im", w.eigenvalue.imag()}, {"note", w.note}});
  }
  return arr;
}

SampleBox sample_box_of(const RunConfig& cfg, const RunOptions& opts) {
  SampleBox box = cfg.analysis.box;
  if (opts.seed) box.seed = *opts.seed;
  return box;
}

SymmetrizerTable build_table(const RunConfig& cfg, const AnalysisResult& a) {
  SymmetrizerOptions so;
  so.delta = a.delta;
  so.lattice_radius = std::max(cfg.symmetrizer.lattice_radius, cfg.simulation.config.N / 2);
  so.sphere_samples = cfg.analysis.sphere_samples;
  so.cutoff = cfg.symmetrizer.cutoff;
  so.route = cfg.symmetrizer.route;
  so.tol = cfg.analysis.tol;
  return assemble_symmetrizer(cfg.spec, so);
}

json checks_json(const PropertyChecks& c) {
  return json{{"bound_violation", c.bound_violation},
              {"re_h0p0", c.re_h0p0},
              {"lattice_residual", c.lattice_residual},
              {"asymptotic_residual", c.asymptotic_residual},
              {"smoothing_sup", c.smoothing_sup},
              {"smoothing_median", c.smoothing_median},
              {"blockdiag_ratio", c.blockdiag_ratio},
              {"uniform_bound", c.property2},
              {"principal_symmetrized", c.property3},
              {"energy_inequality", c.property4},
              {"smoothing", c.property5},
              {"block_diagonal", c.blockdiag}};
}

void print_analysis(std::ostream& out, const AnalysisResult& a) {
  const auto& h = a.hyperbolicity;
  const auto& c = a.condition;
  out << "mode: " << (a.relaxed ? "relaxed" : "standard") << '\n';
  out << "strong hyperbolicity: " << (h.strongly_hyperbolic ? "yes" : "no") << " (K = " << num(h.K) << ", "
      << h.directions << " directions)\n";
  for (const auto& d : h.diagnostics) out << "  " << d << '\n';
  out << (a.relaxed ? "relaxed condition: " : "eigenvalue condition: ") << (c.satisfied ? "holds" : "fails")
      << " at delta = " << num(a.delta) << ", delta* = " << num(c.delta_star) << '\n';
  out << "  lattice |w|_inf <= " << c.lattice_radius << ": max Re = " << num(c.lattice_abscissa)
      << ", asymptotic max Re = " << num(c.asymptotic_abscissa)
      << (c.asymptotic_certified ? "" : " (dense fallback on degenerate directions)") << '\n';
  if (a.relaxed) out << "  zero eigenvalue multiplicity r = " << c.r << '\n';
  const std::size_t shown = std::min<std::size_t>(c.witnesses.size(), 5);
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& w = c.witnesses[i];
    out << "  witness w = " << vec_text(w.omega) << ", lambda = " << num(w.eigenvalue.real()) << " + "
        << num(w.eigenvalue.imag()) << "i" << (w.note.empty() ? "" : ", " + w.note) << '\n';
  }
  if (c.witnesses.size() > shown) out << "  (" << c.witnesses.size() - shown << " more witnesses)\n";
  const auto& m = a.multiplicity;
  out << "constant multiplicity: "
      << (m.indeterminate ? "indeterminate" : (m.constant ? "yes" : "no"))
      << (a.multiplicity_required ? "" : " (not required at eps = 0)") << '\n';
  if (!m.diagnostic.empty()) out << "  " << m.diagnostic << '\n';
}

json analysis_json(const RunConfig& cfg, const AnalysisResult& a) {
  json j = header(cfg, "analyze");
  j["mode"] = a.relaxed ? "relaxed" : "standard";
  j["verdict"] = a.pass ? "pass" : "fail";
  j["strong_hyperbolicity"] = {{"holds", a.hyperbolicity.strongly_hyperbolic},
                               {"K", finite_or_null(a.hyperbolicity.K)},
                               {"imag_defect", a.hyperbolicity.imag_defect},
                               {"directions", a.hyperbolicity.directions},
                               {"diagnostics", a.hyperbolicity.diagnostics}};
  const auto& c = a.condition;
  j["condition"] = {{"holds", c.satisfied},
                    {"delta", a.delta},
                    {"delta_star", c.delta_star},
                    {"lattice_radius", c.lattice_radius},
                    {"sphere_samples", c.sphere_samples},
                    {"lattice_abscissa", finite_or_null(c.lattice_abscissa)},
                    {"asymptotic_abscissa", finite_or_null(c.asymptotic_abscissa)},
                    {"asymptotic_certified", c.asymptotic_certified},
                    {"degenerate_directions", c.degenerate_directions.size()},
                    {"witnesses", witnesses_json(c.witnesses)}};
  if (a.relaxed) j["condition"]["r"] = c.r;
  j["constant_multiplicity"] = {{"constant", a.multiplicity.constant},
                                {"indeterminate", a.multiplicity.indeterminate},
                                {"required", a.multiplicity_required},
                                {"signature", a.multiplicity.signature},
                                {"samples", a.multiplicity.samples},
                                {"diagnostic", a.multiplicity.diagnostic}};
  return j;
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

RunConfig parse_config(std::string_view text_in) {
  json doc;
  try {
    doc = json::parse(text_in);
  } catch (const json::parse_error& e) {
    // the message carries line and column
    std::string msg = e.what();
    const auto cut = msg.find("parse error");
    throw ConfigError(cut == std::string::npos ? msg : msg.substr(cut));
  }
  only_keys(doc, "", {"problem", "analysis", "symmetrizer", "simulation", "output"});
  if (!doc.contains("problem")) bad("problem", "missing section");
  RunConfig cfg;
  cfg.spec = parse_problem(doc["problem"]);
  if (doc.contains("analysis")) parse_analysis(doc["analysis"], cfg.analysis);
  if (doc.contains("symmetrizer")) parse_symmetrizer(doc["symmetrizer"], cfg.symmetrizer);
  if (doc.contains("simulation")) parse_simulation(doc["simulation"], cfg.simulation, cfg.spec.n);
  if (doc.contains("output")) parse_output(doc["output"], cfg.output);
  cfg.canonical = doc.dump();
  cfg.hash = fnv1a(cfg.canonical);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open config " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

AnalysisResult analyze(const RunConfig& cfg, const RunOptions& opts) {
  const SystemSpec& spec = cfg.spec;
  AnalysisResult a;
  a.delta = cfg.delta();
  a.hyperbolicity = check_strong_hyperbolicity(spec, cfg.analysis.sphere_samples);
  const ZeroSpectrum zs = zero_spectrum(spec.B0, a.delta);
  if (cfg.analysis.mode == "relaxed") {
    a.relaxed = true;
  } else if (cfg.analysis.mode == "auto") {
    a.relaxed = zs.r > 0 || !zs.indeterminate.empty();
  }
  ConditionOptions co;
  co.sphere_samples = cfg.analysis.sphere_samples;
  co.tol = cfg.analysis.tol;
  co.real_omega = cfg.analysis.real_omega || opts.real_omega;
  const SampleBox box = sample_box_of(cfg, opts);
  if (a.relaxed) {
    const auto samples = sample_box(box, spec.s, spec.n, spec.eps);
    a.condition = check_relaxed_condition(spec, cfg.analysis.lattice_radius, a.delta, samples, co);
  } else {
    a.condition = check_eigenvalue_condition(spec, cfg.analysis.lattice_radius, a.delta, co);
  }
  a.multiplicity_required = spec.eps != 0.0 && spec.has_perturbation();
  a.multiplicity = check_constant_multiplicity(spec, multiplicity_samples(spec, box, std::min(16, cfg.analysis.sphere_samples)));
  const bool mult_ok = !a.multiplicity_required || a.multiplicity.constant || a.multiplicity.indeterminate;
  a.pass = a.hyperbolicity.strongly_hyperbolic && a.condition.satisfied && mult_ok;
  return a;
}

int cmd_analyze(const RunConfig& cfg, const RunOptions& opts, std::ostream& out) {
  const AnalysisResult a = analyze(cfg, opts);
  out << "hypstab " << kVersion << " analyze (config " << hex64(cfg.hash) << ")\n";
  print_analysis(out, a);
  out << "verdict: " << (a.pass ? "PASS" : "FAIL") << '\n';
  write_json(cfg, opts, "analyze.json", analysis_json(cfg, a));
  return a.pass ? kExitPass : kExitFail;
}

int cmd_symmetrize(const RunConfig& cfg, const RunOptions& opts, std::ostream& out) {
  out << "hypstab " << kVersion << " symmetrize (config " << hex64(cfg.hash) << ")\n";
  const AnalysisResult a = analyze(cfg, opts);
  json j = header(cfg, "symmetrize");
  if (!a.pass) {
    print_analysis(out, a);
    out << "symmetrize: analysis fails, no table written\n";
    j["status"] = "analysis_failed";
    write_json(cfg, opts, "symmetrize.json", j);
    return kExitFail;
  }
  if (a.relaxed) {
    out << "symmetrize: not applicable in relaxed mode (simulations use H = I)\n";
    j["status"] = "not_applicable";
    write_json(cfg, opts, "symmetrize.json", j);
    return kExitPass;
  }
  SymmetrizerTable table;
  try {
    table = build_table(cfg, a);
  } catch (const ConstructionError& e) {
    out << "symmetrize: construction failed: " << e.what() << "\nno table written\n";
    j["status"] = "construction_failed";
    j["error"] = e.what();
    write_json(cfg, opts, "symmetrize.json", j);
    return kExitFail;
  }
  const PropertyChecks& c = table.checks();
  out << "route: " << route_name(table.route()) << ", lattice radius " << table.radius() << ", delta " << num(a.delta)
      << '\n';
  out << "K4 = " << num(table.K4()) << ", C = " << num(table.cutoff()) << '\n';
  out << "uniform bound: " << (c.property2 ? "ok" : "FAIL") << " (violation " << num(c.bound_violation) << ")\n";
  out << "principal part symmetrized: " << (c.property3 ? "ok" : "FAIL") << " (max " << num(c.re_h0p0) << ")\n";
  out << "energy inequality: " << (c.property4 ? "ok" : "FAIL") << " (lattice " << num(c.lattice_residual)
      << ", asymptotic " << num(c.asymptotic_residual) << ")\n";
  out << "smoothing: " << (c.property5 ? "ok" : "FAIL") << " (sup " << num(c.smoothing_sup) << ", median "
      << num(c.smoothing_median) << ")\n";
  out << "block diagonalization: " << (c.blockdiag ? "ok" : "FAIL") << " (ratio " << num(c.blockdiag_ratio) << ")\n";
  j["route"] = route_name(table.route());
  j["lattice_radius"] = table.radius();
  j["delta"] = a.delta;
  j["K4"] = table.K4();
  j["C"] = table.cutoff();
  j["checks"] = checks_json(c);
  if (!c.all()) {
    out << "symmetrize: property checks fail, no table written\n";
    j["status"] = "checks_failed";
    write_json(cfg, opts, "symmetrize.json", j);
    return kExitFail;
  }
  if (cfg.output.table) {
    std::ostringstream os;
    table.write(os);
    write_file(out_dir(cfg, opts) / "symmetrizer.table", os.str());
  }
  j["status"] = "ok";
  write_json(cfg, opts, "symmetrize.json", j);
  out << "symmetrize: table certified\n";
  return kExitPass;
}

int cmd_simulate(const RunConfig& cfg, const RunOptions& opts, std::ostream& out) {
  out << "hypstab " << kVersion << " simulate (config " << hex64(cfg.hash) << ")\n";
  const SimulationSettings& sim = cfg.simulation;
  if (sim.initial.empty()) throw ConfigError("simulation.initial: required for simulate");
  const SystemSpec& spec = cfg.spec;
  const AnalysisResult a = analyze(cfg, opts);
  json j = header(cfg, "simulate");

  std::optional<HOperator> op;
  std::string h_label = "identity";
  if (!a.relaxed && sim.H != "identity") {
    if (!a.pass) {
      print_analysis(out, a);
      out << "simulate: analysis fails, no symmetrizer available (set simulation.H to identity)\n";
      j["status"] = "analysis_failed";
      write_json(cfg, opts, "simulate.json", j);
      return kExitFail;
    }
    SymmetrizerTable table;
    try {
      table = build_table(cfg, a);
    } catch (const ConstructionError& e) {
      out << "simulate: symmetrizer construction failed: " << e.what() << '\n';
      j["status"] = "construction_failed";
      write_json(cfg, opts, "simulate.json", j);
      return kExitFail;
    }
    op = sim.H == "frozen" ? HOperator::frozen(std::move(table), spec) : HOperator::constant(std::move(table));
    h_label = sim.H;
  }

  const GridFunction f = initial_data(spec.s, spec.n, sim.config.N, sim.initial);
  EnergyReport rep;
  std::optional<RelaxedReport> rel;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  if (a.relaxed) {
    rel = simulate_relaxed(spec, f, sim.config, nullptr);
    rep = rel->energy;
    relaxed_columns(*rel, names, columns);
  } else {
    rep = simulate(spec, f, sim.config, op ? &*op : nullptr);
  }
  if (cfg.output.csv) {
    std::ostringstream os;
    write_csv(os, rep, names, columns);
    write_file(out_dir(cfg, opts) / "simulate.csv", os.str());
  }

  // hnorm is an energy, so its slope is twice the norm rate
  const RateFit& fit = a.relaxed ? rel->v_rate : rep.hnorm_rate;
  const double rate = a.relaxed ? fit.slope : fit.slope / 2.0;
  const double reference = a.relaxed ? a.condition.delta_star : a.delta;
  const double target = -reference + sim.margin;
  const bool rate_ok = fit.valid && rate <= target;

  out << "H: " << h_label << ", N = " << sim.config.N << ", dt = " << num(rep.dt) << ", steps = " << rep.steps
      << (rep.dealiased ? ", dealiased" : "") << '\n';
  auto shown = [](const RateFit& r, double scale) { return r.valid ? num(r.slope * scale) : std::string("n/a"); };
  out << "rates: l2 " << shown(rep.l2_rate, 1.0) << ", H-norm " << shown(rep.hnorm_rate, 0.5) << ", sobolev "
      << shown(rep.sobolev_rate, 0.5) << ", max " << shown(rep.maxnorm_rate, 1.0) << '\n';
  if (a.relaxed) {
    out << "relaxed: r = " << rel->dec.r << ", v rate " << num(rel->v_rate.slope) << ", u0 drift " << num(rel->drift)
        << " (C = " << num(rel->drift_constant) << "), limit " << vec_text(rel->limit) << '\n';
  }
  out << "H-norm monotone: " << (rep.monotone_H ? "yes" : "no") << '\n';

  j["H"] = h_label;
  j["mode"] = a.relaxed ? "relaxed" : "standard";
  j["N"] = sim.config.N;
  j["dt"] = rep.dt;
  j["steps"] = rep.steps;
  j["dealiased"] = rep.dealiased;
  auto fit_json = [](const RateFit& r, double scale) {
    return json{{"rate", r.slope * scale}, {"residual", r.residual}, {"samples", r.samples}, {"valid", r.valid}};
  };
  j["rates"] = {{"l2", fit_json(rep.l2_rate, 1.0)},
                {"hnorm", fit_json(rep.hnorm_rate, 0.5)},
                {"sobolev", fit_json(rep.sobolev_rate, 0.5)},
                {"maxnorm", fit_json(rep.maxnorm_rate, 1.0)}};
  j["monotone_H"] = rep.monotone_H;
  j["contraction_margin"] = finite_or_null(rep.contraction_margin);
  j["target_rate"] = target;
  j["blowup"] = rep.blowup;
  if (rep.blowup) j["blowup_time"] = rep.blowup_time;
  if (a.relaxed) {
    json lim = json::array();
    for (Eigen::Index i = 0; i < rel->limit.size(); ++i) lim.push_back(rel->limit[i]);
    j["relaxed"] = {{"r", rel->dec.r},
                    {"v_rate", fit_json(rel->v_rate, 1.0)},
                    {"delta_star", a.condition.delta_star},
                    {"drift", rel->drift},
                    {"drift_constant", rel->drift_constant},
                    {"dyadic_times", rel->dyadic_times},
                    {"dyadic_increments", rel->dyadic_increments},
                    {"dyadic_ratios", rel->dyadic_ratios},
                    {"limit", lim}};
  }

  if (rep.blowup) {
    out << "simulate: BLOWUP at t = " << num(rep.blowup_time) << '\n';
    j["status"] = "blowup";
    write_json(cfg, opts, "simulate.json", j);
    return kExitBlowup;
  }
  out << "simulate: rate " << num(rate) << " vs target <= " << num(target) << ": " << (rate_ok ? "PASS" : "FAIL")
      << '\n';
  j["status"] = rate_ok ? "pass" : "fail";
  write_json(cfg, opts, "simulate.json", j);
  return rate_ok ? kExitPass : kExitFail;
}

int cmd_all(const RunConfig& cfg, const RunOptions& opts, std::ostream& out) {
  int code = cmd_analyze(cfg, opts, out);
  if (code != kExitPass) return code;
  code = cmd_symmetrize(cfg, opts, out);
  if (code != kExitPass) return code;
  if (cfg.simulation.initial.empty()) {
    out << "simulate: skipped (no simulation.initial)\n";
    return kExitPass;
  }
  return cmd_simulate(cfg, opts, out);
}

}  // namespace hypstab
