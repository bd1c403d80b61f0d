// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "brw/experiment.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "brw/csv.hpp"
#include "brw/extremes.hpp"
#include "brw/max_recursion.hpp"
#include "brw/parallel.hpp"
#include "brw/spine.hpp"
#include "brw/stats.hpp"

namespace brw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Strict reader for one JSON object: every field read is remembered and
// finish() rejects the rest.
class Obj {
 public:
  Obj(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw SchemaError(where(), "expected an object");
  }

  bool has(const char* k) const { return j_.contains(k); }
  std::string sub(const std::string& k) const { return path_ + "/" + k; }
  std::string where() const { return path_.empty() ? "/" : path_; }

  const Json& at(const char* k) const {
    if (!has(k)) throw SchemaError(sub(k), "missing required field");
    seen_.insert(k);
    return j_.at(k);
  }

  double number(const char* k, std::optional<double> def = std::nullopt) const {
    if (!has(k)) {
      if (def) return *def;
      throw SchemaError(sub(k), "missing required field");
    }
    const Json& v = at(k);
    if (!v.is_number()) throw SchemaError(sub(k), "expected a number");
    return v.get<double>();
  }

  std::int64_t integer(const char* k, std::optional<std::int64_t> def = std::nullopt) const {
    if (!has(k)) {
      if (def) return *def;
      throw SchemaError(sub(k), "missing required field");
    }
    return as_integer(at(k), sub(k));
  }

  std::uint64_t u64(const char* k, std::optional<std::uint64_t> def = std::nullopt) const {
    if (!has(k)) {
      if (def) return *def;
      throw SchemaError(sub(k), "missing required field");
    }
    const Json& v = at(k);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    const std::int64_t x = as_integer(v, sub(k));
    if (x < 0) throw SchemaError(sub(k), "expected a non-negative integer");
    return static_cast<std::uint64_t>(x);
  }

  bool boolean(const char* k, bool def) const {
    if (!has(k)) return def;
    const Json& v = at(k);
    if (!v.is_boolean()) throw SchemaError(sub(k), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const char* k, std::optional<std::string> def = std::nullopt) const {
    if (!has(k)) {
      if (def) return *def;
      throw SchemaError(sub(k), "missing required field");
    }
    const Json& v = at(k);
    if (!v.is_string()) throw SchemaError(sub(k), "expected a string");
    return v.get<std::string>();
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw SchemaError(sub(item.key()), "unknown field");
    }
  }

  static std::int64_t as_integer(const Json& v, const std::string& path) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 9e15) {
        return static_cast<std::int64_t>(d);
      }
    }
    throw SchemaError(path, "expected an integer");
  }

 private:
  const Json& j_;
  std::string path_;
  mutable std::set<std::string> seen_;
};

Json resolve_displacement(const Json& doc, const std::string& path) {
  const Obj o(doc, path);
  const std::string type = o.string("type");
  Json out;
  out["type"] = type;
  if (type == "gaussian") {
    out["mean"] = o.number("mean", 0.0);
    out["variance"] = o.number("variance", 1.0);
  } else if (type == "laplace") {
    out["scale"] = o.number("scale", 1.0);
  } else if (type == "point_masses") {
    const Json& atoms = o.at("atoms");
    if (!atoms.is_array() || atoms.empty()) {
      throw SchemaError(o.sub("atoms"), "expected a non-empty array of [value, probability]");
    }
    out["atoms"] = Json::array();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const Json& a = atoms[i];
      const std::string p = o.sub("atoms") + "/" + std::to_string(i);
      if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
        throw SchemaError(p, "expected [value, probability]");
      }
      out["atoms"].push_back(Json::array({a[0].get<double>(), a[1].get<double>()}));
    }
  } else {
    throw SchemaError(o.sub("type"), "unknown displacement type '" + type + "'");
  }
  o.finish();
  return out;
}

Displacement displacement_from(const Json& d) {
  const std::string type = d.at("type").get<std::string>();
  if (type == "gaussian") return Gaussian{d.at("mean").get<double>(), d.at("variance").get<double>()};
  if (type == "laplace") return Laplace{d.at("scale").get<double>()};
  PointMasses pm;
  for (const Json& a : d.at("atoms")) pm.atoms.emplace_back(a[0].get<double>(), a[1].get<double>());
  return pm;
}

Json resolve_test_function(const Json& doc, const std::string& path) {
  const Obj o(doc, path);
  const std::string family = o.string("family");
  Json out;
  out["family"] = family;
  if (family == "ramp") {
    out["lo"] = o.number("lo");
    out["hi"] = o.number("hi");
    out["height"] = o.number("height", 1.0);
  } else if (family == "cosine_bump") {
    out["centre"] = o.number("centre");
    out["half_width"] = o.number("half_width");
    out["height"] = o.number("height", 1.0);
  } else if (family == "constant") {
    out["value"] = o.number("value");
  } else {
    throw SchemaError(o.sub("family"), "unknown test function '" + family + "'");
  }
  o.finish();
  return out;
}

TestFunction test_function_from(const Json& d) {
  const std::string family = d.at("family").get<std::string>();
  if (family == "ramp") {
    return TestFunction::ramp(d.at("lo").get<double>(), d.at("hi").get<double>(),
                              d.at("height").get<double>());
  }
  if (family == "cosine_bump") {
    return TestFunction::cosine_bump(d.at("centre").get<double>(), d.at("half_width").get<double>(),
                                     d.at("height").get<double>());
  }
  return TestFunction::constant(d.at("value").get<double>());
}

std::string_view method_name(MaxLawMethod m) {
  return m == MaxLawMethod::Conditional ? "conditional" : "simulate";
}

std::string_view method_name(DecorationMethod m) {
  return m == DecorationMethod::Conditioned ? "conditioned" : "rejection";
}

std::string_view form_name(CenteringForm f) {
  return f == CenteringForm::Theorem ? "theorem" : "alternative";
}

Json pruning_json(const Pruning& p) {
  Json out;
  switch (p.kind) {
    case PruningKind::None:
      out["kind"] = "none";
      break;
    case PruningKind::TopK:
      out["kind"] = "top_k";
      out["k"] = p.k;
      break;
    case PruningKind::Window:
      out["kind"] = "window";
      out["width"] = p.width;
      break;
  }
  return out;
}

Pruning parse_pruning(const Json& doc, const std::string& path) {
  const Obj o(doc, path);
  const std::string kind = o.string("kind", "none");
  Pruning p;
  if (kind == "none") {
    p = Pruning::none();
  } else if (kind == "top_k") {
    const std::int64_t k = o.integer("k");
    if (k < 1) throw SchemaError(o.sub("k"), "must be >= 1");
    p = Pruning::top_k(static_cast<std::size_t>(k));
  } else if (kind == "window") {
    const double w = o.number("width");
    if (!(w > 0.0)) throw SchemaError(o.sub("width"), "must be positive");
    p = Pruning::window(w);
  } else {
    throw SchemaError(o.sub("kind"), "unknown pruning kind '" + kind + "'");
  }
  o.finish();
  return p;
}

}  // namespace

std::string_view to_string(Suite s) {
  switch (s) {
    case Suite::Params:
      return "params";
    case Suite::Simulate:
      return "simulate";
    case Suite::MaxLaw:
      return "max-law";
    case Suite::Clt:
      return "clt";
    case Suite::Decoration:
      return "decoration";
    case Suite::SpineCheck:
      return "spine-check";
    case Suite::SlowMaxLaw:
      return "slow-max-law";
    case Suite::MeanExploratory:
      return "mean-exploratory";
  }
  return "?";
}

std::optional<Suite> suite_from_string(std::string_view s) {
  for (Suite x : {Suite::Params, Suite::Simulate, Suite::MaxLaw, Suite::Clt, Suite::Decoration,
                  Suite::SpineCheck, Suite::SlowMaxLaw, Suite::MeanExploratory}) {
    if (to_string(x) == s) return x;
  }
  return std::nullopt;
}

std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass:
      return "pass";
    case CheckStatus::Warn:
      return "warn";
    case CheckStatus::Fail:
      return "fail";
  }
  return "?";
}

Json resolve_law(const Json& doc, const std::string& path) {
  const Obj o(doc, path);
  const std::string family = o.string("family");
  Json out;
  if (family == "binary_gaussian") {
    const double sigma = o.number("sigma", 1.0);
    if (!(sigma > 0.0)) throw SchemaError(o.sub("sigma"), "must be positive");
    out["family"] = "deterministic";
    out["count"] = 2;
    out["displacement"] = {{"type", "gaussian"}, {"mean", o.number("mean", 0.0)},
                           {"variance", sigma * sigma}};
  } else if (family == "deterministic") {
    const std::int64_t k = o.integer("count");
    if (k < 1 || k > 64) throw SchemaError(o.sub("count"), "must lie in [1, 64]");
    out["family"] = family;
    out["count"] = k;
    out["displacement"] = resolve_displacement(o.at("displacement"), o.sub("displacement"));
  } else if (family == "poisson") {
    out["family"] = family;
    out["mean"] = o.number("mean");
    out["displacement"] = resolve_displacement(o.at("displacement"), o.sub("displacement"));
  } else if (family == "finite_atomic") {
    const Json& atoms = o.at("atoms");
    if (!atoms.is_array() || atoms.empty()) {
      throw SchemaError(o.sub("atoms"), "expected a non-empty array");
    }
    out["family"] = family;
    out["atoms"] = Json::array();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const Obj a(atoms[i], o.sub("atoms") + "/" + std::to_string(i));
      Json r;
      r["probability"] = a.number("probability");
      const Json& pts = a.at("points");
      if (!pts.is_array()) throw SchemaError(a.sub("points"), "expected an array of numbers");
      r["points"] = Json::array();
      for (const Json& x : pts) {
        if (!x.is_number()) throw SchemaError(a.sub("points"), "expected an array of numbers");
        r["points"].push_back(x.get<double>());
      }
      a.finish();
      out["atoms"].push_back(r);
    }
  } else {
    throw SchemaError(o.sub("family"), "unknown law family '" + family + "'");
  }
  o.finish();
  try {
    (void)parse_law(out, path);
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(path, e.what());
  }
  return out;
}

ReproductionLaw parse_law(const Json& d, const std::string& path) {
  try {
    const std::string family = d.at("family").get<std::string>();
    if (family == "deterministic") {
      return ReproductionLaw::deterministic(d.at("count").get<unsigned>(),
                                            displacement_from(d.at("displacement")));
    }
    if (family == "poisson") {
      return ReproductionLaw::poisson(d.at("mean").get<double>(),
                                      displacement_from(d.at("displacement")));
    }
    if (family == "finite_atomic") {
      std::vector<Atom> atoms;
      for (const Json& a : d.at("atoms")) {
        atoms.push_back({a.at("probability").get<double>(), a.at("points").get<std::vector<double>>()});
      }
      return ReproductionLaw::finite_atomic(std::move(atoms));
    }
    if (family == "binary_gaussian") return parse_law(resolve_law(d, path), path);
    throw SchemaError(path + "/family", "unknown law family '" + family + "'");
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path, std::string("malformed law: ") + e.what());
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(path, e.what());
  }
}

ReproductionLaw ExperimentConfig::law1() const { return parse_law(laws.at(0), "/laws/0"); }

ReproductionLaw ExperimentConfig::law2() const {
  return laws.size() > 1 ? parse_law(laws[1], "/laws/1") : law1();
}

TestFunction ExperimentConfig::f() const {
  return test_function ? test_function_from(*test_function) : TestFunction::ramp(-1.0, 1.0, 1.0);
}

ExperimentConfig parse_config(const Json& input) {
  const Json& doc = input.is_object() && input.contains("config") && input.contains("versions")
                        ? input.at("config")
                        : input;
  const Obj o(doc, "");
  ExperimentConfig c;

  const std::string suite = o.string("suite");
  const auto s = suite_from_string(suite);
  if (!s) throw SchemaError("/suite", "unknown suite '" + suite + "'");
  c.suite = *s;

  const Json& laws = o.at("laws");
  if (!laws.is_array() || laws.empty() || laws.size() > 2) {
    throw SchemaError("/laws", "expected one or two law documents");
  }
  for (std::size_t i = 0; i < laws.size(); ++i) {
    c.laws.push_back(resolve_law(laws[i], "/laws/" + std::to_string(i)));
  }

  c.t = o.number("t", 0.5);
  if (!(c.t > 0.0 && c.t < 1.0)) throw SchemaError("/t", "must lie in (0, 1)");

  if (!o.has("horizons")) throw SchemaError("/horizons", "missing required field");
  const Json& hz = o.at("horizons");
  if (!hz.is_array() || hz.empty()) throw SchemaError("/horizons", "expected a non-empty array");
  for (std::size_t i = 0; i < hz.size(); ++i) {
    const std::int64_t n = Obj::as_integer(hz[i], "/horizons/" + std::to_string(i));
    if (n < 1) throw SchemaError("/horizons/" + std::to_string(i), "horizons must be >= 1");
    if (!c.horizons.empty() && n <= c.horizons.back()) {
      throw SchemaError("/horizons", "horizons must be strictly increasing");
    }
    c.horizons.push_back(static_cast<long>(n));
  }

  const std::int64_t reps = o.integer("replicates", 1);
  if (reps < 1) throw SchemaError("/replicates", "must be >= 1");
  c.replicates = static_cast<std::size_t>(reps);
  c.master_seed = o.u64("master_seed", 0);
  if (o.has("pruning")) c.pruning = parse_pruning(o.at("pruning"), "/pruning");
  c.output_dir = o.string("output_dir", "out");
  c.allow_partial = o.boolean("allow_partial", false);
  if (o.has("theta")) {
    c.theta = o.number("theta");
    if (!(*c.theta > 0.0)) throw SchemaError("/theta", "must be positive");
  }
  if (o.has("test_function")) {
    c.test_function = resolve_test_function(o.at("test_function"), "/test_function");
    try {
      (void)c.f();
    } catch (const Error& e) {
      throw SchemaError("/test_function", e.what());
    }
  }

  if (o.has("max_law")) {
    const Obj m(o.at("max_law"), "/max_law");
    const std::string method = m.string("method", "conditional");
    if (method == "conditional") {
      c.max_law.method = MaxLawMethod::Conditional;
    } else if (method == "simulate") {
      c.max_law.method = MaxLawMethod::Simulate;
    } else {
      throw SchemaError("/max_law/method", "expected 'conditional' or 'simulate'");
    }
    c.max_law.split_generation = static_cast<long>(m.integer("split_generation", 12));
    if (c.max_law.split_generation < 0) throw SchemaError("/max_law/split_generation", "must be >= 0");
    c.max_law.w_horizon = static_cast<long>(m.integer("w_horizon", 16));
    if (c.max_law.w_horizon < 1) throw SchemaError("/max_law/w_horizon", "must be >= 1");
    const std::int64_t wr = m.integer("w_replicates", 0);
    if (wr < 0) throw SchemaError("/max_law/w_replicates", "must be >= 0");
    c.max_law.w_replicates = static_cast<std::size_t>(wr);
    const std::int64_t br = m.integer("bootstrap_reps", 200);
    if (br < 0) throw SchemaError("/max_law/bootstrap_reps", "must be >= 0");
    c.max_law.bootstrap_reps = static_cast<std::size_t>(br);
    const std::string form = m.string("centering", "theorem");
    if (form == "theorem") {
      c.max_law.centering = CenteringForm::Theorem;
    } else if (form == "alternative") {
      c.max_law.centering = CenteringForm::Alternative;
    } else {
      throw SchemaError("/max_law/centering", "expected 'theorem' or 'alternative'");
    }
    c.max_law.tail_step = m.number("tail_step", 0.025);
    if (!(c.max_law.tail_step > 0.0)) throw SchemaError("/max_law/tail_step", "must be positive");
    m.finish();
  }
  if (o.has("decoration")) {
    const Obj d(o.at("decoration"), "/decoration");
    const std::string method = d.string("method", "conditioned");
    if (method == "conditioned") {
      c.decoration.method = DecorationMethod::Conditioned;
    } else if (method == "rejection") {
      c.decoration.method = DecorationMethod::Rejection;
    } else {
      throw SchemaError("/decoration/method", "expected 'conditioned' or 'rejection'");
    }
    c.decoration.depth_window = d.number("depth_window", 0.0);
    if (c.decoration.depth_window < 0.0) throw SchemaError("/decoration/depth_window", "must be >= 0");
    c.decoration.max_attempts = d.u64("max_attempts", 100'000'000);
    d.finish();
  }
  if (o.has("spine")) {
    const Obj sp(o.at("spine"), "/spine");
    const std::int64_t tr = sp.integer("selection_trials", 100'000);
    if (tr < 2) throw SchemaError("/spine/selection_trials", "must be >= 2");
    c.spine.selection_trials = static_cast<std::size_t>(tr);
    c.spine.walk_horizon = static_cast<long>(sp.integer("walk_horizon", 10));
    if (c.spine.walk_horizon < 1) throw SchemaError("/spine/walk_horizon", "must be >= 1");
    sp.finish();
  }
  o.finish();
  return c;
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["suite"] = to_string(c.suite);
  j["laws"] = c.laws;
  j["t"] = c.t;
  j["horizons"] = c.horizons;
  j["replicates"] = c.replicates;
  j["master_seed"] = c.master_seed;
  j["pruning"] = pruning_json(c.pruning);
  j["output_dir"] = c.output_dir;
  j["allow_partial"] = c.allow_partial;
  if (c.theta) j["theta"] = *c.theta;
  if (c.test_function) j["test_function"] = *c.test_function;
  j["max_law"] = {{"method", method_name(c.max_law.method)},
                  {"split_generation", c.max_law.split_generation},
                  {"w_horizon", c.max_law.w_horizon},
                  {"w_replicates", c.max_law.w_replicates},
                  {"bootstrap_reps", c.max_law.bootstrap_reps},
                  {"centering", form_name(c.max_law.centering)},
                  {"tail_step", c.max_law.tail_step}};
  j["decoration"] = {{"method", method_name(c.decoration.method)},
                     {"depth_window", c.decoration.depth_window},
                     {"max_attempts", c.decoration.max_attempts}};
  j["spine"] = {{"selection_trials", c.spine.selection_trials},
                {"walk_horizon", c.spine.walk_horizon}};
  return j;
}

CheckStatus RunReport::overall() const {
  CheckStatus s = CheckStatus::Pass;
  for (const Check& c : checks) {
    if (c.status == CheckStatus::Fail) return CheckStatus::Fail;
    if (c.status == CheckStatus::Warn) s = CheckStatus::Warn;
  }
  return s;
}

Json RunReport::verdict() const {
  Json j;
  j["suite"] = to_string(suite);
  j["status"] = to_string(overall());
  j["checks"] = Json::array();
  for (const Check& c : checks) {
    Json x;
    x["name"] = c.name;
    x["status"] = to_string(c.status);
    if (std::isfinite(c.value)) {
      x["value"] = c.value;
    } else {
      x["value"] = nullptr;
    }
    x["detail"] = c.detail;
    j["checks"].push_back(x);
  }
  j["results"] = results;
  return j;
}

namespace {

Json number_or_null(std::optional<double> x) {
  if (x && std::isfinite(*x)) return *x;
  return nullptr;
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

struct Solved {
  std::optional<RegimeSpec> spec;
  std::string error;
};

Solved solve(const ExperimentConfig& c) {
  Solved s;
  try {
    s.spec = classify_regime(c.law1(), c.law2(), c.t);
  } catch (const Error& e) {
    s.error = e.what();
  }
  return s;
}

Json solver_json(const ExperimentConfig& c, const Solved& s) {
  Json j;
  const ReproductionLaw l1 = c.law1();
  const ReproductionLaw l2 = c.law2();
  if (s.spec) {
    j["theta1_star"] = number_or_null(s.spec->theta1_star);
    j["theta2_star"] = number_or_null(s.spec->theta2_star);
    j["theta_mixed"] = number_or_null(s.spec->theta_mixed);
    j["regime"] = to_string(s.spec->regime);
  } else {
    j["theta1_star"] = nullptr;
    j["theta2_star"] = nullptr;
    j["theta_mixed"] = nullptr;
    j["regime"] = nullptr;
    j["error"] = s.error;
  }
  j["speed1"] = finite_or_null(speed(l1));
  j["speed2"] = finite_or_null(speed(l2));
  return j;
}

std::filesystem::path prepare_dir(const ExperimentConfig& c) {
  std::filesystem::path dir(c.output_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_json(const std::filesystem::path& p, const Json& j) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DomainError("cannot open " + p.string() + " for writing");
  out << j.dump(2) << '\n';
}

void write_manifest(const ExperimentConfig& c, const Json& solver) {
  Json m;
  m["config"] = to_json(c);
  m["solver"] = solver;
  m["versions"] = {{"brwlab", kVersion},
                   {"compiler", __VERSION__},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                 std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  m["seeds"] = {{"master_seed", c.master_seed},
                {"replicate_keys",
                 "replicate r of horizon index h uses root key derive(master_seed, h * replicates + r)"}};
  write_json(std::filesystem::path(c.output_dir) / "manifest.json", m);
}

Check make_check(std::string name, bool ok, double value, std::string detail,
                 bool warn_only = false) {
  CheckStatus s = ok ? CheckStatus::Pass : (warn_only ? CheckStatus::Warn : CheckStatus::Fail);
  return {std::move(name), s, value, std::move(detail)};
}

std::string fmt(double x) { return format_double(x); }

RegimeSpec model_spec(const ExperimentConfig& c, const Solved& s) {
  if (s.spec) return *s.spec;
  RegimeSpec spec{c.law1(), c.law2(), c.t, std::nullopt, std::nullopt, std::nullopt,
                  Regime::Mean, 0.0, 0.0};
  return spec;
}

std::uint64_t replicate_index(const ExperimentConfig& c, std::size_t h, std::size_t r) {
  return static_cast<std::uint64_t>(h) * c.replicates + r;
}

// ---------------------------------------------------------------------------
// Params

void run_params(const ExperimentConfig& c, const Solved& s, RunReport& rep) {
  const Json report = params_report(c);
  write_json(rep.output_dir / "params.json", report);
  CsvWriter csv(rep.output_dir / "params.csv", {"n", "t_n", "m_n_theorem", "m_n_alternative"});
  if (s.spec) {
    for (long n : c.horizons) {
      const long tn = s.spec->split_generation(n);
      if (tn < 1 || tn >= n) continue;
      csv.field(static_cast<std::int64_t>(n)).field(static_cast<std::int64_t>(tn));
      try {
        csv.field(centering(*s.spec, n, CenteringForm::Theorem));
      } catch (const Error&) {
        csv.field(std::string_view("nan"));
      }
      try {
        csv.field(centering(*s.spec, n, CenteringForm::Alternative));
      } catch (const Error&) {
        csv.field(std::string_view("nan"));
      }
      csv.end_row();
    }
  }
  rep.results = report;
  rep.checks.push_back(make_check("solver", s.spec.has_value(), 0.0,
                                  s.spec ? "all tilts solved" : s.error));
}

// ---------------------------------------------------------------------------
// Simulate

void run_simulate(const ExperimentConfig& c, const Solved& s, RunReport& rep) {
  const RegimeSpec spec = model_spec(c, s);
  const std::string regime = s.spec ? std::string(to_string(s.spec->regime)) : "unclassified";
  CsvWriter csv(rep.output_dir / "simulate.csv",
                {"seed", "n", "regime", "M_n", "population", "pruned_mass_flag"});
  rep.results["horizons"] = Json::array();
  for (std::size_t h = 0; h < c.horizons.size(); ++h) {
    const long n = c.horizons[h];
    std::vector<double> maxima(c.replicates);
    std::vector<std::size_t> pops(c.replicates);
    std::vector<std::uint8_t> pruned(c.replicates);
    std::vector<std::uint64_t> keys(c.replicates);
    parallel_for(c.replicates, c.threads, [&](std::size_t r) {
      SimulationPlan plan;
      plan.model = spec;
      plan.n = n;
      plan.pruning = c.pruning;
      plan.master_seed = c.master_seed;
      plan.replicate = replicate_index(c, h, r);
      const SimulationResult res = simulate(plan);
      maxima[r] = max_of(res.final);
      pops[r] = res.final.size();
      pruned[r] = res.final.pruned ? 1 : 0;
      keys[r] = plan.root_key();
    });
    for (std::size_t r = 0; r < c.replicates; ++r) {
      csv.field(keys[r]).field(static_cast<std::int64_t>(n)).field(regime).field(maxima[r]);
      csv.field(static_cast<std::uint64_t>(pops[r])).field(static_cast<std::int64_t>(pruned[r]));
      csv.end_row();
    }
    const MeanEstimate m = mean_estimate(maxima);
    rep.results["horizons"].push_back({{"n", n}, {"mean_M_n", m.mean}, {"std_error", m.std_error}});
  }
  rep.checks.push_back(make_check("completed", true, 0.0, "all replicates simulated"));
}

// ---------------------------------------------------------------------------
// Max-law suites

struct HorizonMaxima {
  long n = 0;
  double m_n = 0.0;
  std::vector<double> centered;
};

void run_max_law(const ExperimentConfig& c, const Solved& s, RunReport& rep) {
  const bool warn_only = c.suite == Suite::MeanExploratory;
  if (!s.spec) {
    rep.checks.push_back(make_check("regime", false, 0.0, "tilts not solvable: " + s.error));
    return;
  }
  const RegimeSpec& spec = *s.spec;
  const Regime want = c.suite == Suite::MaxLaw ? Regime::Fast
                      : c.suite == Suite::SlowMaxLaw ? Regime::Slow
                                                     : Regime::Mean;
  if (spec.regime != want) {
    rep.checks.push_back(make_check("regime", false, 0.0,
                                    std::string("configuration is in the ") +
                                        std::string(to_string(spec.regime)) +
                                        " regime, suite expects " + std::string(to_string(want)),
                                    warn_only));
    return;
  }
  rep.checks.push_back(make_check("regime", true, 0.0, std::string(to_string(spec.regime))));

  const bool fast = want == Regime::Fast;
  const double theta = fast ? *spec.theta_mixed : *spec.theta1_star;
  const ReproductionLaw law1 = spec.law1;
  const TiltParams tp1 = kappa_derivatives(law1, theta);
  const std::string regime(to_string(spec.regime));

  CsvWriter csv(rep.output_dir / "maxlaw.csv", {"seed", "n", "regime", "M_n", "m_n", "M_n_minus_m_n"});
  std::vector<HorizonMaxima> all;
  for (std::size_t h = 0; h < c.horizons.size(); ++h) {
    const long n = c.horizons[h];
    HorizonMaxima hm;
    hm.n = n;
    hm.m_n = centering(spec, n, c.max_law.centering);
    SimulationPlan base;
    base.model = spec;
    base.n = n;
    base.pruning = c.pruning;
    base.master_seed = c.master_seed;
    std::vector<double> maxima(c.replicates);
    std::vector<std::uint64_t> keys(c.replicates);
    if (c.max_law.method == MaxLawMethod::Conditional) {
      const long k = std::min(c.max_law.split_generation, spec.split_generation(n));
      TailOptions to;
      to.step = c.max_law.tail_step;
      const ConditionalMaxSampler sampler(base, k, to);
      parallel_for(c.replicates, c.threads, [&](std::size_t r) {
        SimulationPlan head;
        head.model = law1;
        head.n = k;
        head.master_seed = c.master_seed;
        head.replicate = replicate_index(c, h, r);
        keys[r] = head.root_key();
        const SimulationResult res = simulate(head);
        Stream u(derive_key(head.root_key(), 1));
        maxima[r] = sampler.sample(res.final.positions, u.uniform());
      });
    } else {
      parallel_for(c.replicates, c.threads, [&](std::size_t r) {
        SimulationPlan plan = base;
        plan.replicate = replicate_index(c, h, r);
        keys[r] = plan.root_key();
        maxima[r] = max_of(simulate(plan).final);
      });
    }
    hm.centered.resize(c.replicates);
    for (std::size_t r = 0; r < c.replicates; ++r) {
      hm.centered[r] = maxima[r] - hm.m_n;
      csv.field(keys[r]).field(static_cast<std::int64_t>(n)).field(regime).field(maxima[r]);
      csv.field(hm.m_n).field(hm.centered[r]).end_row();
    }
    all.push_back(std::move(hm));
  }

  // Martingale limits of the first phase, from independent trees.
  const std::size_t wr = c.max_law.w_replicates > 0 ? c.max_law.w_replicates : c.replicates;
  const long wn = c.max_law.w_horizon;
  const std::uint64_t w_seed = derive_key(c.master_seed, 0x5745494748545300ULL);
  std::vector<double> w(wr);
  std::vector<std::uint64_t> wkeys(wr);
  parallel_for(wr, c.threads, [&](std::size_t r) {
    SimulationPlan plan;
    plan.model = law1;
    plan.n = wn;
    plan.master_seed = w_seed;
    plan.replicate = r;
    wkeys[r] = plan.root_key();
    LeafReducer red(wn, theta, tp1.kappa, tp1.kappa_prime, std::nullopt, !fast);
    for_each_leaf_block(plan, [&](std::span<const double> leaves) { red.consume(leaves); });
    w[r] = fast ? red.additive() : red.derivative();
  });
  {
    CsvWriter wcsv(rep.output_dir / "w.csv", {"seed", "k", "kind", "w"});
    for (std::size_t r = 0; r < wr; ++r) {
      wcsv.field(wkeys[r]).field(static_cast<std::int64_t>(wn));
      wcsv.field(std::string_view(fast ? "additive" : "derivative")).field(w[r]).end_row();
    }
  }
  std::vector<double> w_fit(w);
  std::size_t clamped = 0;
  for (double& x : w_fit) {
    if (x < 0.0) {
      x = 0.0;
      ++clamped;
    }
  }

  CsvWriter fcsv(rep.output_dir / "fit.csv",
                 {"n", "theta", "lambda_hat", "ks_at_fit", "ci_lo", "ci_hi", "tail_slope",
                  "slope_std_error", "iqr"});
  struct Summary {
    double lambda = std::numeric_limits<double>::quiet_NaN();
    double ks = std::numeric_limits<double>::quiet_NaN();
    double slope = std::numeric_limits<double>::quiet_NaN();
    double iqr = 0.0;
  };
  std::vector<Summary> sums;
  rep.results["theta"] = theta;
  rep.results["w_negative_clamped"] = clamped;
  rep.results["horizons"] = Json::array();
  for (std::size_t h = 0; h < all.size(); ++h) {
    const EmpiricalCdf cdf(all[h].centered);
    Summary sm;
    sm.iqr = interquartile_range(cdf);
    Json hj = {{"n", all[h].n}, {"m_n", all[h].m_n}, {"iqr", sm.iqr},
               {"q10", cdf.quantile(0.1)}, {"q50", cdf.quantile(0.5)}, {"q90", cdf.quantile(0.9)}};
    FitResult fit;
    bool fitted = false;
    try {
      FitOptions fo;
      fo.bootstrap_reps = c.max_law.bootstrap_reps;
      fo.seed = derive_key(c.master_seed, 0xB0075700ULL + h);
      fo.threads = c.threads;
      fo.n = all[h].n;
      fit = fit_shift_constant(cdf, w_fit, theta, fo);
      fitted = true;
      sm.lambda = fit.lambda_hat;
      sm.ks = fit.ks_at_fit;
    } catch (const FitAmbiguity& e) {
      rep.checks.push_back(make_check("fit-n" + std::to_string(all[h].n), false, 0.0, e.what(),
                                      warn_only));
    }
    SlopeEstimate se;
    try {
      se = tail_slope(cdf, cdf.quantile(0.9), cdf.quantile(0.99));
      sm.slope = se.slope;
    } catch (const InsufficientData& e) {
      rep.checks.push_back(make_check("tail-slope-n" + std::to_string(all[h].n), false, 0.0,
                                      e.what(), warn_only));
    }
    fcsv.field(static_cast<std::int64_t>(all[h].n)).field(theta);
    fcsv.field(fitted ? fit.lambda_hat : std::numeric_limits<double>::quiet_NaN());
    fcsv.field(fitted ? fit.ks_at_fit : std::numeric_limits<double>::quiet_NaN());
    fcsv.field(fitted ? fit.bootstrap_ci.lo : std::numeric_limits<double>::quiet_NaN());
    fcsv.field(fitted ? fit.bootstrap_ci.hi : std::numeric_limits<double>::quiet_NaN());
    fcsv.field(sm.slope).field(se.std_error).field(sm.iqr).end_row();
    hj["lambda_hat"] = finite_or_null(sm.lambda);
    hj["ks_at_fit"] = finite_or_null(sm.ks);
    if (fitted) hj["lambda_ci"] = {fit.bootstrap_ci.lo, fit.bootstrap_ci.hi};
    hj["tail_slope"] = finite_or_null(sm.slope);
    rep.results["horizons"].push_back(hj);
    sums.push_back(sm);
  }

  const std::size_t last = all.size() - 1;
  if (all.size() >= 2) {
    const std::size_t prev = last - 1;
    const std::string pair = "n" + std::to_string(all[prev].n) + "-vs-n" + std::to_string(all[last].n);
    if (fast || warn_only) {
      const double ks = ks_distance(EmpiricalCdf(all[prev].centered), EmpiricalCdf(all[last].centered));
      rep.checks.push_back(make_check("ks-between-horizons", ks < 0.04, ks,
                                      pair + " KS " + fmt(ks) + " (bound 0.04)", warn_only));
    }
    if (fast) {
      const double a = sums[prev].lambda;
      const double b = sums[last].lambda;
      const double rel = std::fabs(a - b) / b;
      rep.checks.push_back(make_check("lambda-stability", std::isfinite(rel) && rel <= 0.2, rel,
                                      pair + " lambda " + fmt(a) + " vs " + fmt(b) +
                                          " (relative bound 0.2)"));
    } else {
      const double a = sums[prev].iqr;
      const double b = sums[last].iqr;
      const double rel = std::fabs(a - b) / b;
      rep.checks.push_back(make_check("iqr-stability", rel <= 0.25, rel,
                                      pair + " IQR " + fmt(a) + " vs " + fmt(b) +
                                          " (relative bound 0.25)",
                                      warn_only));
    }
  } else {
    rep.checks.push_back({"horizon-stability", CheckStatus::Warn, 0.0,
                          "needs at least two horizons"});
  }
  if (!fast) {
    for (std::size_t h = 0; h < all.size(); ++h) {
      const double ks = sums[h].ks;
      rep.checks.push_back(make_check("ks-at-fit-n" + std::to_string(all[h].n),
                                      std::isfinite(ks) && ks < 0.05, ks,
                                      "KS at fit " + fmt(ks) + " (bound 0.05)", warn_only));
    }
  }
  const double slope = sums[last].slope;
  const bool in_band = std::isfinite(slope) && slope >= -1.1 * theta && slope <= -0.9 * theta;
  rep.checks.push_back(make_check("tail-slope", in_band, slope,
                                  "n=" + std::to_string(all[last].n) + " slope " + fmt(slope) +
                                      " band [" + fmt(-1.1 * theta) + ", " + fmt(-0.9 * theta) + "]",
                                  warn_only));
}

// ---------------------------------------------------------------------------
// CLT

void run_clt(const ExperimentConfig& c, RunReport& rep) {
  const ReproductionLaw law = c.law1();
  const double theta = c.theta.value_or(0.5);
  const TiltParams tp = kappa_derivatives(law, theta);
  const TestFunction f = c.f();
  const double ef = gaussian_expectation(f, tp.kappa_double_prime);
  CsvWriter csv(rep.output_dir / "clt.csv", {"n", "seed", "W_n", "Wbar_n", "abs_diff"});
  std::vector<MeanEstimate> diffs;
  rep.results["theta"] = theta;
  rep.results["E_f_N"] = ef;
  rep.results["test_function"] = f.id();
  rep.results["horizons"] = Json::array();
  for (std::size_t h = 0; h < c.horizons.size(); ++h) {
    const long n = c.horizons[h];
    std::vector<double> wv(c.replicates);
    std::vector<double> wbar(c.replicates);
    std::vector<std::uint64_t> keys(c.replicates);
    parallel_for(c.replicates, c.threads, [&](std::size_t r) {
      SimulationPlan plan;
      plan.model = law;
      plan.n = n;
      plan.master_seed = c.master_seed;
      plan.replicate = replicate_index(c, h, r);
      keys[r] = plan.root_key();
      LeafReducer red(n, theta, tp.kappa, tp.kappa_prime, f);
      for_each_leaf_block(plan, [&](std::span<const double> leaves) { red.consume(leaves); });
      wv[r] = red.additive();
      wbar[r] = red.clt();
    });
    std::vector<double> d(c.replicates);
    for (std::size_t r = 0; r < c.replicates; ++r) {
      d[r] = std::fabs(wbar[r] - wv[r] * ef);
      csv.field(static_cast<std::int64_t>(n)).field(keys[r]).field(wv[r]).field(wbar[r]);
      csv.field(d[r]).end_row();
    }
    const MeanEstimate m = mean_estimate(d);
    diffs.push_back(m);
    rep.results["horizons"].push_back(
        {{"n", n}, {"mean_abs_diff", m.mean}, {"std_error", m.std_error},
         {"mean_W", mean_estimate(wv).mean}});
  }
  for (std::size_t h = 1; h < diffs.size(); ++h) {
    const double slack = 2.0 * std::hypot(diffs[h].std_error, diffs[h - 1].std_error);
    const double delta = diffs[h].mean - diffs[h - 1].mean;
    rep.checks.push_back(make_check(
        "non-increase-n" + std::to_string(c.horizons[h - 1]) + "-to-n" + std::to_string(c.horizons[h]),
        delta <= slack, delta,
        "change " + fmt(delta) + " allowed up to " + fmt(slack)));
  }
  const double bound = 0.1 * f.sup_norm();
  rep.checks.push_back(make_check("small-at-largest-horizon", diffs.back().mean < bound,
                                  diffs.back().mean,
                                  "mean |Wbar - W Ef| " + fmt(diffs.back().mean) + " (bound " +
                                      fmt(bound) + ")"));
}

// ---------------------------------------------------------------------------
// Decoration

void run_decoration(const ExperimentConfig& c, const Solved& s, RunReport& rep) {
  const ReproductionLaw law2 = c.law2();
  double theta = 0.0;
  if (c.theta) {
    theta = *c.theta;
  } else if (s.spec && s.spec->theta_mixed) {
    theta = *s.spec->theta_mixed;
  } else {
    throw SchemaError("/theta", "required when the mixed tilt is not available");
  }
  const TiltParams tp = kappa_triple(law2, theta);
  const double gap = theta * tp.kappa_prime - tp.kappa;
  CsvWriter csv(rep.output_dir / "decoration.csv",
                {"accept_index", "seed", "n", "overshoot", "count", "points"});
  struct Done {
    long n;
    DecorationResult r;
  };
  std::vector<Done> done;
  rep.results["theta"] = theta;
  rep.results["gap"] = gap;
  rep.results["horizons"] = Json::array();
  bool all_zero = true;
  for (std::size_t h = 0; h < c.horizons.size(); ++h) {
    const long n = c.horizons[h];
    DecorationOptions opt;
    opt.method = c.decoration.method;
    opt.depth_window = c.decoration.depth_window;
    opt.max_attempts = c.decoration.max_attempts;
    opt.threads = c.threads;
    const std::uint64_t seed = derive_key(c.master_seed, static_cast<std::uint64_t>(h));
    DecorationResult r;
    try {
      r = sample_decoration(law2, theta, n, c.replicates, seed, opt);
    } catch (const PartialResult& e) {
      rep.checks.push_back(make_check("decoration-n" + std::to_string(n), false,
                                      static_cast<double>(e.accepted()),
                                      std::string(e.what()) + ", accepted " +
                                          std::to_string(e.accepted()),
                                      c.allow_partial));
      continue;
    }
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
      const PointSample& p = r.samples[i];
      if (p.points.empty() || p.points.front() != 0.0) all_zero = false;
      csv.field(static_cast<std::uint64_t>(i)).field(seed).field(static_cast<std::int64_t>(n));
      csv.field(p.overshoot).field(static_cast<std::uint64_t>(p.points.size()));
      for (double x : p.points) csv.field(x);
      csv.end_row();
    }
    rep.results["horizons"].push_back({{"n", n},
                                       {"accepted", r.samples.size()},
                                       {"attempts", r.attempts},
                                       {"acceptance_rate", r.acceptance_rate},
                                       {"rate_ci", {r.rate_ci.lo, r.rate_ci.hi}},
                                       {"threshold", r.threshold},
                                       {"depth_window", r.depth_window}});
    done.push_back({n, std::move(r)});
  }
  rep.checks.push_back(make_check("max-atom-zero", all_zero, 0.0,
                                  all_zero ? "every sample has its maximum at 0"
                                           : "a sample without an atom at 0"));
  if (done.empty()) return;
  const Done& last = done.back();
  std::vector<double> over;
  for (const PointSample& p : last.r.samples) over.push_back(p.overshoot);
  const double ks_exp = ks_distance(EmpiricalCdf(over), [theta](double y) {
    return y <= 0.0 ? 0.0 : -std::expm1(-theta * y);
  });
  rep.checks.push_back(make_check("overshoot-exponential", ks_exp < 0.05, ks_exp,
                                  "n=" + std::to_string(last.n) + " KS vs Exp(theta) " +
                                      fmt(ks_exp) + " (bound 0.05)"));
  auto second = [](const DecorationResult& r) {
    std::vector<double> v;
    for (const PointSample& p : r.samples) v.push_back(p.points.size() > 1 ? p.points[1] : p.lower_edge);
    return v;
  };
  if (done.size() >= 2) {
    const Done& prev = done[done.size() - 2];
    const double ks = ks_distance(EmpiricalCdf(second(prev.r)), EmpiricalCdf(second(last.r)));
    rep.checks.push_back(make_check("second-point-stability", ks < 0.05, ks,
                                    "n=" + std::to_string(prev.n) + " vs n=" +
                                        std::to_string(last.n) + " KS " + fmt(ks) +
                                        " (bound 0.05)"));
  }
  const double centre = std::exp(-static_cast<double>(last.n) * gap);
  const double rate = last.r.acceptance_rate;
  rep.checks.push_back(make_check("acceptance-rate-band", rate >= centre / 20.0 && rate <= 20.0 * centre,
                                  rate,
                                  "n=" + std::to_string(last.n) + " rate " + fmt(rate) + " band [" +
                                      fmt(centre / 20.0) + ", " + fmt(20.0 * centre) + "]"));
}

// ---------------------------------------------------------------------------
// Spine checks

void run_spine(const ExperimentConfig& c, RunReport& rep) {
  const ReproductionLaw law = c.law1();
  const double theta = c.theta.value_or(1.0);
  CsvWriter csv(rep.output_dir / "spine.csv",
                {"check", "n", "lhs", "rhs", "std_error", "lhs_exact", "rhs_exact"});
  const std::vector<PathFunctional> gs = {PathFunctional::constant(1.0),
                                          PathFunctional::endpoint_box(0.0, kInf)};
  for (std::size_t h = 0; h < c.horizons.size(); ++h) {
    const long n = c.horizons[h];
    for (std::size_t gi = 0; gi < gs.size(); ++gi) {
      const std::uint64_t seed = derive_key(c.master_seed, replicate_index(c, h, gi));
      const ManyToOneResult m =
          many_to_one_check(law, theta, n, gs[gi], std::max<std::size_t>(c.replicates, 2), seed,
                            c.threads);
      const double nan = std::numeric_limits<double>::quiet_NaN();
      csv.field("many-to-one:" + gs[gi].id()).field(static_cast<std::int64_t>(n));
      csv.field(m.lhs).field(m.rhs).field(m.pooled_std_error);
      csv.field(m.lhs_exact.value_or(nan)).field(m.rhs_exact.value_or(nan)).end_row();
      const std::string tag = "many-to-one-" + gs[gi].id() + "-n" + std::to_string(n);
      if (m.lhs_exact) {
        const double err = std::fabs(*m.lhs_exact - *m.rhs_exact);
        rep.checks.push_back(make_check(tag + "-exact", err <= 1e-12 * std::max(1.0, std::fabs(*m.lhs_exact)),
                                        err, "enumeration difference " + fmt(err)));
      }
      const double z = m.pooled_std_error > 0.0 ? std::fabs(m.lhs - m.rhs) / m.pooled_std_error
                                                : (m.lhs == m.rhs ? 0.0 : kInf);
      rep.checks.push_back(make_check(tag + "-monte-carlo", z <= 4.0, z,
                                      "|lhs - rhs| / se = " + fmt(z) + " (bound 4)"));
    }
  }

  // Spine child selection against the exp(theta l) weights.
  const std::size_t trials = c.spine.selection_trials;
  std::vector<std::vector<double>> probs(trials);
  std::vector<std::size_t> chosen(trials);
  const std::uint64_t sel_seed = derive_key(c.master_seed, 0x5e1ec7ULL);
  parallel_for(trials, c.threads, [&](std::size_t i) {
    Stream rng(derive_key(sel_seed, i));
    const SpineStep st = sample_spine_step(law, theta, rng);
    double top = -kInf;
    for (double l : st.offspring) top = std::max(top, theta * l);
    std::vector<double> p(st.offspring.size());
    double tot = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) tot += (p[j] = std::exp(theta * st.offspring[j] - top));
    for (double& x : p) x /= tot;
    probs[i] = std::move(p);
    chosen[i] = st.chosen;
  });
  std::size_t slots = 0;
  for (const auto& p : probs) slots = std::max(slots, p.size());
  std::vector<double> expected(slots, 0.0);
  std::vector<double> variance(slots, 0.0);
  std::vector<double> observed(slots, 0.0);
  for (std::size_t i = 0; i < trials; ++i) {
    for (std::size_t j = 0; j < probs[i].size(); ++j) {
      expected[j] += probs[i][j];
      variance[j] += probs[i][j] * (1.0 - probs[i][j]);
    }
    observed[chosen[i]] += 1.0;
  }
  double worst = 0.0;
  {
    CsvWriter sc(rep.output_dir / "selection.csv", {"slot", "observed", "expected", "z"});
    for (std::size_t j = 0; j < slots; ++j) {
      const double z = variance[j] > 0.0 ? (observed[j] - expected[j]) / std::sqrt(variance[j])
                                         : (observed[j] == expected[j] ? 0.0 : kInf);
      worst = std::max(worst, std::fabs(z));
      sc.field(static_cast<std::uint64_t>(j)).field(observed[j]).field(expected[j]).field(z).end_row();
    }
  }
  rep.checks.push_back(make_check("spine-selection", worst <= 4.0, worst,
                                  "largest |z| over child slots " + fmt(worst) + " (bound 4)"));

  // Spine endpoint in the spined tree against the tilted walk.
  const long wn = c.spine.walk_horizon;
  std::vector<double> xi(trials);
  std::vector<double> walk(trials);
  const std::uint64_t tree_seed = derive_key(c.master_seed, 0x7ee5ULL);
  const std::uint64_t walk_seed = derive_key(c.master_seed, 0x3a1cULL);
  parallel_for(trials, c.threads, [&](std::size_t i) {
    Stream tr(derive_key(tree_seed, i));
    xi[i] = sample_spined_tree(law, theta, wn, tr).spine_positions.positions.back();
    Stream wr(derive_key(walk_seed, i));
    walk[i] = sample_spine_walk(law, theta, wn, wr).positions.back();
  });
  {
    CsvWriter wc(rep.output_dir / "spine_walk.csv", {"trial", "n", "V_xi_n", "S_n"});
    for (std::size_t i = 0; i < trials; ++i) {
      wc.field(static_cast<std::uint64_t>(i)).field(static_cast<std::int64_t>(wn));
      wc.field(xi[i]).field(walk[i]).end_row();
    }
  }
  const double ks = ks_distance(EmpiricalCdf(xi), EmpiricalCdf(walk));
  rep.checks.push_back(make_check("spine-endpoint-ks", ks < 0.01, ks,
                                  "n=" + std::to_string(wn) + " KS " + fmt(ks) + " (bound 0.01)"));
}

}  // namespace

Json params_report(const ExperimentConfig& c) {
  const Solved s = solve(c);
  Json j = solver_json(c, s);
  j["t"] = c.t;
  j["m_n"] = Json::array();
  if (s.spec) {
    for (long n : c.horizons) {
      Json e;
      e["n"] = n;
      try {
        e["theorem"] = centering(*s.spec, n, CenteringForm::Theorem);
        e["alternative"] = centering(*s.spec, n, CenteringForm::Alternative);
      } catch (const Error& err) {
        e["error"] = err.what();
      }
      j["m_n"].push_back(e);
    }
  }
  return j;
}

RunReport run(const ExperimentConfig& c) {
  RunReport rep;
  rep.suite = c.suite;
  rep.output_dir = prepare_dir(c);
  const Solved s = solve(c);
  rep.solver = solver_json(c, s);
  write_manifest(c, rep.solver);
  try {
    switch (c.suite) {
      case Suite::Params:
        run_params(c, s, rep);
        break;
      case Suite::Simulate:
        run_simulate(c, s, rep);
        break;
      case Suite::MaxLaw:
      case Suite::SlowMaxLaw:
      case Suite::MeanExploratory:
        run_max_law(c, s, rep);
        break;
      case Suite::Clt:
        run_clt(c, rep);
        break;
      case Suite::Decoration:
        run_decoration(c, s, rep);
        break;
      case Suite::SpineCheck:
        run_spine(c, rep);
        break;
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const PartialResult& e) {
    rep.checks.push_back(make_check("run", false, 0.0, e.what(), c.allow_partial));
  } catch (const Error& e) {
    rep.checks.push_back(make_check("run", false, 0.0, e.what()));
  }
  if (c.suite == Suite::MeanExploratory) {
    for (Check& ch : rep.checks) ch.status = CheckStatus::Warn;
  }
  write_json(rep.output_dir / "verdict.json", rep.verdict());
  return rep;
}

}  // namespace brw
