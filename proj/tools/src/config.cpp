#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "stlplan/error.hpp"

namespace stlplan::cli {

using nlohmann::json;

json default_config_json() {
  return {
      {"paths", {{"demos", nullptr}, {"scenario", nullptr}, {"spec", nullptr}, {"model", nullptr}, {"output", "out"}}},
      {"lfd", {{"K", 6}, {"max_iters", 100}, {"tol", 1e-6}, {"seed", 0}, {"init_jitter", 0.0}}},
      {"tracker",
       {{"v_max", 2.0},
        {"omega_max", 1.5},
        {"q", {1.0, 1.0, 0.1}},
        {"r", {0.05, 0.05}},
        {"terminal_scale", 10.0},
        {"iters", 50},
        {"rel_tol", 1e-6},
        {"eps_wp", 0.5},
        {"reference", "stepwise"}}},
      {"optimizer",
       {{"method", "bayesian"},
        {"budget", 60},
        {"seed", 0},
        {"deadline_s", nullptr},
        {"stop_when_satisfied", false},
        {"batch", 1},
        {"n_init", 0},
        {"candidates", 256}}},
      {"theta",
       {{"map_margin", 1.0},
        {"mean_radius", nullptr},
        {"log_duration_radius", nullptr},
        {"max_duration_steps", 0.0},
        {"freeze_structural_zeros", false}}},
      {"planner", {{"M", 4}, {"sensing_range", 0.0}, {"deadline_fraction", 0.9}}},
      {"stl", {{"nu", 5.0}}},
      {"output", {{"record_timing", true}}},
  };
}

namespace {

void merge(json& base, const json& user, const std::string& where) {
  if (!user.is_object()) throw IoError("config" + where + ": expected an object");
  for (const auto& [key, value] : user.items()) {
    const std::string at = where + "." + key;
    if (!base.contains(key)) throw IoError("config: unknown key '" + at.substr(1) + "'");
    if (base[key].is_object()) {
      merge(base[key], value, at);
    } else {
      base[key] = value;
    }
  }
}

template <typename T>
T get(const json& section, const char* key, const char* name) {
  try {
    return section.at(key).get<T>();
  } catch (const json::exception&) {
    throw IoError(std::string("config: '") + name + "." + key + "' has the wrong type");
  }
}

std::optional<double> get_opt(const json& section, const char* key, const char* name) {
  if (section.at(key).is_null()) return std::nullopt;
  return get<double>(section, key, name);
}

std::filesystem::path get_path(const json& paths, const char* key, const std::filesystem::path& base) {
  const json& v = paths.at(key);
  if (v.is_null()) return {};
  if (!v.is_string()) throw IoError(std::string("config: 'paths.") + key + "' must be a string");
  std::filesystem::path p = v.get<std::string>();
  return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

void apply_overrides(json& doc, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw IoError("--set expects section.key=value, got '" + o + "'");
    }
    const std::string section = o.substr(0, dot);
    const std::string key = o.substr(dot + 1, eq - dot - 1);
    const std::string text = o.substr(eq + 1);
    if (!doc.contains(section) || !doc[section].is_object() || !doc[section].contains(key)) {
      throw IoError("--set: unknown key '" + section + "." + key + "'");
    }
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    doc[section][key] = value;
  }
}

RunConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  json full = default_config_json();
  merge(full, doc, "");
  RunConfig c;

  const json& p = full["paths"];
  c.paths = {get_path(p, "demos", base_dir), get_path(p, "scenario", base_dir), get_path(p, "spec", base_dir),
             get_path(p, "model", base_dir), get_path(p, "output", base_dir)};
  for (const auto& input : {c.paths.demos, c.paths.scenario, c.paths.spec}) {
    if (!input.empty() && !std::filesystem::exists(input)) throw IoError("config: path does not exist: " + input.string());
  }

  const json& l = full["lfd"];
  c.lfd.K = get<int>(l, "K", "lfd");
  c.lfd.max_iters = get<int>(l, "max_iters", "lfd");
  c.lfd.tol = get<double>(l, "tol", "lfd");
  c.lfd.seed = get<std::uint64_t>(l, "seed", "lfd");
  c.lfd.init_jitter = get<double>(l, "init_jitter", "lfd");

  auto& pl = c.planner;
  const json& t = full["tracker"];
  pl.tracker.limits.v_max = get<double>(t, "v_max", "tracker");
  pl.tracker.limits.omega_max = get<double>(t, "omega_max", "tracker");
  const auto q = get<std::vector<double>>(t, "q", "tracker");
  const auto r = get<std::vector<double>>(t, "r", "tracker");
  if (q.size() != 3 || r.size() != 2) throw IoError("config: tracker.q needs 3 weights and tracker.r needs 2");
  pl.tracker.q_diag = {q[0], q[1], q[2]};
  pl.tracker.r_diag = {r[0], r[1]};
  pl.tracker.terminal_scale = get<double>(t, "terminal_scale", "tracker");
  pl.tracker.iters = get<int>(t, "iters", "tracker");
  pl.tracker.rel_tol = get<double>(t, "rel_tol", "tracker");
  c.eps_wp = get<double>(t, "eps_wp", "tracker");
  const auto ref = get<std::string>(t, "reference", "tracker");
  if (ref != "stepwise" && ref != "interpolated") throw IoError("config: tracker.reference must be stepwise or interpolated");
  pl.reference = ref == "stepwise" ? reproduce::ReferenceMode::kStepwise : reproduce::ReferenceMode::kInterpolated;

  const json& o = full["optimizer"];
  try {
    pl.optimizer.method = opt::parse_method(get<std::string>(o, "method", "optimizer"));
  } catch (const ModelError& e) {
    throw IoError(std::string("config: ") + e.what());
  }
  pl.optimizer.budget = get<int>(o, "budget", "optimizer");
  pl.optimizer.seed = get<std::uint64_t>(o, "seed", "optimizer");
  pl.optimizer.deadline_s = get_opt(o, "deadline_s", "optimizer");
  pl.optimizer.stop_when_satisfied = get<bool>(o, "stop_when_satisfied", "optimizer");
  pl.optimizer.batch = get<int>(o, "batch", "optimizer");
  pl.optimizer.n_init = get<int>(o, "n_init", "optimizer");
  pl.optimizer.candidates = get<int>(o, "candidates", "optimizer");
  if (pl.optimizer.budget < 1 || pl.optimizer.batch < 1) throw IoError("config: optimizer budget and batch must be >= 1");

  const json& th = full["theta"];
  constexpr double kInf = std::numeric_limits<double>::infinity();
  pl.theta.map_margin = get<double>(th, "map_margin", "theta");
  pl.theta.mean_radius = get_opt(th, "mean_radius", "theta").value_or(kInf);
  pl.theta.log_duration_radius = get_opt(th, "log_duration_radius", "theta").value_or(kInf);
  pl.theta.max_duration_steps = get<double>(th, "max_duration_steps", "theta");
  pl.theta.freeze_structural_zeros = get<bool>(th, "freeze_structural_zeros", "theta");

  const json& pn = full["planner"];
  pl.cycles = get<int>(pn, "M", "planner");
  pl.sensing_range = get<double>(pn, "sensing_range", "planner");
  pl.deadline_fraction = get<double>(pn, "deadline_fraction", "planner");
  if (pl.cycles < 1) throw IoError("config: planner.M must be >= 1");

  pl.robustness.nu = get<double>(full["stl"], "nu", "stl");
  if (!(pl.robustness.nu > 0.0)) throw IoError("config: stl.nu must be positive");

  c.output.record_timing = get<bool>(full["output"], "record_timing", "output");
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  json doc = json::object();
  std::filesystem::path base;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw IoError(path.string() + ": cannot open config");
    std::stringstream ss;
    ss << in.rdbuf();
    doc = json::parse(ss.str(), nullptr, false);
    if (doc.is_discarded()) throw IoError(path.string() + ": malformed JSON");
    base = path.parent_path();
  }
  // Overrides land on the merged document so they may touch keys the file omits.
  json full = default_config_json();
  merge(full, doc, "");
  apply_overrides(full, overrides);
  if (const char* env = std::getenv("PLANNER_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long seed = std::strtoull(env, &end, 10);
    if (*end != '\0') throw IoError("PLANNER_SEED must be a non-negative integer");
    full["lfd"]["seed"] = seed;
    full["optimizer"]["seed"] = seed;
  }
  return config_from_json(full, base);
}

}  // namespace stlplan::cli
