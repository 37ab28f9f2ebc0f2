#include "stlplan/constraints/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stlplan/error.hpp"

namespace stlplan::constraints {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw IoError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw IoError(where + ": unknown key '" + key + "'");
  }
}

Box box_from(const json& j, const std::string& where) {
  reject_unknown(j, {"x_lb", "x_ub", "y_lb", "y_ub"}, where);
  Box b{j.at("x_lb").get<double>(), j.at("x_ub").get<double>(), j.at("y_lb").get<double>(), j.at("y_ub").get<double>()};
  if (!b.valid()) throw IoError(where + ": box requires x_lb < x_ub and y_lb < y_ub");
  return b;
}

json box_to(const Box& b) { return {{"x_lb", b.x_lb}, {"x_ub", b.x_ub}, {"y_lb", b.y_lb}, {"y_ub", b.y_ub}}; }

std::pair<double, double> pair_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw IoError(where + ": expected a two-element array");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

int Scenario::horizon_steps() const { return static_cast<int>(std::lround(horizon_t / dt)); }

const ObstacleSpec& Scenario::obstacle(const std::string& id) const {
  for (const auto& o : obstacles) {
    if (o.id == id) return o;
  }
  throw ModelError("unknown obstacle '" + id + "'");
}

void Scenario::validate() const {
  if (!map_bounds.valid()) throw ModelError("map bounds must be a non-empty box");
  if (!(dt > 0.0) || !(horizon_t > 0.0)) throw ModelError("dt and horizon_t must be positive");
  const double steps = horizon_t / dt;
  if (std::fabs(steps - std::round(steps)) > 1e-6) throw ModelError("horizon_t must be an integral multiple of dt");
  if (!map_bounds.contains({start.x, start.y})) throw ModelError("start lies outside the map");
  if (!map_bounds.contains({goal.x, goal.y})) throw ModelError("goal lies outside the map");
  static const std::regex kIdent("[A-Za-z_][A-Za-z0-9_]*");
  std::set<std::string> ids;
  for (const auto& o : obstacles) {
    if (!std::regex_match(o.id, kIdent)) throw ModelError("obstacle id '" + o.id + "' is not an identifier");
    if (!ids.insert(o.id).second) throw ModelError("duplicate obstacle id '" + o.id + "'");
    if (!o.box0.valid()) throw ModelError("obstacle '" + o.id + "' has an empty box");
    if (!(o.inflation >= 0.0)) throw ModelError("obstacle '" + o.id + "' has negative inflation");
  }
  for (const auto& r : road_rule_regions) {
    if (!r.valid()) throw ModelError("road-rule region is an empty box");
  }
  for (const auto& tl : traffic_lights) {
    if (!(tl.red_start < tl.red_end)) throw ModelError("traffic light red interval must satisfy t1 < t2");
    if (!tl.avoid.valid() || !tl.stay.valid()) throw ModelError("traffic light regions must be non-empty");
    if (tl.avoid.overlaps(tl.stay)) throw ModelError("traffic light avoid and stay regions overlap");
  }
  for (const auto& sd : safety_distances) {
    if (ids.count(sd.obstacle) == 0) throw ModelError("safety distance references unknown obstacle '" + sd.obstacle + "'");
  }
}

Scenario scenario_from_json(const std::string& text) {
  Scenario s;
  try {
    const json j = json::parse(text);
    reject_unknown(j,
                   {"map_bounds", "start", "goal", "horizon_t", "dt", "obstacles", "road_rule_regions",
                    "traffic_lights", "safety_distances", "description"},
                   "scenario");
    s.map_bounds = box_from(j.at("map_bounds"), "map_bounds");
    const auto& start = j.at("start");
    if (!start.is_array() || start.size() != 3) throw IoError("start: expected [x, y, alpha]");
    s.start = {start[0].get<double>(), start[1].get<double>(), wrap_angle(start[2].get<double>())};
    const auto& goal = j.at("goal");
    reject_unknown(goal, {"x", "y", "radius"}, "goal");
    s.goal = {goal.at("x").get<double>(), goal.at("y").get<double>(), goal.value("radius", 0.5)};
    s.horizon_t = j.at("horizon_t").get<double>();
    s.dt = j.at("dt").get<double>();
    if (j.contains("obstacles")) {
      for (const auto& o : j.at("obstacles")) {
        reject_unknown(o, {"id", "box", "velocity", "inflation"}, "obstacle");
        ObstacleSpec spec;
        spec.id = o.at("id").get<std::string>();
        spec.box0 = box_from(o.at("box"), "obstacle '" + spec.id + "' box");
        if (o.contains("velocity")) std::tie(spec.vx, spec.vy) = pair_from(o.at("velocity"), "velocity");
        spec.inflation = o.value("inflation", 0.0);
        s.obstacles.push_back(std::move(spec));
      }
    }
    if (j.contains("road_rule_regions")) {
      for (const auto& r : j.at("road_rule_regions")) s.road_rule_regions.push_back(box_from(r, "road_rule_regions"));
    }
    if (j.contains("traffic_lights")) {
      for (const auto& t : j.at("traffic_lights")) {
        reject_unknown(t, {"avoid", "stay", "red_interval"}, "traffic light");
        TrafficLightSpec tl;
        tl.avoid = box_from(t.at("avoid"), "traffic light avoid");
        tl.stay = box_from(t.at("stay"), "traffic light stay");
        std::tie(tl.red_start, tl.red_end) = pair_from(t.at("red_interval"), "red_interval");
        s.traffic_lights.push_back(tl);
      }
    }
    if (j.contains("safety_distances")) {
      for (const auto& d : j.at("safety_distances")) {
        reject_unknown(d, {"obstacle", "axis", "bound", "window", "relation"}, "safety distance");
        SafetyDistance sd;
        sd.obstacle = d.at("obstacle").get<std::string>();
        const auto axis = d.at("axis").get<std::string>();
        if (axis != "x" && axis != "y") throw IoError("safety distance axis must be \"x\" or \"y\"");
        sd.axis = axis == "x" ? Axis::kX : Axis::kY;
        sd.bound = d.at("bound").get<double>();
        const auto [lo, hi] = pair_from(d.at("window"), "safety distance window");
        sd.window = stl::Interval(lo, hi);
        const auto rel = d.value("relation", std::string("<"));
        if (rel != "<" && rel != ">") throw IoError("safety distance relation must be \"<\" or \">\"");
        sd.relation = rel == "<" ? Relation::kLess : Relation::kGreater;
        s.safety_distances.push_back(std::move(sd));
      }
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed scenario JSON: ") + e.what());
  } catch (const ModelError& e) {
    throw IoError(std::string("invalid scenario: ") + e.what());
  }
  s.validate();
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["map_bounds"] = box_to(s.map_bounds);
  j["start"] = {s.start.x, s.start.y, s.start.alpha};
  j["goal"] = {{"x", s.goal.x}, {"y", s.goal.y}, {"radius", s.goal.radius}};
  j["horizon_t"] = s.horizon_t;
  j["dt"] = s.dt;
  json obs = json::array();
  for (const auto& o : s.obstacles) {
    obs.push_back({{"id", o.id}, {"box", box_to(o.box0)}, {"velocity", {o.vx, o.vy}}, {"inflation", o.inflation}});
  }
  j["obstacles"] = obs;
  json rules = json::array();
  for (const auto& r : s.road_rule_regions) rules.push_back(box_to(r));
  j["road_rule_regions"] = rules;
  json lights = json::array();
  for (const auto& tl : s.traffic_lights) {
    lights.push_back({{"avoid", box_to(tl.avoid)}, {"stay", box_to(tl.stay)}, {"red_interval", {tl.red_start, tl.red_end}}});
  }
  j["traffic_lights"] = lights;
  json sds = json::array();
  for (const auto& sd : s.safety_distances) {
    sds.push_back({{"obstacle", sd.obstacle},
                   {"axis", sd.axis == Axis::kX ? "x" : "y"},
                   {"bound", sd.bound},
                   {"window", {sd.window.lo(), sd.window.hi()}},
                   {"relation", sd.relation == Relation::kLess ? "<" : ">"}});
  }
  j["safety_distances"] = sds;
  return j.dump(2) + "\n";
}

Scenario read_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return scenario_from_json(ss.str());
  } catch (const Error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> sampling_warnings(const Scenario& s, double ego_speed_max) {
  std::vector<std::string> out;
  for (const auto& o : s.obstacles) {
    const Box b = o.box_at(0.0);
    const double thickness = std::min(b.x_ub - b.x_lb, b.y_ub - b.y_lb);
    const double motion = (std::hypot(o.vx, o.vy) + ego_speed_max) * s.dt;
    if (motion >= thickness) {
      std::ostringstream msg;
      msg << "obstacle " << o.id << ": relative motion per step " << motion << " m reaches its thickness "
          << thickness << " m; collisions between samples may be missed";
      out.push_back(msg.str());
    }
  }
  return out;
}

std::string light_channel(std::size_t index) { return "tl" + std::to_string(index) + "_green"; }

}  // namespace stlplan::constraints
