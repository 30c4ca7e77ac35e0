#include "coordfield/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <set>
#include <string>
#include <tuple>

#include "coordfield/rng.hpp"

namespace coordfield {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional = {}) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object", where);
  for (const char* key : required)
    if (!obj.contains(key)) throw ConfigError(where + ": missing field '" + key + "'", where + "." + key);
  for (const auto& item : obj.items()) {
    const auto& k = item.key();
    const auto known = [&](std::initializer_list<const char*> keys) {
      return std::any_of(keys.begin(), keys.end(), [&](const char* s) { return k == s; });
    };
    if (!known(required) && !known(optional))
      throw ConfigError(where + ": unknown field '" + k + "'", where + "." + k);
  }
}

double number(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number", where + "." + key);
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(where + "." + key + ": not finite", where + "." + key);
  return d;
}

int integer(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer", where + "." + key);
  return v.get<int>();
}

std::string text(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string", where + "." + key);
  return v.get<std::string>();
}

const json& array(const json& obj, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(std::string(key) + ": expected an array", key);
  return v;
}

std::string at_coords(Vec2 p) {
  return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
}

Role parse_role(const json& obj, const std::string& where) {
  const auto s = text(obj, "type", where);
  const auto r = role_from_string(s);
  if (!r) throw ConfigError(where + ".type: expected 'patrol' or 'tracking', got '" + s + "'", where + ".type");
  return *r;
}

Scenario from_scenario_doc(const json& doc, std::optional<std::uint64_t> seed_override) {
  check_keys(doc, "scenario", {"width", "height", "uavs"},
             {"cell_size", "obstacles", "tasks", "entities", "traffic_lights", "seed", "strategy", "strategy_params"});
  const int width = integer(doc, "width", "scenario");
  const int height = integer(doc, "height", "scenario");
  const double cell = doc.contains("cell_size") ? number(doc, "cell_size", "scenario") : 1.0;

  std::vector<Rect> rects;
  if (doc.contains("obstacles")) {
    const json& obs = array(doc, "obstacles");
    for (std::size_t n = 0; n < obs.size(); ++n) {
      const std::string where = "obstacles[" + std::to_string(n) + "]";
      check_keys(obs[n], where, {"x", "y", "w", "h"});
      rects.push_back({integer(obs[n], "x", where), integer(obs[n], "y", where), integer(obs[n], "w", where),
                       integer(obs[n], "h", where)});
    }
  }
  Scenario s{WorldMap(width, height, cell, rects), {}, {}, 0, std::nullopt, json::object()};

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer())
      throw ConfigError("seed: expected an integer", "seed");
    s.seed = doc["seed"].get<std::uint64_t>();
  }
  if (seed_override) s.seed = *seed_override;
  if (doc.contains("strategy")) s.strategy = text(doc, "strategy", "scenario");
  if (doc.contains("strategy_params")) {
    if (!doc["strategy_params"].is_object()) throw ConfigError("strategy_params: expected an object", "strategy_params");
    s.strategy_params = doc["strategy_params"];
  }

  const json& uavs = array(doc, "uavs");
  std::set<int> uav_ids;
  for (std::size_t n = 0; n < uavs.size(); ++n) {
    const std::string where = "uavs[" + std::to_string(n) + "]";
    check_keys(uavs[n], where, {"id", "type", "x", "y"}, {"base_capability"});
    Uav u;
    u.id = integer(uavs[n], "id", where);
    u.type = parse_role(uavs[n], where);
    u.position = {number(uavs[n], "x", where), number(uavs[n], "y", where)};
    u.base_capability = uavs[n].contains("base_capability") ? number(uavs[n], "base_capability", where) : 1.0;
    u.capability = u.base_capability;
    if (!(u.base_capability > 0.0))
      throw ConfigError(where + ".base_capability: must be positive", where + ".base_capability");
    if (!uav_ids.insert(u.id).second) throw ConfigError(where + ".id: duplicate UAV id", where + ".id");
    if (is_obstacle(s.world, u.position))
      throw ConfigError(where + ": UAV at " + at_coords(u.position) + " is on an obstacle or outside the map", where);
    s.uavs.push_back(u);
  }
  std::sort(s.uavs.begin(), s.uavs.end(), [](const Uav& a, const Uav& b) { return a.id < b.id; });

  if (doc.contains("tasks")) {
    const json& tasks = array(doc, "tasks");
    for (std::size_t n = 0; n < tasks.size(); ++n) {
      const std::string where = "tasks[" + std::to_string(n) + "]";
      check_keys(tasks[n], where, {"x", "y", "w", "type"}, {"sigma"});
      Task t;
      t.id = static_cast<int>(n) + 1;
      t.position = {number(tasks[n], "x", where), number(tasks[n], "y", where)};
      t.weight = number(tasks[n], "w", where);
      t.sigma = tasks[n].contains("sigma") ? number(tasks[n], "sigma", where) : kDefaultSigma;
      t.type = parse_role(tasks[n], where);
      if (is_obstacle(s.world, t.position))
        throw ConfigError(where + ": task at " + at_coords(t.position) + " is on an obstacle or outside the map",
                          where);
      try {
        s.tasks = inject_task(std::move(s.tasks), t, s.world);
      } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what(), where + "." + e.field());
      }
    }
  }

  if (doc.contains("entities")) {
    const json& ents = array(doc, "entities");
    std::set<int> ids;
    for (std::size_t n = 0; n < ents.size(); ++n) {
      const std::string where = "entities[" + std::to_string(n) + "]";
      check_keys(ents[n], where, {"id", "kind", "x", "y"}, {"vx", "vy"});
      Entity e;
      e.id = integer(ents[n], "id", where);
      const auto kind = entity_kind_from_string(text(ents[n], "kind", where));
      if (!kind) throw ConfigError(where + ".kind: expected 'pedestrian' or 'vehicle'", where + ".kind");
      e.kind = *kind;
      e.position = {number(ents[n], "x", where), number(ents[n], "y", where)};
      e.velocity = {ents[n].contains("vx") ? number(ents[n], "vx", where) : 0.0,
                    ents[n].contains("vy") ? number(ents[n], "vy", where) : 0.0};
      if (!ids.insert(e.id).second) throw ConfigError(where + ".id: duplicate entity id", where + ".id");
      if (is_obstacle(s.world, e.position))
        throw ConfigError(where + ": entity at " + at_coords(e.position) + " is on an obstacle or outside the map",
                          where);
      if (norm(e.velocity) > max_speed(e.kind) + 1e-12)
        throw ConfigError(where + ": speed exceeds the limit for its kind", where + ".vx");
      s.world.entities.push_back(e);
    }
  }

  if (doc.contains("traffic_lights")) {
    const json& lights = array(doc, "traffic_lights");
    for (std::size_t n = 0; n < lights.size(); ++n) {
      const std::string where = "traffic_lights[" + std::to_string(n) + "]";
      check_keys(lights[n], where, {"x", "y"}, {"phase"});
      TrafficLight l;
      l.position = {number(lights[n], "x", where), number(lights[n], "y", where)};
      l.phase = lights[n].contains("phase") ? integer(lights[n], "phase", where) : 0;
      if (l.phase < 0 || l.phase >= kTrafficLightPhases)
        throw ConfigError(where + ".phase: out of range", where + ".phase");
      s.world.traffic_lights.push_back(l);
    }
  }
  return s;
}

CityParams city_from_doc(const json& doc) {
  check_keys(doc, "generator", {"generator"},
             {"width", "height", "cell_size", "block", "road", "n_uavs", "n_tasks", "n_pedestrians", "n_vehicles",
              "task_sigma", "task_weights", "seed", "strategy", "strategy_params"});
  if (doc["generator"] != "city") throw ConfigError("generator: only 'city' is supported", "generator");
  CityParams p;
  const auto opt_int = [&](const char* key, int& out) {
    if (doc.contains(key)) out = integer(doc, key, "generator");
  };
  opt_int("width", p.width);
  opt_int("height", p.height);
  opt_int("block", p.block);
  opt_int("road", p.road);
  opt_int("n_uavs", p.n_uavs);
  opt_int("n_tasks", p.n_tasks);
  opt_int("n_pedestrians", p.n_pedestrians);
  opt_int("n_vehicles", p.n_vehicles);
  if (doc.contains("cell_size")) p.cell_size = number(doc, "cell_size", "generator");
  if (doc.contains("task_sigma")) p.task_sigma = number(doc, "task_sigma", "generator");
  if (doc.contains("task_weights")) {
    p.task_weights.clear();
    for (const json& w : array(doc, "task_weights")) {
      if (!w.is_number()) throw ConfigError("task_weights: expected numbers", "task_weights");
      p.task_weights.push_back(w.get<double>());
    }
    if (p.task_weights.empty()) throw ConfigError("task_weights: must not be empty", "task_weights");
  }
  if (p.block <= p.road || p.road < 1) throw ConfigError("block must exceed road, road >= 1", "block");
  if (p.n_uavs < 1) throw ConfigError("n_uavs must be >= 1", "n_uavs");
  return p;
}

Vec2 random_free_point(const WorldMap& world, Rng& rng) {
  std::uniform_real_distribution<double> ux(0.0, world.extent_x());
  std::uniform_real_distribution<double> uy(0.0, world.extent_y());
  for (int attempt = 0; attempt < 1'000'000; ++attempt) {
    const Vec2 p{ux(rng), uy(rng)};
    if (!is_obstacle(world, p)) return p;
  }
  throw ConfigError("map has no free cells");
}

}  // namespace

Scenario generate_city(const CityParams& p, std::uint64_t seed) {
  std::vector<Rect> rects;
  const int margin = p.road / 2;
  for (int by = 0; by < p.height; by += p.block)
    for (int bx = 0; bx < p.width; bx += p.block)
      rects.push_back({bx + margin, by + margin, p.block - p.road, p.block - p.road});
  Scenario s{WorldMap(p.width, p.height, p.cell_size, rects), {}, {}, seed, std::nullopt, json::object()};

  for (int ly = p.block; ly < p.height; ly += p.block)
    for (int lx = p.block; lx < p.width; lx += p.block)
      s.world.traffic_lights.push_back({{lx * p.cell_size, ly * p.cell_size}, ((lx + ly) / p.block) % 3, 0.0});

  Rng uav_rng = make_rng(seed, "scenario.uavs");
  for (int n = 0; n < p.n_uavs; ++n) {
    Uav u;
    u.id = n + 1;
    u.type = n < (p.n_uavs + 1) / 2 ? Role::patrol : Role::tracking;
    u.position = random_free_point(s.world, uav_rng);
    s.uavs.push_back(u);
  }

  Rng task_rng = make_rng(seed, "scenario.tasks");
  std::uniform_int_distribution<std::size_t> pick_weight(0, p.task_weights.size() - 1);
  for (int n = 0; n < p.n_tasks; ++n) {
    Task t;
    t.id = n + 1;
    t.position = random_free_point(s.world, task_rng);
    t.weight = p.task_weights[pick_weight(task_rng)];
    t.sigma = p.task_sigma;
    t.type = n % 2 == 0 ? Role::patrol : Role::tracking;
    s.tasks = inject_task(std::move(s.tasks), t, s.world);
  }

  Rng ent_rng = make_rng(seed, "scenario.entities");
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  int next_id = 1;
  const auto spawn = [&](EntityKind kind, int count, double speed) {
    for (int n = 0; n < count; ++n) {
      Entity e;
      e.id = next_id++;
      e.kind = kind;
      e.position = random_free_point(s.world, ent_rng);
      const double a = angle(ent_rng);
      e.velocity = {speed * std::cos(a), speed * std::sin(a)};
      s.world.entities.push_back(e);
    }
  };
  spawn(EntityKind::pedestrian, p.n_pedestrians, 0.4);
  spawn(EntityKind::vehicle, p.n_vehicles, 1.5);
  return s;
}

Scenario load_scenario(const json& doc, std::optional<std::uint64_t> seed_override) {
  if (doc.is_object() && doc.contains("generator")) {
    const CityParams p = city_from_doc(doc);
    std::uint64_t seed = doc.contains("seed") ? doc["seed"].get<std::uint64_t>() : 0;
    if (seed_override) seed = *seed_override;
    Scenario s = generate_city(p, seed);
    if (doc.contains("strategy")) s.strategy = text(doc, "strategy", "generator");
    if (doc.contains("strategy_params")) s.strategy_params = doc["strategy_params"];
    return s;
  }
  return from_scenario_doc(doc, seed_override);
}

Scenario load_scenario_file(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'", "scenario");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("scenario file '" + path.string() + "' is not valid JSON: " + e.what(), "scenario");
  }
  return load_scenario(doc, seed_override);
}

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["width"] = s.world.width();
  doc["height"] = s.world.height();
  doc["cell_size"] = s.world.cell_size();
  // Obstacles: row runs, merged with identical runs directly above.
  json obstacles = json::array();
  const Mask& m = s.world.mask();
  std::vector<Rect> open;
  std::vector<Rect> done;
  for (int j = 0; j < m.height(); ++j) {
    std::vector<Rect> row;
    for (int i = 0; i < m.width();) {
      if (m(i, j) == 0) {
        ++i;
        continue;
      }
      int end = i;
      while (end < m.width() && m(end, j) != 0) ++end;
      row.push_back({i, j, end - i, 1});
      i = end;
    }
    std::vector<Rect> next;
    for (Rect r : row) {
      const auto it = std::find_if(open.begin(), open.end(), [&](const Rect& o) { return o.x == r.x && o.w == r.w; });
      if (it != open.end()) {
        r.y = it->y;
        r.h = it->h + 1;
        open.erase(it);
      }
      next.push_back(r);
    }
    done.insert(done.end(), open.begin(), open.end());
    open = std::move(next);
  }
  done.insert(done.end(), open.begin(), open.end());
  std::sort(done.begin(), done.end(), [](const Rect& a, const Rect& b) { return std::tie(a.y, a.x) < std::tie(b.y, b.x); });
  for (const Rect& r : done) obstacles.push_back({{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}});
  doc["obstacles"] = obstacles;
  json uavs = json::array();
  for (const Uav& u : s.uavs)
    uavs.push_back({{"id", u.id}, {"type", to_string(u.type)}, {"x", u.position.x}, {"y", u.position.y},
                    {"base_capability", u.base_capability}});
  doc["uavs"] = uavs;
  json tasks = json::array();
  for (const Task& t : s.tasks)
    tasks.push_back({{"x", t.position.x}, {"y", t.position.y}, {"w", t.weight}, {"sigma", t.sigma},
                     {"type", to_string(t.type)}});
  doc["tasks"] = tasks;
  json ents = json::array();
  for (const Entity& e : s.world.entities)
    ents.push_back({{"id", e.id}, {"kind", to_string(e.kind)}, {"x", e.position.x}, {"y", e.position.y},
                    {"vx", e.velocity.x}, {"vy", e.velocity.y}});
  doc["entities"] = ents;
  json lights = json::array();
  for (const TrafficLight& l : s.world.traffic_lights)
    lights.push_back({{"x", l.position.x}, {"y", l.position.y}, {"phase", l.phase}});
  doc["traffic_lights"] = lights;
  doc["seed"] = s.seed;
  if (s.strategy) doc["strategy"] = *s.strategy;
  if (!s.strategy_params.empty()) doc["strategy_params"] = s.strategy_params;
  return doc;
}

}  // namespace coordfield
