#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coordfield/swarm.hpp"
#include "coordfield/task.hpp"
#include "coordfield/world.hpp"

namespace coordfield {

struct Scenario {
  WorldMap world;
  TaskSet tasks;
  std::vector<Uav> uavs;
  std::uint64_t seed = 0;
  std::optional<std::string> strategy;
  nlohmann::json strategy_params = nlohmann::json::object();
};

/// Parameters of the block-city generator document
/// ({"generator": "city", ...}).
struct CityParams {
  int width = 200;
  int height = 200;
  double cell_size = 1.0;
  int block = 40;  // block pitch in cells
  int road = 12;   // road width in cells
  int n_uavs = 10;
  int n_tasks = 30;
  int n_pedestrians = 60;
  int n_vehicles = 20;
  double task_sigma = kDefaultSigma;
  std::vector<double> task_weights{1.0, 3.0, 5.0};
};

/// Validates a scenario document (or a city generator document) and builds
/// the world, tasks and roster. `seed_override` replaces the document seed;
/// for generator documents it selects the instance. Throws ConfigError
/// naming the offending field.
Scenario load_scenario(const nlohmann::json& doc, std::optional<std::uint64_t> seed_override = std::nullopt);
Scenario load_scenario_file(const std::filesystem::path& path,
                            std::optional<std::uint64_t> seed_override = std::nullopt);

Scenario generate_city(const CityParams& params, std::uint64_t seed);

/// Serialises to the scenario document schema (generated instances included).
nlohmann::json scenario_to_json(const Scenario& s);

}  // namespace coordfield
