#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "coordfield/engine.hpp"

namespace coordfield {

nlohmann::json task_to_json(const Task& t);
nlohmann::json uav_to_json(const Uav& u);

/// Step, tasks, UAVs, entities, traffic lights and metrics so far; the
/// downsampled phi lattices only when `with_phi`.
nlohmann::json snapshot_to_json(const Snapshot& s, bool with_phi);

/// One JSON line per snapshot, without phi.
void write_trace_line(std::ostream& out, const Snapshot& s);

inline constexpr const char* kTrajectoryCsvHeader = "uav_id,step,x,y,vx,vy,status,capability";
/// One row per UAV under kTrajectoryCsvHeader.
void write_trajectory_rows(std::ostream& out, const Snapshot& s);

/// Full-resolution phi and background speed per role:
/// "type,i,j,phi,speed".
void write_phi_csv(std::ostream& out, const FieldGrid& field);

/// Writes `text` to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

/// Shortest round-trip text for a double.
std::string format_double(double v);

}  // namespace coordfield
