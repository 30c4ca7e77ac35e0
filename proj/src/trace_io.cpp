#include "coordfield/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

namespace coordfield {

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

nlohmann::json task_to_json(const Task& t) {
  nlohmann::json j{{"id", t.id},
                   {"x", t.position.x},
                   {"y", t.position.y},
                   {"w", t.weight},
                   {"sigma", t.sigma},
                   {"type", to_string(t.type)},
                   {"state", t.active() ? "active" : "complete"},
                   {"created_at", t.created_at}};
  if (!t.active()) {
    j["completed_at"] = t.completed_at;
    j["completed_by"] = t.completed_by;
  }
  return j;
}

nlohmann::json uav_to_json(const Uav& u) {
  return {{"id", u.id},
          {"type", to_string(u.type)},
          {"x", u.position.x},
          {"y", u.position.y},
          {"vx", u.velocity.x},
          {"vy", u.velocity.y},
          {"capability", u.capability},
          {"status", to_string(u.status)}};
}

nlohmann::json snapshot_to_json(const Snapshot& s, bool with_phi) {
  nlohmann::json j;
  j["step"] = s.step;
  auto& tasks = j["tasks"] = nlohmann::json::array();
  for (const Task& t : s.tasks) tasks.push_back(task_to_json(t));
  auto& uavs = j["uavs"] = nlohmann::json::array();
  for (const Uav& u : s.uavs) uavs.push_back(uav_to_json(u));
  auto& ents = j["entities"] = nlohmann::json::array();
  for (const Entity& e : s.world.entities)
    ents.push_back({{"id", e.id}, {"kind", to_string(e.kind)}, {"x", e.position.x}, {"y", e.position.y}});
  auto& lights = j["traffic_lights"] = nlohmann::json::array();
  for (const TrafficLight& l : s.world.traffic_lights)
    lights.push_back({{"x", l.position.x}, {"y", l.position.y}, {"phase", l.phase}});
  j["metrics"] = to_json(s.metrics);
  if (with_phi) {
    const auto& p = s.phi[0];
    nlohmann::json phi{{"stride", s.phi_stride}, {"width", p.width()}, {"height", p.height()}};
    for (Role r : kRoles) {
      const auto v = s.phi[role_index(r)].values();
      phi[std::string(to_string(r))] = std::vector<double>(v.begin(), v.end());
    }
    j["phi"] = std::move(phi);
  }
  return j;
}

void write_trace_line(std::ostream& out, const Snapshot& s) { out << snapshot_to_json(s, false).dump() << '\n'; }

void write_trajectory_rows(std::ostream& out, const Snapshot& s) {
  for (const Uav& u : s.uavs)
    out << u.id << ',' << s.step << ',' << format_double(u.position.x) << ',' << format_double(u.position.y) << ','
        << format_double(u.velocity.x) << ',' << format_double(u.velocity.y) << ',' << to_string(u.status) << ','
        << format_double(u.capability) << '\n';
}

void write_phi_csv(std::ostream& out, const FieldGrid& field) {
  out << "type,i,j,phi,speed\n";
  for (Role r : kRoles) {
    const auto& phi = field.phi(r);
    const auto& vel = field.velocity(r);
    for (int j = 0; j < phi.height(); ++j)
      for (int i = 0; i < phi.width(); ++i)
        out << to_string(r) << ',' << i << ',' << j << ',' << format_double(phi(i, j)) << ','
            << format_double(norm(vel(i, j))) << '\n';
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::system_error(errno, std::generic_category(), "cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw std::system_error(errno, std::generic_category(), "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace coordfield
