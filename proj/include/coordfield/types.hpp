#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace coordfield {

/// Operational role shared by tasks and UAVs. Each role gets its own field.
enum class Role : unsigned char { patrol = 0, tracking = 1 };

inline constexpr std::array<Role, 2> kRoles{Role::patrol, Role::tracking};

inline constexpr std::size_t role_index(Role r) { return static_cast<std::size_t>(r); }

inline std::string_view to_string(Role r) { return r == Role::patrol ? "patrol" : "tracking"; }

inline std::optional<Role> role_from_string(std::string_view s) {
  if (s == "patrol") return Role::patrol;
  if (s == "tracking") return Role::tracking;
  return std::nullopt;
}

/// Invalid configuration or input document. `field` names the offending key
/// path when one is known.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::string field = {})
      : std::runtime_error(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// A module invariant was found broken at runtime.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace coordfield
