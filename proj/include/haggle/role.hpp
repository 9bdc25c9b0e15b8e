#pragma once

#include <optional>
#include <string_view>

namespace haggle {

enum class Role { kBuyer, kSeller };

constexpr std::string_view role_name(Role role) {
  return role == Role::kBuyer ? "buyer" : "seller";
}

constexpr Role counterpart(Role role) {
  return role == Role::kBuyer ? Role::kSeller : Role::kBuyer;
}

constexpr std::optional<Role> parse_role(std::string_view name) {
  if (name == "buyer") return Role::kBuyer;
  if (name == "seller") return Role::kSeller;
  return std::nullopt;
}

}  // namespace haggle
