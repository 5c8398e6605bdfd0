#pragma once

#include <string_view>

namespace rmsf {

// Outcome of a mutating operation. Each structure uses the subset that applies
// to it; `ok` is the only success value.
enum class Status {
  ok,
  full,             // pocket at capacity, caller forwards to the spare
  not_found,        // delete of an absent element
  overflow,         // spare / locator exhausted
  at_capacity,      // live count already equals n
  out_of_universe,  // key outside the structure's universe
};

constexpr auto to_string(Status s) noexcept -> std::string_view {
  switch (s) {
    case Status::ok: return "ok";
    case Status::full: return "full";
    case Status::not_found: return "not_found";
    case Status::overflow: return "overflow";
    case Status::at_capacity: return "at_capacity";
    case Status::out_of_universe: return "out_of_universe";
  }
  return "unknown";
}

}  // namespace rmsf
