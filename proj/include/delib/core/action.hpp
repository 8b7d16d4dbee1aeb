#pragma once

#include <optional>
#include <string>

namespace delib {

enum class ActionType {
  Forward,
  TurnLeft,
  TurnRight,
  LookUp,
  LookDown,
  PickUp,
  Place,
  Slice,
  ToggleOn,
  ToggleOff,
  Open,
  Close,
  Pour,
  Stop,
};

inline bool is_navigation(ActionType t) {
  switch (t) {
    case ActionType::Forward:
    case ActionType::TurnLeft:
    case ActionType::TurnRight:
    case ActionType::LookUp:
    case ActionType::LookDown:
      return true;
    default:
      return false;
  }
}

inline bool is_manipulation(ActionType t) {
  return !is_navigation(t) && t != ActionType::Stop;
}

inline std::string to_string(ActionType t) {
  switch (t) {
    case ActionType::Forward: return "Forward";
    case ActionType::TurnLeft: return "TurnLeft";
    case ActionType::TurnRight: return "TurnRight";
    case ActionType::LookUp: return "LookUp";
    case ActionType::LookDown: return "LookDown";
    case ActionType::PickUp: return "PickUp";
    case ActionType::Place: return "Place";
    case ActionType::Slice: return "Slice";
    case ActionType::ToggleOn: return "ToggleOn";
    case ActionType::ToggleOff: return "ToggleOff";
    case ActionType::Open: return "Open";
    case ActionType::Close: return "Close";
    case ActionType::Pour: return "Pour";
    case ActionType::Stop: return "Stop";
  }
  return "?";
}

inline std::optional<ActionType> action_type_from(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(ActionType::Stop); ++i) {
    ActionType t = static_cast<ActionType>(i);
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

// Primitive environment action; manipulations ground through a pixel.
struct PrimitiveAction {
  ActionType type = ActionType::Stop;
  int px = -1, py = -1;

  static PrimitiveAction nav(ActionType t) { return {t, -1, -1}; }
  static PrimitiveAction manip(ActionType t, int u, int v) { return {t, u, v}; }

  std::string str() const {
    if (is_manipulation(type))
      return to_string(type) + "@(" + std::to_string(px) + "," +
             std::to_string(py) + ")";
    return to_string(type);
  }
};

struct ActionResult {
  bool success = false;
  std::string reason;  // machine-readable failure reason, empty on success
};

}  // namespace delib
