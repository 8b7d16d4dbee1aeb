#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace delib::monitor {

// The closed set of subgoal predicates.
enum class SubgoalPredicate {
  isCooked,
  isClean,
  isPickedUp,
  isFilledWithLiquid,
  isEmptied,
  isSliced,
  simbotIsFilledWithCoffee,
  isPlacedTo,
  isToggled,
};

const std::vector<SubgoalPredicate>& all_subgoal_predicates();
std::string to_string(SubgoalPredicate p);
std::optional<SubgoalPredicate> subgoal_predicate_from(const std::string& name);

// (Patient, Predicate, Destination); destination present iff isPlacedTo.
struct Subgoal {
  std::string patient;  // object category
  SubgoalPredicate predicate = SubgoalPredicate::isPickedUp;
  std::optional<std::string> destination;
  bool completed_hint = false;  // marked already-completed by the source

  void validate() const {
    bool needs_dest = predicate == SubgoalPredicate::isPlacedTo;
    if (needs_dest != destination.has_value())
      throw std::invalid_argument("destination present iff predicate is isPlacedTo");
  }

  std::string str() const {
    std::string s = "(" + patient + ", " + to_string(predicate);
    if (destination) s += ", " + *destination;
    return s + ")";
  }

  bool operator==(const Subgoal& o) const {
    return patient == o.patient && predicate == o.predicate &&
           destination == o.destination;
  }
};

enum class SubgoalStatus { Pending, InProgress, Completed, Abandoned };

std::string to_string(SubgoalStatus s);

}  // namespace delib::monitor
