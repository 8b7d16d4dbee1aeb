#include <sstream>

#include "delib/sim/affordance.hpp"

namespace delib::sim {

// The domain is generated from the affordance table so the planner's action
// model and the environment's semantics cannot drift apart. Category types
// carry pickupable vs fixture placement; everything finer grain (receptacle,
// fillable, appliance roles) is a static predicate asserted per instance.
std::string household_domain_text() {
  const AffordanceTable& aff = AffordanceTable::builtin();
  std::ostringstream os;

  os << "(define (domain household)\n";
  os << "  (:requirements :adl :strips :typing :conditional-effects :action-costs)\n";

  os << "  (:types\n";
  os << "    Pickupable - Object\n";
  os << "    Receptacle - Object\n";
  os << "    Fixture - Object\n";
  for (const auto& c : aff.all()) {
    const char* parent = c.pickupable ? "Pickupable"
                         : c.receptacle ? "Receptacle"
                                        : "Fixture";
    os << "    " << c.name << " - " << parent << "\n";
  }
  os << "  )\n";

  os << "  (:predicates\n";
  os << "    (isVisible ?x - Object)\n";
  os << "    (isNear ?x - Object)\n";
  os << "    (isPickedUp ?x - Pickupable)\n";
  os << "    (parentReceptacles ?x - Pickupable ?r - Object)\n";
  os << "    (isPlacedTo ?x - Pickupable ?r - Object)\n";
  os << "    (unobserved ?x - Object)\n";
  os << "    (inClosed ?x - Pickupable)\n";
  os << "    (isOpen ?x - Object)\n";
  os << "    (isClosed ?x - Object)\n";
  os << "    (isToggled ?x - Object)\n";
  os << "    (isCooked ?x - Pickupable)\n";
  os << "    (isClean ?x - Object)\n";
  os << "    (isFilledWithLiquid ?x - Pickupable)\n";
  os << "    (simbotIsFilledWithCoffee ?x - Pickupable)\n";
  os << "    (isSliced ?x - Pickupable)\n";
  os << "    (isEmptied ?x - Object)\n";
  os << "    (receptacle ?x - Object)\n";
  os << "    (fillable ?x - Object)\n";
  os << "    (sliceable ?x - Object)\n";
  os << "    (toggleable ?x - Object)\n";
  os << "    (food ?x - Object)\n";
  os << "    (cooksContained ?x - Object)\n";
  os << "    (cooksContainedClosed ?x - Object)\n";
  os << "    (stoveTop ?x - Object)\n";
  os << "    (brewsCoffee ?x - Object)\n";
  os << "    (faucetOf ?f - Object ?s - Object)\n";
  os << "  )\n";
  os << "  (:functions (total-cost))\n";

  os << R"(  (:action GoTo
    :parameters (?x - Object)
    :precondition (not (unobserved ?x))
    :effect (and (isNear ?x) (isVisible ?x)
      (forall (?z - Object)
        (when (not (= ?z ?x)) (and (not (isNear ?z)) (not (isVisible ?z))))))
  )
  (:action Search
    :parameters (?x - Object)
    :precondition (unobserved ?x)
    :effect (and (not (unobserved ?x)) (isVisible ?x)
      (increase (total-cost) 10))
  )
  (:action PickUp
    :parameters (?x - Pickupable)
    :precondition (and (isNear ?x) (isVisible ?x) (not (inClosed ?x))
      (forall (?z - Pickupable) (not (isPickedUp ?z))))
    :effect (and (isPickedUp ?x)
      (forall (?r - Object)
        (and (not (parentReceptacles ?x ?r)) (not (isPlacedTo ?x ?r)))))
  )
  (:action Place
    :parameters (?x - Pickupable ?r - Object)
    :precondition (and (isPickedUp ?x) (receptacle ?r) (isNear ?r)
      (isVisible ?r) (not (isClosed ?r)) (not (= ?x ?r)))
    :effect (and (not (isPickedUp ?x)) (parentReceptacles ?x ?r) (isPlacedTo ?x ?r)
      (forall (?f - Fixture)
        (when (and (faucetOf ?f ?r) (isToggled ?f)) (isClean ?x)))
      (forall (?f - Fixture)
        (when (and (faucetOf ?f ?r) (isToggled ?f) (fillable ?x))
          (isFilledWithLiquid ?x)))
      (when (and (cooksContained ?r) (isToggled ?r) (food ?x)) (isCooked ?x))
      (forall (?s - Receptacle)
        (when (and (stoveTop ?s) (isToggled ?s) (parentReceptacles ?r ?s) (food ?x))
          (isCooked ?x)))
      (when (and (stoveTop ?r) (isToggled ?r))
        (forall (?z - Pickupable)
          (when (and (parentReceptacles ?z ?x) (food ?z)) (isCooked ?z))))
      (when (and (brewsCoffee ?r) (isToggled ?r) (fillable ?x))
        (and (simbotIsFilledWithCoffee ?x) (isFilledWithLiquid ?x))))
  )
  (:action Slice
    :parameters (?k - Knife ?x - Pickupable)
    :precondition (and (isPickedUp ?k) (sliceable ?x) (isNear ?x) (isVisible ?x)
      (not (inClosed ?x)) (not (isSliced ?x)))
    :effect (isSliced ?x)
  )
  (:action ToggleOn
    :parameters (?x - Object)
    :precondition (and (toggleable ?x) (isNear ?x) (isVisible ?x)
      (not (isToggled ?x)))
    :effect (and (isToggled ?x)
      (forall (?z - Pickupable)
        (when (and (cooksContained ?x) (parentReceptacles ?z ?x) (food ?z))
          (isCooked ?z)))
      (forall (?z - Pickupable)
        (when (and (cooksContainedClosed ?x) (isClosed ?x)
                   (parentReceptacles ?z ?x) (food ?z))
          (isCooked ?z)))
      (forall (?p - Pickupable)
        (forall (?z - Pickupable)
          (when (and (cooksContainedClosed ?x) (isClosed ?x)
                     (parentReceptacles ?p ?x) (parentReceptacles ?z ?p) (food ?z))
            (isCooked ?z))))
      (forall (?p - Pickupable)
        (forall (?z - Pickupable)
          (when (and (stoveTop ?x) (parentReceptacles ?p ?x)
                     (parentReceptacles ?z ?p) (food ?z))
            (isCooked ?z))))
      (forall (?z - Pickupable)
        (when (and (brewsCoffee ?x) (parentReceptacles ?z ?x) (fillable ?z))
          (and (simbotIsFilledWithCoffee ?z) (isFilledWithLiquid ?z))))
      (forall (?s - Receptacle)
        (forall (?z - Pickupable)
          (when (and (faucetOf ?x ?s) (parentReceptacles ?z ?s)) (isClean ?z))))
      (forall (?s - Receptacle)
        (forall (?z - Pickupable)
          (when (and (faucetOf ?x ?s) (parentReceptacles ?z ?s) (fillable ?z))
            (isFilledWithLiquid ?z)))))
  )
  (:action ToggleOff
    :parameters (?x - Object)
    :precondition (and (toggleable ?x) (isToggled ?x) (isNear ?x) (isVisible ?x))
    :effect (not (isToggled ?x))
  )
  (:action Open
    :parameters (?x - Object)
    :precondition (and (isClosed ?x) (isNear ?x) (isVisible ?x))
    :effect (and (isOpen ?x) (not (isClosed ?x))
      (forall (?z - Pickupable)
        (when (parentReceptacles ?z ?x)
          (and (isVisible ?z) (not (inClosed ?z))))))
  )
  (:action Close
    :parameters (?x - Object)
    :precondition (and (isOpen ?x) (isNear ?x) (isVisible ?x))
    :effect (and (isClosed ?x) (not (isOpen ?x))
      (forall (?z - Pickupable)
        (when (parentReceptacles ?z ?x) (inClosed ?z)))
      (forall (?z - Pickupable)
        (when (and (cooksContainedClosed ?x) (isToggled ?x)
                   (parentReceptacles ?z ?x) (food ?z))
          (isCooked ?z))))
  )
  (:action Pour
    :parameters (?x - Pickupable ?r - Object)
    :precondition (and (isPickedUp ?x) (isFilledWithLiquid ?x) (receptacle ?r)
      (isNear ?r) (isVisible ?r) (not (= ?x ?r)))
    :effect (and (not (isFilledWithLiquid ?x)) (not (simbotIsFilledWithCoffee ?x)))
  )
)
)";
  return os.str();
}

}  // namespace delib::sim
