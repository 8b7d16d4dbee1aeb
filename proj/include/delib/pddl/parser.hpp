#pragma once

#include <string>

#include "delib/pddl/ast.hpp"

namespace delib::pddl {

// Parses the PDDL subset: typing, ADL literals, forall, conditional effects,
// action costs. Keywords are case-insensitive, identifiers are not.
// Comments run from ';' to end of line. Unknown constructs are hard errors.
DomainModel parse_domain(const std::string& text);

ProblemModel parse_problem(const std::string& text, const DomainModel& domain);

std::string serialize(const DomainModel& d);
std::string serialize(const ProblemModel& p, const DomainModel& d);

}  // namespace delib::pddl
