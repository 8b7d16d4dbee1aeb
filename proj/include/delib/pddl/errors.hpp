#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace delib::pddl {

struct SyntaxError : std::runtime_error {
  int line, col;
  std::string expected;
  SyntaxError(int line_, int col_, std::string expected_)
      : std::runtime_error("syntax error at " + std::to_string(line_) + ":" +
                           std::to_string(col_) + ", expected " + expected_),
        line(line_), col(col_), expected(std::move(expected_)) {}
};

struct UnknownCategory : std::runtime_error {
  std::string category;
  explicit UnknownCategory(std::string c)
      : std::runtime_error("unknown category: " + c), category(std::move(c)) {}
};

struct UnknownPredicate : std::runtime_error {
  std::string predicate;
  explicit UnknownPredicate(std::string p)
      : std::runtime_error("unknown predicate: " + p), predicate(std::move(p)) {}
};

struct UnsupportedRequirement : std::runtime_error {
  std::string flag;
  explicit UnsupportedRequirement(std::string f)
      : std::runtime_error("unsupported requirement: " + f), flag(std::move(f)) {}
};

struct TypeMismatch : std::runtime_error {
  std::string object, expected_category;
  TypeMismatch(std::string o, std::string c)
      : std::runtime_error("type mismatch: " + o + " does not fit " + c),
        object(std::move(o)), expected_category(std::move(c)) {}
};

struct UnboundVariable : std::runtime_error {
  std::string var;
  explicit UnboundVariable(std::string v)
      : std::runtime_error("unbound variable: " + v), var(std::move(v)) {}
};

struct PreconditionViolated : std::runtime_error {
  std::vector<std::string> failed;  // rendered atoms/literals that did not hold
  explicit PreconditionViolated(std::vector<std::string> f)
      : std::runtime_error("precondition violated (" +
                           std::to_string(f.size()) + " literals)"),
        failed(std::move(f)) {}
};

struct GroundingExplosion : std::runtime_error {
  size_t count, cap;
  GroundingExplosion(size_t n, size_t c)
      : std::runtime_error("grounding explosion: " + std::to_string(n) +
                           " > cap " + std::to_string(c)),
        count(n), cap(c) {}
};

}  // namespace delib::pddl
