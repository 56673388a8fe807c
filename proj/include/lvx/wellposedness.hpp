#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lvx/model.hpp"

namespace lvx::wellposedness {

enum class Verdict { pass, fail, undetermined };

std::string to_string(Verdict v);

struct Quantity {
  std::string name;
  double value = 0.0;
};

struct ConditionItem {
  std::string id;
  std::string group;
  std::string description;
  std::vector<Quantity> quantities;
  Verdict verdict = Verdict::undetermined;
  std::string note;
  // informational items (alternative branches) do not enter the overall verdict
  bool counted = true;

  std::optional<double> quantity(const std::string& name) const;
};

struct ConditionReport {
  std::string checker;
  std::vector<ConditionItem> items;
  // left-hand side of the size condition, when the checker has one
  std::optional<double> size_lhs;

  // fail if any counted item fails, else undetermined if any is undetermined
  Verdict overall() const;
  Verdict group_verdict(const std::string& group) const;
  const ConditionItem* find(const std::string& id) const;
  // first counted item that did not pass
  const ConditionItem* first_failure() const;

  std::string text() const;
  void write_csv(std::ostream& out) const;
};

// working Burkholder-Davis-Gundy constant
double bdg_constant(double p);

// finite horizon I = [t0, inf), Lipschitz sigma
ConditionReport check_finite_horizon(const ModelSpec& model);
// heavy-tailed noise on a finite horizon; group "part1" is existence, "part2"
// adds the growth-order conditions for moments of order p < q
ConditionReport check_heavy_tail(const ModelSpec& model);
// I = R with a size condition
ConditionReport check_infinite_memory(const ModelSpec& model);
// uniform weighted moment bounds on unbounded intervals, growth-type sigma
ConditionReport check_asymptotic_stability(const ModelSpec& model);

enum class Checker { automatic, finite_horizon, heavy_tail, infinite_memory, asymptotic_stability };

Checker parse_checker(const std::string& name);
std::string to_string(Checker c);
// automatic picks infinite_memory on the whole line, else finite_horizon
ConditionReport check(const ModelSpec& model, Checker which = Checker::automatic);

}  // namespace lvx::wellposedness
