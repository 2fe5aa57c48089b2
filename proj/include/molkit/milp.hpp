//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLKIT_MILP_HPP_
#define MOLKIT_MILP_HPP_

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace molkit {

enum class VarKind { Binary, Integer, Continuous };

struct MilpVar {
  std::string name;
  double lb = 0.0, ub = 0.0;
  VarKind kind = VarKind::Continuous;
};

struct LinTerm {
  int var = -1;
  double coef = 0.0;
};

struct MilpCon {
  std::string name;
  std::vector<LinTerm> terms;
  char sense = '<';  // '<', '=', '>'
  double rhs = 0.0;
};

/// Solver-agnostic MILP with a constant-zero feasibility objective.
/// Variables and constraints keep insertion order so emission is
/// byte-reproducible.
class MilpModel {
public:
  int add_var(const std::string &name, double lb, double ub, VarKind kind);
  int add_con(const std::string &name, std::vector<LinTerm> terms, char sense,
              double rhs);

  int var_index(const std::string &name) const;  // -1 when absent
  const MilpVar &var(int idx) const { return vars_[idx]; }
  MilpVar &var_mut(int idx) { return vars_[idx]; }
  const std::vector<MilpVar> &vars() const { return vars_; }
  const std::vector<MilpCon> &cons() const { return cons_; }
  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_cons() const { return static_cast<int>(cons_.size()); }

  std::string to_lp_text() const;
  void emit_lp(const std::string &path) const;

private:
  std::vector<MilpVar> vars_;
  std::vector<MilpCon> cons_;
  std::unordered_map<std::string, int> var_by_name_;
  std::unordered_map<std::string, int> con_by_name_;
};

using Assignment = std::map<std::string, double>;

struct ParsedSolution {
  Assignment values;
  std::vector<std::string> defaulted;  // declared vars missing from the file
  bool solver_reported_infeasible = false;
};

/// Reads "name value" pairs (plus a few common solver output shapes).
/// Variables absent from the file default to 0 and are recorded in
/// `defaulted`; names not declared in the model are an error.
ParsedSolution parse_solution(const std::string &path, const MilpModel &m);
ParsedSolution parse_solution_text(const std::string &text, const MilpModel &m);

struct RowViolation {
  std::string name;
  double lhs = 0.0;
  char sense = '<';
  double rhs = 0.0;
  double amount = 0.0;  // positive slack past the bound
};

struct BoundViolation {
  std::string var;
  double value = 0.0, lb = 0.0, ub = 0.0;
};

struct IntegralityViolation {
  std::string var;
  double value = 0.0;
};

struct CheckReport {
  std::vector<RowViolation> rows;
  std::vector<BoundViolation> bounds;
  std::vector<IntegralityViolation> integrality;

  bool ok() const { return rows.empty() && bounds.empty() && integrality.empty(); }
  std::string summary(size_t max_items = 10) const;
};

/// Re-evaluates every constraint, variable bound and integrality requirement
/// at the given point. Missing variables count as 0.
CheckReport check_assignment(const MilpModel &m, const Assignment &a,
                             double tol = 1e-6);

}  // namespace molkit

#endif  // MOLKIT_MILP_HPP_
