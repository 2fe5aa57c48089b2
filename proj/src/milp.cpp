//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#include "molkit/milp.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "molkit/common.hpp"

namespace molkit {

int MilpModel::add_var(const std::string &name, double lb, double ub,
                       VarKind kind) {
  if (name.empty()) throw Error("variable name must not be empty");
  if (var_by_name_.count(name)) throw Error("duplicate variable name: " + name);
  if (lb > ub) throw Error(strfmt("variable %s: lb %g > ub %g", name.c_str(), lb, ub));
  int idx = num_vars();
  vars_.push_back(MilpVar{name, lb, ub, kind});
  var_by_name_.emplace(name, idx);
  return idx;
}

int MilpModel::add_con(const std::string &name, std::vector<LinTerm> terms,
                       char sense, double rhs) {
  if (con_by_name_.count(name)) throw Error("duplicate constraint name: " + name);
  if (sense != '<' && sense != '=' && sense != '>')
    throw Error(strfmt("constraint %s: bad sense '%c'", name.c_str(), sense));
  // merge repeated variables and drop zeros so emission stays canonical
  std::map<int, double> merged;
  for (const LinTerm &t : terms) {
    if (t.var < 0 || t.var >= num_vars())
      throw Error("constraint " + name + ": undeclared variable index");
    merged[t.var] += t.coef;
  }
  std::vector<LinTerm> canon;
  for (auto &[v, c] : merged)
    if (c != 0.0) canon.push_back(LinTerm{v, c});
  if (canon.empty())
    throw Error("constraint " + name + ": no nonzero terms");
  int idx = num_cons();
  cons_.push_back(MilpCon{name, std::move(canon), sense, rhs});
  con_by_name_.emplace(name, idx);
  return idx;
}

int MilpModel::var_index(const std::string &name) const {
  auto it = var_by_name_.find(name);
  return it == var_by_name_.end() ? -1 : it->second;
}

namespace {

std::string num(double x) {
  if (x == static_cast<long long>(x) && std::fabs(x) < 1e15)
    return std::to_string(static_cast<long long>(x));
  return strfmt("%.17g", x);
}

}  // namespace

std::string MilpModel::to_lp_text() const {
  if (vars_.empty()) throw Error("cannot emit an empty model");
  std::ostringstream out;
  out << "\\ molkit feasibility model\n";
  out << "Minimize\n obj: 0 " << vars_[0].name << "\n";
  out << "Subject To\n";
  for (const MilpCon &c : cons_) {
    out << " " << c.name << ":";
    bool first = true;
    for (const LinTerm &t : c.terms) {
      double coef = t.coef;
      if (first) {
        out << " " << num(coef) << " " << vars_[t.var].name;
        first = false;
      } else {
        out << (coef >= 0 ? " + " : " - ") << num(std::fabs(coef)) << " "
            << vars_[t.var].name;
      }
    }
    out << (c.sense == '<' ? " <= " : c.sense == '>' ? " >= " : " = ")
        << num(c.rhs) << "\n";
  }
  out << "Bounds\n";
  for (const MilpVar &v : vars_) {
    if (v.lb == v.ub)
      out << " " << v.name << " = " << num(v.lb) << "\n";
    else
      out << " " << num(v.lb) << " <= " << v.name << " <= " << num(v.ub) << "\n";
  }
  bool any_gen = false, any_bin = false;
  for (const MilpVar &v : vars_) {
    any_gen |= v.kind == VarKind::Integer;
    any_bin |= v.kind == VarKind::Binary;
  }
  if (any_gen) {
    out << "Generals\n";
    for (const MilpVar &v : vars_)
      if (v.kind == VarKind::Integer) out << " " << v.name << "\n";
  }
  if (any_bin) {
    out << "Binaries\n";
    for (const MilpVar &v : vars_)
      if (v.kind == VarKind::Binary) out << " " << v.name << "\n";
  }
  out << "End\n";
  return out.str();
}

void MilpModel::emit_lp(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write LP file: " + path);
  out << to_lp_text();
}

namespace {

bool is_number(const std::string &s) {
  if (s.empty()) return false;
  char *end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

bool is_status_line(const std::string &first_token) {
  static const char *skip[] = {"Optimal",   "optimal",   "Infeasible",
                               "infeasible", "INFEASIBLE", "Unbounded",
                               "Stopped",   "objective", "Objective",
                               "solution",  "Solution",  "Status",
                               "status",    "=obj=",     "#"};
  for (const char *s : skip)
    if (first_token == s) return true;
  return false;
}

}  // namespace

ParsedSolution parse_solution_text(const std::string &text, const MilpModel &m) {
  ParsedSolution out;
  std::istringstream in(text);
  std::string line;
  std::map<std::string, double> seen;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#' || tok[0][0] == '\\') continue;
    if (is_status_line(tok[0])) {
      for (const std::string &w : tok)
        if (w == "Infeasible" || w == "infeasible" || w == "INFEASIBLE")
          out.solver_reported_infeasible = true;
      continue;
    }
    std::string name;
    double value = 0.0;
    if (tok.size() == 2 && is_number(tok[1])) {
      name = tok[0];
      value = std::stod(tok[1]);
    } else if (tok.size() == 3 && tok[1] == "=" && is_number(tok[2])) {
      name = tok[0];
      value = std::stod(tok[2]);
    } else if (tok.size() >= 3 && is_number(tok[0]) && !is_number(tok[1]) &&
               is_number(tok[2])) {
      // CBC-style "index name value [reduced cost]"
      name = tok[1];
      value = std::stod(tok[2]);
    } else {
      continue;  // tolerate unparsed chatter
    }
    if (m.var_index(name) < 0)
      throw Error("solution names undeclared variable: " + name);
    seen[name] = value;
  }
  for (const MilpVar &v : m.vars()) {
    auto it = seen.find(v.name);
    if (it == seen.end()) {
      out.values[v.name] = 0.0;
      out.defaulted.push_back(v.name);
    } else {
      out.values[v.name] = it->second;
    }
  }
  return out;
}

ParsedSolution parse_solution(const std::string &path, const MilpModel &m) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open solution file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_solution_text(ss.str(), m);
}

CheckReport check_assignment(const MilpModel &m, const Assignment &a,
                             double tol) {
  CheckReport rep;
  auto value = [&](int idx) {
    auto it = a.find(m.var(idx).name);
    return it == a.end() ? 0.0 : it->second;
  };
  for (int i = 0; i < m.num_vars(); ++i) {
    const MilpVar &v = m.var(i);
    double x = value(i);
    if (x < v.lb - tol || x > v.ub + tol)
      rep.bounds.push_back(BoundViolation{v.name, x, v.lb, v.ub});
    if (v.kind != VarKind::Continuous && std::fabs(x - std::round(x)) > tol)
      rep.integrality.push_back(IntegralityViolation{v.name, x});
  }
  for (const MilpCon &c : m.cons()) {
    double lhs = 0.0;
    for (const LinTerm &t : c.terms) lhs += t.coef * value(t.var);
    double excess = 0.0;
    if (c.sense == '<') excess = lhs - c.rhs;
    else if (c.sense == '>') excess = c.rhs - lhs;
    else excess = std::fabs(lhs - c.rhs);
    if (excess > tol)
      rep.rows.push_back(RowViolation{c.name, lhs, c.sense, c.rhs, excess});
  }
  return rep;
}

std::string CheckReport::summary(size_t max_items) const {
  if (ok()) return "ok";
  std::ostringstream out;
  out << rows.size() << " row, " << bounds.size() << " bound, "
      << integrality.size() << " integrality violation(s)\n";
  size_t shown = 0;
  for (const RowViolation &r : rows) {
    if (shown++ >= max_items) break;
    out << "  row " << r.name << ": lhs=" << r.lhs << " " << r.sense
        << " rhs=" << r.rhs << " (off by " << r.amount << ")\n";
  }
  for (const BoundViolation &b : bounds) {
    if (shown++ >= max_items) break;
    out << "  bound " << b.var << "=" << b.value << " not in [" << b.lb << ","
        << b.ub << "]\n";
  }
  for (const IntegralityViolation &iv : integrality) {
    if (shown++ >= max_items) break;
    out << "  integrality " << iv.var << "=" << iv.value << "\n";
  }
  return out.str();
}

}  // namespace molkit
