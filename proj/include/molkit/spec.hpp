//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLKIT_SPEC_HPP_
#define MOLKIT_SPEC_HPP_

#include <array>
#include <map>
#include <string>
#include <vector>

#include "molkit/catalog.hpp"

namespace molkit {

enum class EdgeClass { GE2, GE1, ZeroOne, EQ1 };

std::string edge_class_name(EdgeClass c);
EdgeClass edge_class_from_name(const std::string &s);

struct SeedVertex {
  int bl_lb = 0;  // 1 forces a leaf path rooted here
  int bl_ub = 1;  // may root a leaf path iff 1
  int ch_lb = 0;
  int ch_ub = 0;
  std::vector<std::string> allowed_elements;  // empty means all of lambda_int
  std::vector<int> fringe_allow;              // catalog ids; empty means all
};

struct SeedEdge {
  int tail = 0, head = 0;  // 1-based, tail < head
  EdgeClass cls = EdgeClass::EQ1;
  int l_lb = 1, l_ub = 1;    // path length window (color edges)
  int bl_lb = 0, bl_ub = 0;  // leaf-branch window inside the path
  int ch_lb = 0, ch_ub = 0;  // height window inside the path
  int bd2_lb = 0, bd2_ub = 0;
  int bd3_lb = 0, bd3_ub = 0;
};

/// Seed graph with the canonical index layout: GE2 edges first, then GE1,
/// then 0/1, then =1; vertices ordered so that bl_ub==1 comes first.
struct SeedGraph {
  std::vector<SeedVertex> vertices;
  std::vector<SeedEdge> edges;

  int t_c() const { return static_cast<int>(vertices.size()); }
  int m_c() const { return static_cast<int>(edges.size()); }
  int ttilde_c() const;  // vertices allowed to root leaf paths
  int ktilde_c() const;  // |GE2|
  int k_c() const;       // |GE2| + |GE1|
  void validate() const;
};

int seed_rank(const SeedGraph &seed);

struct IntPair {
  int lb = 0, ub = 0;
};

struct SpecBounds {
  int n_int_lb = 2, n_int_ub = 2;
  int n_lb = 2, n_star = 2;
  std::map<std::string, IntPair> na;      // keys in lambda (int + ex)
  std::map<std::string, IntPair> na_int;  // keys in lambda_int
  std::map<int, IntPair> fc;              // keyed by catalog id
  std::map<std::string, IntPair> ac_lf;   // keyed by adjacency config
  std::array<IntPair, 4> dg{};            // degrees 1..4
  std::array<IntPair, 4> dg_int{};
};

struct Specification {
  int rho = 2;
  SeedGraph seed;
  std::vector<std::string> lambda_int;  // position defines the element code
  std::vector<std::string> lambda_ex;   // usually includes "H"
  FringeCatalog catalog;
  SpecBounds bounds;
  int t_t = -1;  // -1: use n_int_ub - |V_C|
  int t_f = -1;  // -1: use n_int_ub - |V_C|

  int eff_t_t() const { return t_t >= 0 ? t_t : bounds.n_int_ub - seed.t_c(); }
  int eff_t_f() const { return t_f >= 0 ? t_f : bounds.n_int_ub - seed.t_c(); }
  int c_f() const { return seed.ttilde_c() + eff_t_t(); }

  IntPair na_bound(const std::string &el) const;
  IntPair na_int_bound(const std::string &el) const;
  IntPair fc_bound(int id) const;
  IntPair ac_lf_bound(const std::string &key) const;
  /// Allowed catalog ids at seed vertex i (1-based); F_E is the whole catalog.
  std::vector<int> fringe_set(int vertex) const;
  std::vector<std::string> allowed_elements(int vertex) const;

  void validate(const ElementTable &et = ElementTable::defaults()) const;
  std::string to_json_text() const;
  static Specification from_json_text(const std::string &text);
  void save(const std::string &path) const;
  static Specification load(const std::string &path);
};

/// The five experiment instances. The catalog must offer at least
/// 45-5i trees for I1..I4 and 50 for I5; the preset keeps the most
/// frequent ones.
Specification preset(const std::string &instance_id, const FringeCatalog &catalog);

}  // namespace molkit

#endif  // MOLKIT_SPEC_HPP_
