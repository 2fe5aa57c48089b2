//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLKIT_ENCODE_HPP_
#define MOLKIT_ENCODE_HPP_

#include <string>
#include <vector>

#include "molkit/gnn.hpp"
#include "molkit/milp.hpp"
#include "molkit/spec.hpp"

namespace molkit {

/// Index bookkeeping for the scheme graph: seed vertices (C), path vertices
/// (T), leaf-path vertices (F) and the color ranges shared by the encoder,
/// the witness builder and the decoder.
struct SchemeGeometry {
  int t_c = 0;    // seed vertices
  int tt_c = 0;   // seed vertices that may root leaf paths
  int kt_c = 0;   // |GE2|
  int k_c = 0;    // |GE2| + |GE1| (path colors)
  int m_c = 0;    // all seed edges
  int t_t = 0;    // T capacity
  int t_f = 0;    // F capacity
  int c_f = 0;    // tt_c + t_t (leaf-path colors)
  int rank_seed = 0;

  std::vector<int> tail, head;  // 1-based arrays indexed by edge 1..m_c
  std::vector<EdgeClass> cls;

  std::vector<int> ia_plus(int i) const;   // direct edges with tail i
  std::vector<int> ia_minus(int i) const;  // direct edges with head i
  std::vector<int> ib_plus(int i) const;   // color edges with tail i
  std::vector<int> ib_minus(int i) const;  // color edges with head i
};

SchemeGeometry make_geometry(const Specification &spec);

// Variable naming: one short family tag plus underscore-joined paper indices,
// e.g. thC_3_5_2 for the third C vertex, entry 5, layer 2.
namespace names {

inline std::string idx(const std::string &fam, int a) {
  return fam + "_" + std::to_string(a);
}
inline std::string idx(const std::string &fam, int a, int b) {
  return fam + "_" + std::to_string(a) + "_" + std::to_string(b);
}
inline std::string idx(const std::string &fam, int a, int b, int c) {
  return fam + "_" + std::to_string(a) + "_" + std::to_string(b) + "_" +
         std::to_string(c);
}
inline std::string idx(const std::string &fam, int a, int b, int c, int d) {
  return fam + "_" + std::to_string(a) + "_" + std::to_string(b) + "_" +
         std::to_string(c) + "_" + std::to_string(d);
}
inline std::string el(const std::string &fam, int a, const std::string &sym) {
  return fam + "_" + std::to_string(a) + "_" + sym;
}

}  // namespace names

/// Sorted union of the adjacency configurations in the catalog and the
/// bound map; position+1 is the aclf variable index.
std::vector<std::string> ac_lf_key_list(const Specification &spec);

struct AssembleCounts {
  int variables = 0;
  int constraints = 0;
  std::string to_json_text() const;
};

/// Builds M_GNN(g,x,y;C1,C2): every structural constraint family plus the
/// network simulation. Sub-builders may be called individually after
/// `declare_variables` for targeted tests; `assemble` runs everything.
class MilpEncoder {
public:
  MilpEncoder(const Specification &spec, const GnnModel &model);

  void declare_variables();
  void build_cyclical_base();
  void build_leaf_paths();
  void build_fringe_assignment();
  void build_degrees();
  void build_multiplicity();
  void build_valence();
  void build_bond_bounds();
  void build_gnn_simulation();
  void add_range(double lo, double hi);

  MilpModel &model() { return model_; }
  const SchemeGeometry &geometry() const { return geo_; }
  const std::vector<std::string> &ac_lf_keys() const { return aclf_keys_; }

  static MilpModel assemble(const Specification &spec, const GnnModel &model,
                            double lo, double hi,
                            AssembleCounts *counts = nullptr);

private:
  int v(const std::string &name) const;  // resolve or throw
  void var(const std::string &name, double lb, double ub, VarKind kind);
  // |x| <= M * gate
  void abs_gate(const std::string &row, const std::string &x, double big,
                const std::string &gate);
  // x - sum(expr) - expr_const within +-big * (gate_const + sum(gate_terms))
  void window(const std::string &row, const std::string &x,
              const std::vector<LinTerm> &expr, double expr_const, double big,
              double gate_const, const std::vector<LinTerm> &gate_terms);
  void lrelu_rows(const std::string &prefix, const std::string &tau,
                  const std::string &theta, const std::string &delta,
                  double big, double kappa);

  // GNN helpers
  int width(int layer) const;  // k_node at layer 0, k_hid after
  const Matrix &weight(int layer) const;
  std::string theta_name(char x, int i, int z, int l) const;
  std::vector<LinTerm> transformed(char x, int i, int z, int l) const;

  const Specification &spec_;
  const GnnModel &gnn_;
  SchemeGeometry geo_;
  MilpModel model_;
  std::vector<std::string> aclf_keys_;
  bool declared_ = false;
};

}  // namespace molkit

#endif  // MOLKIT_ENCODE_HPP_
