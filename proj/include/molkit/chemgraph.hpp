//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLKIT_CHEMGRAPH_HPP_
#define MOLKIT_CHEMGRAPH_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "molkit/element_table.hpp"

namespace molkit {

struct Atom {
  std::string element;
  int hydrogens = 0;  // explicit hydrogen count folded onto this atom
  int ion = 0;        // ion-valence, in [-3, +3]
};

struct Bond {
  int u = 0;
  int v = 0;
  int mult = 1;  // bond multiplicity, in [1,3]
};

/// Labeled multigraph-free molecule model: atoms with hydrogen counts plus
/// simple bonds. `validate` enforces simplicity, connectivity of the
/// hydrogen-suppressed graph and the per-atom valence identity
///   sum of incident multiplicities + hydrogens == valence + ion.
class ChemicalGraph {
public:
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;

  int num_atoms() const { return static_cast<int>(atoms.size()); }
  int num_bonds() const { return static_cast<int>(bonds.size()); }

  std::vector<std::vector<int>> adjacency() const;  // neighbor atom ids
  int degree(int v) const;                          // heavy-atom degree
  int beta_sum(int v) const;                        // sum of incident multiplicities

  void validate(const ElementTable &et) const;  // throws Error on violation
  bool structurally_equal(const ChemicalGraph &other) const;
};

ChemicalGraph suppress_hydrogens(const ChemicalGraph &g);

/// Height of every vertex of a hydrogen-suppressed graph under iterative
/// leaf removal; nullopt for cycle vertices without a tree neighbor.
std::vector<std::optional<int>> vertex_heights(const ChemicalGraph &g);

struct FringeStats {
  int n_h = 0;       // non-root heavy atoms
  int ht_h = 0;      // height of the hydrogen-suppressed tree
  int deg_r = 0;     // heavy children of the root
  int hyddeg_r = 0;  // hydrogens on the root
  int beta_r = 0;    // multiplicities incident to the root, hydrogens included
  int vion = 0;      // root ion-valence
  std::map<std::string, int> ac_lf;  // leaf adjacency-configuration counts
  std::map<std::string, int> na_ex;  // non-root element counts, incl. "H"
};

/// Rooted chemical tree of height <= rho with hydrogens restored.
/// Node 0 is always the root; `parent[0]` is -1.
struct FringeTree {
  std::vector<Atom> nodes;
  std::vector<int> parent;
  std::vector<int> mult;  // multiplicity of the edge to parent; 0 for root

  int size() const { return static_cast<int>(nodes.size()); }
  std::vector<std::vector<int>> children() const;
  FringeStats stats(const ElementTable &et) const;
  const std::string &root_element() const { return nodes[0].element; }
};

/// Key "a-b-m" with a <= b lexicographically, for a leaf edge {a,b} of
/// multiplicity m.
std::string adjacency_config_key(const std::string &a, const std::string &b, int m);

std::string canonical_code(const FringeTree &t);

/// Oracle-grade rooted-isomorphism test; exponential, for small trees only.
bool rooted_isomorphic(const FringeTree &a, const FringeTree &b);

struct TwoLayerDecomposition {
  int rho = 2;
  std::vector<int> interior;          // vertex ids of the suppressed graph
  std::vector<int> exterior;
  std::vector<bool> is_interior;      // indexed by suppressed vertex id
  std::vector<std::pair<int, int>> interior_edges;  // u < v
};

/// Splits the suppressed graph of `g` into interior and exterior per the
/// two-layered model. Throws when the suppressed graph has fewer than two
/// vertices or no interior vertex survives.
TwoLayerDecomposition decompose(const ChemicalGraph &g, int rho);

/// One fringe tree per interior vertex, in `d.interior` order.
std::vector<FringeTree> extract_fringe_trees(const TwoLayerDecomposition &d,
                                             const ChemicalGraph &suppressed);

// Molecule file I/O. ".json" uses the repo schema
//   {atoms:[{el,h,ion}], bonds:[{u,v,m}]}
// (0-based indices); anything else is treated as minimal SDF V2000.
ChemicalGraph read_molecule(const std::string &path);
void write_molecule(const ChemicalGraph &g, const std::string &path);
ChemicalGraph molecule_from_json_text(const std::string &text);
std::string molecule_to_json_text(const ChemicalGraph &g);
ChemicalGraph molecule_from_sdf_text(const std::string &text);
std::string molecule_to_sdf_text(const ChemicalGraph &g);

}  // namespace molkit

#endif  // MOLKIT_CHEMGRAPH_HPP_
