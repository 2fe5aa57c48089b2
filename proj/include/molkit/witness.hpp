//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLKIT_WITNESS_HPP_
#define MOLKIT_WITNESS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "molkit/encode.hpp"

namespace molkit {

/// How a molecule's interior maps onto the scheme graph: seed-vertex images,
/// per-color path routes and host-attached leaf chains, all in local interior
/// vertex ids of the suppressed graph.
struct SchemeEmbedding {
  std::vector<int> phi;                         // [1..t_c], local vertex ids
  std::vector<char> edge_used;                  // [1..m_c]
  std::vector<std::vector<int>> path_internal;  // [1..k_c], tail-to-head order
  struct Chain {
    int host = -1;  // local vertex id the chain hangs from
    std::vector<int> verts;
  };
  std::vector<Chain> chains;
};

/// Exhaustive search for an embedding of g's interior onto the scheme graph.
std::optional<SchemeEmbedding> find_embedding(const ChemicalGraph &g,
                                              const Specification &spec);

/// Full variable assignment whose graph part mirrors `g` and whose network
/// part carries the forward-pass trace. Fails when no embedding exists or a
/// fringe tree is missing from the catalog.
Assignment encode_witness(const ChemicalGraph &g, const Specification &spec,
                          const GnnModel &model);

struct DecodeResult {
  ChemicalGraph molecule;
  double y = 0.0;
};

/// Rebuilds the molecule selected by a feasible assignment and reads off the
/// predicted value. Indicator variables may deviate from integers by at most
/// `tol`.
DecodeResult decode_solution(const Assignment &a, const Specification &spec,
                             const GnnModel &model, double tol = 1e-6);

/// Graph-level admissibility checks for a molecule against a specification
/// under a fixed embedding; returns human-readable violations (empty = pass).
std::vector<std::string> check_spec_bounds(const ChemicalGraph &g,
                                           const Specification &spec,
                                           const SchemeEmbedding &emb);

struct OracleCaps {
  int max_n_int_ub = 4;
  int max_catalog = 4;
  int max_lambda_int = 2;
};

struct OracleResult {
  bool feasible = false;
  ChemicalGraph witness;  // set when feasible
  double y = 0.0;
  long candidates = 0;  // admissible graphs enumerated
};

/// Exhaustive feasibility oracle for micro specifications. Enumerates every
/// admissible chemical graph in a fixed order, evaluates the network and
/// reports the first hit inside [lo, hi]. Independent of the MILP path.
OracleResult brute_force_feasibility(const Specification &spec,
                                     const GnnModel &model, double lo, double hi,
                                     const OracleCaps &caps = OracleCaps());

}  // namespace molkit

#endif  // MOLKIT_WITNESS_HPP_
