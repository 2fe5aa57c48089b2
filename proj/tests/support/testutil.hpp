//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLKIT_TESTS_TESTUTIL_HPP_
#define MOLKIT_TESTS_TESTUTIL_HPP_

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "molkit/catalog.hpp"
#include "molkit/chemgraph.hpp"
#include "molkit/common.hpp"
#include "molkit/gnn.hpp"
#include "molkit/milp.hpp"
#include "molkit/spec.hpp"

namespace molkit::test {

inline int add_atom(ChemicalGraph &g, const std::string &el, int h = 0,
                    int ion = 0) {
  g.atoms.push_back(Atom{el, h, ion});
  return g.num_atoms() - 1;
}

inline void add_bond(ChemicalGraph &g, int u, int v, int m = 1) {
  g.bonds.push_back(Bond{u, v, m});
}

/// Sets every heavy atom's hydrogen count to valence + ion - bond sum.
inline void fill_hydrogens(ChemicalGraph &g) {
  const ElementTable &et = ElementTable::defaults();
  for (int v = 0; v < g.num_atoms(); ++v) {
    if (g.atoms[v].element == "H") continue;
    int free = et.valence(g.atoms[v].element) + g.atoms[v].ion - g.beta_sum(v);
    if (free < 0) throw Error("over-bonded test molecule");
    g.atoms[v].hydrogens = free;
  }
}

/// n-vertex carbon path with single bonds (hydrogens filled).
inline ChemicalGraph carbon_path(int n) {
  ChemicalGraph g;
  for (int i = 0; i < n; ++i) add_atom(g, "C");
  for (int i = 1; i < n; ++i) add_bond(g, i - 1, i);
  fill_hydrogens(g);
  return g;
}

inline std::string pick_element(Rng &rng) {
  int r = rng.range(0, 9);
  if (r < 6) return "C";
  if (r < 8) return "O";
  return "N";
}

/// Random connected molecule: a random tree over heavy atoms, at most one
/// extra cycle edge, multiplicities within valence, hydrogens filled.
/// Regenerates until the two-layer decomposition (rho = 2) exists.
inline ChemicalGraph random_molecule(Rng &rng, int n_min = 4, int n_max = 9,
                                     bool allow_cycle = true) {
  const ElementTable &et = ElementTable::defaults();
  for (int attempt = 0; attempt < 200; ++attempt) {
    int n = rng.range(n_min, n_max);
    ChemicalGraph g;
    std::vector<int> cap;
    for (int i = 0; i < n; ++i) {
      add_atom(g, pick_element(rng));
      cap.push_back(et.valence(g.atoms[i].element));
    }
    bool ok = true;
    for (int i = 1; i < n && ok; ++i) {
      std::vector<int> hosts;
      for (int u = 0; u < i; ++u)
        if (cap[u] >= 1) hosts.push_back(u);
      if (hosts.empty()) {
        ok = false;
        break;
      }
      int u = hosts[rng.below(hosts.size())];
      add_bond(g, u, i);
      cap[u]--;
      cap[i]--;
    }
    if (!ok) continue;
    if (allow_cycle && rng.range(0, 2) == 0) {
      std::vector<std::pair<int, int>> cands;
      for (int u = 0; u < n; ++u)
        for (int w = u + 1; w < n; ++w) {
          if (cap[u] < 1 || cap[w] < 1) continue;
          bool adjacent = false;
          for (const Bond &b : g.bonds)
            adjacent |= (b.u == u && b.v == w) || (b.u == w && b.v == u);
          if (!adjacent) cands.emplace_back(u, w);
        }
      if (!cands.empty()) {
        auto [u, w] = cands[rng.below(cands.size())];
        add_bond(g, u, w);
        cap[u]--;
        cap[w]--;
      }
    }
    for (Bond &b : g.bonds) {
      while (b.mult < 3 && cap[b.u] >= 1 && cap[b.v] >= 1 && rng.range(0, 4) == 0) {
        ++b.mult;
        cap[b.u]--;
        cap[b.v]--;
      }
    }
    fill_hydrogens(g);
    // interior degree above 4 cannot happen with this element set, but the
    // decomposition may be empty for very small graphs
    try {
      g.validate(et);
      decompose(g, 2);
      return g;
    } catch (const Error &) {
      continue;
    }
  }
  throw Error("random_molecule: no decomposable graph after 200 attempts");
}

/// Ring molecules assembled from a fixed fringe vocabulary: every interior
/// vertex sits on a k-cycle and carries one of a dozen side groups. The
/// small vocabulary keeps the catalog fully covered by modest datasets.
inline ChemicalGraph motif_molecule(Rng &rng) {
  const ElementTable &et = ElementTable::defaults();
  for (int attempt = 0; attempt < 200; ++attempt) {
    int k = rng.range(3, 6);
    ChemicalGraph g;
    for (int i = 0; i < k; ++i) add_atom(g, "C");
    for (int i = 0; i < k; ++i) add_bond(g, i, (i + 1) % k == 0 ? 0 : i + 1);
    // per ring vertex: element with capacity for two ring bonds, then one of
    // a few side groups filling part of the remaining valence
    for (int i = 0; i < k; ++i) {
      int el = rng.range(0, 5);
      if (el == 4) g.atoms[i].element = "N";  // degree 2 + 1 spare
      // others stay carbon: degree 2 + 2 spare
      int spare = et.valence(g.atoms[i].element) - 2;
      int shape = rng.range(0, 3);
      if (spare >= 1 && shape == 1) {  // methyl
        int w = add_atom(g, "C");
        add_bond(g, i, w);
      } else if (spare >= 1 && shape == 2) {  // hydroxyl
        int w = add_atom(g, "O");
        add_bond(g, i, w);
      } else if (spare >= 1 && shape == 3) {  // ethyl, height-2 fringe
        int w = add_atom(g, "C");
        add_bond(g, i, w);
        int w2 = add_atom(g, "C");
        add_bond(g, w, w2);
      }
      // shape 0: hydrogens only
    }
    fill_hydrogens(g);
    try {
      g.validate(et);
      decompose(g, 2);
      return g;
    } catch (const Error &) {
      continue;
    }
  }
  throw Error("motif_molecule: generation failed");
}

/// Molecule whose interior matches the I5 scheme: a 3-vertex cycle frame
/// u1-(path)-u2-(path)-u3 closed by the 0/1 chord, plus optional leaf chains
/// and height<=2 exterior decorations. All within 9 heavy atoms.
inline ChemicalGraph i5_shaped_molecule(Rng &rng) {
  const ElementTable &et = ElementTable::defaults();
  for (int attempt = 0; attempt < 400; ++attempt) {
    ChemicalGraph g;
    std::vector<int> cap;
    auto grow = [&](const std::string &el) {
      int id = add_atom(g, el);
      cap.push_back(et.valence(el));
      return id;
    };
    int q1 = rng.range(1, 2), q2 = rng.range(1, 2);
    int u1 = grow("C"), u2 = grow(pick_element(rng)), u3 = grow("C");
    int prev = u1;
    std::vector<int> interior{u1, u2, u3};
    for (int q = 0; q < q1; ++q) {
      int t = grow(pick_element(rng));
      add_bond(g, std::min(prev, t), std::max(prev, t));
      cap[prev]--;
      cap[t]--;
      interior.push_back(t);
      prev = t;
    }
    add_bond(g, std::min(prev, u2), std::max(prev, u2));
    cap[prev]--;
    cap[u2]--;
    prev = u2;
    for (int q = 0; q < q2; ++q) {
      int t = grow(pick_element(rng));
      add_bond(g, std::min(prev, t), std::max(prev, t));
      cap[prev]--;
      cap[t]--;
      interior.push_back(t);
      prev = t;
    }
    add_bond(g, std::min(prev, u3), std::max(prev, u3));
    cap[prev]--;
    cap[u3]--;
    add_bond(g, u1, u3);  // the 0/1 chord keeps every frame vertex interior
    cap[u1]--;
    cap[u3]--;

    int budget = 9 - static_cast<int>(interior.size());
    // occasionally hang a one-vertex leaf chain: it needs a height-2 fringe
    if (budget >= 3 && rng.range(0, 2) == 0) {
      std::vector<int> hosts;
      for (int vd : interior)
        if (cap[vd] >= 1) hosts.push_back(vd);
      if (!hosts.empty()) {
        int host = hosts[rng.below(hosts.size())];
        int f = grow("C");
        add_bond(g, std::min(host, f), std::max(host, f));
        cap[host]--;
        cap[f]--;
        int c1 = grow("C");
        add_bond(g, f, c1);
        cap[f]--;
        cap[c1]--;
        int c2 = grow(pick_element(rng));
        add_bond(g, c1, c2);
        cap[c1]--;
        cap[c2]--;
        interior.push_back(f);  // its hanging tree reaches height 2
        budget -= 3;
      }
    }
    // depth-1 decorations with the remaining budget
    while (budget > 0 && rng.range(0, 1) == 0) {
      std::vector<int> hosts;
      for (int vd = 0; vd < g.num_atoms(); ++vd)
        if (cap[vd] >= 1) hosts.push_back(vd);
      if (hosts.empty()) break;
      int host = hosts[rng.below(hosts.size())];
      int w = grow(pick_element(rng));
      int m = 1;
      if (cap[host] >= 2 && cap[w] >= 2 && rng.range(0, 2) == 0) m = 2;
      add_bond(g, std::min(host, w), std::max(host, w), m);
      cap[host] -= m;
      cap[w] -= m;
      --budget;
    }
    // a sprinkling of double bonds on the frame
    for (Bond &b : g.bonds)
      if (b.mult == 1 && cap[b.u] >= 1 && cap[b.v] >= 1 && rng.range(0, 5) == 0) {
        b.mult = 2;
        cap[b.u]--;
        cap[b.v]--;
      }
    fill_hydrogens(g);
    try {
      g.validate(et);
      TwoLayerDecomposition d = decompose(g, 2);
      if (d.interior.size() != interior.size()) continue;
      return g;
    } catch (const Error &) {
      continue;
    }
  }
  throw Error("i5_shaped_molecule: generation failed");
}

/// Random rooted chemical tree with <= max_nodes vertices and height <= 2,
/// for canonical-code oracle tests.
inline FringeTree random_fringe_tree(Rng &rng, int max_nodes = 8) {
  FringeTree t;
  int n = rng.range(1, max_nodes);
  for (int i = 0; i < n; ++i) {
    t.nodes.push_back(Atom{pick_element(rng), rng.range(0, 2), 0});
    if (i == 0) {
      t.parent.push_back(-1);
      t.mult.push_back(0);
    } else {
      // attach to a vertex of depth <= 1 to keep height <= 2
      std::vector<int> hosts{0};
      for (int q = 1; q < i; ++q)
        if (t.parent[q] == 0) hosts.push_back(q);
      t.parent.push_back(hosts[rng.below(hosts.size())]);
      t.mult.push_back(rng.range(1, 2));
    }
  }
  return t;
}

/// Relabels children order without changing the rooted isomorphism class.
inline FringeTree shuffle_children(const FringeTree &t, Rng &rng) {
  int n = t.size();
  std::vector<int> order(n);
  order[0] = 0;
  std::vector<int> rest;
  for (int i = 1; i < n; ++i) rest.push_back(i);
  for (size_t i = rest.size(); i > 1; --i)
    std::swap(rest[i - 1], rest[rng.below(i)]);
  // children must come after parents: insert in BFS-compatible order
  std::vector<int> new_id(n, -1);
  new_id[0] = 0;
  FringeTree out;
  out.nodes.push_back(t.nodes[0]);
  out.parent.push_back(-1);
  out.mult.push_back(0);
  bool progress = true;
  while (progress) {
    progress = false;
    for (int i : rest) {
      if (new_id[i] != -1 || new_id[t.parent[i]] == -1) continue;
      new_id[i] = out.size();
      out.nodes.push_back(t.nodes[i]);
      out.parent.push_back(new_id[t.parent[i]]);
      out.mult.push_back(t.mult[i]);
      progress = true;
    }
  }
  return out;
}

/// Backtracking isomorphism test on hydrogen-suppressed molecules, matching
/// elements, hydrogen counts, ion-valences and bond multiplicities.
inline bool graphs_isomorphic(const ChemicalGraph &ga, const ChemicalGraph &gb) {
  ChemicalGraph a = suppress_hydrogens(ga), b = suppress_hydrogens(gb);
  const int n = a.num_atoms();
  if (b.num_atoms() != n || a.num_bonds() != b.num_bonds()) return false;
  std::map<std::pair<int, int>, int> ea, eb;
  for (const Bond &bd : a.bonds) ea[std::minmax(bd.u, bd.v)] = bd.mult;
  for (const Bond &bd : b.bonds) eb[std::minmax(bd.u, bd.v)] = bd.mult;
  std::vector<int> map_ab(n, -1);
  std::vector<bool> used(n, false);
  std::function<bool(int)> place = [&](int va) -> bool {
    if (va == n) return true;
    for (int vb = 0; vb < n; ++vb) {
      if (used[vb]) continue;
      if (a.atoms[va].element != b.atoms[vb].element ||
          a.atoms[va].hydrogens != b.atoms[vb].hydrogens ||
          a.atoms[va].ion != b.atoms[vb].ion)
        continue;
      bool ok = true;
      for (int prev = 0; prev < va && ok; ++prev) {
        auto ita = ea.find(std::minmax(prev, va));
        auto itb = eb.find(std::minmax(map_ab[prev], vb));
        bool ha = ita != ea.end(), hb = itb != eb.end();
        if (ha != hb || (ha && ita->second != itb->second)) ok = false;
      }
      if (!ok) continue;
      map_ab[va] = vb;
      used[vb] = true;
      if (place(va + 1)) return true;
      used[vb] = false;
      map_ab[va] = -1;
    }
    return false;
  };
  return place(0);
}

/// Catalog plus an I5-shaped specification built from a molecule pool.
inline Specification i5_shaped_spec(const FringeCatalog &catalog) {
  Specification s;
  s.rho = catalog.rho;
  s.catalog = catalog;
  s.bounds.n_int_lb = 3;
  s.bounds.n_int_ub = 9;
  s.bounds.n_lb = 3;
  s.bounds.n_star = 9;
  std::set<std::string> li, le;
  for (const CatalogEntry &e : catalog.entries) {
    li.insert(e.tree.root_element());
    for (const auto &[sym, cnt] : e.stats.na_ex) le.insert(sym);
  }
  le.insert(li.begin(), li.end());
  s.lambda_int.assign(li.begin(), li.end());
  s.lambda_ex.assign(le.begin(), le.end());
  const int tt = s.bounds.n_int_ub - 3;
  for (int i = 0; i < 3; ++i) {
    SeedVertex v;
    v.bl_ub = 1;
    v.ch_ub = s.bounds.n_star;
    s.seed.vertices.push_back(v);
  }
  auto edge = [&](int ta, int he, EdgeClass cls) {
    SeedEdge e;
    e.tail = ta;
    e.head = he;
    e.cls = cls;
    switch (cls) {
      case EdgeClass::GE2: e.l_lb = 2; e.l_ub = std::max(2, tt); break;
      case EdgeClass::GE1: e.l_lb = 1; e.l_ub = std::max(2, tt); break;
      case EdgeClass::ZeroOne: e.l_lb = 0; e.l_ub = 1; break;
      case EdgeClass::EQ1: e.l_lb = 1; e.l_ub = 1; break;
    }
    e.bl_ub = std::max(0, e.l_ub - 1);
    e.ch_ub = s.bounds.n_star;
    e.bd2_ub = e.bd3_ub = s.bounds.n_int_ub;
    s.seed.edges.push_back(e);
  };
  edge(1, 2, EdgeClass::GE2);
  edge(2, 3, EdgeClass::GE2);
  edge(1, 3, EdgeClass::ZeroOne);
  for (int id = 1; id <= s.catalog.size(); ++id) s.bounds.fc[id] = {0, 10};
  for (int d = 0; d < 4; ++d) {
    s.bounds.dg[d] = {0, s.bounds.n_star};
    s.bounds.dg_int[d] = {0, s.bounds.n_star};
  }
  s.validate();
  return s;
}

/// Tiny but trainable network sizes for witness-level tests.
inline GnnConfig micro_config(int layers = 2, int k_hid = 6, int k_c = 6) {
  GnnConfig cfg;
  cfg.layers = layers;
  cfg.k_hid = k_hid;
  cfg.k_c = k_c;
  cfg.head_hidden = {k_c};
  return cfg;
}


/// Flat views over every learnable parameter group, in a fixed order.
inline std::vector<std::pair<std::string, Vec *>> param_views(GnnModel &m) {
  std::vector<std::pair<std::string, Vec *>> out{{"w0", &m.w0.a}};
  for (size_t i = 0; i < m.w.size(); ++i)
    out.emplace_back("w" + std::to_string(i + 1), &m.w[i].a);
  for (size_t i = 0; i < m.bias.size(); ++i)
    out.emplace_back("bias" + std::to_string(i), &m.bias[i]);
  out.emplace_back("wc", &m.wc.a);
  for (size_t i = 0; i < m.head_w.size(); ++i)
    out.emplace_back("head_w" + std::to_string(i), &m.head_w[i].a);
  for (size_t i = 0; i < m.head_b.size(); ++i)
    out.emplace_back("head_b" + std::to_string(i), &m.head_b[i]);
  for (auto &[code, v] : m.embeddings) out.emplace_back("emb:" + code, &v);
  return out;
}

inline std::vector<std::pair<std::string, Vec *>> param_views(GnnGrad &g) {
  std::vector<std::pair<std::string, Vec *>> out{{"w0", &g.w0.a}};
  for (size_t i = 0; i < g.w.size(); ++i)
    out.emplace_back("w" + std::to_string(i + 1), &g.w[i].a);
  for (size_t i = 0; i < g.bias.size(); ++i)
    out.emplace_back("bias" + std::to_string(i), &g.bias[i]);
  out.emplace_back("wc", &g.wc.a);
  for (size_t i = 0; i < g.head_w.size(); ++i)
    out.emplace_back("head_w" + std::to_string(i), &g.head_w[i].a);
  for (size_t i = 0; i < g.head_b.size(); ++i)
    out.emplace_back("head_b" + std::to_string(i), &g.head_b[i]);
  for (auto &[code, v] : g.embeddings) out.emplace_back("emb:" + code, &v);
  return out;
}

/// Worst relative error between reverse-mode and central-difference
/// gradients over every parameter coordinate. h = 1e-5.
inline double max_grad_rel_err(
    GnnModel model, const std::vector<std::pair<GnnInput, double>> &batch) {
  GnnGrad grad = zero_grad_like(model);
  loss_and_grad(model, batch, &grad);
  auto pv = param_views(model);
  auto gv = param_views(grad);
  const double h = 1e-5;
  double worst = 0.0;
  for (size_t p = 0; p < pv.size(); ++p) {
    Vec &param = *pv[p].second;
    const Vec &analytic = *gv[p].second;
    for (size_t i = 0; i < param.size(); ++i) {
      double keep = param[i];
      param[i] = keep + h;
      double up = loss_and_grad(model, batch, nullptr);
      param[i] = keep - h;
      double dn = loss_and_grad(model, batch, nullptr);
      param[i] = keep;
      double numeric = (up - dn) / (2 * h);
      double rel = std::fabs(analytic[i] - numeric) /
                   std::max({1.0, std::fabs(analytic[i]), std::fabs(numeric)});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

/// Interval of feasible values for `unknown` with everything else fixed,
/// intersected over the rows named prefix_a .. prefix_f.
struct Span {
  double lo = -1e100, hi = 1e100;
  bool empty() const { return lo > hi + 1e-12; }
};

inline Span admissible_interval(const MilpModel &m, const std::string &prefix,
                                const std::string &unknown,
                                const Assignment &fixed) {
  Span out;
  for (const char *suffix : {"_a", "_b", "_c", "_d", "_e", "_f"}) {
    const MilpCon *row = nullptr;
    for (const MilpCon &c : m.cons())
      if (c.name == prefix + suffix) {
        row = &c;
        break;
      }
    if (!row) continue;
    double known = 0.0, coef = 0.0;
    for (const LinTerm &t : row->terms) {
      const std::string &nm = m.var(t.var).name;
      if (nm == unknown) coef += t.coef;
      else known += t.coef * fixed.at(nm);
    }
    if (coef == 0.0) {
      bool ok = row->sense == '<'   ? known <= row->rhs + 1e-9
                : row->sense == '>' ? known >= row->rhs - 1e-9
                                    : std::fabs(known - row->rhs) <= 1e-9;
      if (!ok) return Span{1, 0};
      continue;
    }
    double bound = (row->rhs - known) / coef;
    bool upper = (row->sense == '<') == (coef > 0.0);
    if (row->sense == '=') {
      out.lo = std::max(out.lo, bound);
      out.hi = std::min(out.hi, bound);
    } else if (upper) {
      out.hi = std::min(out.hi, bound);
    } else {
      out.lo = std::max(out.lo, bound);
    }
  }
  return out;
}

}  // namespace molkit::test

#endif  // MOLKIT_TESTS_TESTUTIL_HPP_
