//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#include "molkit/witness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "molkit/common.hpp"

namespace molkit {

using names::el;
using names::idx;

namespace {

// Interior graph of a molecule in local 0-based ids, with multiplicities.
struct Interior {
  int n = 0;
  std::vector<std::vector<int>> adj;
  std::map<std::pair<int, int>, int> mult;  // key u < v
  std::vector<int> suppressed_id;           // local -> suppressed vertex
  std::vector<int> catalog_id;              // local -> catalog id (1-based)
  std::vector<FringeStats> stats;           // local -> fringe stats
  std::vector<std::string> element;         // local -> root element

  bool has_edge(int u, int v) const {
    return mult.count(std::minmax(u, v)) != 0;
  }
  int edge_mult(int u, int v) const { return mult.at(std::minmax(u, v)); }
};

Interior make_interior(const ChemicalGraph &g, const Specification &spec) {
  const ElementTable &et = ElementTable::defaults();
  ChemicalGraph s = suppress_hydrogens(g);
  TwoLayerDecomposition d = decompose(g, spec.rho);
  std::vector<FringeTree> trees = extract_fringe_trees(d, s);

  Interior in;
  in.n = static_cast<int>(d.interior.size());
  in.adj.resize(in.n);
  std::vector<int> local(s.num_atoms(), -1);
  for (int i = 0; i < in.n; ++i) local[d.interior[i]] = i;
  std::map<std::pair<int, int>, int> smult;
  for (const Bond &b : s.bonds) smult[std::minmax(b.u, b.v)] = b.mult;
  for (auto &[u, v] : d.interior_edges) {
    int lu = local[u], lv = local[v];
    in.adj[lu].push_back(lv);
    in.adj[lv].push_back(lu);
    in.mult[std::minmax(lu, lv)] = smult.at(std::minmax(u, v));
  }
  for (int i = 0; i < in.n; ++i) std::sort(in.adj[i].begin(), in.adj[i].end());
  in.suppressed_id = d.interior;
  for (int i = 0; i < in.n; ++i) {
    std::string code = canonical_code(trees[i]);
    int id = spec.catalog.id_of(code);
    if (id == 0) throw Error("uncatalogued fringe tree: " + code);
    in.catalog_id.push_back(id);
    in.stats.push_back(trees[i].stats(et));
    in.element.push_back(trees[i].root_element());
  }
  return in;
}

// Backtracking embedding search. Deterministic: candidates are explored in
// ascending order, so the first success is stable across runs.
class EmbeddingSearch {
public:
  EmbeddingSearch(const Interior &in, const Specification &spec)
      : in_(in), spec_(spec), geo_(make_geometry(spec)) {}

  std::optional<SchemeEmbedding> run() {
    if (in_.n < geo_.t_c) return std::nullopt;
    phi_.assign(geo_.t_c + 1, -1);
    used_vertex_.assign(in_.n, false);
    result_.reset();
    place_seed_vertex(1);
    return result_;
  }

private:
  bool edge_covered(int u, int v) const {
    return covered_.count(std::minmax(u, v)) != 0;
  }

  void place_seed_vertex(int i) {
    if (result_) return;
    if (i > geo_.t_c) {
      // every eq1 edge must exist as an interior edge
      for (int k = 1; k <= geo_.m_c; ++k)
        if (geo_.cls[k] == EdgeClass::EQ1 &&
            !in_.has_edge(phi_[geo_.tail[k]], phi_[geo_.head[k]]))
          return;
      edge_used_.assign(geo_.m_c + 1, 0);
      paths_.assign(geo_.k_c + 1, {});
      route_color(1, 0);
      return;
    }
    for (int v = 0; v < in_.n && !result_; ++v) {
      if (used_vertex_[v]) continue;
      phi_[i] = v;
      used_vertex_[v] = true;
      place_seed_vertex(i + 1);
      used_vertex_[v] = false;
      phi_[i] = -1;
    }
  }

  void route_color(int k, int t_used) {
    if (result_) return;
    if (k > geo_.k_c) {
      choose_optional(geo_.k_c + 1);
      return;
    }
    const SeedEdge &e = spec_.seed.edges[k - 1];
    int a = phi_[geo_.tail[k]], b = phi_[geo_.head[k]];
    if (geo_.cls[k] == EdgeClass::GE1 && in_.has_edge(a, b) &&
        !edge_covered(a, b)) {
      covered_.insert(std::minmax(a, b));
      edge_used_[k] = 1;
      route_color(k + 1, t_used);
      edge_used_[k] = 0;
      covered_.erase(std::minmax(a, b));
      if (result_) return;
    }
    // paths of length l in [max(2, l_lb), l_ub]
    std::vector<int> path;
    std::function<void(int)> extend = [&](int cur) {
      if (result_) return;
      // closing onto the head now uses path.size() + 1 edges
      int len = static_cast<int>(path.size()) + 1;
      if (len >= std::max(2, e.l_lb) && len <= e.l_ub && !path.empty() &&
          in_.has_edge(cur, b) && !edge_covered(cur, b)) {
        covered_.insert(std::minmax(cur, b));
        paths_[k] = path;
        route_color(k + 1, t_used + static_cast<int>(path.size()));
        paths_[k].clear();
        covered_.erase(std::minmax(cur, b));
        if (result_) return;
      }
      if (len + 1 > e.l_ub) return;
      if (t_used + static_cast<int>(path.size()) >= geo_.t_t) return;
      for (int w : in_.adj[cur]) {
        if (used_vertex_[w] || edge_covered(cur, w)) continue;
        covered_.insert(std::minmax(cur, w));
        used_vertex_[w] = true;
        path.push_back(w);
        extend(w);
        path.pop_back();
        used_vertex_[w] = false;
        covered_.erase(std::minmax(cur, w));
        if (result_) return;
      }
    };
    extend(a);
  }

  void choose_optional(int k) {
    if (result_) return;
    if (k > geo_.m_c) {
      finish();
      return;
    }
    if (geo_.cls[k] == EdgeClass::EQ1) {
      int a = phi_[geo_.tail[k]], b = phi_[geo_.head[k]];
      if (edge_covered(a, b)) return;
      covered_.insert(std::minmax(a, b));
      edge_used_[k] = 1;
      choose_optional(k + 1);
      edge_used_[k] = 0;
      covered_.erase(std::minmax(a, b));
      return;
    }
    if (geo_.cls[k] != EdgeClass::ZeroOne) {
      choose_optional(k + 1);
      return;
    }
    int a = phi_[geo_.tail[k]], b = phi_[geo_.head[k]];
    if (in_.has_edge(a, b) && !edge_covered(a, b)) {
      covered_.insert(std::minmax(a, b));
      edge_used_[k] = 1;
      choose_optional(k + 1);
      edge_used_[k] = 0;
      covered_.erase(std::minmax(a, b));
      if (result_) return;
    }
    choose_optional(k + 1);  // leave the 0/1 edge out
  }

  void finish() {
    // leftover vertices must split into host-attached chains
    std::vector<int> leftover;
    std::vector<char> is_left(in_.n, 0);
    for (int vtx = 0; vtx < in_.n; ++vtx)
      if (!used_vertex_[vtx]) {
        leftover.push_back(vtx);
        is_left[vtx] = 1;
      }
    if (static_cast<int>(leftover.size()) > geo_.t_f) return;

    // hosts: seed vertices u_i with i <= tt_c, and internal path vertices
    std::map<int, int> host_rank;  // local vertex -> eligibility marker
    for (int i = 1; i <= geo_.tt_c; ++i) host_rank[phi_[i]] = 1;
    for (int k = 1; k <= geo_.k_c; ++k)
      for (int vtx : paths_[k]) host_rank[vtx] = 1;

    std::vector<SchemeEmbedding::Chain> chains;
    std::vector<char> seen(in_.n, 0);
    std::set<int> hosts_taken;
    std::set<std::pair<int, int>> chain_edges;
    for (int start : leftover) {
      if (seen[start]) continue;
      std::vector<int> comp;
      std::vector<int> stack{start};
      seen[start] = 1;
      while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        comp.push_back(u);
        for (int w : in_.adj[u])
          if (is_left[w] && !seen[w]) {
            seen[w] = 1;
            stack.push_back(w);
          }
      }
      // the component must be a simple path with one attachment at an end
      std::vector<std::pair<int, int>> attach;  // (comp vertex, host)
      bool ok = true;
      for (int u : comp) {
        int inner = 0;
        for (int w : in_.adj[u]) {
          if (is_left[w]) ++inner;
          else attach.emplace_back(u, w);
        }
        if (inner > 2) ok = false;
      }
      if (!ok || attach.size() != 1) return;
      auto [seed_end, host] = attach[0];
      if (!host_rank.count(host) || hosts_taken.count(host)) return;
      // walk from the attached end
      std::vector<int> order{seed_end};
      std::set<int> in_order{seed_end};
      int cur = seed_end;
      while (true) {
        int nxt = -1;
        for (int w : in_.adj[cur])
          if (is_left[w] && !in_order.count(w)) {
            if (nxt != -1) return;  // branching, not a path
            nxt = w;
          }
        if (nxt == -1) break;
        order.push_back(nxt);
        in_order.insert(nxt);
        cur = nxt;
      }
      if (order.size() != comp.size()) return;  // cycle inside the component
      hosts_taken.insert(host);
      chain_edges.insert(std::minmax(seed_end, host));
      for (size_t q = 1; q < order.size(); ++q)
        chain_edges.insert(std::minmax(order[q - 1], order[q]));
      SchemeEmbedding::Chain c;
      c.host = host;
      c.verts = order;
      chains.push_back(std::move(c));
    }

    // every interior edge must now be covered exactly once
    size_t covered_total = covered_.size() + chain_edges.size();
    if (covered_total != in_.mult.size()) return;

    SchemeEmbedding emb;
    emb.phi = phi_;
    emb.edge_used.assign(geo_.m_c + 1, 0);
    for (int k = 1; k <= geo_.m_c; ++k) emb.edge_used[k] = edge_used_[k];
    emb.path_internal = paths_;
    emb.chains = std::move(chains);
    result_ = std::move(emb);
  }

  const Interior &in_;
  const Specification &spec_;
  SchemeGeometry geo_;
  std::vector<int> phi_;
  std::vector<char> used_vertex_;
  std::vector<char> edge_used_;
  std::vector<std::vector<int>> paths_;
  std::set<std::pair<int, int>> covered_;
  std::optional<SchemeEmbedding> result_;
};

// Scheme-side layout computed from an embedding: which local vertex sits in
// every C/T/F slot, plus colors and link indicators.
struct Layout {
  std::vector<int> t_vert, f_vert;    // [1..t_t]/[1..t_f], local id or -1
  std::vector<int> t_color, f_color;  // color per slot, 0 if unused
  std::vector<char> e_t, e_f;         // [1..t+1], link indicator
  int used_t = 0, used_f = 0;
};

Layout make_layout(const SchemeEmbedding &emb, const SchemeGeometry &geo) {
  Layout lay;
  lay.t_vert.assign(geo.t_t + 1, -1);
  lay.t_color.assign(geo.t_t + 1, 0);
  lay.e_t.assign(geo.t_t + 2, 0);
  lay.f_vert.assign(geo.t_f + 1, -1);
  lay.f_color.assign(geo.t_f + 1, 0);
  lay.e_f.assign(geo.t_f + 2, 0);

  std::vector<int> colors;
  for (int k = 1; k <= geo.k_c; ++k)
    if (!emb.path_internal[k].empty()) colors.push_back(k);
  std::sort(colors.rbegin(), colors.rend());
  int pos = 1;
  for (int k : colors) {
    bool first = true;
    for (int vtx : emb.path_internal[k]) {
      lay.t_vert[pos] = vtx;
      lay.t_color[pos] = k;
      if (!first) lay.e_t[pos] = 1;
      first = false;
      ++pos;
    }
  }
  lay.used_t = pos - 1;

  std::vector<int> tpos_of(geo.t_t + 1, -1);
  std::map<int, int> local_tpos;
  for (int i = 1; i <= geo.t_t; ++i)
    if (lay.t_vert[i] >= 0) local_tpos[lay.t_vert[i]] = i;

  // chain color: the hosting seed vertex's index, or tt_c + host T position
  std::vector<std::pair<int, const SchemeEmbedding::Chain *>> fcolored;
  for (const auto &ch : emb.chains) {
    int color = -1;
    for (int i = 1; i <= geo.tt_c && color < 0; ++i)
      if (emb.phi[i] == ch.host) color = i;
    if (color < 0) {
      auto it = local_tpos.find(ch.host);
      if (it == local_tpos.end()) throw Error("internal: chain host not placed");
      color = geo.tt_c + it->second;
    }
    fcolored.emplace_back(color, &ch);
  }
  std::sort(fcolored.begin(), fcolored.end(),
            [](const auto &a, const auto &b) { return a.first > b.first; });
  pos = 1;
  for (auto &[color, ch] : fcolored) {
    bool first = true;
    for (int vtx : ch->verts) {
      lay.f_vert[pos] = vtx;
      lay.f_color[pos] = color;
      if (!first) lay.e_f[pos] = 1;
      first = false;
      ++pos;
    }
  }
  lay.used_f = pos - 1;
  return lay;
}

}  // namespace

std::optional<SchemeEmbedding> find_embedding(const ChemicalGraph &g,
                                              const Specification &spec) {
  Interior in = make_interior(g, spec);
  return EmbeddingSearch(in, spec).run();
}

// ---------------------------------------------------------------------------
// witness assignment

namespace {

class WitnessBuilder {
public:
  WitnessBuilder(const ChemicalGraph &g, const Specification &spec,
                 const GnnModel &model)
      : spec_(spec),
        gnn_(model),
        geo_(make_geometry(spec)),
        in_(make_interior(g, spec)),
        et_(ElementTable::defaults()) {
    auto emb = EmbeddingSearch(in_, spec_).run();
    if (!emb)
      throw Error(
          "no embedding onto the scheme graph: the interior does not fit the "
          "seed-edge/path/leaf-path structure");
    emb_ = std::move(*emb);
    lay_ = make_layout(emb_, geo_);
    trace_ = forward(make_gnn_input(g, spec_.catalog, et_), gnn_);
    mol_ = &g;
  }

  Assignment build() {
    structural();
    fringe_vars();
    degree_vars();
    multiplicity_vars();
    element_vars();
    bond_window_vars();
    network_vars();
    return std::move(a_);
  }

private:
  void set(const std::string &name, double v) { a_[name] = v; }

  int local_of_slot(char x, int i) const {
    if (x == 'C') return emb_.phi[i];
    if (x == 'T') return lay_.t_vert[i];
    return lay_.f_vert[i];
  }

  int slot_count(char x) const {
    return x == 'C' ? geo_.t_c : x == 'T' ? geo_.t_t : geo_.t_f;
  }

  bool slot_used(char x, int i) const { return local_of_slot(x, i) >= 0; }

  // first/last T slot of a used color
  int first_slot_of_color(int k) const {
    for (int i = 1; i <= geo_.t_t; ++i)
      if (lay_.t_color[i] == k) return i;
    return -1;
  }
  int last_slot_of_color(int k) const {
    for (int i = geo_.t_t; i >= 1; --i)
      if (lay_.t_color[i] == k) return i;
    return -1;
  }
  int first_f_slot_of_color(int c) const {
    for (int i = 1; i <= geo_.t_f; ++i)
      if (lay_.f_color[i] == c) return i;
    return -1;
  }

  void structural() {
    int n01_off = 0;
    for (int k = 1; k <= geo_.m_c; ++k) {
      set(idx("eC", k), emb_.edge_used[k]);
      if (geo_.cls[k] == EdgeClass::ZeroOne && !emb_.edge_used[k]) ++n01_off;
    }
    set("rank", geo_.rank_seed - n01_off);
    for (int i = 1; i <= geo_.t_c; ++i) {
      double dm = 0, dp = 0;
      for (int k : geo_.ia_minus(i)) dm += emb_.edge_used[k];
      for (int k : geo_.ia_plus(i)) dp += emb_.edge_used[k];
      set(idx("degCm", i), dm);
      set(idx("degCp", i), dp);
    }
    for (int i = 1; i <= geo_.t_t; ++i) {
      int k = lay_.t_color[i];
      set(idx("vT", i), k > 0 ? 1 : 0);
      set(idx("chiT", i), k);
      set(idx("chiTb", i, k), 1);
    }
    for (int i = 1; i <= geo_.t_t + 1; ++i) set(idx("eT", i), lay_.e_t[i]);
    std::vector<int> clr_t(geo_.k_c + 1, 0);
    for (int i = 1; i <= geo_.t_t; ++i)
      if (lay_.t_color[i] > 0) clr_t[lay_.t_color[i]]++;
    for (int k = 1; k <= geo_.k_c; ++k) {
      set(idx("clrT", k), clr_t[k]);
      set(idx("dchiT", k), clr_t[k] > 0 ? 1 : 0);
    }
    set(idx("clrT", 0), geo_.t_t - lay_.used_t);
    set(idx("dchiT", 0), lay_.used_t < geo_.t_t ? 1 : 0);

    set("nint", in_.n);
    for (int i = 1; i <= geo_.t_f; ++i) {
      int c = lay_.f_color[i];
      set(idx("vF", i), c > 0 ? 1 : 0);
      set(idx("chiF", i), c);
      set(idx("chiFb", i, c), 1);
    }
    for (int i = 1; i <= geo_.t_f + 1; ++i) set(idx("eF", i), lay_.e_f[i]);
    std::vector<int> clr_f(geo_.c_f + 1, 0);
    for (int i = 1; i <= geo_.t_f; ++i)
      if (lay_.f_color[i] > 0) clr_f[lay_.f_color[i]]++;
    for (int c = 1; c <= geo_.c_f; ++c) {
      set(idx("clrF", c), clr_f[c]);
      set(idx("dchiF", c), clr_f[c] > 0 ? 1 : 0);
    }
    set(idx("clrF", 0), geo_.t_f - lay_.used_f);
    set(idx("dchiF", 0), lay_.used_f < geo_.t_f ? 1 : 0);
    for (int k = 1; k <= geo_.k_c; ++k)
      for (int i = 1; i <= geo_.t_t; ++i)
        if (lay_.t_color[i] == k && clr_f[geo_.tt_c + i] > 0)
          set(idx("bl", k, i), 1);
  }

  void fringe_vars() {
    ChemicalGraph s = suppress_hydrogens(*mol_);
    set("nG", s.num_atoms());
    std::vector<int> fc(spec_.catalog.size() + 1, 0);
    std::vector<std::string> aclf_keys = ac_lf_key_list(spec_);
    std::map<std::string, int> aclf;
    for (char x : {'C', 'T', 'F'}) {
      for (int i = 1; i <= slot_count(x); ++i) {
        int lv = local_of_slot(x, i);
        if (lv < 0) continue;
        int p = in_.catalog_id[lv];
        const FringeStats &st = in_.stats[lv];
        set(idx(std::string("dfr") + x, i, p), 1);
        fc[p]++;
        for (const auto &[key, cnt] : st.ac_lf) aclf[key] += cnt;
        set(idx(std::string("degex") + x, i), st.deg_r);
        set(idx(std::string("hydd") + x, i), st.hyddeg_r);
        set(idx(std::string("eled") + x, i), st.vion);
        set(idx(std::string("h") + x, i), st.ht_h);
      }
    }
    for (int p = 1; p <= spec_.catalog.size(); ++p) set(idx("fc", p), fc[p]);
    for (size_t q = 0; q < aclf_keys.size(); ++q) {
      auto it = aclf.find(aclf_keys[q]);
      set(idx("aclf", static_cast<int>(q + 1)), it == aclf.end() ? 0 : it->second);
    }
    // sigma: per used color, the internal vertex whose tree reaches highest
    for (int k = 1; k <= geo_.k_c; ++k) {
      int best = -1, best_h = -1;
      for (int i = 1; i <= geo_.t_t; ++i) {
        if (lay_.t_color[i] != k) continue;
        int lv = lay_.t_vert[i];
        int chain = 0;
        for (int j = 1; j <= geo_.t_f; ++j)
          if (lay_.f_color[j] == geo_.tt_c + i) ++chain;
        int h = chain > 0 ? chain + spec_.rho : in_.stats[lv].ht_h;
        if (h > best_h) {
          best_h = h;
          best = i;
        }
      }
      if (best > 0) set(idx("sig", k, best), 1);
    }
  }

  void degree_vars() {
    ChemicalGraph s = suppress_hydrogens(*mol_);
    auto sadj = s.adjacency();
    std::vector<int> dg_tally(5, 0), dgi_tally(5, 0);
    for (int i = 1; i <= geo_.t_c; ++i) {
      double ct = 0, tc = 0;
      for (int k : geo_.ib_plus(i))
        ct += emb_.path_internal[k].empty() ? 0 : 1;
      for (int k : geo_.ib_minus(i))
        tc += emb_.path_internal[k].empty() ? 0 : 1;
      set(idx("degCT", i), ct);
      set(idx("degTC", i), tc);
    }
    for (char x : {'C', 'T', 'F'}) {
      for (int i = 1; i <= slot_count(x); ++i) {
        int lv = local_of_slot(x, i);
        if (lv < 0) {
          set(idx(std::string("ddg") + x, i, 0), 1);
          set(idx(std::string("ddgi") + x, i, 0), 1);
          continue;
        }
        int sv = in_.suppressed_id[lv];
        int deg_sup = static_cast<int>(sadj[sv].size());
        int deg_int = static_cast<int>(in_.adj[lv].size());
        set(idx(std::string("deg") + x, i), deg_sup);
        set(idx(std::string("degi") + x, i), deg_int);
        int dh = deg_sup + in_.stats[lv].hyddeg_r;
        if (dh >= 1 && dh <= 4) {
          set(idx(std::string("ddg") + x, i, dh), 1);
          dg_tally[dh]++;
        }
        if (deg_int >= 0 && deg_int <= 4) {
          set(idx(std::string("ddgi") + x, i, deg_int), 1);
          if (deg_int >= 1) dgi_tally[deg_int]++;
        }
      }
    }
    for (int d = 1; d <= 4; ++d) {
      set(idx("dgv", d), dg_tally[d]);
      set(idx("dgi", d), dgi_tally[d]);
    }
  }

  void multiplicity_vars() {
    auto setm = [&](const std::string &b, const std::string &dfam, int i,
                    int m) {
      set(b, m);
      set(idx(dfam, i, m), 1);
    };
    for (int k = geo_.kt_c + 1; k <= geo_.m_c; ++k) {
      int m = emb_.edge_used[k]
                  ? in_.edge_mult(emb_.phi[geo_.tail[k]], emb_.phi[geo_.head[k]])
                  : 0;
      setm(idx("bC", k), "dbC", k, m);
    }
    std::vector<std::vector<int>> tallies(8, std::vector<int>(4, 0));
    // order: bdC bdT bdCT bdTC bdF bdCF bdTF
    for (int k = geo_.kt_c + 1; k <= geo_.m_c; ++k)
      if (emb_.edge_used[k])
        tallies[0][in_.edge_mult(emb_.phi[geo_.tail[k]], emb_.phi[geo_.head[k]])]++;
    for (int i = 2; i <= geo_.t_t; ++i) {
      int m = 0;
      if (lay_.e_t[i]) m = in_.edge_mult(lay_.t_vert[i - 1], lay_.t_vert[i]);
      setm(idx("btT", i), "dbT", i, m);
      if (m) tallies[1][m]++;
    }
    for (int k = 1; k <= geo_.k_c; ++k) {
      int mct = 0, mtc = 0;
      if (!emb_.path_internal[k].empty()) {
        mct = in_.edge_mult(emb_.phi[geo_.tail[k]], emb_.path_internal[k].front());
        mtc = in_.edge_mult(emb_.path_internal[k].back(), emb_.phi[geo_.head[k]]);
        tallies[2][mct]++;
        tallies[3][mtc]++;
      }
      setm(idx("bCT", k), "dbCT", k, mct);
      setm(idx("bTC", k), "dbTC", k, mtc);
    }
    for (int i = 2; i <= geo_.t_f; ++i) {
      int m = 0;
      if (lay_.e_f[i]) m = in_.edge_mult(lay_.f_vert[i - 1], lay_.f_vert[i]);
      setm(idx("btF", i), "dbF", i, m);
      if (m) tallies[4][m]++;
    }
    for (int c = 1; c <= geo_.c_f; ++c) {
      int m = 0;
      int fs = first_f_slot_of_color(c);
      if (fs > 0) {
        int host =
            c <= geo_.tt_c ? emb_.phi[c] : lay_.t_vert[c - geo_.tt_c];
        m = in_.edge_mult(host, lay_.f_vert[fs]);
        tallies[c <= geo_.tt_c ? 5 : 6][m]++;
      }
      setm(idx("bsF", c), "dbsF", c, m);
    }
    const char *fams[] = {"bdC", "bdT", "bdCT", "bdTC", "bdF", "bdCF", "bdTF"};
    for (int m = 1; m <= 3; ++m) {
      int total = 0;
      for (int f = 0; f < 7; ++f) {
        set(idx(fams[f], m), tallies[f][m]);
        total += tallies[f][m];
      }
      set(idx("bdint", m), total);
    }
    for (char x : {'C', 'T', 'F'})
      for (int i = 1; i <= slot_count(x); ++i) {
        int lv = local_of_slot(x, i);
        set(idx(std::string("bex") + x, i), lv < 0 ? 0 : in_.stats[lv].beta_r);
      }
    // vertex-level transfer values for first/last path vertices
    for (int i = 1; i <= geo_.t_t; ++i) {
      int k = lay_.t_color[i];
      double ct = 0, tc = 0;
      if (k > 0 && first_slot_of_color(k) == i) ct = a_.at(idx("bCT", k));
      if (k > 0 && last_slot_of_color(k) == i) tc = a_.at(idx("bTC", k));
      set(idx("btCTv", i), ct);
      set(idx("btTCv", i), tc);
    }
    for (int i = 1; i <= geo_.t_f; ++i) {
      int c = lay_.f_color[i];
      double cf = 0, tf = 0;
      if (c > 0 && first_f_slot_of_color(c) == i) {
        if (c <= geo_.tt_c) cf = a_.at(idx("bsF", c));
        else tf = a_.at(idx("bsF", c));
      }
      set(idx("btCF", i), cf);
      set(idx("btTF", i), tf);
    }
  }

  void element_vars() {
    auto code_of = [&](const std::string &sym) {
      for (size_t q = 0; q < spec_.lambda_int.size(); ++q)
        if (spec_.lambda_int[q] == sym) return static_cast<int>(q + 1);
      throw Error("element not in lambda_int: " + sym);
    };
    std::map<std::string, int> naint, naex;
    for (char x : {'C', 'T', 'F'}) {
      for (int i = 1; i <= slot_count(x); ++i) {
        int lv = local_of_slot(x, i);
        if (lv < 0) {
          set(idx(std::string("al") + x, i), 0);
          continue;
        }
        const std::string &sym = in_.element[lv];
        set(idx(std::string("al") + x, i), code_of(sym));
        set(el(std::string("dal") + x, i, sym), 1);
        naint[sym]++;
      }
      std::map<std::string, int> nx;
      for (int i = 1; i <= slot_count(x); ++i) {
        int lv = local_of_slot(x, i);
        if (lv < 0) continue;
        for (const auto &[sym, cnt] : in_.stats[lv].na_ex) nx[sym] += cnt;
      }
      for (const std::string &sym : spec_.lambda_ex) {
        auto it = nx.find(sym);
        int cnt = it == nx.end() ? 0 : it->second;
        set(std::string("naex") + x + "_" + sym, cnt);
        naex[sym] += cnt;
      }
    }
    std::set<std::string> lambda_all(spec_.lambda_int.begin(),
                                     spec_.lambda_int.end());
    lambda_all.insert(spec_.lambda_ex.begin(), spec_.lambda_ex.end());
    long mass = 0;
    long atoms = 0;
    for (const std::string &sym : lambda_all) {
      int ni = naint.count(sym) ? naint[sym] : 0;
      int ne = naex.count(sym) ? naex[sym] : 0;
      bool is_int = std::find(spec_.lambda_int.begin(), spec_.lambda_int.end(),
                              sym) != spec_.lambda_int.end();
      bool is_ex = std::find(spec_.lambda_ex.begin(), spec_.lambda_ex.end(),
                             sym) != spec_.lambda_ex.end();
      if (is_int) set("naint_" + sym, ni);
      if (is_ex) set("naex_" + sym, ne);
      int total = (is_int ? ni : 0) + (is_ex ? ne : 0);
      set("na_" + sym, total);
      mass += static_cast<long>(et_.mass10(sym)) * total;
      atoms += total;
    }
    set("Mass", static_cast<double>(mass));
    if (atoms > 0) set("msbar", static_cast<double>(mass) / atoms);
    set(idx("datm", static_cast<int>(atoms)), 1);
  }

  void bond_window_vars() {
    for (int k = 1; k <= geo_.k_c; ++k)
      for (int i = 2; i <= geo_.t_t; ++i) {
        if (lay_.t_color[i] != k || !lay_.e_t[i]) continue;
        int m = in_.edge_mult(lay_.t_vert[i - 1], lay_.t_vert[i]);
        if (m >= 2) set(idx("bdTk", k, i, m), 1);
      }
  }

  Vec theta_of(char x, int i, int l) const {
    int lv = local_of_slot(x, i);
    int w = l == 0 ? gnn_.config.k_node() : gnn_.config.k_hid;
    if (lv < 0) return Vec(w, 0.0);
    return l == 0 ? trace_.theta0[lv] : trace_.theta[l - 1][lv];
  }

  double wdot(int l, const Vec &th, int z) const {
    const Matrix &W = l == 0 ? gnn_.w0 : gnn_.w[l - 1];
    double s = 0.0;
    for (int zp = 0; zp < W.rows; ++zp) s += W.at(zp, z - 1) * th[zp];
    return s;
  }

  void network_vars() {
    const GnnConfig &cfg = gnn_.config;
    const int L = cfg.layers;
    for (char x : {'C', 'T', 'F'}) {
      for (int i = 1; i <= slot_count(x); ++i) {
        int lv = local_of_slot(x, i);
        for (int z = 1; z <= cfg.k_node(); ++z)
          set(idx(std::string("th") + x, i, z, 0),
              lv < 0 ? 0.0 : trace_.theta0[lv][z - 1]);
        for (int l = 1; l <= L; ++l)
          for (int z = 1; z <= cfg.k_hid; ++z) {
            double tau = lv < 0 ? 0.0 : trace_.tau[l - 1][lv][z - 1];
            double th = lv < 0 ? 0.0 : trace_.theta[l - 1][lv][z - 1];
            set(idx(std::string("tau") + x, i, z, l), tau);
            set(idx(std::string("th") + x, i, z, l), th);
            set(idx(std::string("dt") + x, i, z, l), tau < 0 ? 1 : 0);
          }
      }
    }
    for (int l = 0; l < L; ++l) {
      for (int z = 1; z <= cfg.k_hid; ++z) {
        for (int k = geo_.kt_c + 1; k <= geo_.m_c; ++k) {
          double m = 0, p = 0;
          if (emb_.edge_used[k]) {
            m = wdot(l, theta_of('C', geo_.tail[k], l), z);
            p = wdot(l, theta_of('C', geo_.head[k], l), z);
          }
          set(idx("thCm", k, z, l), m);
          set(idx("thCp", k, z, l), p);
        }
        for (int i = 1; i <= geo_.t_t; ++i) {
          set(idx("thTm", i, z, l),
              lay_.e_t[i] ? wdot(l, theta_of('T', i - 1, l), z) : 0.0);
          set(idx("thTp", i, z, l),
              lay_.e_t[i + 1] ? wdot(l, theta_of('T', i + 1, l), z) : 0.0);
        }
        for (int i = 1; i <= geo_.t_f; ++i) {
          set(idx("thFm", i, z, l),
              lay_.e_f[i] ? wdot(l, theta_of('F', i - 1, l), z) : 0.0);
          set(idx("thFp", i, z, l),
              lay_.e_f[i + 1] ? wdot(l, theta_of('F', i + 1, l), z) : 0.0);
        }
        for (int k = 1; k <= geo_.k_c; ++k) {
          int fs = first_slot_of_color(k), ls = last_slot_of_color(k);
          set(idx("thCTT", k, z, l),
              fs > 0 ? wdot(l, theta_of('T', fs, l), z) : 0.0);
          set(idx("thTCT", k, z, l),
              ls > 0 ? wdot(l, theta_of('T', ls, l), z) : 0.0);
        }
        for (int i = 1; i <= geo_.t_t; ++i) {
          int k = lay_.t_color[i];
          double ctc = 0, tcc = 0;
          if (k > 0 && first_slot_of_color(k) == i)
            ctc = wdot(l, theta_of('C', geo_.tail[k], l), z);
          if (k > 0 && last_slot_of_color(k) == i)
            tcc = wdot(l, theta_of('C', geo_.head[k], l), z);
          set(idx("thCTC", i, z, l), ctc);
          set(idx("thTCC", i, z, l), tcc);
          int fs = first_f_slot_of_color(geo_.tt_c + i);
          set(idx("thTFF", i, z, l),
              fs > 0 ? wdot(l, theta_of('F', fs, l), z) : 0.0);
        }
        for (int c = 1; c <= geo_.tt_c; ++c) {
          int fs = first_f_slot_of_color(c);
          set(idx("thCFF", c, z, l),
              fs > 0 ? wdot(l, theta_of('F', fs, l), z) : 0.0);
        }
        for (int i = 1; i <= geo_.t_f; ++i) {
          int c = lay_.f_color[i];
          double cfc = 0, tft = 0;
          if (c > 0 && first_f_slot_of_color(c) == i) {
            if (c <= geo_.tt_c) cfc = wdot(l, theta_of('C', c, l), z);
            else tft = wdot(l, theta_of('T', c - geo_.tt_c, l), z);
          }
          set(idx("thCFC", i, z, l), cfc);
          set(idx("thTFT", i, z, l), tft);
        }
      }
    }
    for (int p = 1; p <= cfg.k_c; ++p) {
      set(idx("tftr", p), trace_.tau_ftr[p - 1]);
      set(idx("thftr", p), trace_.theta_ftr[p - 1]);
      set(idx("dtftr", p), trace_.tau_ftr[p - 1] < 0 ? 1 : 0);
    }
    for (size_t h = 0; h < trace_.head_tau.size(); ++h)
      for (size_t j = 0; j < trace_.head_tau[h].size(); ++j) {
        set(idx("hdt" + std::to_string(h), static_cast<int>(j + 1)),
            trace_.head_tau[h][j]);
        set(idx("hda" + std::to_string(h), static_cast<int>(j + 1)),
            trace_.head_act[h][j]);
        set(idx("hdd" + std::to_string(h), static_cast<int>(j + 1)),
            trace_.head_tau[h][j] < 0 ? 1 : 0);
      }
    set("y", trace_.y);
  }

  const Specification &spec_;
  const GnnModel &gnn_;
  SchemeGeometry geo_;
  Interior in_;
  const ChemicalGraph *mol_ = nullptr;
  SchemeEmbedding emb_;
  Layout lay_;
  ForwardTrace trace_;
  const ElementTable &et_;
  Assignment a_;
};

}  // namespace

Assignment encode_witness(const ChemicalGraph &g, const Specification &spec,
                          const GnnModel &model) {
  const ElementTable &et = ElementTable::defaults();
  g.validate(et);
  return WitnessBuilder(g, spec, model).build();
}

// ---------------------------------------------------------------------------
// decoding

namespace {

double lookup(const Assignment &a, const std::string &name) {
  auto it = a.find(name);
  return it == a.end() ? 0.0 : it->second;
}

int as_int(const Assignment &a, const std::string &name, double tol) {
  double x = lookup(a, name);
  double r = std::round(x);
  if (std::fabs(x - r) > tol)
    throw Error("decode: variable " + name + " is not integral: " +
                std::to_string(x));
  return static_cast<int>(r);
}

}  // namespace

DecodeResult decode_solution(const Assignment &a, const Specification &spec,
                             const GnnModel &model, double tol) {
  (void)model;
  SchemeGeometry g = make_geometry(spec);
  ChemicalGraph out;

  // scheme slot -> atom index of the fringe root in `out`
  std::map<std::pair<char, int>, int> root_of;
  auto attach_fringe = [&](char x, int i) {
    int pick = 0;
    const int nf = spec.catalog.size();
    for (int p = 1; p <= nf; ++p) {
      std::string nm = idx(std::string("dfr") + x, i, p);
      if (a.count(nm) && as_int(a, nm, tol) == 1) {
        if (pick != 0)
          throw Error(strfmt("decode: two fringe trees selected at %c%d", x, i));
        pick = p;
      }
    }
    if (pick == 0)
      throw Error(strfmt("decode: no fringe tree selected at %c%d", x, i));
    const FringeTree &t = spec.catalog.entry(pick).tree;
    int base = out.num_atoms();
    for (int q = 0; q < t.size(); ++q) out.atoms.push_back(t.nodes[q]);
    for (int q = 1; q < t.size(); ++q)
      out.bonds.push_back(Bond{base + t.parent[q], base + q, t.mult[q]});
    root_of[{x, i}] = base;
  };

  for (int i = 1; i <= g.t_c; ++i) attach_fringe('C', i);
  std::vector<int> t_color(g.t_t + 1, 0), f_color(g.t_f + 1, 0);
  for (int i = 1; i <= g.t_t; ++i) {
    if (as_int(a, idx("vT", i), tol) != 1) continue;
    attach_fringe('T', i);
    t_color[i] = as_int(a, idx("chiT", i), tol);
    if (t_color[i] < 1 || t_color[i] > g.k_c)
      throw Error("decode: used T vertex without a path color");
  }
  for (int i = 1; i <= g.t_f; ++i) {
    if (as_int(a, idx("vF", i), tol) != 1) continue;
    attach_fringe('F', i);
    f_color[i] = as_int(a, idx("chiF", i), tol);
    if (f_color[i] < 1 || f_color[i] > g.c_f)
      throw Error("decode: used F vertex without a leaf-path color");
  }

  auto add_edge = [&](int u, int v, int m) {
    if (m < 1 || m > 3)
      throw Error(strfmt("decode: edge with multiplicity %d", m));
    out.bonds.push_back(Bond{u, v, m});
  };

  for (int k = 1; k <= g.m_c; ++k) {
    if (k <= g.kt_c) continue;  // ge2 edges are never used directly
    if (as_int(a, idx("eC", k), tol) == 1)
      add_edge(root_of.at({'C', g.tail[k]}), root_of.at({'C', g.head[k]}),
               as_int(a, idx("bC", k), tol));
  }
  for (int k = 1; k <= g.k_c; ++k) {
    std::vector<int> slots;
    for (int i = 1; i <= g.t_t; ++i)
      if (t_color[i] == k) slots.push_back(i);
    if (slots.empty()) continue;
    for (size_t q = 1; q < slots.size(); ++q)
      if (slots[q] != slots[q - 1] + 1)
        throw Error("decode: path color occupies non-contiguous T slots");
    add_edge(root_of.at({'C', g.tail[k]}), root_of.at({'T', slots.front()}),
             as_int(a, idx("bCT", k), tol));
    for (size_t q = 1; q < slots.size(); ++q)
      add_edge(root_of.at({'T', slots[q - 1]}), root_of.at({'T', slots[q]}),
               as_int(a, idx("btT", slots[q]), tol));
    add_edge(root_of.at({'T', slots.back()}), root_of.at({'C', g.head[k]}),
             as_int(a, idx("bTC", k), tol));
  }
  for (int c = 1; c <= g.c_f; ++c) {
    std::vector<int> slots;
    for (int i = 1; i <= g.t_f; ++i)
      if (f_color[i] == c) slots.push_back(i);
    if (slots.empty()) continue;
    for (size_t q = 1; q < slots.size(); ++q)
      if (slots[q] != slots[q - 1] + 1)
        throw Error("decode: leaf path occupies non-contiguous F slots");
    int host;
    if (c <= g.tt_c) {
      host = root_of.at({'C', c});
    } else {
      auto it = root_of.find({'T', c - g.tt_c});
      if (it == root_of.end())
        throw Error("decode: leaf path hangs on an unused T vertex");
      host = it->second;
    }
    add_edge(host, root_of.at({'F', slots.front()}),
             as_int(a, idx("bsF", c), tol));
    for (size_t q = 1; q < slots.size(); ++q)
      add_edge(root_of.at({'F', slots[q - 1]}), root_of.at({'F', slots[q]}),
               as_int(a, idx("btF", slots[q]), tol));
  }

  out.validate(ElementTable::defaults());
  DecodeResult res;
  res.molecule = std::move(out);
  res.y = lookup(a, "y");
  return res;
}

// ---------------------------------------------------------------------------
// graph-level admissibility checks

std::vector<std::string> check_spec_bounds(const ChemicalGraph &g,
                                           const Specification &spec,
                                           const SchemeEmbedding &emb) {
  std::vector<std::string> bad;
  SchemeGeometry geo = make_geometry(spec);
  Interior in = make_interior(g, spec);
  ChemicalGraph s = suppress_hydrogens(g);

  auto flag = [&](const std::string &msg) { bad.push_back(msg); };
  auto in_window = [&](const char *what, long v, long lb, long ub) {
    if (v < lb || v > ub)
      flag(strfmt("%s = %ld outside [%ld, %ld]", what, v, lb, ub));
  };

  in_window("n_int", in.n, spec.bounds.n_int_lb, spec.bounds.n_int_ub);
  in_window("n", s.num_atoms(), spec.bounds.n_lb, spec.bounds.n_star);

  std::map<std::string, long> na, naint;
  long hydro = 0;
  for (const Atom &at : s.atoms) {
    na[at.element]++;
    hydro += at.hydrogens;
  }
  na["H"] += hydro;
  for (int lv = 0; lv < in.n; ++lv) naint[in.element[lv]]++;
  for (const auto &[sym, cnt] : na) {
    IntPair w = spec.na_bound(sym);
    in_window(("na(" + sym + ")").c_str(), cnt, w.lb, w.ub);
  }
  for (const auto &[sym, cnt] : naint) {
    IntPair w = spec.na_int_bound(sym);
    in_window(("na_int(" + sym + ")").c_str(), cnt, w.lb, w.ub);
  }

  std::vector<long> fc(spec.catalog.size() + 1, 0);
  std::map<std::string, long> aclf;
  std::vector<long> dg(5, 0), dgi(5, 0);
  auto sadj = s.adjacency();
  for (int lv = 0; lv < in.n; ++lv) {
    fc[in.catalog_id[lv]]++;
    for (const auto &[key, cnt] : in.stats[lv].ac_lf) aclf[key] += cnt;
    int dh = static_cast<int>(sadj[in.suppressed_id[lv]].size()) +
             in.stats[lv].hyddeg_r;
    if (dh > 4) flag(strfmt("interior vertex with degree %d > 4", dh));
    else dg[dh]++;
    dgi[std::min<size_t>(4, in.adj[lv].size())]++;
  }
  for (int p = 1; p <= spec.catalog.size(); ++p) {
    IntPair w = spec.fc_bound(p);
    in_window(strfmt("fc(%d)", p).c_str(), fc[p], w.lb, w.ub);
  }
  for (const std::string &key : ac_lf_key_list(spec)) {
    IntPair w = spec.ac_lf_bound(key);
    auto it = aclf.find(key);
    in_window(("ac_lf(" + key + ")").c_str(), it == aclf.end() ? 0 : it->second,
              w.lb, w.ub);
  }
  for (int d = 1; d <= 4; ++d) {
    in_window(strfmt("dg(%d)", d).c_str(), dg[d], spec.bounds.dg[d - 1].lb,
              spec.bounds.dg[d - 1].ub);
    in_window(strfmt("dg_int(%d)", d).c_str(), dgi[d],
              spec.bounds.dg_int[d - 1].lb, spec.bounds.dg_int[d - 1].ub);
  }

  // per-seed-vertex element and fringe restrictions
  for (int i = 1; i <= geo.t_c; ++i) {
    int lv = emb.phi[i];
    auto allowed = spec.allowed_elements(i);
    if (std::find(allowed.begin(), allowed.end(), in.element[lv]) ==
        allowed.end())
      flag(strfmt("element at seed vertex %d not allowed", i));
    auto fr = spec.fringe_set(i);
    if (std::find(fr.begin(), fr.end(), in.catalog_id[lv]) == fr.end())
      flag(strfmt("fringe tree at seed vertex %d not allowed", i));
  }

  // per-edge windows
  std::map<int, std::vector<int>> chains_at;  // host local vertex -> chain sizes
  for (const auto &ch : emb.chains)
    chains_at[ch.host].push_back(static_cast<int>(ch.verts.size()));
  auto tree_height = [&](int lv) {
    auto it = chains_at.find(lv);
    if (it == chains_at.end() || it->second.empty()) return in.stats[lv].ht_h;
    int best = 0;
    for (int q : it->second) best = std::max(best, q + spec.rho);
    return best;
  };
  for (int k = 1; k <= geo.k_c; ++k) {
    const SeedEdge &e = spec.seed.edges[k - 1];
    const auto &internal = emb.path_internal[k];
    int length = emb.edge_used[k] ? 1 : static_cast<int>(internal.size()) + 1;
    if (!emb.edge_used[k] && internal.empty()) {
      flag(strfmt("color edge %d unrealized", k));
      continue;
    }
    in_window(strfmt("l(%d)", k).c_str(), length, e.l_lb, e.l_ub);
    long bl = 0;
    int max_h = -1;
    std::vector<int> mult_count(4, 0);
    for (int vtx : internal) {
      if (chains_at.count(vtx)) ++bl;
      max_h = std::max(max_h, tree_height(vtx));
    }
    if (!internal.empty()) {
      in_window(strfmt("bl(%d)", k).c_str(), bl, e.bl_lb, e.bl_ub);
      for (int vtx : internal) {
        int h = tree_height(vtx);
        if (h > e.ch_ub) flag(strfmt("ch(%d) above upper bound", k));
      }
      if (max_h < e.ch_lb) flag(strfmt("ch(%d) below lower bound", k));
      int prev = emb.phi[geo.tail[k]];
      for (size_t q = 0; q <= internal.size(); ++q) {
        int cur = q < internal.size() ? internal[q] : emb.phi[geo.head[k]];
        mult_count[in.edge_mult(prev, cur)]++;
        prev = cur;
      }
      in_window(strfmt("bd2(%d)", k).c_str(), mult_count[2], e.bd2_lb, e.bd2_ub);
      in_window(strfmt("bd3(%d)", k).c_str(), mult_count[3], e.bd3_lb, e.bd3_ub);
    }
  }
  for (int k = geo.kt_c + 1; k <= geo.m_c; ++k) {
    if (geo.cls[k] == EdgeClass::GE1) continue;
    const SeedEdge &e = spec.seed.edges[k - 1];
    if (!emb.edge_used[k]) continue;
    int m = in.edge_mult(emb.phi[geo.tail[k]], emb.phi[geo.head[k]]);
    in_window(strfmt("bd2(%d)", k).c_str(), m == 2 ? 1 : 0, e.bd2_lb, e.bd2_ub);
    in_window(strfmt("bd3(%d)", k).c_str(), m == 3 ? 1 : 0, e.bd3_lb, e.bd3_ub);
  }
  for (int i = 1; i <= geo.t_c; ++i) {
    const SeedVertex &sv = spec.seed.vertices[i - 1];
    int h = tree_height(emb.phi[i]);
    in_window(strfmt("ch(u%d)", i).c_str(), h, sv.ch_lb, sv.ch_ub);
    if (i > geo.tt_c && chains_at.count(emb.phi[i]))
      flag(strfmt("leaf path rooted at u%d with bl_ub = 0", i));
  }
  return bad;
}

// ---------------------------------------------------------------------------
// exhaustive micro-instance oracle

OracleResult brute_force_feasibility(const Specification &spec,
                                     const GnnModel &model, double lo, double hi,
                                     const OracleCaps &caps) {
  spec.validate();
  if (spec.bounds.n_int_ub > caps.max_n_int_ub)
    throw Error("oracle: n_int_ub above enumeration cap");
  if (spec.catalog.size() > caps.max_catalog)
    throw Error("oracle: catalog above enumeration cap");
  if (static_cast<int>(spec.lambda_int.size()) > caps.max_lambda_int)
    throw Error("oracle: lambda_int above enumeration cap");

  const ElementTable &et = ElementTable::defaults();
  SchemeGeometry geo = make_geometry(spec);
  OracleResult out;

  // slot bookkeeping during enumeration, all local (0-based) slot ids
  struct Slot {
    char kind;  // 'C', 'T', 'F'
    int seed_vertex = 0;  // for C
    int color = 0;        // path color or chain color
  };

  std::vector<int> route_len(geo.k_c + 1, 0);  // internal vertices per color
  std::vector<char> edge_used(geo.m_c + 1, 0);

  // assemble slots + edges for the current structure, then enumerate fringes
  auto structure_stage = [&]() {
    if (out.feasible) return;
    std::vector<Slot> slots;
    std::vector<std::pair<int, int>> edges;
    std::vector<int> seed_slot(geo.t_c + 1, -1);
    for (int i = 1; i <= geo.t_c; ++i) {
      seed_slot[i] = static_cast<int>(slots.size());
      slots.push_back({'C', i, 0});
    }
    for (int k = 1; k <= geo.m_c; ++k)
      if (edge_used[k])
        edges.emplace_back(seed_slot[geo.tail[k]], seed_slot[geo.head[k]]);
    std::vector<std::vector<int>> path_slots(geo.k_c + 1);
    for (int k = 1; k <= geo.k_c; ++k) {
      int prev = seed_slot[geo.tail[k]];
      for (int q = 0; q < route_len[k]; ++q) {
        int sid = static_cast<int>(slots.size());
        slots.push_back({'T', 0, k});
        path_slots[k].push_back(sid);
        edges.emplace_back(prev, sid);
        prev = sid;
      }
      if (route_len[k] > 0) edges.emplace_back(prev, seed_slot[geo.head[k]]);
    }
    // chain hosts: seed vertices 1..tt_c and every T slot
    std::vector<int> hosts;
    for (int i = 1; i <= geo.tt_c; ++i) hosts.push_back(seed_slot[i]);
    for (int k = 1; k <= geo.k_c; ++k)
      for (int sid : path_slots[k]) hosts.push_back(sid);

    int base_int = static_cast<int>(slots.size());
    // enumerate chain lengths per host (0 = none), total <= t_f and n_int window
    std::vector<int> chain_len(hosts.size(), 0);
    std::function<void(size_t, int)> chains_rec = [&](size_t hidx, int total) {
      if (out.feasible) return;
      int n_int = base_int + total;
      if (n_int > spec.bounds.n_int_ub || total > geo.t_f) return;
      if (hidx == hosts.size()) {
        if (n_int < spec.bounds.n_int_lb) return;
        // materialize chain slots
        std::vector<Slot> all = slots;
        std::vector<std::pair<int, int>> all_edges = edges;
        std::vector<char> chain_end(base_int + total, 0);
        for (size_t hq = 0; hq < hosts.size(); ++hq) {
          int prev = hosts[hq];
          for (int q = 0; q < chain_len[hq]; ++q) {
            int sid = static_cast<int>(all.size());
            all.push_back({'F', 0, 0});
            all_edges.emplace_back(prev, sid);
            prev = sid;
          }
          if (chain_len[hq] > 0) chain_end[prev] = 1;
        }
        // fringe + multiplicity enumeration
        const int n = static_cast<int>(all.size());
        std::vector<std::vector<int>> adj(n);
        for (auto &[u, v] : all_edges) {
          adj[u].push_back(v);
          adj[v].push_back(u);
        }
        std::vector<int> fringe(n, 0);
        std::function<void(int)> fr_rec = [&](int sid) {
          if (out.feasible) return;
          if (sid == n) {
            // per-slot required interior bond sums
            std::vector<int> need(n);
            for (int s2 = 0; s2 < n; ++s2) {
              const CatalogEntry &e = spec.catalog.entry(fringe[s2]);
              need[s2] = et.valence(e.tree.root_element()) + e.stats.vion -
                         e.stats.beta_r;
              if (need[s2] < static_cast<int>(adj[s2].size()) ||
                  need[s2] > 3 * static_cast<int>(adj[s2].size()))
                return;
            }
            std::vector<int> mult(all_edges.size(), 0);
            std::function<void(size_t)> mu_rec = [&](size_t eidx) {
              if (out.feasible) return;
              if (eidx == all_edges.size()) {
                for (int s2 = 0; s2 < n; ++s2)
                  if (need[s2] != 0) return;
                // build the molecule
                ChemicalGraph mol;
                std::vector<int> root(n);
                for (int s2 = 0; s2 < n; ++s2) {
                  const FringeTree &t = spec.catalog.entry(fringe[s2]).tree;
                  int base = mol.num_atoms();
                  for (int q = 0; q < t.size(); ++q)
                    mol.atoms.push_back(t.nodes[q]);
                  for (int q = 1; q < t.size(); ++q)
                    mol.bonds.push_back(
                        Bond{base + t.parent[q], base + q, t.mult[q]});
                  root[s2] = base;
                }
                for (size_t e2 = 0; e2 < all_edges.size(); ++e2)
                  mol.bonds.push_back(Bond{root[all_edges[e2].first],
                                           root[all_edges[e2].second],
                                           mult[e2]});
                try {
                  mol.validate(et);
                  TwoLayerDecomposition d = decompose(mol, spec.rho);
                  if (static_cast<int>(d.interior.size()) != n) return;
                  auto emb = find_embedding(mol, spec);
                  if (!emb) return;
                  if (!check_spec_bounds(mol, spec, *emb).empty()) return;
                  out.candidates++;
                  double y = forward(mol, model, spec.catalog, et).y;
                  if (y >= lo && y <= hi) {
                    out.feasible = true;
                    out.witness = mol;
                    out.y = y;
                  }
                } catch (const Error &) {
                  return;
                }
                return;
              }
              auto [u2, v2] = all_edges[eidx];
              for (int m = 1; m <= 3 && !out.feasible; ++m) {
                if (need[u2] < m || need[v2] < m) continue;
                need[u2] -= m;
                need[v2] -= m;
                mult[eidx] = m;
                mu_rec(eidx + 1);
                need[u2] += m;
                need[v2] += m;
              }
            };
            mu_rec(0);
            return;
          }
          const Slot &sl = all[sid];
          std::vector<int> choices;
          if (sl.kind == 'C') {
            choices = spec.fringe_set(sl.seed_vertex);
          } else {
            choices.resize(spec.catalog.size());
            for (int p = 0; p < spec.catalog.size(); ++p) choices[p] = p + 1;
          }
          for (int p : choices) {
            const CatalogEntry &e = spec.catalog.entry(p);
            if (chain_end[sid] == 0 || e.stats.ht_h == spec.rho) {
              // non-end slots take any height; chain ends need height rho
              if (sl.kind == 'C' &&
                  static_cast<int>(adj[sid].size()) <= 1 &&
                  e.stats.ht_h != spec.rho)
                continue;
              fringe[sid] = p;
              fr_rec(sid + 1);
              if (out.feasible) return;
            }
          }
        };
        fr_rec(0);
        return;
      }
      for (int q = 0; q <= geo.t_f - total && !out.feasible; ++q) {
        chain_len[hidx] = q;
        chains_rec(hidx + 1, total + q);
      }
      chain_len[hidx] = 0;
    };
    chains_rec(0, 0);
  };

  // enumerate optional edges and route lengths
  std::function<void(int)> pick_edges = [&](int k) {
    if (out.feasible) return;
    if (k > geo.m_c) {
      std::function<void(int)> lens = [&](int kk) {
        if (out.feasible) return;
        if (kk > geo.k_c) {
          structure_stage();
          return;
        }
        const SeedEdge &e = spec.seed.edges[kk - 1];
        if (edge_used[kk]) {  // ge1 used directly
          route_len[kk] = 0;
          lens(kk + 1);
          return;
        }
        int lo_q = std::max(2, e.l_lb) - 1;
        int hi_q = e.l_ub - 1;
        for (int q = lo_q; q <= hi_q && !out.feasible; ++q) {
          int total = 0;
          for (int k2 = 1; k2 < kk; ++k2) total += route_len[k2];
          if (total + q > geo.t_t) break;
          route_len[kk] = q;
          lens(kk + 1);
        }
        route_len[kk] = 0;
      };
      lens(1);
      return;
    }
    switch (geo.cls[k]) {
      case EdgeClass::EQ1:
        edge_used[k] = 1;
        pick_edges(k + 1);
        edge_used[k] = 0;
        break;
      case EdgeClass::GE2:
        pick_edges(k + 1);
        break;
      case EdgeClass::GE1:
        edge_used[k] = 1;
        pick_edges(k + 1);
        edge_used[k] = 0;
        if (!out.feasible) pick_edges(k + 1);
        break;
      case EdgeClass::ZeroOne:
        edge_used[k] = 1;
        pick_edges(k + 1);
        edge_used[k] = 0;
        if (!out.feasible) pick_edges(k + 1);
        break;
    }
  };
  pick_edges(1);
  return out;
}

}  // namespace molkit
