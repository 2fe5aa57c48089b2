//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#include "molkit/chemgraph.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "molkit/common.hpp"

namespace molkit {

std::vector<std::vector<int>> ChemicalGraph::adjacency() const {
  std::vector<std::vector<int>> adj(atoms.size());
  for (const Bond &b : bonds) {
    adj[b.u].push_back(b.v);
    adj[b.v].push_back(b.u);
  }
  return adj;
}

int ChemicalGraph::degree(int v) const {
  int d = 0;
  for (const Bond &b : bonds)
    if (b.u == v || b.v == v) ++d;
  return d;
}

int ChemicalGraph::beta_sum(int v) const {
  int s = 0;
  for (const Bond &b : bonds)
    if (b.u == v || b.v == v) s += b.mult;
  return s;
}

void ChemicalGraph::validate(const ElementTable &et) const {
  const int n = num_atoms();
  if (n == 0) throw Error("empty molecule");
  std::set<std::pair<int, int>> seen;
  for (const Bond &b : bonds) {
    if (b.u < 0 || b.u >= n || b.v < 0 || b.v >= n)
      throw Error(strfmt("bond endpoint out of range: %d-%d", b.u, b.v));
    if (b.u == b.v) throw Error(strfmt("self-loop at atom %d", b.u));
    if (b.mult < 1 || b.mult > 3)
      throw Error(strfmt("bond multiplicity %d not in [1,3]", b.mult));
    auto key = std::minmax(b.u, b.v);
    if (!seen.insert(key).second)
      throw Error(strfmt("parallel bond %d-%d", b.u, b.v));
  }
  for (int v = 0; v < n; ++v) {
    const Atom &a = atoms[v];
    if (!et.contains(a.element)) throw Error("unknown element: " + a.element);
    if (a.hydrogens < 0) throw Error("negative hydrogen count");
    if (a.ion < -3 || a.ion > 3)
      throw Error(strfmt("ion-valence %d out of [-3,3]", a.ion));
    if (a.element == "H") continue;  // explicit hydrogens checked via neighbors
    int expect = et.valence(a.element) + a.ion;
    if (beta_sum(v) + a.hydrogens != expect)
      throw Error(strfmt("valence violation at atom %d (%s): %d + %dH != %d", v,
                         a.element.c_str(), beta_sum(v), a.hydrogens, expect));
  }
  // connectivity of the suppressed graph
  ChemicalGraph s = suppress_hydrogens(*this);
  if (s.num_atoms() > 1) {
    auto adj = s.adjacency();
    std::vector<bool> vis(s.num_atoms(), false);
    std::queue<int> q;
    q.push(0);
    vis[0] = true;
    int cnt = 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int w : adj[u])
        if (!vis[w]) {
          vis[w] = true;
          ++cnt;
          q.push(w);
        }
    }
    if (cnt != s.num_atoms()) throw Error("suppressed graph is disconnected");
  }
}

bool ChemicalGraph::structurally_equal(const ChemicalGraph &other) const {
  if (atoms.size() != other.atoms.size()) return false;
  for (size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].element != other.atoms[i].element ||
        atoms[i].hydrogens != other.atoms[i].hydrogens ||
        atoms[i].ion != other.atoms[i].ion)
      return false;
  }
  auto key = [](const Bond &b) {
    auto [lo, hi] = std::minmax(b.u, b.v);
    return std::tuple<int, int, int>(lo, hi, b.mult);
  };
  std::multiset<std::tuple<int, int, int>> a, b;
  for (const Bond &x : bonds) a.insert(key(x));
  for (const Bond &x : other.bonds) b.insert(key(x));
  return a == b;
}

ChemicalGraph suppress_hydrogens(const ChemicalGraph &g) {
  std::vector<int> remap(g.atoms.size(), -1);
  ChemicalGraph out;
  for (int v = 0; v < g.num_atoms(); ++v) {
    if (g.atoms[v].element == "H") continue;
    remap[v] = out.num_atoms();
    out.atoms.push_back(g.atoms[v]);
  }
  if (out.atoms.empty()) throw Error("no heavy atoms");
  for (const Bond &b : g.bonds) {
    bool hu = g.atoms[b.u].element == "H";
    bool hv = g.atoms[b.v].element == "H";
    if (hu && hv) continue;
    if (hu || hv) {
      int heavy = hu ? b.v : b.u;
      out.atoms[remap[heavy]].hydrogens += 1;
      continue;
    }
    out.bonds.push_back(Bond{remap[b.u], remap[b.v], b.mult});
  }
  return out;
}

std::vector<std::optional<int>> vertex_heights(const ChemicalGraph &g) {
  const int n = g.num_atoms();
  if (n < 2) throw Error("height undefined for isolated vertex");
  auto adj = g.adjacency();
  std::vector<int> deg(n);
  for (int v = 0; v < n; ++v) deg[v] = static_cast<int>(adj[v].size());

  std::vector<std::optional<int>> ht(n);
  std::vector<bool> removed(n, false);
  int round = 0;
  while (true) {
    std::vector<int> leaves;
    for (int v = 0; v < n; ++v)
      if (!removed[v] && deg[v] <= 1) leaves.push_back(v);
    if (leaves.empty()) break;
    for (int v : leaves) {
      ht[v] = round;
      removed[v] = true;
    }
    for (int v : leaves)
      for (int w : adj[v])
        if (!removed[w]) --deg[w];
    ++round;
  }
  // non-tree vertices adjacent to a tree vertex
  for (int v = 0; v < n; ++v) {
    if (removed[v]) continue;
    int best = -1;
    for (int w : adj[v])
      if (removed[w] && ht[w]) best = std::max(best, *ht[w]);
    if (best >= 0) ht[v] = best + 1;
  }
  return ht;
}

TwoLayerDecomposition decompose(const ChemicalGraph &g, int rho) {
  if (rho < 1) throw Error("branch-parameter must be >= 1");
  ChemicalGraph s = suppress_hydrogens(g);
  if (s.num_atoms() < 2) throw Error("height undefined for isolated vertex");

  // recompute tree/non-tree status alongside heights
  const int n = s.num_atoms();
  auto adj = s.adjacency();
  std::vector<int> deg(n);
  for (int v = 0; v < n; ++v) deg[v] = static_cast<int>(adj[v].size());
  std::vector<bool> removed(n, false);
  std::vector<int> treeht(n, -1);
  int round = 0;
  while (true) {
    std::vector<int> leaves;
    for (int v = 0; v < n; ++v)
      if (!removed[v] && deg[v] <= 1) leaves.push_back(v);
    if (leaves.empty()) break;
    for (int v : leaves) {
      treeht[v] = round;
      removed[v] = true;
    }
    for (int v : leaves)
      for (int w : adj[v])
        if (!removed[w]) --deg[w];
    ++round;
  }

  TwoLayerDecomposition d;
  d.rho = rho;
  d.is_interior.assign(n, false);
  for (int v = 0; v < n; ++v) {
    bool exterior = removed[v] && treeht[v] < rho;
    d.is_interior[v] = !exterior;
    (exterior ? d.exterior : d.interior).push_back(v);
  }
  if (d.interior.empty()) throw Error("graph entirely exterior");
  for (const Bond &b : s.bonds)
    if (d.is_interior[b.u] && d.is_interior[b.v])
      d.interior_edges.emplace_back(std::min(b.u, b.v), std::max(b.u, b.v));
  std::sort(d.interior_edges.begin(), d.interior_edges.end());
  return d;
}

std::vector<std::vector<int>> FringeTree::children() const {
  std::vector<std::vector<int>> ch(nodes.size());
  for (int i = 1; i < size(); ++i) ch[parent[i]].push_back(i);
  return ch;
}

std::string adjacency_config_key(const std::string &a, const std::string &b, int m) {
  const std::string &lo = a <= b ? a : b;
  const std::string &hi = a <= b ? b : a;
  return lo + "-" + hi + "-" + std::to_string(m);
}

FringeStats FringeTree::stats(const ElementTable &et) const {
  (void)et;
  FringeStats st;
  auto ch = children();
  st.n_h = size() - 1;
  st.deg_r = static_cast<int>(ch[0].size());
  st.hyddeg_r = nodes[0].hydrogens;
  st.vion = nodes[0].ion;
  st.beta_r = nodes[0].hydrogens;
  for (int c : ch[0]) st.beta_r += mult[c];

  std::vector<int> depth(size(), 0);
  for (int i = 1; i < size(); ++i) {
    depth[i] = depth[parent[i]] + 1;
    st.ht_h = std::max(st.ht_h, depth[i]);
    st.na_ex[nodes[i].element] += 1;
    if (nodes[i].hydrogens > 0) st.na_ex["H"] += nodes[i].hydrogens;
  }
  if (nodes[0].hydrogens > 0) st.na_ex["H"] += nodes[0].hydrogens;
  for (int i = 1; i < size(); ++i) {
    if (!ch[i].empty()) continue;  // leaf == non-root vertex with no children
    st.ac_lf[adjacency_config_key(nodes[parent[i]].element, nodes[i].element,
                                  mult[i])] += 1;
  }
  return st;
}

std::string canonical_code(const FringeTree &t) {
  auto ch = t.children();
  std::function<std::string(int)> rec = [&](int v) -> std::string {
    std::vector<std::string> parts;
    for (int c : ch[v]) parts.push_back(rec(c));
    std::sort(parts.begin(), parts.end());
    std::string s = "(" + t.nodes[v].element + ":" +
                    std::to_string(t.nodes[v].hydrogens) + ":" +
                    std::to_string(t.nodes[v].ion) + ":" +
                    std::to_string(v == 0 ? 0 : t.mult[v]);
    for (const std::string &p : parts) s += p;
    s += ")";
    return s;
  };
  return rec(0);
}

namespace {

bool subtree_match(const FringeTree &a, int va, const FringeTree &b, int vb,
                   const std::vector<std::vector<int>> &ca,
                   const std::vector<std::vector<int>> &cb) {
  if (a.nodes[va].element != b.nodes[vb].element ||
      a.nodes[va].hydrogens != b.nodes[vb].hydrogens ||
      a.nodes[va].ion != b.nodes[vb].ion)
    return false;
  if (va != 0 && a.mult[va] != b.mult[vb]) return false;
  const auto &xs = ca[va];
  const auto &ys = cb[vb];
  if (xs.size() != ys.size()) return false;
  std::vector<int> perm(ys.begin(), ys.end());
  std::sort(perm.begin(), perm.end());
  do {
    bool ok = true;
    for (size_t i = 0; i < xs.size() && ok; ++i)
      ok = subtree_match(a, xs[i], b, perm[i], ca, cb);
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

}  // namespace

bool rooted_isomorphic(const FringeTree &a, const FringeTree &b) {
  if (a.size() != b.size()) return false;
  auto ca = a.children(), cb = b.children();
  return subtree_match(a, 0, b, 0, ca, cb);
}

std::vector<FringeTree> extract_fringe_trees(const TwoLayerDecomposition &d,
                                             const ChemicalGraph &suppressed) {
  auto adj = suppressed.adjacency();
  std::map<std::pair<int, int>, int> multi;
  for (const Bond &b : suppressed.bonds)
    multi[std::minmax(b.u, b.v)] = b.mult;

  std::vector<FringeTree> out;
  out.reserve(d.interior.size());
  for (int root : d.interior) {
    FringeTree t;
    t.nodes.push_back(suppressed.atoms[root]);
    t.parent.push_back(-1);
    t.mult.push_back(0);
    // BFS into exterior components hanging at the root
    std::vector<std::pair<int, int>> frontier;  // (suppressed id, tree id)
    frontier.emplace_back(root, 0);
    std::set<int> visited{root};
    while (!frontier.empty()) {
      auto [sv, tv] = frontier.back();
      frontier.pop_back();
      for (int w : adj[sv]) {
        if (d.is_interior[w] || visited.count(w)) continue;
        visited.insert(w);
        t.nodes.push_back(suppressed.atoms[w]);
        t.parent.push_back(tv);
        t.mult.push_back(multi.at(std::minmax(sv, w)));
        frontier.emplace_back(w, t.size() - 1);
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// molecule I/O

ChemicalGraph molecule_from_json_text(const std::string &text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception &e) {
    throw Error("molecule JSON parse error: " + std::string(e.what()));
  }
  ChemicalGraph g;
  for (const auto &a : j.at("atoms")) {
    Atom at;
    at.element = a.at("el").get<std::string>();
    at.hydrogens = a.value("h", 0);
    at.ion = a.value("ion", 0);
    g.atoms.push_back(at);
  }
  for (const auto &b : j.value("bonds", nlohmann::json::array())) {
    g.bonds.push_back(Bond{b.at("u").get<int>(), b.at("v").get<int>(),
                           b.value("m", 1)});
  }
  return g;
}

std::string molecule_to_json_text(const ChemicalGraph &g) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const Atom &a : g.atoms)
    atoms.push_back({{"el", a.element}, {"h", a.hydrogens}, {"ion", a.ion}});
  nlohmann::json bonds = nlohmann::json::array();
  for (const Bond &b : g.bonds)
    bonds.push_back({{"u", b.u}, {"v", b.v}, {"m", b.mult}});
  nlohmann::json j{{"atoms", atoms}, {"bonds", bonds}};
  return j.dump(2) + "\n";
}

ChemicalGraph molecule_from_sdf_text(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  if (lines.size() < 4) throw Error("SDF: truncated header");

  const std::string &counts = lines[3];
  int natoms = 0, nbonds = 0;
  try {
    natoms = std::stoi(counts.substr(0, 3));
    nbonds = std::stoi(counts.substr(3, 3));
  } catch (const std::exception &) {
    throw Error("SDF line 4: malformed counts line");
  }
  if (static_cast<size_t>(4 + natoms + nbonds) > lines.size())
    throw Error(strfmt("SDF line 4: counts line announces %d atoms / %d bonds "
                       "but file is shorter",
                       natoms, nbonds));

  ChemicalGraph g;
  for (int i = 0; i < natoms; ++i) {
    const std::string &l = lines[4 + i];
    if (l.size() < 34) throw Error(strfmt("SDF line %d: short atom line", 5 + i));
    std::string sym = l.substr(31, 3);
    sym.erase(sym.find_last_not_of(' ') + 1);
    sym.erase(0, sym.find_first_not_of(' '));
    if (sym.empty()) throw Error(strfmt("SDF line %d: missing element", 5 + i));
    g.atoms.push_back(Atom{sym, 0, 0});
  }
  for (int i = 0; i < nbonds; ++i) {
    const std::string &l = lines[4 + natoms + i];
    int lineno = 5 + natoms + i;
    if (l.size() < 9) throw Error(strfmt("SDF line %d: short bond line", lineno));
    int u, v, m;
    try {
      u = std::stoi(l.substr(0, 3));
      v = std::stoi(l.substr(3, 3));
      m = std::stoi(l.substr(6, 3));
    } catch (const std::exception &) {
      throw Error(strfmt("SDF line %d: malformed bond line", lineno));
    }
    if (m < 1 || m > 3)
      throw Error(strfmt("SDF line %d: unsupported bond order %d", lineno, m));
    if (u < 1 || u > natoms || v < 1 || v > natoms)
      throw Error(strfmt("SDF line %d: bond references atom out of range", lineno));
    g.bonds.push_back(Bond{u - 1, v - 1, m});
  }
  return g;
}

std::string molecule_to_sdf_text(const ChemicalGraph &g) {
  // explicit hydrogens are expanded into their own atom lines
  std::vector<std::pair<std::string, int>> atoms;  // (element, ion)
  std::vector<std::tuple<int, int, int>> bonds;
  for (const Atom &a : g.atoms) atoms.emplace_back(a.element, a.ion);
  for (const Bond &b : g.bonds) bonds.emplace_back(b.u, b.v, b.mult);
  for (int v = 0; v < g.num_atoms(); ++v) {
    for (int k = 0; k < g.atoms[v].hydrogens; ++k) {
      atoms.emplace_back("H", 0);
      bonds.emplace_back(v, static_cast<int>(atoms.size()) - 1, 1);
    }
  }
  std::ostringstream out;
  out << "molkit\n\n\n";
  out << strfmt("%3d%3d  0  0  0  0  0  0  0  0999 V2000\n",
                static_cast<int>(atoms.size()), static_cast<int>(bonds.size()));
  for (auto &[el, ion] : atoms)
    out << strfmt("%10.4f%10.4f%10.4f %-3s 0  0  0  0  0  0  0  0  0  0  0  0\n",
                  0.0, 0.0, 0.0, el.c_str());
  for (auto &[u, v, m] : bonds) out << strfmt("%3d%3d%3d  0\n", u + 1, v + 1, m);
  out << "M  END\n$$$$\n";
  return out.str();
}

namespace {

bool ends_with(const std::string &s, const std::string &suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

ChemicalGraph read_molecule(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open molecule file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  if (ends_with(path, ".json")) return molecule_from_json_text(ss.str());
  return molecule_from_sdf_text(ss.str());
}

void write_molecule(const ChemicalGraph &g, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write molecule file: " + path);
  out << (ends_with(path, ".json") ? molecule_to_json_text(g)
                                   : molecule_to_sdf_text(g));
}

}  // namespace molkit
