//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#include "molkit/spec.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "molkit/common.hpp"

namespace molkit {

std::string edge_class_name(EdgeClass c) {
  switch (c) {
    case EdgeClass::GE2: return "ge2";
    case EdgeClass::GE1: return "ge1";
    case EdgeClass::ZeroOne: return "zero_one";
    case EdgeClass::EQ1: return "eq1";
  }
  return "?";
}

EdgeClass edge_class_from_name(const std::string &s) {
  if (s == "ge2") return EdgeClass::GE2;
  if (s == "ge1") return EdgeClass::GE1;
  if (s == "zero_one") return EdgeClass::ZeroOne;
  if (s == "eq1") return EdgeClass::EQ1;
  throw ValidationError("class", "unknown edge class: " + s);
}

int SeedGraph::ttilde_c() const {
  int n = 0;
  for (const SeedVertex &v : vertices) n += v.bl_ub > 0 ? 1 : 0;
  return n;
}

int SeedGraph::ktilde_c() const {
  int n = 0;
  for (const SeedEdge &e : edges) n += e.cls == EdgeClass::GE2 ? 1 : 0;
  return n;
}

int SeedGraph::k_c() const {
  int n = 0;
  for (const SeedEdge &e : edges)
    n += (e.cls == EdgeClass::GE2 || e.cls == EdgeClass::GE1) ? 1 : 0;
  return n;
}

void SeedGraph::validate() const {
  if (vertices.empty()) throw ValidationError("seed.vertices", "empty seed graph");
  for (size_t i = 1; i < vertices.size(); ++i)
    if (vertices[i - 1].bl_ub < vertices[i].bl_ub)
      throw ValidationError("seed.vertices",
                            "vertices with bl_ub=1 must precede bl_ub=0");
  for (const SeedVertex &v : vertices) {
    if (v.bl_ub < 0 || v.bl_ub > 1)
      throw ValidationError("seed.bl_ub", "must be 0 or 1");
    if (v.bl_lb < 0 || v.bl_lb > v.bl_ub)
      throw ValidationError("seed.bl_lb", "must be in [0, bl_ub]");
    if (v.ch_lb > v.ch_ub)
      throw ValidationError("seed.ch", "ch_lb exceeds ch_ub");
  }
  int last_rankc = 0;
  auto class_rank = [](EdgeClass c) {
    switch (c) {
      case EdgeClass::GE2: return 0;
      case EdgeClass::GE1: return 1;
      case EdgeClass::ZeroOne: return 2;
      case EdgeClass::EQ1: return 3;
    }
    return 4;
  };
  for (size_t i = 0; i < edges.size(); ++i) {
    const SeedEdge &e = edges[i];
    std::string fld = "seed.edges[" + std::to_string(i) + "]";
    if (e.tail < 1 || e.head < 1 || e.tail > t_c() || e.head > t_c())
      throw ValidationError(fld, "endpoint out of range");
    if (e.tail >= e.head)
      throw ValidationError(fld + ".tail", "edges must be directed low->high");
    if (class_rank(e.cls) < last_rankc)
      throw ValidationError(fld + ".class",
                            "edges must be ordered ge2, ge1, zero_one, eq1");
    last_rankc = class_rank(e.cls);
    if (e.l_lb > e.l_ub) throw ValidationError(fld + ".l_lb", "l_lb exceeds l_ub");
    switch (e.cls) {
      case EdgeClass::GE2:
        if (e.l_lb < 2) throw ValidationError(fld + ".l_lb", "ge2 needs l_lb >= 2");
        break;
      case EdgeClass::GE1:
        if (e.l_lb != 1 || e.l_ub < 2)
          throw ValidationError(fld + ".l_lb", "ge1 needs l_lb=1, l_ub >= 2");
        break;
      case EdgeClass::ZeroOne:
        if (e.l_lb != 0 || e.l_ub != 1)
          throw ValidationError(fld + ".l_lb", "zero_one needs l_lb=0, l_ub=1");
        break;
      case EdgeClass::EQ1:
        if (e.l_lb != 1 || e.l_ub != 1)
          throw ValidationError(fld + ".l_lb", "eq1 needs l_lb=l_ub=1");
        break;
    }
    if (e.bl_lb > e.bl_ub) throw ValidationError(fld + ".bl_lb", "bl_lb exceeds bl_ub");
    if (e.ch_lb > e.ch_ub) throw ValidationError(fld + ".ch_lb", "ch_lb exceeds ch_ub");
    if (e.bd2_lb > e.bd2_ub || e.bd3_lb > e.bd3_ub)
      throw ValidationError(fld + ".bd", "bd lower bound exceeds upper bound");
  }
}

int seed_rank(const SeedGraph &seed) {
  const int n = seed.t_c();
  std::vector<std::vector<int>> adj(n + 1);
  for (const SeedEdge &e : seed.edges) {
    adj[e.tail].push_back(e.head);
    adj[e.head].push_back(e.tail);
  }
  std::vector<bool> vis(n + 1, false);
  std::queue<int> q;
  q.push(1);
  vis[1] = true;
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
  if (cnt != n) throw Error("seed graph is disconnected");
  return seed.m_c() - n + 1;
}

IntPair Specification::na_bound(const std::string &el) const {
  auto it = bounds.na.find(el);
  if (it != bounds.na.end()) return it->second;
  // a connected graph on n heavy atoms carries at most 2n+2 hydrogens
  if (el == "H") return IntPair{0, 2 * bounds.n_star + 2};
  return IntPair{0, bounds.n_star};
}

IntPair Specification::na_int_bound(const std::string &el) const {
  auto it = bounds.na_int.find(el);
  return it == bounds.na_int.end() ? IntPair{0, bounds.n_star} : it->second;
}

IntPair Specification::fc_bound(int id) const {
  auto it = bounds.fc.find(id);
  return it == bounds.fc.end() ? IntPair{0, bounds.n_star} : it->second;
}

IntPair Specification::ac_lf_bound(const std::string &key) const {
  auto it = bounds.ac_lf.find(key);
  return it == bounds.ac_lf.end() ? IntPair{0, bounds.n_star} : it->second;
}

std::vector<int> Specification::fringe_set(int vertex) const {
  const SeedVertex &v = seed.vertices.at(vertex - 1);
  if (v.fringe_allow.empty()) {
    std::vector<int> all(catalog.size());
    for (int i = 0; i < catalog.size(); ++i) all[i] = i + 1;
    return all;
  }
  return v.fringe_allow;
}

std::vector<std::string> Specification::allowed_elements(int vertex) const {
  const SeedVertex &v = seed.vertices.at(vertex - 1);
  return v.allowed_elements.empty() ? lambda_int : v.allowed_elements;
}

void Specification::validate(const ElementTable &et) const {
  if (rho < 1) throw ValidationError("rho", "must be >= 1");
  if (rho != catalog.rho)
    throw ValidationError("rho", "catalog was built with a different rho");
  seed.validate();
  if (bounds.n_lb > bounds.n_star)
    throw ValidationError("bounds.n_lb", "exceeds n_star");
  if (bounds.n_int_lb > bounds.n_int_ub)
    throw ValidationError("bounds.n_int_lb", "exceeds n_int_ub");
  if (bounds.n_int_ub > bounds.n_star)
    throw ValidationError("bounds.n_int_ub", "exceeds n_star");
  if (lambda_int.empty()) throw ValidationError("lambda_int", "empty");
  std::set<std::string> li(lambda_int.begin(), lambda_int.end());
  std::set<std::string> le(lambda_ex.begin(), lambda_ex.end());
  if (li.size() != lambda_int.size())
    throw ValidationError("lambda_int", "duplicate element");
  if (li.count("H")) throw ValidationError("lambda_int", "H cannot be interior");
  for (const std::string &el : lambda_int)
    if (!et.contains(el)) throw ValidationError("lambda_int", "unknown element " + el);
  for (const std::string &el : lambda_ex)
    if (!et.contains(el)) throw ValidationError("lambda_ex", "unknown element " + el);
  for (const auto &[el, b] : bounds.na) {
    if (!li.count(el) && !le.count(el))
      throw ValidationError("bounds.na", "element not in lambda: " + el);
    if (b.lb > b.ub) throw ValidationError("bounds.na." + el, "lb exceeds ub");
  }
  for (const auto &[el, b] : bounds.na_int) {
    if (!li.count(el))
      throw ValidationError("bounds.na_int", "element not in lambda_int: " + el);
    if (b.lb > b.ub) throw ValidationError("bounds.na_int." + el, "lb exceeds ub");
  }
  for (const auto &[id, b] : bounds.fc) {
    if (id < 1 || id > catalog.size())
      throw ValidationError("bounds.fc", "unknown catalog id " + std::to_string(id));
    if (b.lb > b.ub)
      throw ValidationError("bounds.fc." + std::to_string(id), "lb exceeds ub");
  }
  for (const auto &[key, b] : bounds.ac_lf)
    if (b.lb > b.ub) throw ValidationError("bounds.ac_lf." + key, "lb exceeds ub");
  for (int i = 1; i <= seed.t_c(); ++i) {
    for (const std::string &el : allowed_elements(i))
      if (!li.count(el))
        throw ValidationError(strfmt("seed.vertices[%d].allowed_elements", i - 1),
                              "element not in lambda_int: " + el);
    for (int id : fringe_set(i))
      if (id < 1 || id > catalog.size())
        throw ValidationError(strfmt("seed.vertices[%d].fringe_allow", i - 1),
                              "unknown catalog id " + std::to_string(id));
  }
  for (const CatalogEntry &e : catalog.entries) {
    if (!li.count(e.tree.root_element()))
      throw ValidationError("catalog",
                            "tree root element " + e.tree.root_element() +
                                " not in lambda_int");
    for (const auto &[el, cnt] : e.stats.na_ex)
      if (!le.count(el))
        throw ValidationError("catalog",
                              "tree element " + el + " not in lambda_ex");
  }
  if (eff_t_t() < 0) throw ValidationError("t_t", "negative capacity");
  if (eff_t_f() < 0) throw ValidationError("t_f", "negative capacity");
  for (const SeedEdge &e : seed.edges)
    if ((e.cls == EdgeClass::GE2 || e.cls == EdgeClass::GE1) &&
        e.l_ub - 1 > eff_t_t())
      throw ValidationError("seed.edges.l_ub",
                            "path interior exceeds t_t capacity");
}

// ---------------------------------------------------------------------------
// JSON round trip

namespace {

nlohmann::json pair_json(const IntPair &p) { return {p.lb, p.ub}; }

IntPair pair_from(const nlohmann::json &j) {
  return IntPair{j.at(0).get<int>(), j.at(1).get<int>()};
}

}  // namespace

std::string Specification::to_json_text() const {
  nlohmann::json verts = nlohmann::json::array();
  for (const SeedVertex &v : seed.vertices) {
    verts.push_back({{"bl_lb", v.bl_lb},
                     {"bl_ub", v.bl_ub},
                     {"ch_lb", v.ch_lb},
                     {"ch_ub", v.ch_ub},
                     {"allowed_elements", v.allowed_elements},
                     {"fringe_allow", v.fringe_allow}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const SeedEdge &e : seed.edges) {
    edges.push_back({{"tail", e.tail},
                     {"head", e.head},
                     {"class", edge_class_name(e.cls)},
                     {"l", pair_json({e.l_lb, e.l_ub})},
                     {"bl", pair_json({e.bl_lb, e.bl_ub})},
                     {"ch", pair_json({e.ch_lb, e.ch_ub})},
                     {"bd2", pair_json({e.bd2_lb, e.bd2_ub})},
                     {"bd3", pair_json({e.bd3_lb, e.bd3_ub})}});
  }
  nlohmann::json na(nlohmann::json::value_t::object);
  for (auto &[k, v] : bounds.na) na[k] = pair_json(v);
  nlohmann::json na_int(nlohmann::json::value_t::object);
  for (auto &[k, v] : bounds.na_int) na_int[k] = pair_json(v);
  nlohmann::json fc(nlohmann::json::value_t::object);
  for (auto &[k, v] : bounds.fc) fc[std::to_string(k)] = pair_json(v);
  nlohmann::json aclf(nlohmann::json::value_t::object);
  for (auto &[k, v] : bounds.ac_lf) aclf[k] = pair_json(v);
  nlohmann::json dg = nlohmann::json::array(), dgi = nlohmann::json::array();
  for (int d = 0; d < 4; ++d) dg.push_back(pair_json(bounds.dg[d]));
  for (int d = 0; d < 4; ++d) dgi.push_back(pair_json(bounds.dg_int[d]));

  nlohmann::json j{
      {"rho", rho},
      {"lambda_int", lambda_int},
      {"lambda_ex", lambda_ex},
      {"seed", {{"vertices", verts}, {"edges", edges}}},
      {"bounds",
       {{"n_int", pair_json({bounds.n_int_lb, bounds.n_int_ub})},
        {"n", pair_json({bounds.n_lb, bounds.n_star})},
        {"na", na},
        {"na_int", na_int},
        {"fc", fc},
        {"ac_lf", aclf},
        {"dg", dg},
        {"dg_int", dgi}}},
      {"t_t", t_t},
      {"t_f", t_f},
      {"catalog", nlohmann::json::parse(catalog.to_json_text())}};
  return j.dump(2) + "\n";
}

Specification Specification::from_json_text(const std::string &text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception &e) {
    throw Error("spec parse error: " + std::string(e.what()));
  }
  Specification s;
  s.rho = j.at("rho").get<int>();
  s.lambda_int = j.at("lambda_int").get<std::vector<std::string>>();
  s.lambda_ex = j.at("lambda_ex").get<std::vector<std::string>>();
  for (const auto &vj : j.at("seed").at("vertices")) {
    SeedVertex v;
    v.bl_lb = vj.value("bl_lb", 0);
    v.bl_ub = vj.value("bl_ub", 1);
    v.ch_lb = vj.value("ch_lb", 0);
    v.ch_ub = vj.value("ch_ub", 0);
    v.allowed_elements = vj.value("allowed_elements", std::vector<std::string>());
    v.fringe_allow = vj.value("fringe_allow", std::vector<int>());
    s.seed.vertices.push_back(std::move(v));
  }
  for (const auto &ej : j.at("seed").at("edges")) {
    SeedEdge e;
    e.tail = ej.at("tail").get<int>();
    e.head = ej.at("head").get<int>();
    e.cls = edge_class_from_name(ej.at("class").get<std::string>());
    IntPair l = pair_from(ej.at("l"));
    e.l_lb = l.lb;
    e.l_ub = l.ub;
    IntPair bl = pair_from(ej.at("bl"));
    e.bl_lb = bl.lb;
    e.bl_ub = bl.ub;
    IntPair ch = pair_from(ej.at("ch"));
    e.ch_lb = ch.lb;
    e.ch_ub = ch.ub;
    IntPair b2 = pair_from(ej.at("bd2"));
    e.bd2_lb = b2.lb;
    e.bd2_ub = b2.ub;
    IntPair b3 = pair_from(ej.at("bd3"));
    e.bd3_lb = b3.lb;
    e.bd3_ub = b3.ub;
    s.seed.edges.push_back(e);
  }
  const auto &bj = j.at("bounds");
  IntPair ni = pair_from(bj.at("n_int"));
  s.bounds.n_int_lb = ni.lb;
  s.bounds.n_int_ub = ni.ub;
  IntPair nn = pair_from(bj.at("n"));
  s.bounds.n_lb = nn.lb;
  s.bounds.n_star = nn.ub;
  const nlohmann::json na_j = bj.value("na", nlohmann::json::object());
  for (auto &[k, v] : na_j.items()) s.bounds.na[k] = pair_from(v);
  const nlohmann::json nai_j = bj.value("na_int", nlohmann::json::object());
  for (auto &[k, v] : nai_j.items()) s.bounds.na_int[k] = pair_from(v);
  const nlohmann::json fc_j = bj.value("fc", nlohmann::json::object());
  for (auto &[k, v] : fc_j.items()) s.bounds.fc[std::stoi(k)] = pair_from(v);
  const nlohmann::json aclf_j = bj.value("ac_lf", nlohmann::json::object());
  for (auto &[k, v] : aclf_j.items()) s.bounds.ac_lf[k] = pair_from(v);
  if (bj.contains("dg"))
    for (int d = 0; d < 4; ++d) s.bounds.dg[d] = pair_from(bj["dg"].at(d));
  else
    for (int d = 0; d < 4; ++d) s.bounds.dg[d] = {0, s.bounds.n_star};
  if (bj.contains("dg_int"))
    for (int d = 0; d < 4; ++d) s.bounds.dg_int[d] = pair_from(bj["dg_int"].at(d));
  else
    for (int d = 0; d < 4; ++d) s.bounds.dg_int[d] = {0, s.bounds.n_star};
  s.t_t = j.value("t_t", -1);
  s.t_f = j.value("t_f", -1);
  s.catalog = FringeCatalog::from_json_text(j.at("catalog").dump());
  s.validate();
  return s;
}

void Specification::save(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write spec: " + path);
  out << to_json_text();
}

Specification Specification::load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open spec: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

// ---------------------------------------------------------------------------
// instance presets

namespace {

struct PresetEdge {
  int tail, head;
  EdgeClass cls;
};

struct PresetShape {
  int t_c;
  std::vector<PresetEdge> edges;
  int n_int_lb, n_int_ub, n_lb, n_star;
  int subset;
};

PresetShape preset_shape(const std::string &id) {
  if (id == "I1")
    return {2,
            {{1, 2, EdgeClass::GE2}, {1, 2, EdgeClass::GE1}},
            6, 8, 15, 20, 40};
  if (id == "I2")
    return {4,
            {{1, 2, EdgeClass::GE2},
             {3, 4, EdgeClass::GE2},
             {2, 3, EdgeClass::GE1},
             {1, 3, EdgeClass::EQ1},
             {2, 4, EdgeClass::EQ1}},
            6, 12, 10, 15, 35};
  if (id == "I3")
    return {4,
            {{1, 2, EdgeClass::GE2},
             {2, 3, EdgeClass::GE1},
             {3, 4, EdgeClass::GE1},
             {1, 3, EdgeClass::EQ1},
             {2, 4, EdgeClass::EQ1}},
            6, 12, 10, 15, 30};
  if (id == "I4")
    return {4,
            {{1, 2, EdgeClass::GE1},
             {2, 3, EdgeClass::GE1},
             {3, 4, EdgeClass::GE1},
             {1, 3, EdgeClass::EQ1},
             {2, 4, EdgeClass::EQ1}},
            6, 12, 10, 15, 25};
  if (id == "I5")
    return {3,
            {{1, 2, EdgeClass::GE2},
             {2, 3, EdgeClass::GE2},
             {1, 3, EdgeClass::ZeroOne}},
            3, 9, 3, 9, 50};
  throw Error("unknown instance id: " + id + " (expected I1..I5)");
}

}  // namespace

Specification preset(const std::string &instance_id, const FringeCatalog &catalog) {
  PresetShape shape = preset_shape(instance_id);
  if (catalog.size() < shape.subset)
    throw Error(strfmt("instance %s needs a catalog with >= %d trees, got %d",
                       instance_id.c_str(), shape.subset, catalog.size()));

  Specification s;
  s.rho = catalog.rho;
  s.catalog = select_subset(catalog, shape.subset);
  s.bounds.n_int_lb = shape.n_int_lb;
  s.bounds.n_int_ub = shape.n_int_ub;
  s.bounds.n_lb = shape.n_lb;
  s.bounds.n_star = shape.n_star;

  std::set<std::string> li, le;
  for (const CatalogEntry &e : s.catalog.entries) {
    li.insert(e.tree.root_element());
    le.insert(e.tree.root_element());
    for (const auto &[el, cnt] : e.stats.na_ex) le.insert(el);
  }
  s.lambda_int.assign(li.begin(), li.end());
  s.lambda_ex.assign(le.begin(), le.end());

  const int t_t = shape.n_int_ub - shape.t_c;
  for (int i = 0; i < shape.t_c; ++i) {
    SeedVertex v;
    v.bl_lb = 0;
    v.bl_ub = 1;
    v.ch_lb = 0;
    v.ch_ub = shape.n_star;
    s.seed.vertices.push_back(v);
  }
  for (const PresetEdge &pe : shape.edges) {
    SeedEdge e;
    e.tail = pe.tail;
    e.head = pe.head;
    e.cls = pe.cls;
    switch (pe.cls) {
      case EdgeClass::GE2:
        e.l_lb = 2;
        e.l_ub = std::max(2, t_t);
        break;
      case EdgeClass::GE1:
        e.l_lb = 1;
        e.l_ub = std::max(2, t_t);
        break;
      case EdgeClass::ZeroOne:
        e.l_lb = 0;
        e.l_ub = 1;
        break;
      case EdgeClass::EQ1:
        e.l_lb = 1;
        e.l_ub = 1;
        break;
    }
    e.bl_lb = 0;
    e.bl_ub = std::max(0, e.l_ub - 1);
    e.ch_lb = 0;
    e.ch_ub = shape.n_star;
    e.bd2_lb = e.bd3_lb = 0;
    e.bd2_ub = e.bd3_ub = shape.n_int_ub;
    s.seed.edges.push_back(e);
  }
  for (int id = 1; id <= s.catalog.size(); ++id) s.bounds.fc[id] = {0, 10};
  for (const CatalogEntry &e : s.catalog.entries)
    for (const auto &[key, cnt] : e.stats.ac_lf)
      if (!s.bounds.ac_lf.count(key)) s.bounds.ac_lf[key] = {0, shape.n_star};
  for (const std::string &el : s.lambda_ex)
    s.bounds.na[el] =
        el == "H" ? IntPair{0, 2 * shape.n_star + 2} : IntPair{0, shape.n_star};
  for (const std::string &el : s.lambda_int) {
    s.bounds.na[el] = {0, shape.n_star};
    s.bounds.na_int[el] = {0, shape.n_star};
  }
  for (int d = 0; d < 4; ++d) {
    s.bounds.dg[d] = {0, shape.n_star};
    s.bounds.dg_int[d] = {0, shape.n_star};
  }
  s.validate();
  return s;
}

}  // namespace molkit
