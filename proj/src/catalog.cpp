//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#include "molkit/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "molkit/common.hpp"

namespace molkit {

int FringeCatalog::id_of(const std::string &code) const {
  for (int i = 0; i < size(); ++i)
    if (entries[i].code == code) return i + 1;
  return 0;
}

FringeCatalog build_catalog(const std::vector<ChemicalGraph> &dataset, int rho,
                            const ElementTable &et) {
  if (dataset.empty()) throw Error("empty dataset");
  std::map<std::string, CatalogEntry> by_code;
  for (const ChemicalGraph &g : dataset) {
    ChemicalGraph s = suppress_hydrogens(g);
    TwoLayerDecomposition d = decompose(g, rho);
    for (FringeTree &t : extract_fringe_trees(d, s)) {
      std::string code = canonical_code(t);
      auto it = by_code.find(code);
      if (it == by_code.end()) {
        CatalogEntry e;
        e.stats = t.stats(et);
        e.tree = std::move(t);
        e.code = code;
        e.freq = 1;
        by_code.emplace(std::move(code), std::move(e));
      } else {
        it->second.freq += 1;
      }
    }
  }
  FringeCatalog c;
  c.rho = rho;
  for (auto &[code, e] : by_code) c.entries.push_back(std::move(e));
  return c;  // std::map iteration already gives code order
}

FringeCatalog select_subset(const FringeCatalog &c, int k, SubsetPolicy policy) {
  (void)policy;
  if (k > c.size()) throw Error(strfmt("subset size %d exceeds catalog size %d",
                                       k, c.size()));
  std::vector<int> order(c.size());
  for (int i = 0; i < c.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (c.entries[a].freq != c.entries[b].freq)
      return c.entries[a].freq > c.entries[b].freq;
    return c.entries[a].code < c.entries[b].code;
  });
  order.resize(k);
  std::sort(order.begin(), order.end());  // chosen entries keep code order
  FringeCatalog out;
  out.rho = c.rho;
  for (int i : order) out.entries.push_back(c.entries[i]);
  return out;
}

namespace {

nlohmann::json tree_to_json(const FringeTree &t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (int i = 0; i < t.size(); ++i) {
    nodes.push_back({{"el", t.nodes[i].element},
                     {"h", t.nodes[i].hydrogens},
                     {"ion", t.nodes[i].ion},
                     {"p", t.parent[i]},
                     {"m", t.mult[i]}});
  }
  return nodes;
}

FringeTree tree_from_json(const nlohmann::json &nodes) {
  FringeTree t;
  for (const auto &n : nodes) {
    t.nodes.push_back(Atom{n.at("el").get<std::string>(), n.value("h", 0),
                           n.value("ion", 0)});
    t.parent.push_back(n.at("p").get<int>());
    t.mult.push_back(n.at("m").get<int>());
  }
  if (t.size() == 0 || t.parent[0] != -1)
    throw Error("catalog tree: node 0 must be the root");
  return t;
}

}  // namespace

std::string FringeCatalog::to_json_text() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const CatalogEntry &e : entries) {
    nlohmann::json aclf(nlohmann::json::value_t::object);
    for (auto &[k, v] : e.stats.ac_lf) aclf[k] = v;
    nlohmann::json naex(nlohmann::json::value_t::object);
    for (auto &[k, v] : e.stats.na_ex) naex[k] = v;
    trees.push_back({{"code", e.code},
                     {"freq", e.freq},
                     {"stats",
                      {{"n_h", e.stats.n_h},
                       {"ht_h", e.stats.ht_h},
                       {"deg_r", e.stats.deg_r},
                       {"hyddeg_r", e.stats.hyddeg_r},
                       {"beta_r", e.stats.beta_r},
                       {"vion", e.stats.vion},
                       {"ac_lf", aclf},
                       {"na_ex", naex}}},
                     {"tree", tree_to_json(e.tree)}});
  }
  nlohmann::json j{{"rho", rho}, {"trees", trees}};
  return j.dump(2) + "\n";
}

FringeCatalog FringeCatalog::from_json_text(const std::string &text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception &e) {
    throw Error("catalog parse error: " + std::string(e.what()));
  }
  FringeCatalog c;
  c.rho = j.at("rho").get<int>();
  for (const auto &tj : j.at("trees")) {
    CatalogEntry e;
    e.code = tj.at("code").get<std::string>();
    e.freq = tj.value("freq", 0L);
    e.tree = tree_from_json(tj.at("tree"));
    const auto &st = tj.at("stats");
    e.stats.n_h = st.at("n_h").get<int>();
    e.stats.ht_h = st.at("ht_h").get<int>();
    e.stats.deg_r = st.at("deg_r").get<int>();
    e.stats.hyddeg_r = st.at("hyddeg_r").get<int>();
    e.stats.beta_r = st.at("beta_r").get<int>();
    e.stats.vion = st.at("vion").get<int>();
    for (auto &[k, v] : st.at("ac_lf").items()) e.stats.ac_lf[k] = v.get<int>();
    for (auto &[k, v] : st.at("na_ex").items()) e.stats.na_ex[k] = v.get<int>();
    c.entries.push_back(std::move(e));
  }
  for (int i = 1; i < c.size(); ++i)
    if (!(c.entries[i - 1].code < c.entries[i].code))
      throw ValidationError("trees", "catalog codes must be strictly increasing");
  return c;
}

void FringeCatalog::save(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write catalog: " + path);
  out << to_json_text();
}

FringeCatalog FringeCatalog::load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open catalog: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

}  // namespace molkit
