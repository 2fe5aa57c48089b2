//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "molkit/chemgraph.hpp"
#include "testutil.hpp"

using namespace molkit;
using namespace molkit::test;

TEST_CASE("hydrogen suppression folds explicit hydrogens") {
  ChemicalGraph g;
  int c1 = add_atom(g, "C"), c2 = add_atom(g, "C");
  add_bond(g, c1, c2);
  for (int i = 0; i < 3; ++i) {
    int h = add_atom(g, "H");
    add_bond(g, c1, h);
  }
  for (int i = 0; i < 3; ++i) {
    int h = add_atom(g, "H");
    add_bond(g, c2, h);
  }
  ChemicalGraph s = suppress_hydrogens(g);
  REQUIRE(s.num_atoms() == 2);
  CHECK(s.atoms[0].hydrogens == 3);
  CHECK(s.atoms[1].hydrogens == 3);
  CHECK(s.num_bonds() == 1);

  // already-suppressed input comes back unchanged
  ChemicalGraph s2 = suppress_hydrogens(s);
  CHECK(s2.structurally_equal(s));
}

TEST_CASE("suppressing water leaves a single oxygen") {
  ChemicalGraph g;
  int o = add_atom(g, "O");
  int h1 = add_atom(g, "H"), h2 = add_atom(g, "H");
  add_bond(g, o, h1);
  add_bond(g, o, h2);
  ChemicalGraph s = suppress_hydrogens(g);
  REQUIRE(s.num_atoms() == 1);
  CHECK(s.atoms[0].element == "O");
  CHECK(s.atoms[0].hydrogens == 2);
}

TEST_CASE("all-hydrogen input has no heavy atoms") {
  ChemicalGraph g;
  int a = add_atom(g, "H"), b = add_atom(g, "H");
  add_bond(g, a, b);
  CHECK_THROWS_WITH_AS(suppress_hydrogens(g), "no heavy atoms", Error);
}

TEST_CASE("heights on a path follow iterative leaf removal") {
  ChemicalGraph g = carbon_path(5);
  auto ht = vertex_heights(g);
  REQUIRE(ht.size() == 5);
  CHECK(*ht[0] == 0);
  CHECK(*ht[1] == 1);
  CHECK(*ht[2] == 2);
  CHECK(*ht[3] == 1);
  CHECK(*ht[4] == 0);
}

TEST_CASE("cycle vertices have undefined height") {
  ChemicalGraph g;
  for (int i = 0; i < 3; ++i) add_atom(g, "C");
  add_bond(g, 0, 1);
  add_bond(g, 1, 2);
  add_bond(g, 0, 2);
  fill_hydrogens(g);
  auto ht = vertex_heights(g);
  for (int i = 0; i < 3; ++i) CHECK_FALSE(ht[i].has_value());

  SUBCASE("a pendant vertex propagates height onto its cycle anchor") {
    int p = add_atom(g, "C");
    add_bond(g, 0, p);
    fill_hydrogens(g);
    auto ht2 = vertex_heights(g);
    CHECK(*ht2[p] == 0);
    CHECK(*ht2[0] == 1);
    CHECK_FALSE(ht2[1].has_value());
    CHECK_FALSE(ht2[2].has_value());
  }
}

TEST_CASE("single-vertex graphs are rejected") {
  ChemicalGraph g;
  add_atom(g, "C", 4);
  CHECK_THROWS_AS(vertex_heights(g), Error);
  CHECK_THROWS_AS(decompose(g, 2), Error);
}

TEST_CASE("two-layer decomposition of a 5-path") {
  ChemicalGraph g = carbon_path(5);
  TwoLayerDecomposition d = decompose(g, 2);
  REQUIRE(d.interior.size() == 1);
  CHECK(d.interior[0] == 2);
  CHECK(d.exterior.size() == 4);

  ChemicalGraph s = suppress_hydrogens(g);
  auto trees = extract_fringe_trees(d, s);
  REQUIRE(trees.size() == 1);
  FringeStats st = trees[0].stats(ElementTable::defaults());
  CHECK(st.n_h == 4);
  CHECK(st.ht_h == 2);
  CHECK(st.deg_r == 2);
}

TEST_CASE("a triangle is entirely interior with bare fringe roots") {
  ChemicalGraph g;
  for (int i = 0; i < 3; ++i) add_atom(g, "C");
  add_bond(g, 0, 1);
  add_bond(g, 1, 2);
  add_bond(g, 0, 2);
  fill_hydrogens(g);
  TwoLayerDecomposition d = decompose(g, 2);
  CHECK(d.interior.size() == 3);
  CHECK(d.exterior.empty());
  auto trees = extract_fringe_trees(d, suppress_hydrogens(g));
  for (const auto &t : trees) {
    FringeStats st = t.stats(ElementTable::defaults());
    CHECK(st.n_h == 0);
    CHECK(st.ht_h == 0);
    CHECK(st.beta_r == 2);  // two hydrogens on each ring carbon
  }
}

TEST_CASE("graphs with no interior vertex are rejected") {
  ChemicalGraph g = carbon_path(3);  // heights 0,1,0 all below rho
  CHECK_THROWS_WITH_AS(decompose(g, 2), "graph entirely exterior", Error);
}

TEST_CASE("fringe stats: methyl root with one oxygen child") {
  FringeTree t;
  t.nodes = {Atom{"C", 3, 0}, Atom{"O", 1, 0}};
  t.parent = {-1, 0};
  t.mult = {0, 1};
  FringeStats st = t.stats(ElementTable::defaults());
  CHECK(st.n_h == 1);  // one non-root heavy atom
  CHECK(st.deg_r == 1);
  CHECK(st.hyddeg_r == 3);
  CHECK(st.beta_r == 1 + 3);  // bond to O plus three root hydrogens
  CHECK(st.na_ex.at("O") == 1);
  CHECK(st.na_ex.at("H") == 4);
  CHECK(st.ac_lf.at("C-O-1") == 1);
}

TEST_CASE("canonical code ignores children order, not labels") {
  Rng rng(7);
  FringeTree a;
  a.nodes = {Atom{"C", 0, 0}, Atom{"O", 1, 0}, Atom{"N", 2, 0}, Atom{"C", 3, 0}};
  a.parent = {-1, 0, 0, 0};
  a.mult = {0, 2, 1, 1};
  for (int i = 0; i < 5; ++i) {
    FringeTree b = shuffle_children(a, rng);
    CHECK(canonical_code(a) == canonical_code(b));
  }

  FringeTree c, n;
  c.nodes = {Atom{"C", 3, 0}};
  c.parent = {-1};
  c.mult = {0};
  n.nodes = {Atom{"N", 3, 0}};
  n.parent = {-1};
  n.mult = {0};
  CHECK(canonical_code(c) != canonical_code(n));
}

TEST_CASE("canonical-code equality matches brute-force rooted isomorphism") {
  Rng rng(2026);
  std::vector<FringeTree> pool;
  for (int i = 0; i < 60; ++i) pool.push_back(random_fringe_tree(rng));
  for (int i = 0; i < 20; ++i)
    pool.push_back(shuffle_children(pool[rng.below(60)], rng));
  int matched = 0;
  for (size_t i = 0; i < pool.size(); ++i)
    for (size_t j = i + 1; j < pool.size(); ++j) {
      bool by_code = canonical_code(pool[i]) == canonical_code(pool[j]);
      bool by_search = rooted_isomorphic(pool[i], pool[j]);
      CHECK(by_code == by_search);
      matched += by_code ? 1 : 0;
    }
  CHECK(matched > 0);  // the shuffled copies guarantee positive pairs
}

TEST_CASE("decomposition invariants on random molecules") {
  Rng rng(11);
  const ElementTable &et = ElementTable::defaults();
  for (int trial = 0; trial < 60; ++trial) {
    ChemicalGraph g = random_molecule(rng);
    ChemicalGraph s = suppress_hydrogens(g);
    TwoLayerDecomposition d = decompose(g, 2);
    CHECK(static_cast<int>(d.interior.size() + d.exterior.size()) ==
          s.num_atoms());
    auto trees = extract_fringe_trees(d, s);
    // reconstruction: interior edges + fringe trees give back the graph
    ChemicalGraph rebuilt;
    std::vector<int> root_of(s.num_atoms(), -1);
    for (size_t i = 0; i < d.interior.size(); ++i) {
      const FringeTree &t = trees[i];
      CHECK(t.stats(et).ht_h <= 2);
      int base = rebuilt.num_atoms();
      root_of[d.interior[i]] = base;
      for (int q = 0; q < t.size(); ++q) rebuilt.atoms.push_back(t.nodes[q]);
      for (int q = 1; q < t.size(); ++q)
        rebuilt.bonds.push_back(Bond{base + t.parent[q], base + q, t.mult[q]});
    }
    std::map<std::pair<int, int>, int> smult;
    for (const Bond &b : s.bonds) smult[std::minmax(b.u, b.v)] = b.mult;
    for (auto &[u, v] : d.interior_edges)
      rebuilt.bonds.push_back(Bond{root_of[u], root_of[v], smult.at({u, v})});
    rebuilt.validate(et);
    CHECK(rebuilt.num_atoms() == s.num_atoms());
    CHECK(rebuilt.num_bonds() == s.num_bonds());
    // valence identity on every atom
    for (int vtx = 0; vtx < s.num_atoms(); ++vtx)
      CHECK(s.beta_sum(vtx) + s.atoms[vtx].hydrogens ==
            et.valence(s.atoms[vtx].element) + s.atoms[vtx].ion);
  }
}

TEST_CASE("element table: built-in values and file loading") {
  const ElementTable &et = ElementTable::defaults();
  CHECK(et.mass10("C") == 120);
  CHECK(et.mass10("O") == 160);
  CHECK(et.valence("N") == 3);

  std::string path = "et_tmp.json";
  {
    std::ofstream out(path);
    out << R"({"version": 2, "elements": {"C": {"valence": 4, "mass10": 120},)"
        << R"( "Si": {"valence": 4, "mass10": 280}}})";
  }
  ElementTable custom = ElementTable::load(path);
  CHECK(custom.version == 2);
  CHECK(custom.mass10("Si") == 280);
  CHECK_THROWS_AS(custom.info("Xx"), Error);
  std::remove(path.c_str());
}

TEST_CASE("molecule JSON round trip") {
  ChemicalGraph ethanol;
  int c1 = add_atom(ethanol, "C"), c2 = add_atom(ethanol, "C");
  int o = add_atom(ethanol, "O");
  add_bond(ethanol, c1, c2);
  add_bond(ethanol, c2, o);
  fill_hydrogens(ethanol);
  ChemicalGraph back = molecule_from_json_text(molecule_to_json_text(ethanol));
  CHECK(back.structurally_equal(ethanol));
}

TEST_CASE("SDF round trip and error reporting") {
  ChemicalGraph g = carbon_path(4);
  std::string sdf = molecule_to_sdf_text(g);
  ChemicalGraph back = suppress_hydrogens(molecule_from_sdf_text(sdf));
  CHECK(back.structurally_equal(g));

  SUBCASE("unsupported bond order") {
    std::string bad = sdf;
    auto pos = bad.find("  1  2  1");
    REQUIRE(pos != std::string::npos);
    bad.replace(pos, 9, "  1  2  4");
    CHECK_THROWS_WITH_AS(molecule_from_sdf_text(bad),
                         doctest::Contains("unsupported bond order"), Error);
  }
  SUBCASE("counts line announcing too many atoms") {
    std::string bad = sdf;
    auto pos = bad.find(" 14 13");
    REQUIRE(pos != std::string::npos);
    bad.replace(pos, 6, " 44 13");
    CHECK_THROWS_AS(molecule_from_sdf_text(bad), Error);
  }
}
