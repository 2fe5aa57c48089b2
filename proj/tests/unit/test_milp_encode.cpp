//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "molkit/encode.hpp"
#include "molkit/witness.hpp"
#include "testutil.hpp"

using namespace molkit;
using namespace molkit::test;

namespace {

struct Fixture {
  Specification spec;
  GnnModel model;
  std::vector<ChemicalGraph> pool;
};

// cyclopentane-like frame fitting the I5 scheme, fixed by hand
ChemicalGraph five_ring() {
  ChemicalGraph g;
  for (int i = 0; i < 5; ++i) add_atom(g, "C");
  add_bond(g, 0, 1);
  add_bond(g, 1, 2);
  add_bond(g, 2, 3);
  add_bond(g, 3, 4);
  add_bond(g, 0, 4);
  fill_hydrogens(g);
  return g;
}

// path frame without the chord: both ends carry depth-2 tails
ChemicalGraph open_frame() {
  ChemicalGraph g;
  for (int i = 0; i < 9; ++i) add_atom(g, "C");
  for (int i = 1; i < 5; ++i) add_bond(g, i - 1, i);
  add_bond(g, 0, 5);
  add_bond(g, 5, 6);
  add_bond(g, 4, 7);
  add_bond(g, 7, 8);
  fill_hydrogens(g);
  return g;
}

Fixture make_fixture(std::uint64_t seed = 1) {
  Rng rng(seed);
  Fixture f;
  f.pool = {five_ring(), open_frame()};
  for (int i = 0; i < 12; ++i) f.pool.push_back(i5_shaped_molecule(rng));
  FringeCatalog catalog = build_catalog(f.pool, 2);
  f.spec = i5_shaped_spec(catalog);
  f.model = init_model(micro_config(), catalog, seed);
  std::vector<GnnInput> inputs;
  for (const ChemicalGraph &g : f.pool)
    inputs.push_back(make_gnn_input(g, catalog));
  f.model.big_m = compute_big_m(f.model, inputs);
  return f;
}

}  // namespace

TEST_CASE("leaky-relu triple admits exactly max(kappa*tau, tau)") {
  Fixture f = make_fixture();
  MilpModel m = MilpEncoder::assemble(f.spec, f.model, -100, 100, nullptr);
  const double kappa = 0.1;
  const double M = f.model.big_m.layer.back();

  Rng rng(99);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    double tau = (rng.uniform() * 2 - 1) * M;
    if (trial == 0) tau = -2.0;  // the worked example from the formulation
    if (trial == 1) tau = 3.0;
    if (trial == 2) tau = 0.0;
    double expect = std::max(kappa * tau, tau);
    bool seen = false;
    for (int delta = 0; delta <= 1; ++delta) {
      Assignment fixed{{"tftr_1", tau}, {"dtftr_1", double(delta)}};
      Span s = admissible_interval(m, "gr_lr_1", "thftr_1", fixed);
      if (s.empty()) continue;
      // every feasible delta pins theta to exactly the activation value
      CHECK(s.lo == doctest::Approx(expect).epsilon(1e-12));
      CHECK(s.hi == doctest::Approx(expect).epsilon(1e-12));
      if (tau > 0) CHECK(delta == 0);
      if (tau < 0) CHECK(delta == 1);
      seen = true;
    }
    CHECK(seen);
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("witness of a hand-built ring satisfies the whole formulation") {
  Fixture f = make_fixture();
  ChemicalGraph g = five_ring();
  MilpModel m = MilpEncoder::assemble(f.spec, f.model, -1e6, 1e6, nullptr);
  Assignment a = encode_witness(g, f.spec, f.model);
  CheckReport rep = check_assignment(m, a);
  INFO(rep.summary());
  CHECK(rep.ok());

  // structural values
  CHECK(a.at("nint") == 5);
  CHECK(a.at("nG") == 5);
  CHECK(a.at("rank") == 1);
  CHECK(a.at("eC_3") == 1);    // the chord is in use
  CHECK(a.at("bdint_1") == 5); // five single interior edges
  CHECK(a.at("Mass") == 5 * 120 + 10 * 10);
  // T vertices carry no leaf paths here: interior degree 2 where used
  for (int i = 1; i <= f.spec.eff_t_t(); ++i) {
    double vt = a.count(names::idx("vT", i)) ? a.at(names::idx("vT", i)) : 0;
    double di = a.count(names::idx("degiT", i)) ? a.at(names::idx("degiT", i)) : 0;
    CHECK(di == 2 * vt);
  }
  // network part mirrors the forward trace
  ForwardTrace tr = forward(g, f.model, f.spec.catalog);
  CHECK(a.at("y") == doctest::Approx(tr.y));
  CHECK(a.at(names::idx("tftr", 1)) == doctest::Approx(tr.tau_ftr[0]));

  // degree histogram against a direct count
  std::map<int, int> hist;
  ChemicalGraph s = suppress_hydrogens(g);
  for (int v = 0; v < s.num_atoms(); ++v)
    hist[s.degree(v) + s.atoms[v].hydrogens] += 1;
  for (int d = 1; d <= 4; ++d)
    CHECK(a.at(names::idx("dgv", d)) == (hist.count(d) ? hist[d] : 0));
}

TEST_CASE("witness without the optional chord forces rank zero") {
  Fixture f = make_fixture();
  ChemicalGraph g = open_frame();
  MilpModel m = MilpEncoder::assemble(f.spec, f.model, -1e6, 1e6, nullptr);
  Assignment a = encode_witness(g, f.spec, f.model);
  CheckReport rep = check_assignment(m, a);
  INFO(rep.summary());
  CHECK(rep.ok());
  CHECK(a.at("eC_3") == 0);
  CHECK(a.at("rank") == 0);  // r(G_C) - 1 once the 0/1 edge is dropped

  SUBCASE("edge-gated auxiliaries are zero and pinned") {
    CHECK(a.at(names::idx("thCm", 3, 1, 0)) == 0.0);
    Assignment tampered = a;
    tampered[names::idx("thCm", 3, 1, 0)] = 0.5;
    CHECK_FALSE(check_assignment(m, tampered).ok());
  }
}

TEST_CASE("unused scheme slots keep zeroed indicators") {
  Fixture f = make_fixture();
  Assignment a = encode_witness(five_ring(), f.spec, f.model);
  const SchemeGeometry geo = make_geometry(f.spec);
  int unused_f = 0;
  for (int i = 1; i <= geo.t_f; ++i) {
    if (a.count(names::idx("vF", i)) && a.at(names::idx("vF", i)) == 1.0) continue;
    CHECK(a.at(names::idx("ddgF", i, 0)) == 1.0);
    ++unused_f;
  }
  CHECK(unused_f == geo.t_f);  // the plain ring needs no leaf paths
}

TEST_CASE("violated spec windows surface in the checker") {
  Fixture f = make_fixture();
  ChemicalGraph g = five_ring();

  SUBCASE("per-path leaf-branch lower bound") {
    Specification spec = f.spec;
    spec.seed.edges[0].bl_lb = 1;  // demand a branch inside path a1
    MilpModel m = MilpEncoder::assemble(spec, f.model, -1e6, 1e6, nullptr);
    Assignment a = encode_witness(g, spec, f.model);
    CheckReport rep = check_assignment(m, a);
    REQUIRE_FALSE(rep.ok());
    bool found = false;
    for (const RowViolation &r : rep.rows) found |= r.name == "lp_bllo_1";
    CHECK(found);
  }
  SUBCASE("fringe-count upper bound pinned to zero") {
    Specification spec = f.spec;
    int used_id = spec.catalog.id_of(
        canonical_code(extract_fringe_trees(decompose(g, 2),
                                            suppress_hydrogens(g))[0]));
    REQUIRE(used_id > 0);
    spec.bounds.fc[used_id] = {0, 0};
    MilpModel m = MilpEncoder::assemble(spec, f.model, -1e6, 1e6, nullptr);
    Assignment a = encode_witness(g, spec, f.model);
    CheckReport rep = check_assignment(m, a);
    REQUIRE_FALSE(rep.ok());
    bool found = false;
    for (const BoundViolation &b : rep.bounds)
      found |= b.var == names::idx("fc", used_id);
    CHECK(found);
  }
  SUBCASE("tree-height lower bound without a leaf path") {
    Specification spec = f.spec;
    spec.seed.vertices[0].ch_lb = 1;  // bare ring fringes have height 0
    MilpModel m = MilpEncoder::assemble(spec, f.model, -1e6, 1e6, nullptr);
    Assignment a = encode_witness(g, spec, f.model);
    CheckReport rep = check_assignment(m, a);
    REQUIRE_FALSE(rep.ok());
  }
  SUBCASE("element restriction at a seed vertex") {
    Specification spec = f.spec;
    spec.seed.vertices[1].allowed_elements = {"N"};
    MilpModel m = MilpEncoder::assemble(spec, f.model, -1e6, 1e6, nullptr);
    Assignment a = encode_witness(g, spec, f.model);
    CheckReport rep = check_assignment(m, a);
    REQUIRE_FALSE(rep.ok());
    bool found = false;
    for (const RowViolation &r : rep.rows) found |= r.name == "va_lstar_2";
    CHECK(found);
  }
  SUBCASE("double-bond window on the chord") {
    ChemicalGraph ring = five_ring();
    ring.bonds[4].mult = 2;  // the chord u1-u3
    fill_hydrogens(ring);
    FringeCatalog catalog = build_catalog({ring, five_ring(), open_frame()}, 2);
    Specification spec = i5_shaped_spec(catalog);
    spec.seed.edges[2].bd2_ub = 0;
    GnnModel model = init_model(micro_config(), catalog, 5);
    std::vector<GnnInput> ins{make_gnn_input(ring, catalog)};
    model.big_m = compute_big_m(model, ins);
    MilpModel m = MilpEncoder::assemble(spec, model, -1e6, 1e6, nullptr);
    Assignment a = encode_witness(ring, spec, model);
    CHECK(a.at(names::idx("dbC", 3, 2)) == 1.0);
    CHECK(a.at(names::idx("bdC", 2)) == 1.0);
    CheckReport rep = check_assignment(m, a);
    REQUIRE_FALSE(rep.ok());
    bool found = false;
    for (const RowViolation &r : rep.rows)
      found |= r.name.rfind("bb_fixhi_3", 0) == 0;
    CHECK(found);
  }
  SUBCASE("triple-bond lower bound on a path") {
    Specification spec = f.spec;
    spec.seed.edges[0].bd3_lb = 1;
    MilpModel m = MilpEncoder::assemble(spec, f.model, -1e6, 1e6, nullptr);
    Assignment a = encode_witness(g, spec, f.model);
    CheckReport rep = check_assignment(m, a);
    REQUIRE_FALSE(rep.ok());
    bool found = false;
    for (const RowViolation &r : rep.rows)
      found |= r.name.rfind("bb_wlo_1", 0) == 0;
    CHECK(found);
  }
}

TEST_CASE("cyclical-base fixings appear as explicit rows") {
  // one seed graph exercising all four edge classes
  Rng rng(3);
  std::vector<ChemicalGraph> pool;
  for (int i = 0; i < 10; ++i) pool.push_back(random_molecule(rng, 5, 9));
  FringeCatalog catalog = build_catalog(pool, 2);
  Specification s;
  s.rho = 2;
  s.catalog = catalog;
  s.bounds.n_int_lb = 4;
  s.bounds.n_int_ub = 9;
  s.bounds.n_lb = 4;
  s.bounds.n_star = 12;
  std::set<std::string> li, le;
  for (const CatalogEntry &e : catalog.entries) {
    li.insert(e.tree.root_element());
    for (const auto &[sym, cnt] : e.stats.na_ex) le.insert(sym);
  }
  le.insert(li.begin(), li.end());
  s.lambda_int.assign(li.begin(), li.end());
  s.lambda_ex.assign(le.begin(), le.end());
  s.seed.vertices.resize(4);
  for (auto &v : s.seed.vertices) {
    v.bl_ub = 1;
    v.ch_ub = s.bounds.n_star;
  }
  auto mk = [&](int ta, int he, EdgeClass cls, int llb, int lub) {
    SeedEdge e;
    e.tail = ta;
    e.head = he;
    e.cls = cls;
    e.l_lb = llb;
    e.l_ub = lub;
    e.bl_ub = std::max(0, lub - 1);
    e.ch_ub = s.bounds.n_star;
    e.bd2_ub = e.bd3_ub = s.bounds.n_int_ub;
    return e;
  };
  int tt = s.bounds.n_int_ub - 4;
  s.seed.edges = {mk(1, 2, EdgeClass::GE2, 2, tt),
                  mk(2, 3, EdgeClass::GE1, 1, tt),
                  mk(3, 4, EdgeClass::ZeroOne, 0, 1),
                  mk(1, 4, EdgeClass::EQ1, 1, 1)};
  for (int d = 0; d < 4; ++d) {
    s.bounds.dg[d] = {0, s.bounds.n_star};
    s.bounds.dg_int[d] = {0, s.bounds.n_star};
  }
  s.validate();
  GnnModel model = init_model(micro_config(), catalog, 2);
  std::vector<GnnInput> ins;
  for (const ChemicalGraph &g : pool) ins.push_back(make_gnn_input(g, catalog));
  model.big_m = compute_big_m(model, ins);

  MilpEncoder enc(s, model);
  enc.declare_variables();
  enc.build_cyclical_base();
  const MilpModel &m = enc.model();
  bool fix4 = false, zero1 = false, clr1 = false;
  for (const MilpCon &c : m.cons()) {
    fix4 |= c.name == "co_fix_4";
    zero1 |= c.name == "co_zero_1";
    clr1 |= c.name == "co_clr_1";
  }
  CHECK(fix4);
  CHECK(zero1);
  CHECK(clr1);
  // atlas bound spot checks against the declared ranges
  const SchemeGeometry geo = enc.geometry();
  int chi = m.var_index(names::idx("chiT", 1));
  REQUIRE(chi >= 0);
  CHECK(m.var(chi).lb == 0);
  CHECK(m.var(chi).ub == geo.k_c);
  int clr = m.var_index(names::idx("clrT", 1));
  CHECK(m.var(clr).lb == s.seed.edges[0].l_lb - 1);
  CHECK(m.var(clr).ub == s.seed.edges[0].l_ub - 1);
  int bt = m.var_index(names::idx("btT", 2));
  CHECK(m.var(bt).lb == 0);
  CHECK(m.var(bt).ub == 3);
}

TEST_CASE("instance I1 witnesses pass on the two-vertex parallel seed") {
  // hexagon with six ethyl tails: 18 heavy atoms, 6 interior
  ChemicalGraph g;
  for (int i = 0; i < 6; ++i) add_atom(g, "C");
  for (int i = 0; i < 6; ++i) add_bond(g, i, (i + 1) % 6 == 0 ? 0 : i + 1);
  for (int i = 0; i < 6; ++i) {
    int c1 = add_atom(g, "C");
    add_bond(g, i, c1);
    int c2 = add_atom(g, "C");
    add_bond(g, c1, c2);
  }
  fill_hydrogens(g);

  Rng rng(99);
  std::vector<ChemicalGraph> pool{g};
  FringeCatalog catalog;
  do {
    for (int i = 0; i < 40; ++i) pool.push_back(random_molecule(rng, 4, 9));
    catalog = build_catalog(pool, 2);
  } while (catalog.size() < 50);
  Specification i1 = preset("I1", catalog);
  GnnModel model = init_model(micro_config(2, 6, 6), i1.catalog, 3);
  std::vector<GnnInput> ins;
  for (const ChemicalGraph &m : pool) {
    try {
      ins.push_back(make_gnn_input(m, i1.catalog));
    } catch (const Error &) {
    }
  }
  model.big_m = compute_big_m(model, ins);
  MilpModel milp = MilpEncoder::assemble(i1, model, -1e9, 1e9, nullptr);
  Assignment a = encode_witness(g, i1, model);
  CheckReport rep = check_assignment(milp, a);
  INFO(rep.summary());
  CHECK(rep.ok());
  CHECK(a.at("nG") == 18);
  CHECK(a.at("nint") == 6);
  DecodeResult dec = decode_solution(a, i1, model);
  CHECK(graphs_isomorphic(dec.molecule, g));
}

TEST_CASE("per-vertex leaf-path flags pick up bl lower bounds") {
  Fixture f = make_fixture();
  Specification spec = f.spec;
  spec.seed.vertices[0].bl_lb = 1;
  MilpModel m = MilpEncoder::assemble(spec, f.model, -1e6, 1e6, nullptr);
  int d = m.var_index(names::idx("dchiF", 1));
  REQUIRE(d >= 0);
  CHECK(m.var(d).lb == 1.0);
}

TEST_CASE("assembly is deterministic and the range adds exactly two rows") {
  Fixture f = make_fixture();
  AssembleCounts c1, c2;
  MilpModel a = MilpEncoder::assemble(f.spec, f.model, 0.5, 1.5, &c1);
  MilpModel b = MilpEncoder::assemble(f.spec, f.model, 0.5, 1.5, &c2);
  CHECK(a.to_lp_text() == b.to_lp_text());
  CHECK(c1.variables == c2.variables);

  MilpEncoder enc(f.spec, f.model);
  enc.declare_variables();
  enc.build_cyclical_base();
  enc.build_leaf_paths();
  enc.build_fringe_assignment();
  enc.build_degrees();
  enc.build_multiplicity();
  enc.build_valence();
  enc.build_bond_bounds();
  enc.build_gnn_simulation();
  int before = enc.model().num_cons();
  enc.add_range(0.5, 1.5);
  CHECK(enc.model().num_cons() == before + 2);
  CHECK(before + 2 == c1.constraints);
}
