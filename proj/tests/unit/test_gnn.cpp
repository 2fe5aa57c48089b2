//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "molkit/gnn.hpp"
#include "testutil.hpp"

using namespace molkit;
using namespace molkit::test;

using molkit::test::max_grad_rel_err;
using molkit::test::param_views;

namespace {
auto views(GnnModel &m) { return param_views(m); }
auto grad_views(GnnGrad &g) { return param_views(g); }
}  // namespace

TEST_CASE("node features follow the 15-entry layout") {
  Rng rng(3);
  // triangle with an O(1H) vertex and an F(+1) vertex: every frame atom is
  // interior, exercising the one-hot fallthrough for elements beyond C/O/N
  ChemicalGraph g;
  int c = add_atom(g, "C"), o = add_atom(g, "O"), f = add_atom(g, "F", 0, 1);
  add_bond(g, c, o);
  add_bond(g, o, f);
  add_bond(g, c, f);
  fill_hydrogens(g);
  FringeCatalog catalog = build_catalog({g, random_molecule(rng)}, 2);
  GnnModel model = init_model(micro_config(), catalog, 1);

  GnnInput in = make_gnn_input(g, catalog);
  auto feats = node_features(in, model);
  REQUIRE(feats.size() == 3);
  for (const Vec &fv : feats) REQUIRE(fv.size() == 15);

  // suppressed vertex order: C, O, F
  CHECK(feats[0][0] == 1.0);  // one-hot C
  CHECK(feats[0][4] == 4.0);  // valence + ion
  CHECK(feats[1][1] == 1.0);  // one-hot O
  CHECK(feats[1][5] == 0.0);  // no hydrogens on this oxygen
  CHECK(feats[2][0] == 0.0);  // F is none of C/O/N
  CHECK(feats[2][1] == 0.0);
  CHECK(feats[2][2] == 0.0);
  CHECK(feats[2][4] == 2.0);  // val(F)=1 plus ion-valence 1
  CHECK(feats[2][6] == 1.0);  // eledeg entry

  // an oxygen with one hydrogen: entry 2 and entry 6 both set
  ChemicalGraph g2 = carbon_path(5);
  g2.atoms[2] = Atom{"O", 0, 0};
  fill_hydrogens(g2);  // interior O keeps 0 hydrogens on a 2-degree vertex
  CHECK_NOTHROW(build_catalog({g2}, 2));
}

TEST_CASE("uncatalogued fringe trees are rejected") {
  FringeCatalog catalog = build_catalog({carbon_path(5)}, 2);
  GnnModel model = init_model(micro_config(), catalog, 1);
  ChemicalGraph other = carbon_path(6);
  CHECK_THROWS_WITH_AS(make_gnn_input(other, catalog),
                       doctest::Contains("uncatalogued fringe tree"), Error);
}

TEST_CASE("zero model predicts the last bias") {
  FringeCatalog catalog = build_catalog({carbon_path(5)}, 2);
  GnnModel model = init_model(micro_config(), catalog, 1);
  for (auto &[name, vp] : views(model))
    std::fill(vp->begin(), vp->end(), 0.0);
  model.head_b.back()[0] = 4.25;
  ForwardTrace tr = forward(make_gnn_input(carbon_path(5), catalog), model);
  CHECK(tr.y == doctest::Approx(4.25));
  for (auto &layer : tr.theta)
    for (auto &th : layer)
      for (double x : th) CHECK(x == 0.0);
}

TEST_CASE("hand-computed forward pass on a 2-vertex interior") {
  // two interior vertices joined by one edge; L=1, k_hid=1, k_c=1, all-ones
  // weights, so tau at each vertex is the sum of both feature vectors
  ChemicalGraph g = carbon_path(6);  // interior = {v2, v3}
  FringeCatalog catalog = build_catalog({g}, 2);
  GnnConfig cfg;
  cfg.layers = 1;
  cfg.k_hid = 1;
  cfg.k_c = 1;
  cfg.head_hidden = {1};
  GnnModel model = init_model(cfg, catalog, 1);
  for (auto &[name, vp] : views(model)) std::fill(vp->begin(), vp->end(), 1.0);
  const double bias = 1.0;

  GnnInput in = make_gnn_input(g, catalog);
  REQUIRE(in.n == 2);
  auto feats = node_features(in, model);
  double total = 0.0;
  for (const Vec &fv : feats)
    for (double x : fv) total += x;
  double tau = total + bias;          // same at both vertices
  double theta = std::max(0.1 * tau, tau);
  double tau_ftr = 2 * theta;         // sum readout, unit projection
  double theta_ftr = std::max(0.1 * tau_ftr, tau_ftr);
  double hidden = std::max(0.0, theta_ftr + 1.0);
  double expect = hidden + 1.0;

  ForwardTrace tr = forward(in, model);
  CHECK(tr.tau[0][0][0] == doctest::Approx(tau));
  CHECK(tr.tau[0][1][0] == doctest::Approx(tau));
  CHECK(tr.y == doctest::Approx(expect));
}

TEST_CASE("interior relabeling leaves the prediction unchanged") {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    ChemicalGraph g = random_molecule(rng, 5, 9);
    // relabel atoms by reversing indices
    ChemicalGraph r;
    int n = g.num_atoms();
    for (int i = n - 1; i >= 0; --i) r.atoms.push_back(g.atoms[i]);
    for (const Bond &b : g.bonds)
      r.bonds.push_back(Bond{n - 1 - b.u, n - 1 - b.v, b.mult});
    FringeCatalog catalog = build_catalog({g}, 2);
    GnnModel model = init_model(micro_config(), catalog, trial);
    double y1 = forward(g, model, catalog).y;
    double y2 = forward(r, model, catalog).y;
    CHECK(y1 == doctest::Approx(y2).epsilon(1e-12));
  }
}

TEST_CASE("theta equals the leaky-relu image of tau across the trace") {
  Rng rng(9);
  ChemicalGraph g = random_molecule(rng, 5, 9);
  FringeCatalog catalog = build_catalog({g}, 2);
  GnnModel model = init_model(micro_config(), catalog, 2);
  ForwardTrace tr = forward(make_gnn_input(g, catalog), model);
  for (size_t layer = 0; layer < tr.tau.size(); ++layer)
    for (size_t vtx = 0; vtx < tr.tau[layer].size(); ++vtx)
      for (size_t z = 0; z < tr.tau[layer][vtx].size(); ++z) {
        double t = tr.tau[layer][vtx][z];
        CHECK(tr.theta[layer][vtx][z] ==
              doctest::Approx(t >= 0 ? t : 0.1 * t));
      }
}

TEST_CASE("gradients match central finite differences") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    Rng rng(seed);
    std::vector<ChemicalGraph> mols;
    for (int i = 0; i < 3; ++i) mols.push_back(random_molecule(rng, 5, 8));
    FringeCatalog catalog = build_catalog(mols, 2);
    GnnConfig cfg = micro_config(2, 4, 3);
    GnnModel model = init_model(cfg, catalog, seed + 100);
    std::vector<std::pair<GnnInput, double>> batch;
    for (size_t i = 0; i < mols.size(); ++i)
      batch.emplace_back(make_gnn_input(mols[i], catalog),
                         rng.normal());
    CHECK(max_grad_rel_err(model, batch) < 1e-4);
  }
}

TEST_CASE("all-zero model with zero targets has zero loss and gradient") {
  FringeCatalog catalog = build_catalog({carbon_path(5)}, 2);
  GnnModel model = init_model(micro_config(), catalog, 1);
  for (auto &[name, vp] : views(model)) std::fill(vp->begin(), vp->end(), 0.0);
  std::vector<std::pair<GnnInput, double>> batch{
      {make_gnn_input(carbon_path(5), catalog), 0.0}};
  GnnGrad grad = zero_grad_like(model);
  double loss = loss_and_grad(model, batch, &grad);
  CHECK(loss == 0.0);
  for (auto &[name, vp] : grad_views(grad))
    for (double x : *vp) CHECK(x == 0.0);
}

TEST_CASE("duplicated batch elements leave the mean loss unchanged") {
  Rng rng(31);
  ChemicalGraph g = random_molecule(rng);
  FringeCatalog catalog = build_catalog({g}, 2);
  GnnModel model = init_model(micro_config(), catalog, 7);
  GnnInput in = make_gnn_input(g, catalog);
  double l1 = loss_and_grad(model, {{in, 1.5}}, nullptr);
  double l2 = loss_and_grad(model, {{in, 1.5}, {in, 1.5}}, nullptr);
  CHECK(l1 == doctest::Approx(l2));
}

TEST_CASE("training fits a constant target") {
  Rng rng(41);
  std::vector<ChemicalGraph> mols;
  for (int i = 0; i < 40; ++i) mols.push_back(random_molecule(rng, 4, 8));
  FringeCatalog catalog = build_catalog(mols, 2);
  std::vector<std::pair<GnnInput, double>> ds;
  for (const ChemicalGraph &g : mols)
    ds.emplace_back(make_gnn_input(g, catalog), 3.0);
  TrainOptions opts;
  opts.seed = 1;
  opts.lr = 0.02;
  opts.max_epochs = 500;
  opts.patience = 100;
  opts.val_frac = 0.0;  // score against the fit itself: constant target
  opts.test_frac = 0.0;
  TrainResult res = train(ds, micro_config(), opts, catalog);
  CHECK(res.val_mae < 0.05);
}

TEST_CASE("divergence raises an error carrying the last stable checkpoint") {
  Rng rng(47);
  std::vector<ChemicalGraph> mols;
  for (int i = 0; i < 20; ++i) mols.push_back(random_molecule(rng, 4, 8));
  FringeCatalog catalog = build_catalog(mols, 2);
  std::vector<std::pair<GnnInput, double>> ds;
  for (const ChemicalGraph &g : mols)
    ds.emplace_back(make_gnn_input(g, catalog), 1.0);
  TrainOptions opts;
  opts.seed = 1;
  opts.lr = 1e60;  // guaranteed overflow to inf
  opts.max_epochs = 50;
  bool threw = false;
  try {
    train(ds, micro_config(), opts, catalog);
  } catch (const TrainDivergence &e) {
    threw = true;
    CHECK_NOTHROW(e.checkpoint().check_dims());
  }
  CHECK(threw);
}

TEST_CASE("big-M bounds: zero model floors at one, intervals dominate") {
  Rng rng(55);
  std::vector<ChemicalGraph> mols;
  for (int i = 0; i < 10; ++i) mols.push_back(random_molecule(rng));
  FringeCatalog catalog = build_catalog(mols, 2);
  GnnModel zero = init_model(micro_config(), catalog, 1);
  for (auto &[name, vp] : views(zero)) std::fill(vp->begin(), vp->end(), 0.0);
  std::vector<GnnInput> inputs;
  for (const ChemicalGraph &g : mols) inputs.push_back(make_gnn_input(g, catalog));
  BigM m = compute_big_m(zero, inputs);
  // every weight-dependent value is zero, so those bounds sit at the floor;
  // the layer-0 bound still has to cover the raw features
  for (size_t l = 1; l < m.layer.size(); ++l) CHECK(m.layer[l] == 1.0);
  CHECK(m.layer[0] >= 4.0);
  for (double x : m.head) CHECK(x == 1.0);

  GnnModel model = init_model(micro_config(), catalog, 3);
  BigM emp = compute_big_m(model, inputs, 1.0);
  BigM itv = interval_big_m(model, ElementTable::defaults(), 9);
  REQUIRE(emp.layer.size() == itv.layer.size());
  for (size_t i = 0; i < emp.layer.size(); ++i) CHECK(itv.layer[i] >= emp.layer[i]);
  for (size_t i = 0; i < emp.head.size(); ++i) CHECK(itv.head[i] >= emp.head[i]);
}

TEST_CASE("held-out traces stay inside safety-scaled empirical bounds") {
  Rng rng(77);
  std::vector<ChemicalGraph> train_set, held;
  for (int i = 0; i < 60; ++i) train_set.push_back(random_molecule(rng));
  for (int i = 0; i < 60; ++i) held.push_back(random_molecule(rng));
  std::vector<ChemicalGraph> all = train_set;
  all.insert(all.end(), held.begin(), held.end());
  FringeCatalog catalog = build_catalog(all, 2);
  GnnModel model = init_model(micro_config(), catalog, 5);
  std::vector<GnnInput> tr_inputs;
  for (const ChemicalGraph &g : train_set)
    tr_inputs.push_back(make_gnn_input(g, catalog));
  model.big_m = compute_big_m(model, tr_inputs, 2.0);

  int ok = 0;
  for (const ChemicalGraph &g : held) {
    ForwardTrace t = forward(make_gnn_input(g, catalog), model);
    bool inside = true;
    for (size_t l = 0; l < t.tau.size(); ++l)
      for (const Vec &tv : t.tau[l])
        for (double x : tv) inside &= std::fabs(x) <= model.big_m.layer[l + 1];
    ok += inside ? 1 : 0;
  }
  CHECK(ok >= 59);  // at least 99% of the held-out sample
}

TEST_CASE("model JSON round trip") {
  Rng rng(91);
  std::vector<ChemicalGraph> mols;
  for (int i = 0; i < 6; ++i) mols.push_back(random_molecule(rng));
  FringeCatalog catalog = build_catalog(mols, 2);
  GnnModel model = init_model(micro_config(), catalog, 13);
  std::vector<GnnInput> inputs;
  for (const ChemicalGraph &g : mols) inputs.push_back(make_gnn_input(g, catalog));
  model.big_m = compute_big_m(model, inputs);
  GnnModel back = GnnModel::from_json_text(model.to_json_text());
  CHECK(back.w0.a == model.w0.a);
  CHECK(back.embeddings == model.embeddings);
  CHECK(back.big_m.layer == model.big_m.layer);
  double y1 = forward(mols[0], model, catalog).y;
  double y2 = forward(mols[0], back, catalog).y;
  CHECK(y1 == doctest::Approx(y2).epsilon(1e-15));
}
