//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "molkit/spec.hpp"
#include "testutil.hpp"

using namespace molkit;
using namespace molkit::test;

namespace {

FringeCatalog catalog_with_at_least(int n_trees) {
  Rng rng(101);
  std::vector<ChemicalGraph> mols;
  FringeCatalog c;
  do {
    for (int i = 0; i < 40; ++i) mols.push_back(random_molecule(rng, 4, 9));
    c = build_catalog(mols, 2);
  } while (c.size() < n_trees);
  return c;
}

}  // namespace

TEST_CASE("instance presets carry the proper bounds") {
  FringeCatalog catalog = catalog_with_at_least(50);

  Specification i1 = preset("I1", catalog);
  CHECK(i1.bounds.n_int_lb == 6);
  CHECK(i1.bounds.n_int_ub == 8);
  CHECK(i1.bounds.n_lb == 15);
  CHECK(i1.bounds.n_star == 20);
  CHECK(i1.catalog.size() == 40);
  CHECK(seed_rank(i1.seed) == 1);
  for (const auto &[id, b] : i1.bounds.fc) {
    CHECK(b.lb == 0);
    CHECK(b.ub == 10);
  }

  Specification i2 = preset("I2", catalog);
  CHECK(i2.bounds.n_int_lb == 6);
  CHECK(i2.bounds.n_int_ub == 12);
  CHECK(i2.bounds.n_lb == 10);
  CHECK(i2.bounds.n_star == 15);
  CHECK(i2.catalog.size() == 35);
  CHECK(seed_rank(i2.seed) == 2);
  // class partition of the five seed edges
  CHECK(i2.seed.edges[0].cls == EdgeClass::GE2);
  CHECK(i2.seed.edges[1].cls == EdgeClass::GE2);
  CHECK(i2.seed.edges[2].cls == EdgeClass::GE1);
  CHECK(i2.seed.edges[3].cls == EdgeClass::EQ1);
  CHECK(i2.seed.edges[4].cls == EdgeClass::EQ1);

  CHECK(seed_rank(preset("I3", catalog).seed) == 2);
  CHECK(seed_rank(preset("I4", catalog).seed) == 2);
  CHECK(preset("I3", catalog).catalog.size() == 30);
  CHECK(preset("I4", catalog).catalog.size() == 25);

  Specification i5 = preset("I5", catalog);
  CHECK(i5.bounds.n_int_lb == 3);
  CHECK(i5.bounds.n_int_ub == 9);
  CHECK(i5.bounds.n_lb == 3);
  CHECK(i5.bounds.n_star == 9);
  CHECK(i5.catalog.size() == 50);
  CHECK(seed_rank(i5.seed) == 1);
  CHECK(i5.seed.edges[0].cls == EdgeClass::GE2);
  CHECK(i5.seed.edges[1].cls == EdgeClass::GE2);
  CHECK(i5.seed.edges[2].cls == EdgeClass::ZeroOne);
}

TEST_CASE("presets validate and survive a save/load round trip") {
  FringeCatalog catalog = catalog_with_at_least(50);
  for (const char *id : {"I1", "I2", "I3", "I4", "I5"}) {
    Specification s = preset(id, catalog);
    CHECK_NOTHROW(s.validate());
    Specification back = Specification::from_json_text(s.to_json_text());
    CHECK(back.to_json_text() == s.to_json_text());
  }
  CHECK_THROWS_AS(preset("I9", catalog), Error);
}

TEST_CASE("preset requires a large enough catalog") {
  FringeCatalog tiny = build_catalog({carbon_path(5)}, 2);
  CHECK_THROWS_AS(preset("I5", tiny), Error);
}

TEST_CASE("validation rejects inverted length windows") {
  FringeCatalog catalog = build_catalog({carbon_path(5)}, 2);
  Specification s = i5_shaped_spec(catalog);
  s.seed.edges[0].l_lb = 5;
  s.seed.edges[0].l_ub = 4;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  try {
    s.validate();
  } catch (const ValidationError &e) {
    CHECK(e.field().find("l_lb") != std::string::npos);
  }
}

TEST_CASE("validation names the offending field") {
  FringeCatalog catalog = build_catalog({carbon_path(5)}, 2);
  Specification s = i5_shaped_spec(catalog);
  s.bounds.n_lb = 99;  // above n_star
  CHECK_THROWS_AS(s.validate(), ValidationError);
  try {
    s.validate();
  } catch (const ValidationError &e) {
    CHECK(e.field() == "bounds.n_lb");
  }
}

TEST_CASE("seed rank on small graphs") {
  SeedGraph tree;
  tree.vertices.resize(3);
  SeedEdge e;
  e.cls = EdgeClass::EQ1;
  e.l_lb = e.l_ub = 1;
  e.tail = 1;
  e.head = 2;
  tree.edges.push_back(e);
  e.tail = 2;
  e.head = 3;
  tree.edges.push_back(e);
  CHECK(seed_rank(tree) == 0);

  SeedGraph disconnected = tree;
  disconnected.vertices.resize(4);
  CHECK_THROWS_AS(seed_rank(disconnected), Error);
}

TEST_CASE("T and F capacities default to n_int_ub minus the seed size") {
  FringeCatalog catalog = catalog_with_at_least(50);
  Specification i5 = preset("I5", catalog);
  CHECK(i5.eff_t_t() == 6);
  CHECK(i5.eff_t_f() == 6);
  i5.t_f = 9;  // still configurable
  CHECK(i5.eff_t_f() == 9);
}
