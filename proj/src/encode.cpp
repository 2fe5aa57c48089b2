//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#include "molkit/encode.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "molkit/common.hpp"

namespace molkit {

using names::el;
using names::idx;

std::vector<int> SchemeGeometry::ia_plus(int i) const {
  std::vector<int> out;
  for (int k = kt_c + 1; k <= m_c; ++k)
    if (tail[k] == i) out.push_back(k);
  return out;
}

std::vector<int> SchemeGeometry::ia_minus(int i) const {
  std::vector<int> out;
  for (int k = kt_c + 1; k <= m_c; ++k)
    if (head[k] == i) out.push_back(k);
  return out;
}

std::vector<int> SchemeGeometry::ib_plus(int i) const {
  std::vector<int> out;
  for (int k = 1; k <= k_c; ++k)
    if (tail[k] == i) out.push_back(k);
  return out;
}

std::vector<int> SchemeGeometry::ib_minus(int i) const {
  std::vector<int> out;
  for (int k = 1; k <= k_c; ++k)
    if (head[k] == i) out.push_back(k);
  return out;
}

SchemeGeometry make_geometry(const Specification &spec) {
  SchemeGeometry g;
  g.t_c = spec.seed.t_c();
  g.tt_c = spec.seed.ttilde_c();
  g.kt_c = spec.seed.ktilde_c();
  g.k_c = spec.seed.k_c();
  g.m_c = spec.seed.m_c();
  g.t_t = spec.eff_t_t();
  g.t_f = spec.eff_t_f();
  g.c_f = g.tt_c + g.t_t;
  g.rank_seed = seed_rank(spec.seed);
  g.tail.assign(g.m_c + 1, 0);
  g.head.assign(g.m_c + 1, 0);
  g.cls.assign(g.m_c + 1, EdgeClass::EQ1);
  for (int k = 1; k <= g.m_c; ++k) {
    const SeedEdge &e = spec.seed.edges[k - 1];
    g.tail[k] = e.tail;
    g.head[k] = e.head;
    g.cls[k] = e.cls;
  }
  return g;
}

std::vector<std::string> ac_lf_key_list(const Specification &spec) {
  std::set<std::string> keys;
  for (const CatalogEntry &e : spec.catalog.entries)
    for (const auto &[key, cnt] : e.stats.ac_lf) keys.insert(key);
  for (const auto &[key, b] : spec.bounds.ac_lf) keys.insert(key);
  return std::vector<std::string>(keys.begin(), keys.end());
}

std::string AssembleCounts::to_json_text() const {
  return strfmt("{\"variables\": %d, \"constraints\": %d}\n", variables,
                constraints);
}

MilpEncoder::MilpEncoder(const Specification &spec, const GnnModel &model)
    : spec_(spec), gnn_(model), geo_(make_geometry(spec)) {
  spec.validate();
  model.check_dims();
  if (static_cast<int>(model.big_m.layer.size()) != model.config.layers + 1 ||
      model.big_m.head.size() != model.config.head_dims().size() - 1)
    throw Error("model has no big-M bounds; train or compute them first");
  for (const CatalogEntry &e : spec.catalog.entries)
    if (!model.embeddings.count(e.code))
      throw Error("model lacks an embedding for catalog tree " + e.code);

  aclf_keys_ = ac_lf_key_list(spec);
}

int MilpEncoder::v(const std::string &name) const {
  int i = model_.var_index(name);
  if (i < 0) throw Error("internal: variable not declared: " + name);
  return i;
}

void MilpEncoder::var(const std::string &name, double lb, double ub,
                      VarKind kind) {
  model_.add_var(name, lb, ub, kind);
}

void MilpEncoder::abs_gate(const std::string &row, const std::string &x,
                           double big, const std::string &gate) {
  model_.add_con(row + "_p", {{v(x), 1.0}, {v(gate), -big}}, '<', 0.0);
  model_.add_con(row + "_n", {{v(x), 1.0}, {v(gate), big}}, '>', 0.0);
}

void MilpEncoder::window(const std::string &row, const std::string &x,
                         const std::vector<LinTerm> &expr, double expr_const,
                         double big, double gate_const,
                         const std::vector<LinTerm> &gate_terms) {
  // |x - expr - expr_const| <= big * (gate_const + gate_terms)
  std::vector<LinTerm> up{{v(x), 1.0}};
  for (const LinTerm &t : expr) up.push_back({t.var, -t.coef});
  for (const LinTerm &t : gate_terms) up.push_back({t.var, -big * t.coef});
  model_.add_con(row + "_p", up, '<', big * gate_const + expr_const);
  std::vector<LinTerm> dn{{v(x), 1.0}};
  for (const LinTerm &t : expr) dn.push_back({t.var, -t.coef});
  for (const LinTerm &t : gate_terms) dn.push_back({t.var, big * t.coef});
  model_.add_con(row + "_n", dn, '>', -big * gate_const + expr_const);
}

// delta = 1 on the negative branch: theta = kappa*tau, tau <= 0;
// delta = 0: theta = tau >= 0.
void MilpEncoder::lrelu_rows(const std::string &prefix, const std::string &tau,
                             const std::string &theta, const std::string &delta,
                             double big, double kappa) {
  int t = v(tau), th = v(theta), d = v(delta);
  model_.add_con(prefix + "_a", {{th, 1.0}, {t, -kappa}, {d, big}}, '<', big);
  model_.add_con(prefix + "_b", {{th, 1.0}, {t, -kappa}, {d, -big}}, '>', -big);
  model_.add_con(prefix + "_c", {{th, 1.0}, {t, -1.0}, {d, -big}}, '<', 0.0);
  model_.add_con(prefix + "_d", {{th, 1.0}, {t, -1.0}, {d, big}}, '>', 0.0);
  model_.add_con(prefix + "_e", {{t, 1.0}, {d, big}}, '>', 0.0);
  model_.add_con(prefix + "_f", {{t, 1.0}, {d, big}}, '<', big);
}

int MilpEncoder::width(int layer) const {
  return layer == 0 ? gnn_.config.k_node() : gnn_.config.k_hid;
}

const Matrix &MilpEncoder::weight(int layer) const {
  return layer == 0 ? gnn_.w0 : gnn_.w[layer - 1];
}

std::string MilpEncoder::theta_name(char x, int i, int z, int l) const {
  return idx(std::string("th") + x, i, z, l);
}

std::vector<LinTerm> MilpEncoder::transformed(char x, int i, int z, int l) const {
  const Matrix &W = weight(l);
  std::vector<LinTerm> out;
  out.reserve(width(l));
  for (int zp = 1; zp <= width(l); ++zp) {
    double c = W.at(zp - 1, z - 1);
    if (c != 0.0) out.push_back({v(theta_name(x, i, zp, l)), c});
  }
  return out;
}

// ---------------------------------------------------------------------------
// variable atlas

void MilpEncoder::declare_variables() {
  if (declared_) throw Error("variables already declared");
  declared_ = true;
  const SchemeGeometry &g = geo_;
  const SpecBounds &b = spec_.bounds;
  const int nf = spec_.catalog.size();
  const GnnConfig &cfg = gnn_.config;
  const int L = cfg.layers;

  // cyclical base
  for (int k = 1; k <= g.m_c; ++k) var(idx("eC", k), 0, 1, VarKind::Binary);
  for (int i = 1; i <= g.t_t; ++i) var(idx("vT", i), 0, 1, VarKind::Binary);
  for (int i = 1; i <= g.t_t + 1; ++i) {
    bool fict = i == 1 || i == g.t_t + 1;
    var(idx("eT", i), 0, fict ? 0 : 1, VarKind::Binary);
  }
  for (int i = 1; i <= g.t_t; ++i)
    var(idx("chiT", i), 0, g.k_c, VarKind::Integer);
  for (int i = 1; i <= g.t_t; ++i)
    for (int k = 0; k <= g.k_c; ++k) var(idx("chiTb", i, k), 0, 1, VarKind::Binary);
  var(idx("clrT", 0), 0, g.t_t, VarKind::Integer);
  for (int k = 1; k <= g.k_c; ++k) {
    const SeedEdge &e = spec_.seed.edges[k - 1];
    var(idx("clrT", k), e.l_lb - 1, e.l_ub - 1, VarKind::Integer);
  }
  for (int k = 0; k <= g.k_c; ++k) var(idx("dchiT", k), 0, 1, VarKind::Binary);
  for (int i = 1; i <= g.t_c; ++i) {
    var(idx("degCm", i), 0, 4, VarKind::Integer);
    var(idx("degCp", i), 0, 4, VarKind::Integer);
  }
  int n01 = 0;
  for (int k = 1; k <= g.m_c; ++k) n01 += g.cls[k] == EdgeClass::ZeroOne ? 1 : 0;
  var("rank", g.rank_seed - n01, g.rank_seed, VarKind::Integer);

  // leaf paths
  var("nint", b.n_int_lb, b.n_int_ub, VarKind::Integer);
  for (int i = 1; i <= g.t_f; ++i) var(idx("vF", i), 0, 1, VarKind::Binary);
  for (int i = 1; i <= g.t_f + 1; ++i) {
    bool fict = i == 1 || i == g.t_f + 1;
    var(idx("eF", i), 0, fict ? 0 : 1, VarKind::Binary);
  }
  for (int i = 1; i <= g.t_f; ++i) var(idx("chiF", i), 0, g.c_f, VarKind::Integer);
  for (int i = 1; i <= g.t_f; ++i)
    for (int c = 0; c <= g.c_f; ++c) var(idx("chiFb", i, c), 0, 1, VarKind::Binary);
  for (int c = 0; c <= g.c_f; ++c) var(idx("clrF", c), 0, g.t_f, VarKind::Integer);
  for (int c = 0; c <= g.c_f; ++c) {
    int lb = 0;
    if (c >= 1 && c <= g.tt_c) lb = spec_.seed.vertices[c - 1].bl_lb;
    var(idx("dchiF", c), lb, 1, VarKind::Binary);
  }
  for (int k = 1; k <= g.k_c; ++k)
    for (int i = 1; i <= g.t_t; ++i) var(idx("bl", k, i), 0, 1, VarKind::Binary);

  // fringe assignment
  var("nG", b.n_lb, b.n_star, VarKind::Integer);
  for (int i = 1; i <= g.t_c; ++i)
    for (int p : spec_.fringe_set(i)) var(idx("dfrC", i, p), 0, 1, VarKind::Binary);
  for (int i = 1; i <= g.t_t; ++i)
    for (int p = 1; p <= nf; ++p) var(idx("dfrT", i, p), 0, 1, VarKind::Binary);
  for (int i = 1; i <= g.t_f; ++i)
    for (int p = 1; p <= nf; ++p) var(idx("dfrF", i, p), 0, 1, VarKind::Binary);
  for (int p = 1; p <= nf; ++p) {
    IntPair fb = spec_.fc_bound(p);
    var(idx("fc", p), fb.lb, fb.ub, VarKind::Integer);
  }
  for (size_t q = 0; q < aclf_keys_.size(); ++q) {
    IntPair ab = spec_.ac_lf_bound(aclf_keys_[q]);
    var(idx("aclf", static_cast<int>(q + 1)), ab.lb, ab.ub, VarKind::Integer);
  }
  auto per_x = [&](const char *fam, int lo_c, int lo_t, int lo_f, int hi,
                   VarKind kind) {
    for (int i = 1; i <= g.t_c; ++i) var(idx(std::string(fam) + "C", i), lo_c, hi, kind);
    for (int i = 1; i <= g.t_t; ++i) var(idx(std::string(fam) + "T", i), lo_t, hi, kind);
    for (int i = 1; i <= g.t_f; ++i) var(idx(std::string(fam) + "F", i), lo_f, hi, kind);
  };
  per_x("degex", 0, 0, 0, 3, VarKind::Integer);
  per_x("hydd", 0, 0, 0, 4, VarKind::Integer);
  per_x("eled", -3, -3, -3, 3, VarKind::Integer);
  per_x("h", 0, 0, 0, spec_.rho, VarKind::Integer);
  for (int k = 1; k <= g.k_c; ++k)
    for (int i = 1; i <= g.t_t; ++i) var(idx("sig", k, i), 0, 1, VarKind::Binary);

  // degrees
  per_x("deg", 0, 0, 0, 4, VarKind::Integer);
  for (int i = 1; i <= g.t_c; ++i) {
    var(idx("degCT", i), 0, 4, VarKind::Integer);
    var(idx("degTC", i), 0, 4, VarKind::Integer);
  }
  for (int i = 1; i <= g.t_c; ++i) var(idx("degiC", i), 1, 4, VarKind::Integer);
  for (int i = 1; i <= g.t_t; ++i) var(idx("degiT", i), 0, 4, VarKind::Integer);
  for (int i = 1; i <= g.t_f; ++i) var(idx("degiF", i), 0, 4, VarKind::Integer);
  for (int i = 1; i <= g.t_c; ++i)
    for (int d = 1; d <= 4; ++d) var(idx("ddgC", i, d), 0, 1, VarKind::Binary);
  for (int i = 1; i <= g.t_t; ++i)
    for (int d = 0; d <= 4; ++d) var(idx("ddgT", i, d), 0, 1, VarKind::Binary);
  for (int i = 1; i <= g.t_f; ++i)
    for (int d = 0; d <= 4; ++d) var(idx("ddgF", i, d), 0, 1, VarKind::Binary);
  for (int i = 1; i <= g.t_c; ++i)
    for (int d = 1; d <= 4; ++d) var(idx("ddgiC", i, d), 0, 1, VarKind::Binary);
  for (int i = 1; i <= g.t_t; ++i)
    for (int d = 0; d <= 4; ++d) var(idx("ddgiT", i, d), 0, 1, VarKind::Binary);
  for (int i = 1; i <= g.t_f; ++i)
    for (int d = 0; d <= 4; ++d) var(idx("ddgiF", i, d), 0, 1, VarKind::Binary);
  for (int d = 1; d <= 4; ++d)
    var(idx("dgv", d), b.dg[d - 1].lb, b.dg[d - 1].ub, VarKind::Integer);
  for (int d = 1; d <= 4; ++d)
    var(idx("dgi", d), b.dg_int[d - 1].lb, b.dg_int[d - 1].ub, VarKind::Integer);

  // multiplicity
  for (int i = 2; i <= g.t_t; ++i) var(idx("btT", i), 0, 3, VarKind::Integer);
  for (int i = 2; i <= g.t_f; ++i) var(idx("btF", i), 0, 3, VarKind::Integer);
  for (int k = g.kt_c + 1; k <= g.m_c; ++k) var(idx("bC", k), 0, 3, VarKind::Integer);
  for (int k = 1; k <= g.k_c; ++k) {
    var(idx("bCT", k), 0, 3, VarKind::Integer);
    var(idx("bTC", k), 0, 3, VarKind::Integer);
  }
  for (int c = 1; c <= g.c_f; ++c) var(idx("bsF", c), 0, 3, VarKind::Integer);
  per_x("bex", 0, 0, 0, 4, VarKind::Integer);
  for (int i = 2; i <= g.t_t; ++i)
    for (int m = 0; m <= 3; ++m) var(idx("dbT", i, m), 0, 1, VarKind::Binary);
  for (int i = 2; i <= g.t_f; ++i)
    for (int m = 0; m <= 3; ++m) var(idx("dbF", i, m), 0, 1, VarKind::Binary);
  for (int k = g.kt_c + 1; k <= g.m_c; ++k)
    for (int m = 0; m <= 3; ++m) var(idx("dbC", k, m), 0, 1, VarKind::Binary);
  for (int k = 1; k <= g.k_c; ++k)
    for (int m = 0; m <= 3; ++m) {
      var(idx("dbCT", k, m), 0, 1, VarKind::Binary);
      var(idx("dbTC", k, m), 0, 1, VarKind::Binary);
    }
  for (int c = 1; c <= g.c_f; ++c)
    for (int m = 0; m <= 3; ++m) var(idx("dbsF", c, m), 0, 1, VarKind::Binary);
  for (int m = 1; m <= 3; ++m) {
    var(idx("bdint", m), 0, 2 * b.n_int_ub, VarKind::Integer);
    for (const char *fam : {"bdC", "bdT", "bdCT", "bdTC", "bdF", "bdCF", "bdTF"})
      var(idx(fam, m), 0, 2 * b.n_int_ub, VarKind::Integer);
  }

  // elements and valence
  for (int i = 1; i <= g.t_t; ++i) {
    var(idx("btCTv", i), 0, 3, VarKind::Integer);
    var(idx("btTCv", i), 0, 3, VarKind::Integer);
  }
  for (int i = 1; i <= g.t_f; ++i) {
    var(idx("btCF", i), 0, 3, VarKind::Integer);
    var(idx("btTF", i), 0, 3, VarKind::Integer);
  }
  const int n_el = static_cast<int>(spec_.lambda_int.size());
  per_x("al", 0, 0, 0, n_el, VarKind::Integer);
  for (int i = 1; i <= g.t_c; ++i)
    for (const std::string &a : spec_.lambda_int)
      var(el("dalC", i, a), 0, 1, VarKind::Binary);
  for (int i = 1; i <= g.t_t; ++i)
    for (const std::string &a : spec_.lambda_int)
      var(el("dalT", i, a), 0, 1, VarKind::Binary);
  for (int i = 1; i <= g.t_f; ++i)
    for (const std::string &a : spec_.lambda_int)
      var(el("dalF", i, a), 0, 1, VarKind::Binary);

  const ElementTable &et = ElementTable::defaults();
  std::set<std::string> lambda_all(spec_.lambda_int.begin(), spec_.lambda_int.end());
  lambda_all.insert(spec_.lambda_ex.begin(), spec_.lambda_ex.end());
  int max_mass = 0;
  for (const std::string &a : lambda_all) max_mass = std::max(max_mass, et.mass10(a));
  IntPair hb = spec_.na_bound("H");
  if (!lambda_all.count("H")) hb = {0, 0};
  int atoms_hi = b.n_star + hb.ub;
  var("Mass", 0, static_cast<double>(atoms_hi) * max_mass, VarKind::Integer);
  var("msbar", 0, max_mass, VarKind::Continuous);
  for (int i = b.n_lb + hb.lb; i <= atoms_hi; ++i)
    var(idx("datm", i), 0, 1, VarKind::Binary);
  for (const std::string &a : lambda_all) {
    IntPair nb = spec_.na_bound(a);
    var("na_" + a, nb.lb, nb.ub, VarKind::Integer);
  }
  for (const std::string &a : spec_.lambda_int) {
    IntPair nb = spec_.na_int_bound(a);
    var("naint_" + a, nb.lb, nb.ub, VarKind::Integer);
  }
  for (const std::string &a : spec_.lambda_ex) {
    IntPair nb = spec_.na_bound(a);
    var("naexC_" + a, 0, nb.ub, VarKind::Integer);
    var("naexT_" + a, 0, nb.ub, VarKind::Integer);
    var("naexF_" + a, 0, nb.ub, VarKind::Integer);
    var("naex_" + a, 0, nb.ub, VarKind::Integer);
  }

  // bond-count windows on paths
  for (int k = 1; k <= g.k_c; ++k)
    for (int i = 2; i <= g.t_t; ++i)
      for (int m = 2; m <= 3; ++m) var(idx("bdTk", k, i, m), 0, 1, VarKind::Binary);

  // network simulation
  const Vec &M = gnn_.big_m.layer;
  for (int i = 1; i <= g.t_c; ++i)
    for (int z = 1; z <= cfg.k_node(); ++z)
      var(idx("thC", i, z, 0), -M[0], M[0], VarKind::Continuous);
  for (int i = 1; i <= g.t_t; ++i)
    for (int z = 1; z <= cfg.k_node(); ++z)
      var(idx("thT", i, z, 0), -M[0], M[0], VarKind::Continuous);
  for (int i = 1; i <= g.t_f; ++i)
    for (int z = 1; z <= cfg.k_node(); ++z)
      var(idx("thF", i, z, 0), -M[0], M[0], VarKind::Continuous);
  for (int l = 1; l <= L; ++l) {
    auto decl_layer = [&](char x, int count) {
      for (int i = 1; i <= count; ++i)
        for (int z = 1; z <= cfg.k_hid; ++z) {
          var(theta_name(x, i, z, l), -M[l], M[l], VarKind::Continuous);
          var(idx(std::string("tau") + x, i, z, l), -M[l], M[l],
              VarKind::Continuous);
          var(idx(std::string("dt") + x, i, z, l), 0, 1, VarKind::Binary);
        }
    };
    decl_layer('C', g.t_c);
    decl_layer('T', g.t_t);
    decl_layer('F', g.t_f);
  }
  for (int l = 0; l < L; ++l) {
    double Ml = M[l];
    for (int z = 1; z <= cfg.k_hid; ++z) {
      for (int k = g.kt_c + 1; k <= g.m_c; ++k) {
        var(idx("thCm", k, z, l), -Ml, Ml, VarKind::Continuous);
        var(idx("thCp", k, z, l), -Ml, Ml, VarKind::Continuous);
      }
      for (int i = 1; i <= g.t_t; ++i) {
        var(idx("thTm", i, z, l), -Ml, Ml, VarKind::Continuous);
        var(idx("thTp", i, z, l), -Ml, Ml, VarKind::Continuous);
      }
      for (int i = 1; i <= g.t_f; ++i) {
        var(idx("thFm", i, z, l), -Ml, Ml, VarKind::Continuous);
        var(idx("thFp", i, z, l), -Ml, Ml, VarKind::Continuous);
      }
      for (int k = 1; k <= g.k_c; ++k) {
        var(idx("thCTT", k, z, l), -Ml, Ml, VarKind::Continuous);
        var(idx("thTCT", k, z, l), -Ml, Ml, VarKind::Continuous);
      }
      for (int i = 1; i <= g.t_t; ++i) {
        var(idx("thCTC", i, z, l), -Ml, Ml, VarKind::Continuous);
        var(idx("thTCC", i, z, l), -Ml, Ml, VarKind::Continuous);
        var(idx("thTFF", i, z, l), -Ml, Ml, VarKind::Continuous);
      }
      for (int c = 1; c <= g.tt_c; ++c)
        var(idx("thCFF", c, z, l), -Ml, Ml, VarKind::Continuous);
      for (int i = 1; i <= g.t_f; ++i) {
        var(idx("thCFC", i, z, l), -Ml, Ml, VarKind::Continuous);
        var(idx("thTFT", i, z, l), -Ml, Ml, VarKind::Continuous);
      }
    }
  }
  for (int p = 1; p <= cfg.k_c; ++p) {
    var(idx("tftr", p), -M[L], M[L], VarKind::Continuous);
    var(idx("dtftr", p), 0, 1, VarKind::Binary);
    var(idx("thftr", p), -M[L], M[L], VarKind::Continuous);
  }
  auto dims = cfg.head_dims();
  const Vec &Mh = gnn_.big_m.head;
  for (size_t h = 0; h + 2 < dims.size(); ++h) {
    for (int j = 1; j <= dims[h + 1]; ++j) {
      var(idx("hdt" + std::to_string(h), j), -Mh[h], Mh[h], VarKind::Continuous);
      var(idx("hdd" + std::to_string(h), j), 0, 1, VarKind::Binary);
      var(idx("hda" + std::to_string(h), j), -Mh[h], Mh[h], VarKind::Continuous);
    }
  }
  var("y", -Mh.back(), Mh.back(), VarKind::Continuous);
}

// ---------------------------------------------------------------------------
// A.1 cyclical base

void MilpEncoder::build_cyclical_base() {
  const SchemeGeometry &g = geo_;
  std::vector<LinTerm> rank_terms{{v("rank"), 1.0}};
  int n01 = 0;
  for (int k = 1; k <= g.m_c; ++k) {
    if (g.cls[k] != EdgeClass::ZeroOne) continue;
    rank_terms.push_back({v(idx("eC", k)), -1.0});
    ++n01;
  }
  model_.add_con("co_rank", rank_terms, '=', g.rank_seed - n01);

  for (int k = 1; k <= g.m_c; ++k) {
    switch (g.cls[k]) {
      case EdgeClass::EQ1:
        model_.add_con(idx("co_fix", k), {{v(idx("eC", k)), 1.0}}, '=', 1.0);
        break;
      case EdgeClass::GE2:
        model_.add_con(idx("co_zero", k), {{v(idx("eC", k)), 1.0}}, '=', 0.0);
        model_.add_con(idx("co_clr", k), {{v(idx("clrT", k)), 1.0}}, '>', 1.0);
        break;
      case EdgeClass::GE1:
        model_.add_con(idx("co_ge1a", k),
                       {{v(idx("eC", k)), 1.0}, {v(idx("clrT", k)), 1.0}}, '>', 1.0);
        model_.add_con(idx("co_ge1b", k),
                       {{v(idx("clrT", k)), 1.0},
                        {v(idx("eC", k)), static_cast<double>(g.t_t)}},
                       '<', g.t_t);
        break;
      case EdgeClass::ZeroOne:
        break;
    }
  }

  for (int i = 1; i <= g.t_c; ++i) {
    std::vector<LinTerm> tm{{v(idx("degCm", i)), -1.0}};
    for (int k : g.ia_minus(i)) tm.push_back({v(idx("eC", k)), 1.0});
    model_.add_con(idx("co_degm", i), tm, '=', 0.0);
    std::vector<LinTerm> tp{{v(idx("degCp", i)), -1.0}};
    for (int k : g.ia_plus(i)) tp.push_back({v(idx("eC", k)), 1.0});
    model_.add_con(idx("co_degp", i), tp, '=', 0.0);
  }

  for (int i = 1; i <= g.t_t; ++i) {
    model_.add_con(idx("co_unused", i),
                   {{v(idx("chiTb", i, 0)), 1.0}, {v(idx("vT", i)), 1.0}}, '=', 1.0);
    std::vector<LinTerm> oh, lin{{v(idx("chiT", i)), -1.0}};
    for (int k = 0; k <= g.k_c; ++k) {
      oh.push_back({v(idx("chiTb", i, k)), 1.0});
      if (k > 0) lin.push_back({v(idx("chiTb", i, k)), static_cast<double>(k)});
    }
    model_.add_con(idx("co_onehot", i), oh, '=', 1.0);
    model_.add_con(idx("co_colorlink", i), lin, '=', 0.0);
  }

  for (int k = 0; k <= g.k_c; ++k) {
    std::vector<LinTerm> cnt{{v(idx("clrT", k)), -1.0}};
    std::vector<LinTerm> hi{{v(idx("dchiT", k)), static_cast<double>(-g.t_t)}};
    std::vector<LinTerm> lo{{v(idx("dchiT", k)), -1.0}};
    for (int i = 1; i <= g.t_t; ++i) {
      cnt.push_back({v(idx("chiTb", i, k)), 1.0});
      hi.push_back({v(idx("chiTb", i, k)), 1.0});
      lo.push_back({v(idx("chiTb", i, k)), 1.0});
    }
    model_.add_con(idx("co_clrcnt", k), cnt, '=', 0.0);
    model_.add_con(idx("co_dchihi", k), hi, '<', 0.0);
    model_.add_con(idx("co_dchilo", k), lo, '>', 0.0);
  }

  for (int i = 2; i <= g.t_t; ++i) {
    model_.add_con(idx("co_mono", i),
                   {{v(idx("vT", i - 1)), 1.0}, {v(idx("vT", i)), -1.0}}, '>', 0.0);
    double kc = static_cast<double>(g.k_c);
    model_.add_con(idx("co_ctga", i),
                   {{v(idx("chiT", i - 1)), 1.0},
                    {v(idx("chiT", i)), -1.0},
                    {v(idx("vT", i - 1)), -kc},
                    {v(idx("eT", i)), kc}},
                   '<', 0.0);
    model_.add_con(idx("co_ctgb", i),
                   {{v(idx("chiT", i - 1)), 1.0},
                    {v(idx("chiT", i)), -1.0},
                    {v(idx("vT", i - 1)), -1.0},
                    {v(idx("eT", i)), 1.0}},
                   '>', 0.0);
  }
}

// ---------------------------------------------------------------------------
// A.2 leaf paths

void MilpEncoder::build_leaf_paths() {
  const SchemeGeometry &g = geo_;
  for (int i = 1; i <= g.t_f; ++i) {
    model_.add_con(idx("lp_unused", i),
                   {{v(idx("chiFb", i, 0)), 1.0}, {v(idx("vF", i)), 1.0}}, '=', 1.0);
    std::vector<LinTerm> oh, lin{{v(idx("chiF", i)), -1.0}};
    for (int c = 0; c <= g.c_f; ++c) {
      oh.push_back({v(idx("chiFb", i, c)), 1.0});
      if (c > 0) lin.push_back({v(idx("chiFb", i, c)), static_cast<double>(c)});
    }
    model_.add_con(idx("lp_onehot", i), oh, '=', 1.0);
    model_.add_con(idx("lp_colorlink", i), lin, '=', 0.0);
  }
  for (int c = 0; c <= g.c_f; ++c) {
    std::vector<LinTerm> cnt{{v(idx("clrF", c)), -1.0}};
    std::vector<LinTerm> hi{{v(idx("dchiF", c)), static_cast<double>(-g.t_f)}};
    std::vector<LinTerm> lo{{v(idx("dchiF", c)), -1.0}};
    for (int i = 1; i <= g.t_f; ++i) {
      cnt.push_back({v(idx("chiFb", i, c)), 1.0});
      hi.push_back({v(idx("chiFb", i, c)), 1.0});
      lo.push_back({v(idx("chiFb", i, c)), 1.0});
    }
    model_.add_con(idx("lp_clrcnt", c), cnt, '=', 0.0);
    model_.add_con(idx("lp_dchihi", c), hi, '<', 0.0);
    model_.add_con(idx("lp_dchilo", c), lo, '>', 0.0);
  }
  model_.add_con("lp_ef_first", {{v(idx("eF", 1)), 1.0}}, '=', 0.0);
  model_.add_con("lp_ef_last", {{v(idx("eF", g.t_f + 1)), 1.0}}, '=', 0.0);
  for (int i = 2; i <= g.t_f; ++i) {
    model_.add_con(idx("lp_mono", i),
                   {{v(idx("vF", i - 1)), 1.0}, {v(idx("vF", i)), -1.0}}, '>', 0.0);
    double cf = static_cast<double>(g.c_f);
    model_.add_con(idx("lp_ctga", i),
                   {{v(idx("chiF", i - 1)), 1.0},
                    {v(idx("chiF", i)), -1.0},
                    {v(idx("vF", i - 1)), -cf},
                    {v(idx("eF", i)), cf}},
                   '<', 0.0);
    model_.add_con(idx("lp_ctgb", i),
                   {{v(idx("chiF", i - 1)), 1.0},
                    {v(idx("chiF", i)), -1.0},
                    {v(idx("vF", i - 1)), -1.0},
                    {v(idx("eF", i)), 1.0}},
                   '>', 0.0);
  }
  for (int k = 1; k <= g.k_c; ++k)
    for (int i = 1; i <= g.t_t; ++i)
      model_.add_con(idx("lp_bl", k, i),
                     {{v(idx("bl", k, i)), 1.0},
                      {v(idx("dchiF", g.tt_c + i)), -1.0},
                      {v(idx("chiTb", i, k)), -1.0}},
                     '>', -1.0);
  if (g.k_c > 0 && g.t_t > 0) {
    std::vector<LinTerm> cap;
    for (int k = 1; k <= g.k_c; ++k)
      for (int i = 1; i <= g.t_t; ++i) cap.push_back({v(idx("bl", k, i)), 1.0});
    for (int i = 1; i <= g.t_t; ++i)
      cap.push_back({v(idx("dchiF", g.tt_c + i)), -1.0});
    model_.add_con("lp_blcap", cap, '<', 0.0);
  }
  for (int k = 1; k <= g.k_c; ++k) {
    const SeedEdge &e = spec_.seed.edges[k - 1];
    std::vector<LinTerm> s;
    for (int i = 1; i <= g.t_t; ++i) s.push_back({v(idx("bl", k, i)), 1.0});
    if (s.empty()) continue;
    model_.add_con(idx("lp_bllo", k), s, '>', e.bl_lb);
    model_.add_con(idx("lp_blhi", k), s, '<', e.bl_ub);
  }
  std::vector<LinTerm> nint{{v("nint"), -1.0}};
  for (int i = 1; i <= g.t_t; ++i) nint.push_back({v(idx("vT", i)), 1.0});
  for (int i = 1; i <= g.t_f; ++i) nint.push_back({v(idx("vF", i)), 1.0});
  model_.add_con("lp_nint", nint, '=', -g.t_c);
}

// ---------------------------------------------------------------------------
// A.3 fringe trees

void MilpEncoder::build_fringe_assignment() {
  const SchemeGeometry &g = geo_;
  if (spec_.catalog.size() == 0) throw Error("catalog is empty");
  const int nf = spec_.catalog.size();
  const int nstar = spec_.bounds.n_star;
  const int rho = spec_.rho;

  for (int i = 1; i <= g.t_c; ++i) {
    std::vector<LinTerm> one;
    for (int p : spec_.fringe_set(i)) one.push_back({v(idx("dfrC", i, p)), 1.0});
    model_.add_con(idx("fa_oneC", i), one, '=', 1.0);
  }
  for (int i = 1; i <= g.t_t; ++i) {
    std::vector<LinTerm> one{{v(idx("vT", i)), -1.0}};
    for (int p = 1; p <= nf; ++p) one.push_back({v(idx("dfrT", i, p)), 1.0});
    model_.add_con(idx("fa_oneT", i), one, '=', 0.0);
  }
  for (int i = 1; i <= g.t_f; ++i) {
    std::vector<LinTerm> one{{v(idx("vF", i)), -1.0}};
    for (int p = 1; p <= nf; ++p) one.push_back({v(idx("dfrF", i, p)), 1.0});
    model_.add_con(idx("fa_oneF", i), one, '=', 0.0);
  }

  auto stat_link = [&](char x, int count, const char *fam,
                       auto stat_of) {
    for (int i = 1; i <= count; ++i) {
      std::string xfam = std::string(fam) + x;
      std::vector<LinTerm> s{{v(idx(xfam, i)), -1.0}};
      std::vector<int> set = x == 'C' ? spec_.fringe_set(i) : std::vector<int>();
      if (x != 'C') {
        set.resize(nf);
        for (int p = 0; p < nf; ++p) set[p] = p + 1;
      }
      for (int p : set) {
        double c = stat_of(spec_.catalog.entry(p));
        if (c != 0.0)
          s.push_back({v(idx(std::string("dfr") + x, i, p)), c});
      }
      model_.add_con(idx(std::string("fa_") + fam + x, i), s, '=', 0.0);
    }
  };
  for (char x : {'C', 'T', 'F'}) {
    int count = x == 'C' ? g.t_c : x == 'T' ? g.t_t : g.t_f;
    stat_link(x, count, "degex", [](const CatalogEntry &e) { return e.stats.deg_r; });
    stat_link(x, count, "hydd",
              [](const CatalogEntry &e) { return e.stats.hyddeg_r; });
    stat_link(x, count, "eled", [](const CatalogEntry &e) { return e.stats.vion; });
    stat_link(x, count, "h", [](const CatalogEntry &e) { return e.stats.ht_h; });
  }

  for (int i = 1; i <= g.t_f; ++i) {
    std::vector<LinTerm> s{{v(idx("vF", i)), -1.0}, {v(idx("eF", i + 1)), 1.0}};
    for (int p = 1; p <= nf; ++p)
      if (spec_.catalog.entry(p).stats.ht_h == rho)
        s.push_back({v(idx("dfrF", i, p)), 1.0});
    model_.add_con(idx("fa_endrho", i), s, '>', 0.0);
  }

  std::vector<LinTerm> n_acc{{v("nG"), -1.0}};
  for (int i = 1; i <= g.t_c; ++i)
    for (int p : spec_.fringe_set(i))
      if (spec_.catalog.entry(p).stats.n_h != 0)
        n_acc.push_back({v(idx("dfrC", i, p)),
                         static_cast<double>(spec_.catalog.entry(p).stats.n_h)});
  for (int i = 1; i <= g.t_t; ++i) {
    n_acc.push_back({v(idx("vT", i)), 1.0});
    for (int p = 1; p <= nf; ++p)
      if (spec_.catalog.entry(p).stats.n_h != 0)
        n_acc.push_back({v(idx("dfrT", i, p)),
                         static_cast<double>(spec_.catalog.entry(p).stats.n_h)});
  }
  for (int i = 1; i <= g.t_f; ++i) {
    n_acc.push_back({v(idx("vF", i)), 1.0});
    for (int p = 1; p <= nf; ++p)
      if (spec_.catalog.entry(p).stats.n_h != 0)
        n_acc.push_back({v(idx("dfrF", i, p)),
                         static_cast<double>(spec_.catalog.entry(p).stats.n_h)});
  }
  model_.add_con("fa_n", n_acc, '=', -g.t_c);

  for (int p = 1; p <= nf; ++p) {
    std::vector<LinTerm> s{{v(idx("fc", p)), -1.0}};
    for (int i = 1; i <= g.t_c; ++i) {
      auto set = spec_.fringe_set(i);
      if (std::find(set.begin(), set.end(), p) != set.end())
        s.push_back({v(idx("dfrC", i, p)), 1.0});
    }
    for (int i = 1; i <= g.t_t; ++i) s.push_back({v(idx("dfrT", i, p)), 1.0});
    for (int i = 1; i <= g.t_f; ++i) s.push_back({v(idx("dfrF", i, p)), 1.0});
    model_.add_con(idx("fa_fc", p), s, '=', 0.0);
  }

  for (size_t q = 0; q < aclf_keys_.size(); ++q) {
    const std::string &key = aclf_keys_[q];
    std::vector<LinTerm> s{{v(idx("aclf", static_cast<int>(q + 1))), -1.0}};
    auto add = [&](char x, int i, int p) {
      const auto &m = spec_.catalog.entry(p).stats.ac_lf;
      auto it = m.find(key);
      if (it != m.end() && it->second != 0)
        s.push_back({v(idx(std::string("dfr") + x, i, p)),
                     static_cast<double>(it->second)});
    };
    for (int i = 1; i <= g.t_c; ++i)
      for (int p : spec_.fringe_set(i)) add('C', i, p);
    for (int i = 1; i <= g.t_t; ++i)
      for (int p = 1; p <= nf; ++p) add('T', i, p);
    for (int i = 1; i <= g.t_f; ++i)
      for (int p = 1; p <= nf; ++p) add('F', i, p);
    model_.add_con(idx("fa_aclf", static_cast<int>(q + 1)), s, '=', 0.0);
  }

  // height windows for the trees rooted at seed vertices
  for (int i = 1; i <= g.tt_c; ++i) {
    const SeedVertex &sv = spec_.seed.vertices[i - 1];
    model_.add_con(idx("fa_chclo1", i),
                   {{v(idx("hC", i)), 1.0},
                    {v(idx("dchiF", i)), static_cast<double>(nstar)}},
                   '>', sv.ch_lb);
    model_.add_con(idx("fa_chclo2", i), {{v(idx("clrF", i)), 1.0}}, '>',
                   sv.ch_lb - rho);
    model_.add_con(idx("fa_chchi1", i), {{v(idx("hC", i)), 1.0}}, '<', sv.ch_ub);
    model_.add_con(idx("fa_chchi2", i),
                   {{v(idx("clrF", i)), 1.0},
                    {v(idx("dchiF", i)), static_cast<double>(nstar)}},
                   '<', sv.ch_ub - rho + nstar);
  }
  for (int i = g.tt_c + 1; i <= g.t_c; ++i) {
    const SeedVertex &sv = spec_.seed.vertices[i - 1];
    model_.add_con(idx("fa_chclo", i), {{v(idx("hC", i)), 1.0}}, '>', sv.ch_lb);
    model_.add_con(idx("fa_chchi", i), {{v(idx("hC", i)), 1.0}}, '<', sv.ch_ub);
  }

  // height windows along colored paths, via the selector sigma
  for (int k = 1; k <= g.k_c; ++k) {
    const SeedEdge &e = spec_.seed.edges[k - 1];
    for (int i = 1; i <= g.t_t; ++i) {
      model_.add_con(idx("fa_chthi1", k, i),
                     {{v(idx("hT", i)), 1.0},
                      {v(idx("dchiF", g.tt_c + i)), static_cast<double>(-nstar)},
                      {v(idx("chiTb", i, k)), static_cast<double>(nstar)}},
                     '<', e.ch_ub + nstar);
      model_.add_con(idx("fa_chthi2", k, i),
                     {{v(idx("clrF", g.tt_c + i)), 1.0},
                      {v(idx("dchiF", g.tt_c + i)), static_cast<double>(nstar)},
                      {v(idx("chiTb", i, k)), static_cast<double>(nstar)}},
                     '<', e.ch_ub - rho + 2 * nstar);
    }
  }
  for (int k = 1; k <= g.k_c; ++k) {
    std::vector<LinTerm> s{{v(idx("dchiT", k)), -1.0}};
    for (int i = 1; i <= g.t_t; ++i) s.push_back({v(idx("sig", k, i)), 1.0});
    model_.add_con(idx("fa_sig", k), s, '=', 0.0);
  }
  for (int k = 1; k <= g.k_c; ++k) {
    const SeedEdge &e = spec_.seed.edges[k - 1];
    for (int i = 1; i <= g.t_t; ++i) {
      model_.add_con(idx("fa_sigx", k, i),
                     {{v(idx("chiTb", i, k)), 1.0}, {v(idx("sig", k, i)), -1.0}},
                     '>', 0.0);
      model_.add_con(idx("fa_chtlo1", k, i),
                     {{v(idx("hT", i)), 1.0},
                      {v(idx("dchiF", g.tt_c + i)), static_cast<double>(nstar)},
                      {v(idx("sig", k, i)), static_cast<double>(-nstar)}},
                     '>', e.ch_lb - nstar);
      model_.add_con(idx("fa_chtlo2", k, i),
                     {{v(idx("clrF", g.tt_c + i)), 1.0},
                      {v(idx("dchiF", g.tt_c + i)), static_cast<double>(-nstar)},
                      {v(idx("sig", k, i)), static_cast<double>(-nstar)}},
                     '>', e.ch_lb - rho - 2 * nstar);
    }
  }
}

// ---------------------------------------------------------------------------
// A.4 degrees

void MilpEncoder::build_degrees() {
  const SchemeGeometry &g = geo_;
  for (int i = 1; i <= g.t_c; ++i) {
    std::vector<LinTerm> ct{{v(idx("degCT", i)), -1.0}};
    for (int k : g.ib_plus(i)) ct.push_back({v(idx("dchiT", k)), 1.0});
    model_.add_con(idx("dg_ct", i), ct, '=', 0.0);
    std::vector<LinTerm> tc{{v(idx("degTC", i)), -1.0}};
    for (int k : g.ib_minus(i)) tc.push_back({v(idx("dchiT", k)), 1.0});
    model_.add_con(idx("dg_tc", i), tc, '=', 0.0);
  }
  for (int i = 1; i <= g.t_c; ++i) {
    std::vector<LinTerm> s{{v(idx("degCm", i)), 1.0},
                           {v(idx("degCp", i)), 1.0},
                           {v(idx("degCT", i)), 1.0},
                           {v(idx("degTC", i)), 1.0},
                           {v(idx("degiC", i)), -1.0}};
    if (i <= g.tt_c) s.push_back({v(idx("dchiF", i)), 1.0});
    model_.add_con(idx("dg_icint", i), s, '=', 0.0);
    model_.add_con(idx("dg_csum", i),
                   {{v(idx("degiC", i)), 1.0},
                    {v(idx("degexC", i)), 1.0},
                    {v(idx("degC", i)), -1.0}},
                   '=', 0.0);
    std::vector<LinTerm> fr{{v(idx("degiC", i)), 1.0}};
    for (int p : spec_.fringe_set(i))
      if (spec_.catalog.entry(p).stats.ht_h == spec_.rho)
        fr.push_back({v(idx("dfrC", i, p)), 1.0});
    model_.add_con(idx("dg_c2fr", i), fr, '>', 2.0);
  }
  for (int i = 1; i <= g.t_t; ++i) {
    model_.add_con(idx("dg_tint", i),
                   {{v(idx("vT", i)), 2.0},
                    {v(idx("dchiF", g.tt_c + i)), 1.0},
                    {v(idx("degiT", i)), -1.0}},
                   '=', 0.0);
    model_.add_con(idx("dg_tsum", i),
                   {{v(idx("degiT", i)), 1.0},
                    {v(idx("degexT", i)), 1.0},
                    {v(idx("degT", i)), -1.0}},
                   '=', 0.0);
  }
  for (int i = 1; i <= g.t_f; ++i) {
    model_.add_con(idx("dg_fint", i),
                   {{v(idx("vF", i)), 1.0},
                    {v(idx("eF", i + 1)), 1.0},
                    {v(idx("degiF", i)), -1.0}},
                   '=', 0.0);
    model_.add_con(idx("dg_fsum", i),
                   {{v(idx("degiF", i)), 1.0},
                    {v(idx("degexF", i)), 1.0},
                    {v(idx("degF", i)), -1.0}},
                   '=', 0.0);
  }
  auto onehots = [&](char x, int count, int dlo) {
    for (int i = 1; i <= count; ++i) {
      std::vector<LinTerm> oh, lin, ohi, lini;
      for (int d = dlo; d <= 4; ++d) {
        oh.push_back({v(idx(std::string("ddg") + x, i, d)), 1.0});
        if (d > 0)
          lin.push_back({v(idx(std::string("ddg") + x, i, d)),
                         static_cast<double>(d)});
        ohi.push_back({v(idx(std::string("ddgi") + x, i, d)), 1.0});
        if (d > 0)
          lini.push_back({v(idx(std::string("ddgi") + x, i, d)),
                          static_cast<double>(d)});
      }
      lin.push_back({v(idx(std::string("deg") + x, i)), -1.0});
      lin.push_back({v(idx(std::string("hydd") + x, i)), -1.0});
      lini.push_back({v(idx(std::string("degi") + x, i)), -1.0});
      model_.add_con(idx(std::string("dg_oh") + x, i), oh, '=', 1.0);
      model_.add_con(idx(std::string("dg_lin") + x, i), lin, '=', 0.0);
      model_.add_con(idx(std::string("dg_ohi") + x, i), ohi, '=', 1.0);
      model_.add_con(idx(std::string("dg_lini") + x, i), lini, '=', 0.0);
    }
  };
  onehots('C', g.t_c, 1);
  onehots('T', g.t_t, 0);
  onehots('F', g.t_f, 0);
  for (int d = 1; d <= 4; ++d) {
    std::vector<LinTerm> s{{v(idx("dgv", d)), -1.0}};
    std::vector<LinTerm> si{{v(idx("dgi", d)), -1.0}};
    for (int i = 1; i <= g.t_c; ++i) {
      s.push_back({v(idx("ddgC", i, d)), 1.0});
      si.push_back({v(idx("ddgiC", i, d)), 1.0});
    }
    for (int i = 1; i <= g.t_t; ++i) {
      s.push_back({v(idx("ddgT", i, d)), 1.0});
      si.push_back({v(idx("ddgiT", i, d)), 1.0});
    }
    for (int i = 1; i <= g.t_f; ++i) {
      s.push_back({v(idx("ddgF", i, d)), 1.0});
      si.push_back({v(idx("ddgiF", i, d)), 1.0});
    }
    model_.add_con(idx("dg_tally", d), s, '=', 0.0);
    model_.add_con(idx("dg_tallyi", d), si, '=', 0.0);
  }
}

// ---------------------------------------------------------------------------
// A.5 multiplicity

void MilpEncoder::build_multiplicity() {
  const SchemeGeometry &g = geo_;
  auto activation = [&](const std::string &row, const std::string &b,
                        const std::string &gate) {
    model_.add_con(row + "_hi", {{v(b), 1.0}, {v(gate), -3.0}}, '<', 0.0);
    model_.add_con(row + "_lo", {{v(b), 1.0}, {v(gate), -1.0}}, '>', 0.0);
  };
  for (int k = g.kt_c + 1; k <= g.m_c; ++k)
    activation(idx("mb_actC", k), idx("bC", k), idx("eC", k));
  for (int i = 2; i <= g.t_t; ++i)
    activation(idx("mb_actT", i), idx("btT", i), idx("eT", i));
  for (int i = 2; i <= g.t_f; ++i)
    activation(idx("mb_actF", i), idx("btF", i), idx("eF", i));
  for (int k = 1; k <= g.k_c; ++k) {
    activation(idx("mb_actCT", k), idx("bCT", k), idx("dchiT", k));
    activation(idx("mb_actTC", k), idx("bTC", k), idx("dchiT", k));
  }
  for (int c = 1; c <= g.c_f; ++c)
    activation(idx("mb_actsF", c), idx("bsF", c), idx("dchiF", c));

  auto onehot = [&](const std::string &row, const std::string &dfam,
                    const std::string &bvar, int i) {
    std::vector<LinTerm> oh, lin{{v(bvar), -1.0}};
    for (int m = 0; m <= 3; ++m) {
      oh.push_back({v(idx(dfam, i, m)), 1.0});
      if (m > 0) lin.push_back({v(idx(dfam, i, m)), static_cast<double>(m)});
    }
    model_.add_con(row + "_oh", oh, '=', 1.0);
    model_.add_con(row + "_lin", lin, '=', 0.0);
  };
  for (int i = 2; i <= g.t_t; ++i) onehot(idx("mb_t", i), "dbT", idx("btT", i), i);
  for (int i = 2; i <= g.t_f; ++i) onehot(idx("mb_f", i), "dbF", idx("btF", i), i);
  for (int k = g.kt_c + 1; k <= g.m_c; ++k)
    onehot(idx("mb_c", k), "dbC", idx("bC", k), k);
  for (int k = 1; k <= g.k_c; ++k) {
    onehot(idx("mb_ct", k), "dbCT", idx("bCT", k), k);
    onehot(idx("mb_tc", k), "dbTC", idx("bTC", k), k);
  }
  for (int c = 1; c <= g.c_f; ++c)
    onehot(idx("mb_sf", c), "dbsF", idx("bsF", c), c);

  const int nf = spec_.catalog.size();
  auto bex = [&](char x, int count) {
    for (int i = 1; i <= count; ++i) {
      std::vector<LinTerm> s{{v(idx(std::string("bex") + x, i)), -1.0}};
      std::vector<int> set = x == 'C' ? spec_.fringe_set(i) : std::vector<int>();
      if (x != 'C') {
        set.resize(nf);
        for (int p = 0; p < nf; ++p) set[p] = p + 1;
      }
      for (int p : set)
        if (spec_.catalog.entry(p).stats.beta_r != 0)
          s.push_back({v(idx(std::string("dfr") + x, i, p)),
                       static_cast<double>(spec_.catalog.entry(p).stats.beta_r)});
      model_.add_con(idx(std::string("mb_bex") + x, i), s, '=', 0.0);
    }
  };
  bex('C', g.t_c);
  bex('T', g.t_t);
  bex('F', g.t_f);

  for (int m = 1; m <= 3; ++m) {
    auto tally = [&](const char *out, const std::string &dfam, int lo, int hi) {
      std::vector<LinTerm> s{{v(idx(out, m)), -1.0}};
      for (int i = lo; i <= hi; ++i) s.push_back({v(idx(dfam, i, m)), 1.0});
      model_.add_con(idx(std::string("mb_") + out, m), s, '=', 0.0);
    };
    tally("bdC", "dbC", g.kt_c + 1, g.m_c);
    tally("bdT", "dbT", 2, g.t_t);
    tally("bdCT", "dbCT", 1, g.k_c);
    tally("bdTC", "dbTC", 1, g.k_c);
    tally("bdF", "dbF", 2, g.t_f);
    tally("bdCF", "dbsF", 1, g.tt_c);
    tally("bdTF", "dbsF", g.tt_c + 1, g.c_f);
    model_.add_con(idx("mb_bdint", m),
                   {{v(idx("bdC", m)), 1.0},
                    {v(idx("bdT", m)), 1.0},
                    {v(idx("bdF", m)), 1.0},
                    {v(idx("bdCT", m)), 1.0},
                    {v(idx("bdTC", m)), 1.0},
                    {v(idx("bdTF", m)), 1.0},
                    {v(idx("bdCF", m)), 1.0},
                    {v(idx("bdint", m)), -1.0}},
                   '=', 0.0);
  }
}

// ---------------------------------------------------------------------------
// A.6 elements and valence

void MilpEncoder::build_valence() {
  const SchemeGeometry &g = geo_;
  const ElementTable &et = ElementTable::defaults();
  const int nf = spec_.catalog.size();

  // transfer the path-level multiplicities onto the first/last path vertex
  for (int k = 1; k <= g.k_c; ++k) {
    for (int i = 1; i <= g.t_t; ++i) {
      window(idx("va_ctw", k, i), idx("btCTv", i), {{v(idx("bCT", k)), 1.0}}, 0.0,
             3.0, 1.0, {{v(idx("eT", i)), 1.0}, {v(idx("chiTb", i, k)), -1.0}});
      window(idx("va_tcw", k, i), idx("btTCv", i), {{v(idx("bTC", k)), 1.0}}, 0.0,
             3.0, 1.0, {{v(idx("eT", i + 1)), 1.0}, {v(idx("chiTb", i, k)), -1.0}});
    }
  }
  for (int i = 1; i <= g.t_t; ++i) {
    model_.add_con(idx("va_ctz", i),
                   {{v(idx("btCTv", i)), 1.0}, {v(idx("eT", i)), 3.0}}, '<', 3.0);
    model_.add_con(idx("va_tcz", i),
                   {{v(idx("btTCv", i)), 1.0}, {v(idx("eT", i + 1)), 3.0}}, '<', 3.0);
  }
  for (int i = 1; i <= g.t_f; ++i) {
    for (int c = 1; c <= g.tt_c; ++c)
      window(idx("va_cfw", c, i), idx("btCF", i), {{v(idx("bsF", c)), 1.0}}, 0.0,
             3.0, 1.0, {{v(idx("eF", i)), 1.0}, {v(idx("chiFb", i, c)), -1.0}});
    for (int c = g.tt_c + 1; c <= g.c_f; ++c)
      window(idx("va_tfw", c, i), idx("btTF", i), {{v(idx("bsF", c)), 1.0}}, 0.0,
             3.0, 1.0, {{v(idx("eF", i)), 1.0}, {v(idx("chiFb", i, c)), -1.0}});
    model_.add_con(idx("va_cfz", i),
                   {{v(idx("btCF", i)), 1.0}, {v(idx("eF", i)), 3.0}}, '<', 3.0);
    model_.add_con(idx("va_tfz", i),
                   {{v(idx("btTF", i)), 1.0}, {v(idx("eF", i)), 3.0}}, '<', 3.0);
    std::vector<LinTerm> sc{{v(idx("btCF", i)), 1.0}};
    for (int c = 1; c <= g.tt_c; ++c) sc.push_back({v(idx("chiFb", i, c)), -3.0});
    model_.add_con(idx("va_cfz2", i), sc, '<', 0.0);
    std::vector<LinTerm> st{{v(idx("btTF", i)), 1.0}};
    for (int c = g.tt_c + 1; c <= g.c_f; ++c)
      st.push_back({v(idx("chiFb", i, c)), -3.0});
    model_.add_con(idx("va_tfz2", i), st, '<', 0.0);
  }

  // element one-hots and the code link
  auto code_of = [&](const std::string &a) {
    for (size_t q = 0; q < spec_.lambda_int.size(); ++q)
      if (spec_.lambda_int[q] == a) return static_cast<int>(q + 1);
    throw Error("element not in lambda_int: " + a);
  };
  auto alpha_rows = [&](char x, int count) {
    for (int i = 1; i <= count; ++i) {
      std::vector<LinTerm> oh, lin{{v(idx(std::string("al") + x, i)), -1.0}};
      for (const std::string &a : spec_.lambda_int) {
        oh.push_back({v(el(std::string("dal") + x, i, a)), 1.0});
        lin.push_back({v(el(std::string("dal") + x, i, a)),
                       static_cast<double>(code_of(a))});
      }
      if (x == 'C') {
        model_.add_con(idx("va_aloneC", i), oh, '=', 1.0);
      } else {
        oh.push_back({v(idx(std::string("v") + x, i)), -1.0});
        model_.add_con(idx(std::string("va_alone") + x, i), oh, '=', 0.0);
      }
      model_.add_con(idx(std::string("va_allink") + x, i), lin, '=', 0.0);
      std::vector<LinTerm> root{{v(idx(std::string("al") + x, i)), -1.0}};
      std::vector<int> set = x == 'C' ? spec_.fringe_set(i) : std::vector<int>();
      if (x != 'C') {
        set.resize(nf);
        for (int p = 0; p < nf; ++p) set[p] = p + 1;
      }
      for (int p : set)
        root.push_back({v(idx(std::string("dfr") + x, i, p)),
                        static_cast<double>(
                            code_of(spec_.catalog.entry(p).tree.root_element()))});
      model_.add_con(idx(std::string("va_root") + x, i), root, '=', 0.0);
    }
  };
  alpha_rows('C', g.t_c);
  alpha_rows('T', g.t_t);
  alpha_rows('F', g.t_f);

  // valence balance
  for (int i = 1; i <= g.t_c; ++i) {
    std::vector<LinTerm> s{{v(idx("bexC", i)), 1.0}, {v(idx("eledC", i)), -1.0}};
    for (int k : g.ia_plus(i)) s.push_back({v(idx("bC", k)), 1.0});
    for (int k : g.ia_minus(i)) s.push_back({v(idx("bC", k)), 1.0});
    for (int k : g.ib_plus(i)) s.push_back({v(idx("bCT", k)), 1.0});
    for (int k : g.ib_minus(i)) s.push_back({v(idx("bTC", k)), 1.0});
    if (i <= g.tt_c) s.push_back({v(idx("bsF", i)), 1.0});
    for (const std::string &a : spec_.lambda_int)
      s.push_back({v(el("dalC", i, a)), -static_cast<double>(et.valence(a))});
    model_.add_con(idx("va_valC", i), s, '=', 0.0);
  }
  for (int i = 1; i <= g.t_t; ++i) {
    std::vector<LinTerm> s{{v(idx("bexT", i)), 1.0},
                           {v(idx("eledT", i)), -1.0},
                           {v(idx("btCTv", i)), 1.0},
                           {v(idx("btTCv", i)), 1.0},
                           {v(idx("bsF", g.tt_c + i)), 1.0}};
    if (i >= 2) s.push_back({v(idx("btT", i)), 1.0});
    if (i + 1 <= g.t_t) s.push_back({v(idx("btT", i + 1)), 1.0});
    for (const std::string &a : spec_.lambda_int)
      s.push_back({v(el("dalT", i, a)), -static_cast<double>(et.valence(a))});
    model_.add_con(idx("va_valT", i), s, '=', 0.0);
  }
  for (int i = 1; i <= g.t_f; ++i) {
    std::vector<LinTerm> s{{v(idx("bexF", i)), 1.0},
                           {v(idx("eledF", i)), -1.0},
                           {v(idx("btCF", i)), 1.0},
                           {v(idx("btTF", i)), 1.0}};
    if (i >= 2) s.push_back({v(idx("btF", i)), 1.0});
    if (i + 1 <= g.t_f) s.push_back({v(idx("btF", i + 1)), 1.0});
    for (const std::string &a : spec_.lambda_int)
      s.push_back({v(el("dalF", i, a)), -static_cast<double>(et.valence(a))});
    model_.add_con(idx("va_valF", i), s, '=', 0.0);
  }

  // element counts
  for (const std::string &a : spec_.lambda_int) {
    std::vector<LinTerm> s{{v("naint_" + a), -1.0}};
    for (int i = 1; i <= g.t_c; ++i) s.push_back({v(el("dalC", i, a)), 1.0});
    for (int i = 1; i <= g.t_t; ++i) s.push_back({v(el("dalT", i, a)), 1.0});
    for (int i = 1; i <= g.t_f; ++i) s.push_back({v(el("dalF", i, a)), 1.0});
    model_.add_con("va_naint_" + a, s, '=', 0.0);
  }
  for (const std::string &a : spec_.lambda_ex) {
    auto per = [&](char x, int count) {
      std::vector<LinTerm> s{{v(std::string("naex") + x + "_" + a), -1.0}};
      std::vector<int> all(nf);
      for (int p = 0; p < nf; ++p) all[p] = p + 1;
      for (int i = 1; i <= count; ++i) {
        const std::vector<int> &set = x == 'C' ? spec_.fringe_set(i) : all;
        for (int p : set) {
          const auto &m = spec_.catalog.entry(p).stats.na_ex;
          auto it = m.find(a);
          if (it != m.end() && it->second != 0)
            s.push_back({v(idx(std::string("dfr") + x, i, p)),
                         static_cast<double>(it->second)});
        }
      }
      model_.add_con(std::string("va_naex") + x + "_" + a, s, '=', 0.0);
    };
    per('C', g.t_c);
    per('T', g.t_t);
    per('F', g.t_f);
    model_.add_con("va_naex_" + a,
                   {{v("naexC_" + a), 1.0},
                    {v("naexT_" + a), 1.0},
                    {v("naexF_" + a), 1.0},
                    {v("naex_" + a), -1.0}},
                   '=', 0.0);
  }
  std::set<std::string> li(spec_.lambda_int.begin(), spec_.lambda_int.end());
  std::set<std::string> le(spec_.lambda_ex.begin(), spec_.lambda_ex.end());
  std::set<std::string> lambda_all = li;
  lambda_all.insert(le.begin(), le.end());
  for (const std::string &a : lambda_all) {
    std::vector<LinTerm> s{{v("na_" + a), -1.0}};
    if (li.count(a)) s.push_back({v("naint_" + a), 1.0});
    if (le.count(a)) s.push_back({v("naex_" + a), 1.0});
    model_.add_con("va_na_" + a, s, '=', 0.0);
  }

  for (int i = 1; i <= g.t_c; ++i) {
    std::vector<LinTerm> s;
    for (const std::string &a : spec_.allowed_elements(i))
      s.push_back({v(el("dalC", i, a)), 1.0});
    model_.add_con(idx("va_lstar", i), s, '=', 1.0);
  }

  std::vector<LinTerm> mass{{v("Mass"), -1.0}};
  for (const std::string &a : lambda_all)
    mass.push_back({v("na_" + a), static_cast<double>(et.mass10(a))});
  model_.add_con("va_mass", mass, '=', 0.0);

  IntPair hb = lambda_all.count("H") ? spec_.na_bound("H") : IntPair{0, 0};
  const int lo = spec_.bounds.n_lb + hb.lb;
  const int hi = spec_.bounds.n_star + hb.ub;
  std::vector<LinTerm> one, linkv{{v("nG"), -1.0}};
  if (lambda_all.count("H")) linkv.push_back({v("naex_H"), -1.0});
  for (int i = lo; i <= hi; ++i) {
    one.push_back({v(idx("datm", i)), 1.0});
    linkv.push_back({v(idx("datm", i)), static_cast<double>(i)});
  }
  model_.add_con("va_atmone", one, '=', 1.0);
  model_.add_con("va_atmlink", linkv, '=', 0.0);
  // the envelope constant must dominate Mass/i for every candidate count i,
  // not just the final average
  double max_mass = 0.0;
  for (const std::string &a : lambda_all)
    max_mass = std::max(max_mass, static_cast<double>(et.mass10(a)));
  double msM = max_mass * hi / std::max(1, lo);
  for (int i = lo; i <= hi; ++i) {
    model_.add_con(idx("va_msa", i),
                   {{v("Mass"), 1.0 / i},
                    {v("msbar"), -1.0},
                    {v(idx("datm", i)), -msM}},
                   '>', -msM);
    model_.add_con(idx("va_msb", i),
                   {{v("Mass"), 1.0 / i},
                    {v("msbar"), -1.0},
                    {v(idx("datm", i)), msM}},
                   '<', msM);
  }
}

// ---------------------------------------------------------------------------
// A.7 bond-count windows

void MilpEncoder::build_bond_bounds() {
  const SchemeGeometry &g = geo_;
  for (int k = 1; k <= g.m_c; ++k) {
    if (g.cls[k] != EdgeClass::EQ1 && g.cls[k] != EdgeClass::ZeroOne) continue;
    const SeedEdge &e = spec_.seed.edges[k - 1];
    for (int m = 2; m <= 3; ++m) {
      int blo = m == 2 ? e.bd2_lb : e.bd3_lb;
      int bhi = m == 2 ? e.bd2_ub : e.bd3_ub;
      model_.add_con(idx("bb_fixlo", k, m), {{v(idx("dbC", k, m)), 1.0}}, '>',
                     blo);
      model_.add_con(idx("bb_fixhi", k, m), {{v(idx("dbC", k, m)), 1.0}}, '<',
                     std::min(bhi, 1));
    }
  }
  for (int k = 1; k <= g.k_c; ++k)
    for (int i = 2; i <= g.t_t; ++i)
      for (int m = 2; m <= 3; ++m)
        model_.add_con(idx("bb_t", k, i, m),
                       {{v(idx("bdTk", k, i, m)), 1.0},
                        {v(idx("dbT", i, m)), -1.0},
                        {v(idx("chiTb", i, k)), -1.0}},
                       '>', -1.0);
  for (int m = 2; m <= 3; ++m) {
    if (g.k_c == 0 || g.t_t < 2) break;
    std::vector<LinTerm> s;
    for (int j = 2; j <= g.t_t; ++j) s.push_back({v(idx("dbT", j, m)), 1.0});
    for (int k = 1; k <= g.k_c; ++k)
      for (int i = 2; i <= g.t_t; ++i) s.push_back({v(idx("bdTk", k, i, m)), -1.0});
    model_.add_con(idx("bb_cap", m), s, '>', 0.0);
  }
  for (int k = 1; k <= g.k_c; ++k) {
    const SeedEdge &e = spec_.seed.edges[k - 1];
    for (int m = 2; m <= 3; ++m) {
      std::vector<LinTerm> s{{v(idx("dbCT", k, m)), 1.0},
                             {v(idx("dbTC", k, m)), 1.0}};
      for (int i = 2; i <= g.t_t; ++i) s.push_back({v(idx("bdTk", k, i, m)), 1.0});
      model_.add_con(idx("bb_wlo", k, m), s, '>', m == 2 ? e.bd2_lb : e.bd3_lb);
      model_.add_con(idx("bb_whi", k, m), s, '<', m == 2 ? e.bd2_ub : e.bd3_ub);
    }
  }
}

// ---------------------------------------------------------------------------
// network simulation

void MilpEncoder::build_gnn_simulation() {
  const SchemeGeometry &g = geo_;
  const GnnConfig &cfg = gnn_.config;
  const int L = cfg.layers;
  const Vec &M = gnn_.big_m.layer;
  const double kappa = cfg.kappa;
  const ElementTable &et = ElementTable::defaults();

  // layer-0 features
  auto init_rows = [&](char x, int count) {
    const std::string sx(1, x);
    for (int i = 1; i <= count; ++i) {
      auto one_hot_row = [&](int entry, const char *sym) {
        std::vector<LinTerm> s{{v(theta_name(x, i, entry, 0)), 1.0}};
        bool have = false;
        for (const std::string &a : spec_.lambda_int) have |= a == sym;
        if (have) s.push_back({v(el(std::string("dal") + x, i, sym)), -1.0});
        model_.add_con(idx("gi_" + sx + "oh", i, entry), s, '=', 0.0);
      };
      one_hot_row(1, "C");
      one_hot_row(2, "O");
      one_hot_row(3, "N");
      model_.add_con(idx("gi_" + sx + "deg", i),
                     {{v(theta_name(x, i, 4, 0)), 1.0},
                      {v(idx(std::string("deg") + x, i)), -1.0},
                      {v(idx(std::string("hydd") + x, i)), -1.0}},
                     '=', 0.0);
      std::vector<LinTerm> val{{v(theta_name(x, i, 5, 0)), 1.0},
                               {v(idx(std::string("eled") + x, i)), -1.0}};
      for (const std::string &a : spec_.lambda_int)
        val.push_back({v(el(std::string("dal") + x, i, a)),
                       -static_cast<double>(et.valence(a))});
      model_.add_con(idx("gi_" + sx + "val", i), val, '=', 0.0);
      model_.add_con(idx("gi_" + sx + "hyd", i),
                     {{v(theta_name(x, i, 6, 0)), 1.0},
                      {v(idx(std::string("hydd") + x, i)), -1.0}},
                     '=', 0.0);
      model_.add_con(idx("gi_" + sx + "ion", i),
                     {{v(theta_name(x, i, 7, 0)), 1.0},
                      {v(idx(std::string("eled") + x, i)), -1.0}},
                     '=', 0.0);
      const int nf = spec_.catalog.size();
      std::vector<int> all(nf);
      for (int p = 0; p < nf; ++p) all[p] = p + 1;
      const std::vector<int> &set = x == 'C' ? spec_.fringe_set(i) : all;
      for (int j = 8; j <= cfg.k_node(); ++j) {
        std::vector<LinTerm> s{{v(theta_name(x, i, j, 0)), 1.0}};
        for (int p : set) {
          double c = gnn_.embeddings.at(spec_.catalog.entry(p).code)[j - 8];
          if (c != 0.0)
            s.push_back({v(idx(std::string("dfr") + x, i, p)), -c});
        }
        model_.add_con(idx("gi_" + sx + "emb", i, j), s, '=', 0.0);
      }
    }
  };
  init_rows('C', g.t_c);
  init_rows('T', g.t_t);
  init_rows('F', g.t_f);

  for (int l = 0; l < L; ++l) {
    const double Ml = M[l];
    const double Mn = M[l + 1];
    for (int z = 1; z <= cfg.k_hid; ++z) {
      // C-vertex accumulation and activation
      for (int i = 1; i <= g.t_c; ++i) {
        std::vector<LinTerm> s = transformed('C', i, z, l);
        for (int k : g.ia_minus(i)) s.push_back({v(idx("thCm", k, z, l)), 1.0});
        for (int k : g.ia_plus(i)) s.push_back({v(idx("thCp", k, z, l)), 1.0});
        for (int k : g.ib_plus(i)) s.push_back({v(idx("thCTT", k, z, l)), 1.0});
        for (int k : g.ib_minus(i)) s.push_back({v(idx("thTCT", k, z, l)), 1.0});
        if (i <= g.tt_c) s.push_back({v(idx("thCFF", i, z, l)), 1.0});
        s.push_back({v(idx("tauC", i, z, l + 1)), -1.0});
        model_.add_con(idx("gc_acc", i, z, l + 1), s, '=', -gnn_.bias[l][z - 1]);
        lrelu_rows(idx("gc_lr", i, z, l + 1), idx("tauC", i, z, l + 1),
                   theta_name('C', i, z, l + 1), idx("dtC", i, z, l + 1), Mn,
                   kappa);
      }
      // T-vertex accumulation, existence-gated
      for (int i = 1; i <= g.t_t; ++i) {
        std::vector<LinTerm> s = transformed('T', i, z, l);
        s.push_back({v(idx("thTm", i, z, l)), 1.0});
        s.push_back({v(idx("thTp", i, z, l)), 1.0});
        s.push_back({v(idx("thCTC", i, z, l)), 1.0});
        s.push_back({v(idx("thTCC", i, z, l)), 1.0});
        s.push_back({v(idx("thTFF", i, z, l)), 1.0});
        window(idx("gt_acc", i, z, l + 1), idx("tauT", i, z, l + 1), s,
               gnn_.bias[l][z - 1], Mn, 1.0, {{v(idx("vT", i)), -1.0}});
        window(idx("gt_th", i, z, l + 1), theta_name('T', i, z, l + 1), {}, 0.0,
               Mn, 0.0, {{v(idx("vT", i)), 1.0}});
        lrelu_rows(idx("gt_lr", i, z, l + 1), idx("tauT", i, z, l + 1),
                   theta_name('T', i, z, l + 1), idx("dtT", i, z, l + 1), Mn,
                   kappa);
      }
      // F-vertex accumulation
      for (int i = 1; i <= g.t_f; ++i) {
        std::vector<LinTerm> s = transformed('F', i, z, l);
        s.push_back({v(idx("thFm", i, z, l)), 1.0});
        s.push_back({v(idx("thFp", i, z, l)), 1.0});
        s.push_back({v(idx("thCFC", i, z, l)), 1.0});
        s.push_back({v(idx("thTFT", i, z, l)), 1.0});
        window(idx("gf_acc", i, z, l + 1), idx("tauF", i, z, l + 1), s,
               gnn_.bias[l][z - 1], Mn, 1.0, {{v(idx("vF", i)), -1.0}});
        window(idx("gf_th", i, z, l + 1), theta_name('F', i, z, l + 1), {}, 0.0,
               Mn, 0.0, {{v(idx("vF", i)), 1.0}});
        lrelu_rows(idx("gf_lr", i, z, l + 1), idx("tauF", i, z, l + 1),
                   theta_name('F', i, z, l + 1), idx("dtF", i, z, l + 1), Mn,
                   kappa);
      }

      // edge-coupled auxiliaries
      for (int k = g.kt_c + 1; k <= g.m_c; ++k) {
        window(idx("ga_cm", k, z, l), idx("thCm", k, z, l),
               transformed('C', g.tail[k], z, l), 0.0, Ml, 1.0,
               {{v(idx("eC", k)), -1.0}});
        abs_gate(idx("ga_cmz", k, z, l), idx("thCm", k, z, l), Ml, idx("eC", k));
        window(idx("ga_cp", k, z, l), idx("thCp", k, z, l),
               transformed('C', g.head[k], z, l), 0.0, Ml, 1.0,
               {{v(idx("eC", k)), -1.0}});
        abs_gate(idx("ga_cpz", k, z, l), idx("thCp", k, z, l), Ml, idx("eC", k));
      }
      for (int i = 1; i <= g.t_t; ++i) {
        if (i >= 2)
          window(idx("ga_tm", i, z, l), idx("thTm", i, z, l),
                 transformed('T', i - 1, z, l), 0.0, Ml, 1.0,
                 {{v(idx("eT", i)), -1.0}});
        abs_gate(idx("ga_tmz", i, z, l), idx("thTm", i, z, l), Ml, idx("eT", i));
        if (i + 1 <= g.t_t)
          window(idx("ga_tp", i, z, l), idx("thTp", i, z, l),
                 transformed('T', i + 1, z, l), 0.0, Ml, 1.0,
                 {{v(idx("eT", i + 1)), -1.0}});
        abs_gate(idx("ga_tpz", i, z, l), idx("thTp", i, z, l), Ml,
                 idx("eT", i + 1));
      }
      for (int i = 1; i <= g.t_f; ++i) {
        if (i >= 2)
          window(idx("ga_fm", i, z, l), idx("thFm", i, z, l),
                 transformed('F', i - 1, z, l), 0.0, Ml, 1.0,
                 {{v(idx("eF", i)), -1.0}});
        abs_gate(idx("ga_fmz", i, z, l), idx("thFm", i, z, l), Ml, idx("eF", i));
        if (i + 1 <= g.t_f)
          window(idx("ga_fp", i, z, l), idx("thFp", i, z, l),
                 transformed('F', i + 1, z, l), 0.0, Ml, 1.0,
                 {{v(idx("eF", i + 1)), -1.0}});
        abs_gate(idx("ga_fpz", i, z, l), idx("thFp", i, z, l), Ml,
                 idx("eF", i + 1));
      }
      for (int k = 1; k <= g.k_c; ++k) {
        for (int i = 1; i <= g.t_t; ++i) {
          window(idx("ga_ctt", k, i, z, l), idx("thCTT", k, z, l),
                 transformed('T', i, z, l), 0.0, 2.0 * Ml, 1.0,
                 {{v(idx("chiTb", i, k)), -1.0}, {v(idx("eT", i)), 1.0}});
          window(idx("ga_tct", k, i, z, l), idx("thTCT", k, z, l),
                 transformed('T', i, z, l), 0.0, 2.0 * Ml, 1.0,
                 {{v(idx("chiTb", i, k)), -1.0}, {v(idx("eT", i + 1)), 1.0}});
        }
        abs_gate(idx("ga_cttz", k, z, l), idx("thCTT", k, z, l), Ml,
                 idx("dchiT", k));
        abs_gate(idx("ga_tctz", k, z, l), idx("thTCT", k, z, l), Ml,
                 idx("dchiT", k));
      }
      for (int i = 1; i <= g.t_t; ++i) {
        for (int k = 1; k <= g.k_c; ++k) {
          window(idx("ga_ctc", i, k, z, l), idx("thCTC", i, z, l),
                 transformed('C', g.tail[k], z, l), 0.0, 2.0 * Ml, 1.0,
                 {{v(idx("chiTb", i, k)), -1.0}, {v(idx("eT", i)), 1.0}});
          window(idx("ga_tcc", i, k, z, l), idx("thTCC", i, z, l),
                 transformed('C', g.head[k], z, l), 0.0, 2.0 * Ml, 1.0,
                 {{v(idx("chiTb", i, k)), -1.0}, {v(idx("eT", i + 1)), 1.0}});
        }
        window(idx("ga_ctcz1", i, z, l), idx("thCTC", i, z, l), {}, 0.0, Ml, 1.0,
               {{v(idx("eT", i)), -1.0}});
        window(idx("ga_ctcz2", i, z, l), idx("thCTC", i, z, l), {}, 0.0, Ml, 0.0,
               {{v(idx("vT", i)), 1.0}});
        window(idx("ga_tccz1", i, z, l), idx("thTCC", i, z, l), {}, 0.0, Ml, 1.0,
               {{v(idx("eT", i + 1)), -1.0}});
        window(idx("ga_tccz2", i, z, l), idx("thTCC", i, z, l), {}, 0.0, Ml, 0.0,
               {{v(idx("vT", i)), 1.0}});
        for (int j = 1; j <= g.t_f; ++j)
          window(idx("ga_tff", i, j, z, l), idx("thTFF", i, z, l),
                 transformed('F', j, z, l), 0.0, 2.0 * Ml, 1.0,
                 {{v(idx("chiFb", j, g.tt_c + i)), -1.0}, {v(idx("eF", j)), 1.0}});
        abs_gate(idx("ga_tffz", i, z, l), idx("thTFF", i, z, l), Ml,
                 idx("dchiF", g.tt_c + i));
      }
      for (int c = 1; c <= g.tt_c; ++c) {
        for (int i = 1; i <= g.t_f; ++i)
          window(idx("ga_cff", c, i, z, l), idx("thCFF", c, z, l),
                 transformed('F', i, z, l), 0.0, 2.0 * Ml, 1.0,
                 {{v(idx("chiFb", i, c)), -1.0}, {v(idx("eF", i)), 1.0}});
        abs_gate(idx("ga_cffz", c, z, l), idx("thCFF", c, z, l), Ml,
                 idx("dchiF", c));
      }
      for (int i = 1; i <= g.t_f; ++i) {
        for (int c = 1; c <= g.tt_c; ++c)
          window(idx("ga_cfc", i, c, z, l), idx("thCFC", i, z, l),
                 transformed('C', c, z, l), 0.0, 2.0 * Ml, 1.0,
                 {{v(idx("chiFb", i, c)), -1.0}, {v(idx("eF", i)), 1.0}});
        std::vector<LinTerm> mask;
        for (int c = 1; c <= g.tt_c; ++c) mask.push_back({v(idx("chiFb", i, c)), 1.0});
        window(idx("ga_cfcz1", i, z, l), idx("thCFC", i, z, l), {}, 0.0, Ml, 0.0,
               mask);
        window(idx("ga_cfcz2", i, z, l), idx("thCFC", i, z, l), {}, 0.0, Ml, 1.0,
               {{v(idx("eF", i)), -1.0}});
        for (int j = 1; j <= g.t_t; ++j)
          window(idx("ga_tft", i, j, z, l), idx("thTFT", i, z, l),
                 transformed('T', j, z, l), 0.0, 2.0 * Ml, 1.0,
                 {{v(idx("chiFb", i, g.tt_c + j)), -1.0}, {v(idx("eF", i)), 1.0}});
        std::vector<LinTerm> maskt;
        for (int j = 1; j <= g.t_t; ++j)
          maskt.push_back({v(idx("chiFb", i, g.tt_c + j)), 1.0});
        if (!maskt.empty())
          window(idx("ga_tftz1", i, z, l), idx("thTFT", i, z, l), {}, 0.0, Ml,
                 0.0, maskt);
        else
          model_.add_con(idx("ga_tftz1", i, z, l),
                         {{v(idx("thTFT", i, z, l)), 1.0}}, '=', 0.0);
        window(idx("ga_tftz2", i, z, l), idx("thTFT", i, z, l), {}, 0.0, Ml, 1.0,
               {{v(idx("eF", i)), -1.0}});
      }
    }
  }

  // readout
  for (int p = 1; p <= cfg.k_c; ++p) {
    std::vector<LinTerm> s{{v(idx("tftr", p)), -1.0}};
    for (int z = 1; z <= cfg.k_hid; ++z) {
      double c = gnn_.wc.at(z - 1, p - 1);
      if (c == 0.0) continue;
      for (int i = 1; i <= g.t_c; ++i) s.push_back({v(theta_name('C', i, z, L)), c});
      for (int i = 1; i <= g.t_t; ++i) s.push_back({v(theta_name('T', i, z, L)), c});
      for (int i = 1; i <= g.t_f; ++i) s.push_back({v(theta_name('F', i, z, L)), c});
    }
    model_.add_con(idx("gr_acc", p), s, '=', 0.0);
    lrelu_rows(idx("gr_lr", p), idx("tftr", p), idx("thftr", p), idx("dtftr", p),
               M[L], kappa);
  }

  // prediction head: ReLU hidden layers, linear output
  auto dims = cfg.head_dims();
  const int n_head = static_cast<int>(gnn_.head_w.size());
  auto in_name = [&](int h, int j) {
    return h == 0 ? idx("thftr", j) : idx("hda" + std::to_string(h - 1), j);
  };
  for (int h = 0; h < n_head - 1; ++h) {
    double Mh = gnn_.big_m.head[h];
    for (int j = 1; j <= dims[h + 1]; ++j) {
      std::vector<LinTerm> s{{v(idx("hdt" + std::to_string(h), j)), -1.0}};
      for (int i = 1; i <= dims[h]; ++i) {
        double c = gnn_.head_w[h].at(i - 1, j - 1);
        if (c != 0.0) s.push_back({v(in_name(h, i)), c});
      }
      model_.add_con(idx("gh_acc" + std::to_string(h), j), s, '=',
                     -gnn_.head_b[h][j - 1]);
      lrelu_rows(idx("gh_lr" + std::to_string(h), j),
                 idx("hdt" + std::to_string(h), j),
                 idx("hda" + std::to_string(h), j),
                 idx("hdd" + std::to_string(h), j), Mh, 0.0);
    }
  }
  std::vector<LinTerm> yrow{{v("y"), -1.0}};
  for (int i = 1; i <= dims[n_head - 1]; ++i) {
    double c = gnn_.head_w[n_head - 1].at(i - 1, 0);
    if (c != 0.0) yrow.push_back({v(in_name(n_head - 1, i)), c});
  }
  model_.add_con("gh_y", yrow, '=', -gnn_.head_b[n_head - 1][0]);
}

void MilpEncoder::add_range(double lo, double hi) {
  model_.add_con("y_lb", {{v("y"), 1.0}}, '>', lo);
  model_.add_con("y_ub", {{v("y"), 1.0}}, '<', hi);
}

MilpModel MilpEncoder::assemble(const Specification &spec, const GnnModel &model,
                                double lo, double hi, AssembleCounts *counts) {
  MilpEncoder enc(spec, model);
  enc.declare_variables();
  enc.build_cyclical_base();
  enc.build_leaf_paths();
  enc.build_fringe_assignment();
  enc.build_degrees();
  enc.build_multiplicity();
  enc.build_valence();
  enc.build_bond_bounds();
  enc.build_gnn_simulation();
  enc.add_range(lo, hi);
  if (counts) {
    counts->variables = enc.model_.num_vars();
    counts->constraints = enc.model_.num_cons();
  }
  return std::move(enc.model_);
}

}  // namespace molkit
