//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#include "molkit/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "molkit/common.hpp"

namespace molkit {

std::vector<int> GnnConfig::head_dims() const {
  std::vector<int> dims{k_c};
  if (head_hidden.empty()) {
    dims.push_back(k_c);
    dims.push_back(k_c);
  } else {
    for (int h : head_hidden) dims.push_back(h);
  }
  dims.push_back(1);
  return dims;
}

void GnnConfig::validate() const {
  if (layers < 1) throw ValidationError("layers", "must be >= 1");
  if (k_hid < 1 || k_c < 1) throw ValidationError("k_hid", "widths must be >= 1");
  if (k_f < 1) throw ValidationError("k_f", "must be >= 1");
  if (k_node() != 7 + k_f) throw ValidationError("k_node", "must equal 7 + k_f");
  if (!(kappa > 0.0 && kappa < 1.0))
    throw ValidationError("kappa", "must lie in (0,1)");
  for (int h : head_hidden)
    if (h < 1) throw ValidationError("head_hidden", "widths must be >= 1");
}

void GnnModel::check_dims() const {
  config.validate();
  const int L = config.layers;
  if (w0.rows != config.k_node() || w0.cols != config.k_hid)
    throw Error("dimension mismatch: w0");
  if (static_cast<int>(w.size()) != L - 1) throw Error("dimension mismatch: w");
  for (const Matrix &m : w)
    if (m.rows != config.k_hid || m.cols != config.k_hid)
      throw Error("dimension mismatch: w[l]");
  if (static_cast<int>(bias.size()) != L) throw Error("dimension mismatch: bias");
  for (const Vec &b : bias)
    if (static_cast<int>(b.size()) != config.k_hid)
      throw Error("dimension mismatch: bias[l]");
  if (wc.rows != config.k_hid || wc.cols != config.k_c)
    throw Error("dimension mismatch: wc");
  auto dims = config.head_dims();
  if (head_w.size() + 1 != dims.size() || head_b.size() != head_w.size())
    throw Error("dimension mismatch: head");
  for (size_t h = 0; h < head_w.size(); ++h) {
    if (head_w[h].rows != dims[h] || head_w[h].cols != dims[h + 1] ||
        static_cast<int>(head_b[h].size()) != dims[h + 1])
      throw Error("dimension mismatch: head layer " + std::to_string(h));
  }
  for (const auto &[code, v] : embeddings)
    if (static_cast<int>(v.size()) != config.k_f)
      throw Error("dimension mismatch: embedding for " + code);
}

GnnInput make_gnn_input(const ChemicalGraph &g, const FringeCatalog &catalog,
                        const ElementTable &et) {
  ChemicalGraph s = suppress_hydrogens(g);
  TwoLayerDecomposition d = decompose(g, catalog.rho);
  std::vector<FringeTree> trees = extract_fringe_trees(d, s);

  std::vector<int> local(s.num_atoms(), -1);
  for (size_t i = 0; i < d.interior.size(); ++i) local[d.interior[i]] = static_cast<int>(i);

  GnnInput in;
  in.n = static_cast<int>(d.interior.size());
  in.adj.resize(in.n);
  for (auto &[u, v] : d.interior_edges) {
    in.adj[local[u]].push_back(local[v]);
    in.adj[local[v]].push_back(local[u]);
  }
  auto sadj = s.adjacency();
  for (int i = 0; i < in.n; ++i) {
    int sv = d.interior[i];
    const Atom &a = s.atoms[sv];
    FringeStats st = trees[i].stats(et);
    std::string code = canonical_code(trees[i]);
    if (catalog.id_of(code) == 0)
      throw Error("uncatalogued fringe tree: " + code);
    std::array<double, 7> base{};
    base[0] = a.element == "C" ? 1.0 : 0.0;
    base[1] = a.element == "O" ? 1.0 : 0.0;
    base[2] = a.element == "N" ? 1.0 : 0.0;
    base[3] = static_cast<double>(static_cast<int>(sadj[sv].size()) + a.hydrogens);
    base[4] = static_cast<double>(et.valence(a.element) + a.ion);
    base[5] = static_cast<double>(a.hydrogens);
    base[6] = static_cast<double>(a.ion);
    in.base.push_back(base);
    in.fringe_code.push_back(std::move(code));
  }
  return in;
}

std::vector<Vec> node_features(const GnnInput &input, const GnnModel &model) {
  std::vector<Vec> out;
  out.reserve(input.n);
  for (int v = 0; v < input.n; ++v) {
    Vec f(model.config.k_node(), 0.0);
    for (int j = 0; j < 7; ++j) f[j] = input.base[v][j];
    auto it = model.embeddings.find(input.fringe_code[v]);
    if (it == model.embeddings.end())
      throw Error("uncatalogued fringe tree: " + input.fringe_code[v]);
    for (int j = 0; j < model.config.k_f; ++j) f[7 + j] = it->second[j];
    out.push_back(std::move(f));
  }
  return out;
}

namespace {

inline double lrelu(double x, double kappa) { return x >= 0.0 ? x : kappa * x; }
inline double lrelu_slope(double x, double kappa) {
  return x > 0.0 ? 1.0 : kappa;  // slope at 0 is kappa by convention
}
inline double relu_slope(double x) { return x > 0.0 ? 1.0 : 0.0; }

// tau_z = sum_{z'} w(z',z) s_{z'} + b_z
Vec affine(const Matrix &w, const Vec &s, const Vec &b) {
  Vec out(w.cols, 0.0);
  for (int zp = 0; zp < w.rows; ++zp) {
    double sv = s[zp];
    if (sv == 0.0) continue;
    for (int z = 0; z < w.cols; ++z) out[z] += w.at(zp, z) * sv;
  }
  if (!b.empty())
    for (int z = 0; z < w.cols; ++z) out[z] += b[z];
  return out;
}

}  // namespace

ForwardTrace forward(const GnnInput &input, const GnnModel &model) {
  model.check_dims();
  if (input.n == 0) throw Error("empty interior graph");
  const GnnConfig &cfg = model.config;
  const int L = cfg.layers;

  ForwardTrace tr;
  tr.theta0 = node_features(input, model);
  tr.tau.resize(L);
  tr.theta.resize(L);

  const std::vector<Vec> *prev = &tr.theta0;
  for (int l = 0; l < L; ++l) {
    const Matrix &W = l == 0 ? model.w0 : model.w[l - 1];
    tr.tau[l].resize(input.n);
    tr.theta[l].resize(input.n);
    for (int v = 0; v < input.n; ++v) {
      Vec s = (*prev)[v];
      for (int u : input.adj[v])
        for (size_t z = 0; z < s.size(); ++z) s[z] += (*prev)[u][z];
      tr.tau[l][v] = affine(W, s, model.bias[l]);
      Vec th(cfg.k_hid);
      for (int z = 0; z < cfg.k_hid; ++z)
        th[z] = lrelu(tr.tau[l][v][z], cfg.kappa);
      tr.theta[l][v] = std::move(th);
    }
    prev = &tr.theta[l];
  }

  Vec S(cfg.k_hid, 0.0);
  for (int v = 0; v < input.n; ++v)
    for (int z = 0; z < cfg.k_hid; ++z) S[z] += tr.theta[L - 1][v][z];
  tr.tau_ftr = affine(model.wc, S, Vec());
  tr.theta_ftr.resize(cfg.k_c);
  for (int p = 0; p < cfg.k_c; ++p)
    tr.theta_ftr[p] = lrelu(tr.tau_ftr[p], cfg.kappa);

  Vec act = tr.theta_ftr;
  const int n_head = static_cast<int>(model.head_w.size());
  for (int h = 0; h < n_head - 1; ++h) {
    Vec t = affine(model.head_w[h], act, model.head_b[h]);
    Vec a(t.size());
    for (size_t j = 0; j < t.size(); ++j) a[j] = std::max(0.0, t[j]);
    tr.head_tau.push_back(std::move(t));
    tr.head_act.push_back(a);
    act = std::move(a);
  }
  Vec yv = affine(model.head_w[n_head - 1], act, model.head_b[n_head - 1]);
  tr.y = yv[0];
  return tr;
}

ForwardTrace forward(const ChemicalGraph &g, const GnnModel &model,
                     const FringeCatalog &catalog, const ElementTable &et) {
  return forward(make_gnn_input(g, catalog, et), model);
}

GnnGrad zero_grad_like(const GnnModel &model) {
  GnnGrad g;
  g.w0 = Matrix(model.w0.rows, model.w0.cols);
  for (const Matrix &m : model.w) g.w.emplace_back(m.rows, m.cols);
  for (const Vec &b : model.bias) g.bias.emplace_back(b.size(), 0.0);
  g.wc = Matrix(model.wc.rows, model.wc.cols);
  for (const Matrix &m : model.head_w) g.head_w.emplace_back(m.rows, m.cols);
  for (const Vec &b : model.head_b) g.head_b.emplace_back(b.size(), 0.0);
  for (const auto &[code, v] : model.embeddings)
    g.embeddings[code] = Vec(v.size(), 0.0);
  return g;
}

double loss_and_grad(const GnnModel &model,
                     const std::vector<std::pair<GnnInput, double>> &batch,
                     GnnGrad *grad) {
  if (batch.empty()) throw Error("empty batch");
  const GnnConfig &cfg = model.config;
  const int L = cfg.layers;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;

  for (const auto &[input, target] : batch) {
    ForwardTrace tr = forward(input, model);
    double err = tr.y - target;
    loss += err * err * inv_b;
    if (!grad) continue;
    double dy = 2.0 * err * inv_b;

    // head, last linear layer first
    const int n_head = static_cast<int>(model.head_w.size());
    Vec dact(1, dy);
    for (int h = n_head - 1; h >= 0; --h) {
      const Vec &in_act = h == 0 ? tr.theta_ftr : tr.head_act[h - 1];
      Vec dtau = dact;
      if (h < n_head - 1)
        for (size_t j = 0; j < dtau.size(); ++j)
          dtau[j] *= relu_slope(tr.head_tau[h][j]);
      Matrix &gw = grad->head_w[h];
      Vec &gb = grad->head_b[h];
      Vec din(in_act.size(), 0.0);
      for (size_t i = 0; i < in_act.size(); ++i) {
        for (size_t j = 0; j < dtau.size(); ++j) {
          gw.at(static_cast<int>(i), static_cast<int>(j)) += in_act[i] * dtau[j];
          din[i] += model.head_w[h].at(static_cast<int>(i), static_cast<int>(j)) *
                    dtau[j];
        }
      }
      for (size_t j = 0; j < dtau.size(); ++j) gb[j] += dtau[j];
      dact = std::move(din);
    }

    // readout
    Vec dtau_ftr(cfg.k_c);
    for (int p = 0; p < cfg.k_c; ++p)
      dtau_ftr[p] = dact[p] * lrelu_slope(tr.tau_ftr[p], cfg.kappa);
    Vec S(cfg.k_hid, 0.0);
    for (int v = 0; v < input.n; ++v)
      for (int z = 0; z < cfg.k_hid; ++z) S[z] += tr.theta[L - 1][v][z];
    Vec dS(cfg.k_hid, 0.0);
    for (int z = 0; z < cfg.k_hid; ++z) {
      for (int p = 0; p < cfg.k_c; ++p) {
        grad->wc.at(z, p) += S[z] * dtau_ftr[p];
        dS[z] += model.wc.at(z, p) * dtau_ftr[p];
      }
    }

    // message-passing layers
    std::vector<Vec> dtheta(input.n, dS);
    for (int l = L - 1; l >= 0; --l) {
      const Matrix &W = l == 0 ? model.w0 : model.w[l - 1];
      Matrix &gW = l == 0 ? grad->w0 : grad->w[l - 1];
      const std::vector<Vec> &prev = l == 0 ? tr.theta0 : tr.theta[l - 1];
      std::vector<Vec> dprev(input.n, Vec(W.rows, 0.0));
      for (int v = 0; v < input.n; ++v) {
        Vec dtau(cfg.k_hid);
        for (int z = 0; z < cfg.k_hid; ++z)
          dtau[z] = dtheta[v][z] * lrelu_slope(tr.tau[l][v][z], cfg.kappa);
        Vec s = prev[v];
        for (int u : input.adj[v])
          for (size_t z = 0; z < s.size(); ++z) s[z] += prev[u][z];
        Vec ds(W.rows, 0.0);
        for (int zp = 0; zp < W.rows; ++zp) {
          for (int z = 0; z < cfg.k_hid; ++z) {
            gW.at(zp, z) += s[zp] * dtau[z];
            ds[zp] += W.at(zp, z) * dtau[z];
          }
        }
        for (int z = 0; z < cfg.k_hid; ++z) grad->bias[l][z] += dtau[z];
        for (int zp = 0; zp < W.rows; ++zp) {
          dprev[v][zp] += ds[zp];
          for (int u : input.adj[v]) dprev[u][zp] += ds[zp];
        }
      }
      dtheta = std::move(dprev);
    }
    for (int v = 0; v < input.n; ++v) {
      Vec &ge = grad->embeddings.at(input.fringe_code[v]);
      for (int j = 0; j < cfg.k_f; ++j) ge[j] += dtheta[v][7 + j];
    }
  }
  return loss;
}

// ---------------------------------------------------------------------------
// training

GnnModel init_model(const GnnConfig &config, const FringeCatalog &catalog,
                    std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  auto he = [&](int fan_in) {
    return rng.normal() * std::sqrt(2.0 / std::max(1, fan_in));
  };
  GnnModel m;
  m.config = config;
  m.seed = seed;
  const int L = config.layers;
  m.w0 = Matrix(config.k_node(), config.k_hid);
  for (double &x : m.w0.a) x = he(config.k_node());
  for (int l = 1; l < L; ++l) {
    Matrix W(config.k_hid, config.k_hid);
    for (double &x : W.a) x = he(config.k_hid);
    m.w.push_back(std::move(W));
  }
  for (int l = 0; l < L; ++l) m.bias.emplace_back(config.k_hid, 0.0);
  m.wc = Matrix(config.k_hid, config.k_c);
  for (double &x : m.wc.a) x = he(config.k_hid);
  auto dims = config.head_dims();
  for (size_t h = 0; h + 1 < dims.size(); ++h) {
    Matrix W(dims[h], dims[h + 1]);
    for (double &x : W.a) x = he(dims[h]);
    m.head_w.push_back(std::move(W));
    m.head_b.emplace_back(dims[h + 1], 0.0);
  }
  // embeddings start from normalized tree statistics
  for (const CatalogEntry &e : catalog.entries) {
    Vec emb(config.k_f, 0.0);
    const FringeStats &st = e.stats;
    auto cnt = [&](const char *el) {
      auto it = st.na_ex.find(el);
      return it == st.na_ex.end() ? 0 : it->second;
    };
    double init[8] = {st.n_h / 4.0,
                      static_cast<double>(st.ht_h) / std::max(1, catalog.rho),
                      st.deg_r / 3.0,
                      st.beta_r / 6.0,
                      cnt("C") / 4.0,
                      cnt("O") / 4.0,
                      cnt("N") / 4.0,
                      0.0};
    for (int j = 0; j < config.k_f && j < 8; ++j) emb[j] = init[j];
    m.embeddings[e.code] = std::move(emb);
  }
  m.big_m.layer.assign(L + 1, 1.0);
  m.big_m.head.assign(config.head_dims().size() - 1, 1.0);
  return m;
}

namespace {

struct AdamState {
  Vec m, v;
  explicit AdamState(size_t n) : m(n, 0.0), v(n, 0.0) {}
};

void adam_step(Vec &param, const Vec &grad, AdamState &st, double lr, int t) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double c1 = 1.0 - std::pow(b1, t), c2 = 1.0 - std::pow(b2, t);
  for (size_t i = 0; i < param.size(); ++i) {
    st.m[i] = b1 * st.m[i] + (1 - b1) * grad[i];
    st.v[i] = b2 * st.v[i] + (1 - b2) * grad[i] * grad[i];
    param[i] -= lr * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + eps);
  }
}

// flat views over all parameter groups, in a fixed order
std::vector<Vec *> param_views(GnnModel &m) {
  std::vector<Vec *> out{&m.w0.a};
  for (Matrix &x : m.w) out.push_back(&x.a);
  for (Vec &b : m.bias) out.push_back(&b);
  out.push_back(&m.wc.a);
  for (Matrix &x : m.head_w) out.push_back(&x.a);
  for (Vec &b : m.head_b) out.push_back(&b);
  for (auto &[code, v] : m.embeddings) out.push_back(&v);
  return out;
}

std::vector<Vec *> grad_views(GnnGrad &g) {
  std::vector<Vec *> out{&g.w0.a};
  for (Matrix &x : g.w) out.push_back(&x.a);
  for (Vec &b : g.bias) out.push_back(&b);
  out.push_back(&g.wc.a);
  for (Matrix &x : g.head_w) out.push_back(&x.a);
  for (Vec &b : g.head_b) out.push_back(&b);
  for (auto &[code, v] : g.embeddings) out.push_back(&v);
  return out;
}

double mae_on(const GnnModel &m,
              const std::vector<std::pair<GnnInput, double>> &data) {
  if (data.empty()) return 0.0;
  double s = 0.0;
  for (const auto &[in, t] : data) s += std::fabs(forward(in, m).y - t);
  return s / static_cast<double>(data.size());
}

}  // namespace

double r_squared(const Vec &pred, const Vec &target) {
  double mean = std::accumulate(target.begin(), target.end(), 0.0) /
                static_cast<double>(target.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    ss_res += (pred[i] - target[i]) * (pred[i] - target[i]);
    ss_tot += (target[i] - mean) * (target[i] - mean);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

TrainResult train(const std::vector<std::pair<GnnInput, double>> &dataset,
                  const GnnConfig &config, const TrainOptions &opts,
                  const FringeCatalog &catalog) {
  if (dataset.empty()) throw Error("empty dataset");
  if (opts.val_frac < 0 || opts.test_frac < 0 ||
      opts.val_frac + opts.test_frac >= 1.0)
    throw Error("invalid split fractions");

  Rng rng(opts.seed);
  std::vector<int> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  for (size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.below(i)]);

  const int n = static_cast<int>(dataset.size());
  const int n_test = static_cast<int>(n * opts.test_frac);
  const int n_val = static_cast<int>(n * opts.val_frac);
  std::vector<std::pair<GnnInput, double>> test, val, tr;
  for (int i = 0; i < n; ++i) {
    const auto &s = dataset[order[i]];
    if (i < n_test) test.push_back(s);
    else if (i < n_test + n_val) val.push_back(s);
    else tr.push_back(s);
  }
  if (tr.empty()) throw Error("training split is empty");

  GnnModel model = init_model(config, catalog, opts.seed);
  auto params = param_views(model);
  std::vector<AdamState> adam;
  for (Vec *p : params) adam.emplace_back(p->size());

  GnnModel best = model;
  double best_val = mae_on(model, val.empty() ? tr : val);
  int best_epoch = 0, step = 0;
  double last_loss = 0.0;

  for (int epoch = 1; epoch <= opts.max_epochs; ++epoch) {
    for (size_t i = tr.size(); i > 1; --i)
      std::swap(tr[i - 1], tr[rng.below(i)]);
    for (size_t off = 0; off < tr.size(); off += opts.batch_size) {
      size_t end = std::min(tr.size(), off + opts.batch_size);
      std::vector<std::pair<GnnInput, double>> batch(tr.begin() + off,
                                                     tr.begin() + end);
      GnnGrad grad = zero_grad_like(model);
      last_loss = loss_and_grad(model, batch, &grad);
      if (!std::isfinite(last_loss)) {
        throw TrainDivergence(
            "training diverged (loss is not finite); last stable checkpoint "
            "from epoch " + std::to_string(best_epoch),
            best);
      }
      auto gviews = grad_views(grad);
      ++step;
      for (size_t p = 0; p < params.size(); ++p)
        adam_step(*params[p], *gviews[p], adam[p], opts.lr, step);
    }
    double v = mae_on(model, val.empty() ? tr : val);
    if (v < best_val - 1e-12) {
      best_val = v;
      best = model;
      best_epoch = epoch;
    } else if (epoch - best_epoch >= opts.patience) {
      break;
    }
  }

  TrainResult res;
  res.model = best;
  res.train_mse = last_loss;
  res.val_mae = best_val;
  res.epochs = best_epoch;
  if (!test.empty()) {
    Vec pred, tgt;
    for (const auto &[in, t] : test) {
      pred.push_back(forward(in, res.model).y);
      tgt.push_back(t);
    }
    res.test_r2 = r_squared(pred, tgt);
    double s = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) s += std::fabs(pred[i] - tgt[i]);
    res.test_mae = s / static_cast<double>(pred.size());
  }

  std::vector<GnnInput> tr_inputs;
  for (const auto &[in, t] : tr) tr_inputs.push_back(in);
  res.model.big_m = opts.big_m_interval
                        ? interval_big_m(res.model, ElementTable::defaults(),
                                         opts.n_int_max)
                        : compute_big_m(res.model, tr_inputs, opts.big_m_safety);
  return res;
}

// ---------------------------------------------------------------------------
// big-M bounds

BigM compute_big_m(const GnnModel &model, const std::vector<GnnInput> &dataset,
                   double safety) {
  const GnnConfig &cfg = model.config;
  const int L = cfg.layers;
  Vec peak(L + 1, 0.0);
  auto dims = cfg.head_dims();
  Vec head_peak(dims.size() - 1, 0.0);

  // biases must be covered so that unused scheme vertices stay feasible
  for (int l = 0; l < L; ++l)
    for (double b : model.bias[l]) peak[l + 1] = std::max(peak[l + 1], std::fabs(b));

  for (const GnnInput &input : dataset) {
    ForwardTrace tr = forward(input, model);
    for (int v = 0; v < input.n; ++v) {
      for (double x : tr.theta0[v]) peak[0] = std::max(peak[0], std::fabs(x));
      // single-vertex transformed values gate the edge-coupled auxiliaries
      Vec t0 = affine(model.w0, tr.theta0[v], Vec());
      for (double x : t0) peak[0] = std::max(peak[0], std::fabs(x));
      for (int l = 1; l <= L; ++l) {
        for (double x : tr.tau[l - 1][v]) peak[l] = std::max(peak[l], std::fabs(x));
        for (double x : tr.theta[l - 1][v])
          peak[l] = std::max(peak[l], std::fabs(x));
        if (l < L) {
          Vec tv = affine(model.w[l - 1], tr.theta[l - 1][v], Vec());
          for (double x : tv) peak[l] = std::max(peak[l], std::fabs(x));
        }
      }
    }
    for (double x : tr.tau_ftr) peak[L] = std::max(peak[L], std::fabs(x));
    for (double x : tr.theta_ftr) peak[L] = std::max(peak[L], std::fabs(x));
    for (size_t h = 0; h < tr.head_tau.size(); ++h)
      for (double x : tr.head_tau[h])
        head_peak[h] = std::max(head_peak[h], std::fabs(x));
    head_peak.back() = std::max(head_peak.back(), std::fabs(tr.y));
  }

  BigM m;
  for (double p : peak) m.layer.push_back(std::max(1.0, safety * p));
  for (double p : head_peak) m.head.push_back(std::max(1.0, safety * p));
  return m;
}

namespace {

struct Interval {
  double lo = 0.0, hi = 0.0;
  Interval hull0() const { return {std::min(lo, 0.0), std::max(hi, 0.0)}; }
  double mag() const { return std::max(std::fabs(lo), std::fabs(hi)); }
};

Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }

Interval scale(Interval a, double c) {
  return c >= 0 ? Interval{c * a.lo, c * a.hi} : Interval{c * a.hi, c * a.lo};
}

std::vector<Interval> matvec(const Matrix &w, const std::vector<Interval> &x) {
  std::vector<Interval> out(w.cols, Interval{0, 0});
  for (int zp = 0; zp < w.rows; ++zp)
    for (int z = 0; z < w.cols; ++z)
      out[z] = out[z] + scale(x[zp], w.at(zp, z));
  return out;
}

}  // namespace

BigM interval_big_m(const GnnModel &model, const ElementTable &et,
                    int n_int_max) {
  const GnnConfig &cfg = model.config;
  const int L = cfg.layers;
  const double kD = 4.0;  // interior-degree cap

  std::vector<Interval> th(cfg.k_node());
  th[0] = th[1] = th[2] = {0, 1};
  th[3] = {1, 4};
  th[4] = {1.0 - 3.0, static_cast<double>(et.max_valence()) + 3.0};
  th[5] = {0, 4};
  th[6] = {-3, 3};
  for (int j = 0; j < cfg.k_f; ++j) {
    Interval e{0, 0};
    for (const auto &[code, v] : model.embeddings) {
      e.lo = std::min(e.lo, v[j]);
      e.hi = std::max(e.hi, v[j]);
    }
    th[7 + j] = e;
  }

  BigM m;
  double peak0 = 0.0;
  for (const Interval &iv : th) peak0 = std::max(peak0, iv.mag());
  std::vector<Interval> wt = matvec(model.w0, th);
  for (const Interval &iv : wt) peak0 = std::max(peak0, iv.mag());
  m.layer.push_back(std::max(1.0, peak0));

  for (int l = 0; l < L; ++l) {
    std::vector<Interval> tau(cfg.k_hid);
    for (int z = 0; z < cfg.k_hid; ++z) {
      Interval s = wt[z].hull0() + scale(wt[z].hull0(), kD);
      tau[z] = s + Interval{model.bias[l][z], model.bias[l][z]};
    }
    std::vector<Interval> theta(cfg.k_hid);
    for (int z = 0; z < cfg.k_hid; ++z)
      theta[z] = {lrelu(tau[z].lo, cfg.kappa), lrelu(tau[z].hi, cfg.kappa)};
    double peak = 0.0;
    for (int z = 0; z < cfg.k_hid; ++z)
      peak = std::max({peak, tau[z].mag(), theta[z].mag()});
    if (l + 1 < L) {
      wt = matvec(model.w[l], theta);
      for (const Interval &iv : wt) peak = std::max(peak, iv.mag());
    } else {
      // readout sums over at most n_int_max vertices
      std::vector<Interval> S(cfg.k_hid);
      for (int z = 0; z < cfg.k_hid; ++z)
        S[z] = scale(theta[z].hull0(), static_cast<double>(n_int_max));
      std::vector<Interval> tf = matvec(model.wc, S);
      for (const Interval &iv : tf) peak = std::max(peak, iv.mag());
      wt = tf;  // reused below for the head input
    }
    m.layer.push_back(std::max(1.0, peak));
  }

  std::vector<Interval> act(cfg.k_c);
  for (int p = 0; p < cfg.k_c; ++p)
    act[p] = {lrelu(wt[p].lo, cfg.kappa), lrelu(wt[p].hi, cfg.kappa)};
  const int n_head = static_cast<int>(model.head_w.size());
  for (int h = 0; h < n_head; ++h) {
    std::vector<Interval> tau = matvec(model.head_w[h], act);
    for (size_t j = 0; j < tau.size(); ++j)
      tau[j] = tau[j] + Interval{model.head_b[h][j], model.head_b[h][j]};
    double peak = 0.0;
    for (const Interval &iv : tau) peak = std::max(peak, iv.mag());
    m.head.push_back(std::max(1.0, peak));
    act.resize(tau.size());
    for (size_t j = 0; j < tau.size(); ++j)
      act[j] = {std::max(0.0, tau[j].lo), std::max(0.0, tau[j].hi)};
  }
  return m;
}

// ---------------------------------------------------------------------------
// model (de)serialization

namespace {

nlohmann::json mat_to_json(const Matrix &m) {
  return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.a}};
}

Matrix mat_from_json(const nlohmann::json &j) {
  Matrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
  m.a = j.at("data").get<Vec>();
  if (static_cast<int>(m.a.size()) != m.rows * m.cols)
    throw Error("model matrix size mismatch");
  return m;
}

}  // namespace

std::string GnnModel::to_json_text() const {
  nlohmann::json emb(nlohmann::json::value_t::object);
  for (const auto &[code, v] : embeddings) emb[code] = v;
  nlohmann::json hw = nlohmann::json::array(), hb = nlohmann::json::array();
  for (const Matrix &mtx : head_w) hw.push_back(mat_to_json(mtx));
  for (const Vec &b : head_b) hb.push_back(b);
  nlohmann::json wl = nlohmann::json::array();
  for (const Matrix &mtx : w) wl.push_back(mat_to_json(mtx));
  nlohmann::json j{
      {"config",
       {{"layers", config.layers},
        {"k_hid", config.k_hid},
        {"k_c", config.k_c},
        {"k_f", config.k_f},
        {"kappa", config.kappa},
        {"head_hidden", config.head_hidden}}},
      {"w0", mat_to_json(w0)},
      {"w", wl},
      {"bias", bias},
      {"wc", mat_to_json(wc)},
      {"head_w", hw},
      {"head_b", hb},
      {"embeddings", emb},
      {"big_m", {{"layer", big_m.layer}, {"head", big_m.head}}},
      {"meta", {{"seed", seed}, {"dataset_hash", dataset_hash}}}};
  return j.dump(2) + "\n";
}

GnnModel GnnModel::from_json_text(const std::string &text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception &e) {
    throw Error("model parse error: " + std::string(e.what()));
  }
  GnnModel m;
  const auto &c = j.at("config");
  m.config.layers = c.at("layers").get<int>();
  m.config.k_hid = c.at("k_hid").get<int>();
  m.config.k_c = c.at("k_c").get<int>();
  m.config.k_f = c.at("k_f").get<int>();
  m.config.kappa = c.at("kappa").get<double>();
  m.config.head_hidden = c.value("head_hidden", std::vector<int>());
  m.w0 = mat_from_json(j.at("w0"));
  for (const auto &x : j.at("w")) m.w.push_back(mat_from_json(x));
  m.bias = j.at("bias").get<std::vector<Vec>>();
  m.wc = mat_from_json(j.at("wc"));
  for (const auto &x : j.at("head_w")) m.head_w.push_back(mat_from_json(x));
  m.head_b = j.at("head_b").get<std::vector<Vec>>();
  for (auto &[code, v] : j.at("embeddings").items())
    m.embeddings[code] = v.get<Vec>();
  m.big_m.layer = j.at("big_m").at("layer").get<Vec>();
  m.big_m.head = j.at("big_m").at("head").get<Vec>();
  if (j.contains("meta")) {
    m.seed = j["meta"].value("seed", 0ULL);
    m.dataset_hash = j["meta"].value("dataset_hash", "");
  }
  m.check_dims();
  return m;
}

void GnnModel::save(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model: " + path);
  out << to_json_text();
}

GnnModel GnnModel::load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

}  // namespace molkit
