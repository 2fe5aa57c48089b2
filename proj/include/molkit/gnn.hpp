//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLKIT_GNN_HPP_
#define MOLKIT_GNN_HPP_

#include <array>
#include <map>
#include <string>
#include <vector>

#include "molkit/catalog.hpp"
#include "molkit/chemgraph.hpp"
#include "molkit/common.hpp"

namespace molkit {

using Vec = std::vector<double>;

struct Matrix {
  int rows = 0, cols = 0;
  Vec a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}
  double &at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
};

struct GnnConfig {
  int layers = 3;          // L
  int k_hid = 16;          // hidden width
  int k_c = 32;            // readout width
  int k_f = 8;             // fringe embedding width
  double kappa = 0.1;      // LeakyReLU slope
  std::vector<int> head_hidden;  // defaults to {k_c, k_c}

  int k_node() const { return 7 + k_f; }
  std::vector<int> head_dims() const;  // [k_c, hidden..., 1]
  void validate() const;
};

struct BigM {
  Vec layer;  // index 0..L
  Vec head;   // one per hidden head layer, plus a final bound on |y|
};

struct GnnModel {
  GnnConfig config;
  Matrix w0;                // k_node x k_hid
  std::vector<Matrix> w;    // L-1 matrices, k_hid x k_hid
  std::vector<Vec> bias;    // L vectors of size k_hid; bias[l] feeds layer l+1
  Matrix wc;                // k_hid x k_c
  std::vector<Matrix> head_w;  // per head layer, in_dim x out_dim
  std::vector<Vec> head_b;
  std::map<std::string, Vec> embeddings;  // canonical code -> k_f reals
  BigM big_m;
  std::uint64_t seed = 0;
  std::string dataset_hash;

  void check_dims() const;
  std::string to_json_text() const;
  static GnnModel from_json_text(const std::string &text);
  void save(const std::string &path) const;
  static GnnModel load(const std::string &path);
};

/// Interior graph of one molecule, preprocessed for the network: local
/// adjacency plus the 7 structural feature entries and the fringe code of
/// every interior vertex.
struct GnnInput {
  int n = 0;
  std::vector<std::vector<int>> adj;
  std::vector<std::array<double, 7>> base;
  std::vector<std::string> fringe_code;
};

GnnInput make_gnn_input(const ChemicalGraph &g, const FringeCatalog &catalog,
                        const ElementTable &et = ElementTable::defaults());

/// 15-entry initial feature vector per interior vertex.
std::vector<Vec> node_features(const GnnInput &input, const GnnModel &model);

struct ForwardTrace {
  std::vector<Vec> theta0;
  std::vector<std::vector<Vec>> tau;    // tau[l-1][v] is layer l, l in [1,L]
  std::vector<std::vector<Vec>> theta;  // theta[l-1][v]
  Vec tau_ftr, theta_ftr;
  std::vector<Vec> head_tau, head_act;  // hidden head layers
  double y = 0.0;
};

ForwardTrace forward(const GnnInput &input, const GnnModel &model);
ForwardTrace forward(const ChemicalGraph &g, const GnnModel &model,
                     const FringeCatalog &catalog,
                     const ElementTable &et = ElementTable::defaults());

/// Gradient container mirroring the model's learnable parameters.
struct GnnGrad {
  Matrix w0;
  std::vector<Matrix> w;
  std::vector<Vec> bias;
  Matrix wc;
  std::vector<Matrix> head_w;
  std::vector<Vec> head_b;
  std::map<std::string, Vec> embeddings;
};

GnnGrad zero_grad_like(const GnnModel &model);

/// Mean squared error over the batch plus exact reverse-mode gradients for
/// every parameter group, the embedding table included.
double loss_and_grad(const GnnModel &model,
                     const std::vector<std::pair<GnnInput, double>> &batch,
                     GnnGrad *grad);

/// Thrown when the loss stops being finite; carries the best model seen so
/// far so callers can still recover it.
class TrainDivergence : public Error {
public:
  TrainDivergence(const std::string &what, GnnModel checkpoint)
      : Error(what), checkpoint_(std::move(checkpoint)) {}
  const GnnModel &checkpoint() const { return checkpoint_; }

private:
  GnnModel checkpoint_;
};

struct TrainOptions {
  double lr = 1e-3;
  int batch_size = 32;
  int max_epochs = 400;
  int patience = 20;
  double val_frac = 0.15;
  double test_frac = 0.15;
  std::uint64_t seed = 0;
  double big_m_safety = 2.0;
  bool big_m_interval = false;  // use guaranteed interval bounds instead
  int n_int_max = 20;           // vertex-count bound for interval propagation
};

struct TrainResult {
  GnnModel model;
  double train_mse = 0.0;
  double val_mae = 0.0;
  double test_mae = 0.0;
  double test_r2 = 0.0;
  int epochs = 0;
};

GnnModel init_model(const GnnConfig &config, const FringeCatalog &catalog,
                    std::uint64_t seed);

TrainResult train(const std::vector<std::pair<GnnInput, double>> &dataset,
                  const GnnConfig &config, const TrainOptions &opts,
                  const FringeCatalog &catalog);

/// Empirical per-layer bounds: safety * max of |theta|, |tau|, the
/// single-vertex transformed values that feed edge-coupled auxiliaries, and
/// the layer biases; floored at 1.
BigM compute_big_m(const GnnModel &model, const std::vector<GnnInput> &dataset,
                   double safety = 2.0);

/// Guaranteed interval-arithmetic bounds over every admissible input with at
/// most n_int_max interior vertices and interior degree <= 4.
BigM interval_big_m(const GnnModel &model, const ElementTable &et,
                    int n_int_max);

double r_squared(const Vec &pred, const Vec &target);

}  // namespace molkit

#endif  // MOLKIT_GNN_HPP_
