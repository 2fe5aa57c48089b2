//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "molkit/encode.hpp"
#include "molkit/gnn.hpp"
#include "molkit/milp.hpp"
#include "molkit/spec.hpp"
#include "molkit/witness.hpp"

namespace fs = std::filesystem;
using namespace molkit;

namespace {

std::vector<std::pair<std::string, ChemicalGraph>> load_dataset(
    const std::string &dir) {
  std::vector<std::pair<std::string, ChemicalGraph>> out;
  std::vector<fs::path> files;
  for (const auto &e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    if (ext == ".json" || ext == ".sdf" || ext == ".mol")
      files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto &p : files)
    out.emplace_back(p.stem().string(), read_molecule(p.string()));
  if (out.empty()) throw Error("no molecule files in " + dir);
  return out;
}

std::map<std::string, double> load_values_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open values file: " + path);
  std::map<std::string, double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    std::string id = line.substr(0, comma);
    std::string val = line.substr(comma + 1);
    try {
      out[id] = std::stod(val);
    } catch (const std::exception &) {
      continue;  // header or comment line
    }
  }
  if (out.empty()) throw Error("no (id,value) rows in " + path);
  return out;
}

GnnConfig config_from_json(const std::string &path, int *rho, TrainOptions *opts) {
  GnnConfig cfg;
  *rho = 2;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw Error("cannot open config: " + path);
  nlohmann::json j;
  in >> j;
  cfg.layers = j.value("layers", cfg.layers);
  cfg.k_hid = j.value("k_hid", cfg.k_hid);
  cfg.k_c = j.value("k_c", cfg.k_c);
  cfg.k_f = j.value("k_f", cfg.k_f);
  cfg.kappa = j.value("kappa", cfg.kappa);
  cfg.head_hidden = j.value("head_hidden", cfg.head_hidden);
  *rho = j.value("rho", 2);
  opts->lr = j.value("lr", opts->lr);
  opts->batch_size = j.value("batch_size", opts->batch_size);
  opts->max_epochs = j.value("max_epochs", opts->max_epochs);
  opts->patience = j.value("patience", opts->patience);
  opts->val_frac = j.value("val_frac", opts->val_frac);
  opts->test_frac = j.value("test_frac", opts->test_frac);
  opts->big_m_safety = j.value("big_m_safety", opts->big_m_safety);
  opts->big_m_interval = j.value("big_m_interval", opts->big_m_interval);
  return cfg;
}

int fail(const std::string &msg) {
  nlohmann::json j{{"error", msg}};
  std::cerr << j.dump() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"chemical-graph inference toolkit"};
  app.require_subcommand(1);

  // catalog build
  auto *cat = app.add_subcommand("catalog", "fringe-tree catalog operations");
  auto *cat_build = cat->add_subcommand("build", "extract a catalog from a dataset");
  std::string cb_dataset, cb_out;
  int cb_rho = 2;
  cat_build->add_option("--dataset", cb_dataset)->required();
  cat_build->add_option("--rho", cb_rho);
  cat_build->add_option("--out", cb_out)->required();

  // train
  auto *tr = app.add_subcommand("train", "fit the predictor on a dataset");
  std::string tr_dataset, tr_values, tr_config, tr_out;
  std::uint64_t tr_seed = 0;
  tr->add_option("--dataset", tr_dataset)->required();
  tr->add_option("--values", tr_values)->required();
  tr->add_option("--config", tr_config);
  tr->add_option("--out", tr_out)->required();
  tr->add_option("--seed", tr_seed);

  // predict
  auto *pr = app.add_subcommand("predict", "predict a property value");
  std::string pr_model, pr_mol, pr_catalog;
  pr->add_option("--model", pr_model)->required();
  pr->add_option("--molecule", pr_mol)->required();
  pr->add_option("--catalog", pr_catalog)->required();

  // milp emit / solve / decode
  auto *milp = app.add_subcommand("milp", "formulation operations");
  auto *emit = milp->add_subcommand("emit", "write the LP file");
  std::string em_spec, em_model, em_out;
  std::vector<double> em_range;
  emit->add_option("--spec", em_spec)->required();
  emit->add_option("--model", em_model)->required();
  emit->add_option("--range", em_range)->expected(2)->required();
  emit->add_option("--out", em_out)->required();

  auto *solve = milp->add_subcommand("solve", "run an external solver");
  std::string so_lp, so_sol, so_cmd;
  int so_timeout = 3600;
  solve->add_option("--lp", so_lp)->required();
  solve->add_option("--sol", so_sol)->required();
  solve->add_option("--solver-cmd", so_cmd);
  solve->add_option("--timeout", so_timeout);

  auto *dec = milp->add_subcommand("decode", "rebuild the molecule from a solution");
  std::string de_sol, de_spec, de_model, de_out;
  dec->add_option("--sol", de_sol)->required();
  dec->add_option("--spec", de_spec)->required();
  dec->add_option("--model", de_model)->required();
  dec->add_option("--out", de_out)->required();

  // witness check
  auto *wit = app.add_subcommand("witness", "witness-assignment operations");
  auto *wcheck = wit->add_subcommand("check", "encode a molecule and re-check it");
  std::string wc_mol, wc_spec, wc_model;
  std::vector<double> wc_range;
  wcheck->add_option("--molecule", wc_mol)->required();
  wcheck->add_option("--spec", wc_spec)->required();
  wcheck->add_option("--model", wc_model)->required();
  wcheck->add_option("--range", wc_range)->expected(2)->required();

  // oracle
  auto *orc = app.add_subcommand("oracle", "exhaustive micro-instance feasibility");
  std::string or_spec, or_model, or_out;
  std::vector<double> or_range;
  orc->add_option("--spec", or_spec)->required();
  orc->add_option("--model", or_model)->required();
  orc->add_option("--range", or_range)->expected(2)->required();
  orc->add_option("--out", or_out);

  // instance preset
  auto *inst = app.add_subcommand("instance", "experiment instance presets");
  auto *ipre = inst->add_subcommand("preset", "write a preset specification");
  std::string ip_id, ip_catalog, ip_out;
  ipre->add_option("--id", ip_id)->required();
  ipre->add_option("--catalog", ip_catalog)->required();
  ipre->add_option("--out", ip_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cat_build) {
      auto data = load_dataset(cb_dataset);
      std::vector<ChemicalGraph> mols;
      for (auto &[id, m] : data) mols.push_back(m);
      FringeCatalog c = build_catalog(mols, cb_rho);
      c.save(cb_out);
      std::cout << nlohmann::json{{"trees", c.size()}, {"rho", c.rho}}.dump()
                << "\n";
      return 0;
    }
    if (*tr) {
      int rho = 2;
      TrainOptions opts;
      GnnConfig cfg = config_from_json(tr_config, &rho, &opts);
      opts.seed = tr_seed;
      auto data = load_dataset(tr_dataset);
      auto values = load_values_csv(tr_values);
      std::vector<ChemicalGraph> mols;
      for (auto &[id, m] : data) mols.push_back(m);
      FringeCatalog catalog = build_catalog(mols, rho);
      std::vector<std::pair<GnnInput, double>> ds;
      for (auto &[id, m] : data) {
        auto it = values.find(id);
        if (it == values.end())
          throw Error("no value for molecule id " + id);
        ds.emplace_back(make_gnn_input(m, catalog), it->second);
      }
      opts.n_int_max = 0;
      for (auto &[in, t] : ds) opts.n_int_max = std::max(opts.n_int_max, in.n);
      TrainResult res = train(ds, cfg, opts, catalog);
      res.model.save(tr_out);
      std::cout << nlohmann::json{{"epochs", res.epochs},
                                  {"val_mae", res.val_mae},
                                  {"test_mae", res.test_mae},
                                  {"test_r2", res.test_r2}}
                       .dump()
                << "\n";
      return 0;
    }
    if (*pr) {
      GnnModel model = GnnModel::load(pr_model);
      FringeCatalog catalog = FringeCatalog::load(pr_catalog);
      ChemicalGraph m = read_molecule(pr_mol);
      std::cout << forward(m, model, catalog).y << "\n";
      return 0;
    }
    if (*emit) {
      Specification spec = Specification::load(em_spec);
      GnnModel model = GnnModel::load(em_model);
      AssembleCounts counts;
      MilpModel mm =
          MilpEncoder::assemble(spec, model, em_range[0], em_range[1], &counts);
      mm.emit_lp(em_out);
      std::cout << counts.to_json_text();
      return 0;
    }
    if (*solve) {
      std::string tmpl = so_cmd;
      if (tmpl.empty()) {
        const char *env = std::getenv("MOLKIT_SOLVER_CMD");
        if (env) tmpl = env;
      }
      if (tmpl.empty())
        return fail("solver unavailable: pass --solver-cmd or set "
                    "MOLKIT_SOLVER_CMD (template with {lp} and {sol})");
      auto subst = [](std::string s, const std::string &key,
                      const std::string &val) {
        for (size_t pos = s.find(key); pos != std::string::npos;
             pos = s.find(key, pos))
          s.replace(pos, key.size(), val), pos += val.size();
        return s;
      };
      std::string cmd = subst(subst(tmpl, "{lp}", so_lp), "{sol}", so_sol);
      cmd = "timeout " + std::to_string(so_timeout) + " " + cmd;
      int rc = std::system(cmd.c_str());
      if (rc != 0) return fail("solver command failed: " + cmd);
      if (!fs::exists(so_sol))
        return fail("solver produced no solution file: " + so_sol);
      std::cout << nlohmann::json{{"solution", so_sol}}.dump() << "\n";
      return 0;
    }
    if (*dec) {
      Specification spec = Specification::load(de_spec);
      GnnModel model = GnnModel::load(de_model);
      MilpModel mm = MilpEncoder::assemble(spec, model, -1e30, 1e30, nullptr);
      ParsedSolution sol = parse_solution(de_sol, mm);
      if (sol.solver_reported_infeasible)
        return fail("solution file reports infeasibility");
      DecodeResult res = decode_solution(sol.values, spec, model);
      write_molecule(res.molecule, de_out);
      double re = forward(res.molecule, model, spec.catalog).y;
      std::cout << nlohmann::json{{"y", res.y}, {"y_repredicted", re}}.dump()
                << "\n";
      return 0;
    }
    if (*wcheck) {
      Specification spec = Specification::load(wc_spec);
      GnnModel model = GnnModel::load(wc_model);
      ChemicalGraph m = read_molecule(wc_mol);
      MilpModel mm =
          MilpEncoder::assemble(spec, model, wc_range[0], wc_range[1], nullptr);
      Assignment a = encode_witness(m, spec, model);
      CheckReport rep = check_assignment(mm, a);
      if (rep.ok()) {
        std::cout << "{\"violations\": 0}\n";
        return 0;
      }
      std::cerr << rep.summary(50);
      return 1;
    }
    if (*orc) {
      Specification spec = Specification::load(or_spec);
      GnnModel model = GnnModel::load(or_model);
      OracleResult res =
          brute_force_feasibility(spec, model, or_range[0], or_range[1]);
      nlohmann::json j{{"feasible", res.feasible},
                       {"candidates", res.candidates}};
      if (res.feasible) {
        j["y"] = res.y;
        if (!or_out.empty()) {
          write_molecule(res.witness, or_out);
          j["witness"] = or_out;
        }
      }
      std::cout << j.dump() << "\n";
      return 0;
    }
    if (*ipre) {
      FringeCatalog catalog = FringeCatalog::load(ip_catalog);
      Specification spec = preset(ip_id, catalog);
      spec.save(ip_out);
      std::cout << nlohmann::json{{"instance", ip_id},
                                  {"trees", spec.catalog.size()},
                                  {"rank", seed_rank(spec.seed)}}
                       .dump()
                << "\n";
      return 0;
    }
  } catch (const std::exception &e) {
    return fail(e.what());
  }
  return fail("no subcommand executed");
}
