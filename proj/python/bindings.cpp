//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "molkit/encode.hpp"
#include "molkit/gnn.hpp"
#include "molkit/spec.hpp"
#include "molkit/witness.hpp"

namespace py = pybind11;
using namespace molkit;

namespace {

ChemicalGraph mol_of(const std::string &json_text) {
  return molecule_from_json_text(json_text);
}

}  // namespace

PYBIND11_MODULE(molkit, m) {
  m.doc() = "chemical-graph property prediction and MILP-based inverse design";

  py::register_exception<Error>(m, "MolkitError");

  m.def("suppress_hydrogens",
        [](const std::string &mol) {
          return molecule_to_json_text(suppress_hydrogens(mol_of(mol)));
        },
        py::arg("molecule_json"));

  m.def("vertex_heights",
        [](const std::string &mol) {
          auto hs = vertex_heights(suppress_hydrogens(mol_of(mol)));
          std::vector<int> out;
          for (auto &h : hs) out.push_back(h ? *h : -1);
          return out;  // -1 marks an undefined height
        },
        py::arg("molecule_json"));

  m.def("decompose",
        [](const std::string &mol, int rho) {
          TwoLayerDecomposition d = decompose(mol_of(mol), rho);
          return py::make_tuple(d.interior, d.exterior);
        },
        py::arg("molecule_json"), py::arg("rho") = 2);

  m.def("fringe_codes",
        [](const std::string &mol, int rho) {
          ChemicalGraph g = mol_of(mol);
          ChemicalGraph s = suppress_hydrogens(g);
          TwoLayerDecomposition d = decompose(g, rho);
          std::vector<std::string> codes;
          for (const FringeTree &t : extract_fringe_trees(d, s))
            codes.push_back(canonical_code(t));
          return codes;
        },
        py::arg("molecule_json"), py::arg("rho") = 2);

  m.def("build_catalog",
        [](const std::vector<std::string> &mols, int rho) {
          std::vector<ChemicalGraph> gs;
          for (const std::string &s : mols) gs.push_back(mol_of(s));
          return build_catalog(gs, rho).to_json_text();
        },
        py::arg("molecule_jsons"), py::arg("rho") = 2);

  m.def("train",
        [](const std::vector<std::pair<std::string, double>> &dataset,
           int layers, int k_hid, int k_c, int rho, std::uint64_t seed,
           int max_epochs, double lr) {
          std::vector<ChemicalGraph> gs;
          for (auto &[s, v] : dataset) gs.push_back(mol_of(s));
          FringeCatalog catalog = build_catalog(gs, rho);
          std::vector<std::pair<GnnInput, double>> ds;
          for (size_t i = 0; i < gs.size(); ++i)
            ds.emplace_back(make_gnn_input(gs[i], catalog), dataset[i].second);
          GnnConfig cfg;
          cfg.layers = layers;
          cfg.k_hid = k_hid;
          cfg.k_c = k_c;
          cfg.head_hidden = {k_c};
          TrainOptions opts;
          opts.seed = seed;
          opts.max_epochs = max_epochs;
          opts.lr = lr;
          TrainResult res = train(ds, cfg, opts, catalog);
          return py::make_tuple(res.model.to_json_text(),
                                catalog.to_json_text(), res.test_r2);
        },
        py::arg("dataset"), py::arg("layers") = 2, py::arg("k_hid") = 8,
        py::arg("k_c") = 8, py::arg("rho") = 2, py::arg("seed") = 0,
        py::arg("max_epochs") = 200, py::arg("lr") = 5e-3);

  m.def("predict",
        [](const std::string &model_json, const std::string &catalog_json,
           const std::string &mol) {
          GnnModel model = GnnModel::from_json_text(model_json);
          FringeCatalog catalog = FringeCatalog::from_json_text(catalog_json);
          return forward(mol_of(mol), model, catalog).y;
        },
        py::arg("model_json"), py::arg("catalog_json"), py::arg("molecule_json"));

  m.def("preset",
        [](const std::string &instance_id, const std::string &catalog_json) {
          return preset(instance_id,
                        FringeCatalog::from_json_text(catalog_json))
              .to_json_text();
        },
        py::arg("instance_id"), py::arg("catalog_json"));

  m.def("seed_rank",
        [](const std::string &spec_json) {
          return seed_rank(Specification::from_json_text(spec_json).seed);
        },
        py::arg("spec_json"));

  m.def("assemble_lp",
        [](const std::string &spec_json, const std::string &model_json,
           double lo, double hi) {
          Specification spec = Specification::from_json_text(spec_json);
          GnnModel model = GnnModel::from_json_text(model_json);
          AssembleCounts counts;
          MilpModel mm = MilpEncoder::assemble(spec, model, lo, hi, &counts);
          return py::make_tuple(mm.to_lp_text(), counts.variables,
                                counts.constraints);
        },
        py::arg("spec_json"), py::arg("model_json"), py::arg("lo"),
        py::arg("hi"));

  m.def("witness_check",
        [](const std::string &mol, const std::string &spec_json,
           const std::string &model_json, double lo, double hi) {
          Specification spec = Specification::from_json_text(spec_json);
          GnnModel model = GnnModel::from_json_text(model_json);
          MilpModel mm = MilpEncoder::assemble(spec, model, lo, hi, nullptr);
          Assignment a = encode_witness(mol_of(mol), spec, model);
          CheckReport rep = check_assignment(mm, a);
          return py::make_tuple(rep.ok(), rep.summary(),
                                a.count("y") ? a.at("y") : 0.0);
        },
        py::arg("molecule_json"), py::arg("spec_json"), py::arg("model_json"),
        py::arg("lo"), py::arg("hi"));

  m.def("decode_solution",
        [](const std::string &sol_text, const std::string &spec_json,
           const std::string &model_json) {
          Specification spec = Specification::from_json_text(spec_json);
          GnnModel model = GnnModel::from_json_text(model_json);
          MilpModel mm = MilpEncoder::assemble(spec, model, -1e30, 1e30, nullptr);
          ParsedSolution sol = parse_solution_text(sol_text, mm);
          DecodeResult res = decode_solution(sol.values, spec, model);
          return py::make_tuple(molecule_to_json_text(res.molecule), res.y);
        },
        py::arg("solution_text"), py::arg("spec_json"), py::arg("model_json"));

  m.def("oracle",
        [](const std::string &spec_json, const std::string &model_json,
           double lo, double hi) {
          Specification spec = Specification::from_json_text(spec_json);
          GnnModel model = GnnModel::from_json_text(model_json);
          OracleResult res = brute_force_feasibility(spec, model, lo, hi);
          py::dict out;
          out["feasible"] = res.feasible;
          out["candidates"] = res.candidates;
          if (res.feasible) {
            out["y"] = res.y;
            out["witness"] = molecule_to_json_text(res.witness);
          }
          return out;
        },
        py::arg("spec_json"), py::arg("model_json"), py::arg("lo"),
        py::arg("hi"));
}
