//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#include "molkit/element_table.hpp"

#include <fstream>

#include <json.hpp>

#include "molkit/common.hpp"

namespace molkit {

const ElementTable &ElementTable::defaults() {
  static const ElementTable table = [] {
    ElementTable t;
    t.set("H", 1, 10);
    t.set("C", 4, 120);
    t.set("N", 3, 140);
    t.set("O", 2, 160);
    t.set("F", 1, 190);
    return t;
  }();
  return table;
}

ElementTable ElementTable::load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open element table: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception &e) {
    throw Error("element table parse error: " + std::string(e.what()));
  }
  ElementTable t;
  t.version = j.value("version", 1);
  for (auto &[sym, info] : j.at("elements").items()) {
    t.set(sym, info.at("valence").get<int>(), info.at("mass10").get<int>());
  }
  return t;
}

void ElementTable::set(const std::string &symbol, int valence, int mass10) {
  if (valence < 1 || valence > 6)
    throw ValidationError("valence", symbol + ": must be in [1,6]");
  if (mass10 <= 0) throw ValidationError("mass10", symbol + ": must be positive");
  entries_[symbol] = ElementInfo{valence, mass10};
}

bool ElementTable::contains(const std::string &symbol) const {
  return entries_.count(symbol) != 0;
}

const ElementInfo &ElementTable::info(const std::string &symbol) const {
  auto it = entries_.find(symbol);
  if (it == entries_.end()) throw Error("unknown element: " + symbol);
  return it->second;
}

int ElementTable::max_valence() const {
  int m = 1;
  for (auto &[sym, info] : entries_) m = std::max(m, info.valence);
  return m;
}

}  // namespace molkit
