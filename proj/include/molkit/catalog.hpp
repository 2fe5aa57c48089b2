//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLKIT_CATALOG_HPP_
#define MOLKIT_CATALOG_HPP_

#include <map>
#include <string>
#include <vector>

#include "molkit/chemgraph.hpp"

namespace molkit {

struct CatalogEntry {
  FringeTree tree;
  FringeStats stats;
  std::string code;
  long freq = 0;  // number of interior vertices exhibiting this tree
};

/// Deduplicated set of rho-fringe-trees with dataset frequencies. Entries are
/// kept sorted by canonical code, so ids (1-based positions) are independent
/// of dataset order.
class FringeCatalog {
public:
  int rho = 2;
  std::vector<CatalogEntry> entries;

  int size() const { return static_cast<int>(entries.size()); }
  const CatalogEntry &entry(int id) const { return entries.at(id - 1); }  // 1-based

  /// 1-based id for a canonical code, 0 when absent.
  int id_of(const std::string &code) const;

  std::string to_json_text() const;
  static FringeCatalog from_json_text(const std::string &text);
  void save(const std::string &path) const;
  static FringeCatalog load(const std::string &path);
};

FringeCatalog build_catalog(const std::vector<ChemicalGraph> &dataset, int rho,
                            const ElementTable &et = ElementTable::defaults());

enum class SubsetPolicy { MostFrequent };

/// Keeps the k most frequent trees (ties broken by canonical code), with the
/// surviving entries renumbered in code order.
FringeCatalog select_subset(const FringeCatalog &c, int k,
                            SubsetPolicy policy = SubsetPolicy::MostFrequent);

}  // namespace molkit

#endif  // MOLKIT_CATALOG_HPP_
