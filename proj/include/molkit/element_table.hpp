//
// Project molkit - Copyright 2026 molkit developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLKIT_ELEMENT_TABLE_HPP_
#define MOLKIT_ELEMENT_TABLE_HPP_

#include <map>
#include <string>
#include <vector>

namespace molkit {

struct ElementInfo {
  int valence = 0;  // in [1,6]
  int mass10 = 0;   // floor(10 * atomic mass)
};

/// Symbol -> (valence, mass10) lookup. The default table covers the QM9
/// elements; a versioned JSON file can extend or replace it.
class ElementTable {
public:
  ElementTable() = default;

  static const ElementTable &defaults();
  static ElementTable load(const std::string &path);

  void set(const std::string &symbol, int valence, int mass10);
  bool contains(const std::string &symbol) const;
  const ElementInfo &info(const std::string &symbol) const;  // throws on miss
  int valence(const std::string &symbol) const { return info(symbol).valence; }
  int mass10(const std::string &symbol) const { return info(symbol).mass10; }
  int max_valence() const;

  const std::map<std::string, ElementInfo> &entries() const { return entries_; }
  int version = 1;

private:
  std::map<std::string, ElementInfo> entries_;
};

}  // namespace molkit

#endif  // MOLKIT_ELEMENT_TABLE_HPP_
