// Shared helpers for the test suites.
#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "confluence/trs.hpp"

namespace testing_util {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline confluence::Trs load(const std::string& name) {
  return confluence::parse_cops(read_file(std::string(CONFLUENCE_TEST_DATA) + "/" + name));
}

/// Terms in prefix syntax; single letters u..z are variables.
inline confluence::Term T(const std::string& s) {
  return confluence::parse_term(s, {"u", "v", "w", "x", "y", "z"});
}

inline const std::vector<std::string>& corpus() {
  static const std::vector<std::string> files{
      "empty.trs", "orthogonal.trs", "almost_closed.trs", "pcp_closed.trs", "cops62.trs", "assoc_both.trs",
      "assoc_unit.trs",  "succ_pred_inf.trs",       "int_plus.trs", "assoc_succ.trs",    "nat_arith.trs"};
  return files;
}

}  // namespace testing_util

namespace confluence {
inline void PrintTo(const Term& t, std::ostream* os) { *os << t.str(); }
}  // namespace confluence
