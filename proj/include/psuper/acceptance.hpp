#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace psuper::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// The desk-scale verification suite: one quantitative criterion per entry,
/// every tolerance pinned in code. Prints one pass/fail line per criterion.
std::vector<CriterionResult> run_all(std::ostream& os);

/// True when every criterion passed.
bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace psuper::acceptance
