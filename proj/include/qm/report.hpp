#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qm/grid.hpp"

namespace qm {

// Outcome of a sampled property check. On failure `failed` names the property
// and `witness` / `values` hold the offending configuration.
struct CheckReport {
  bool pass = true;
  std::string failed;
  std::vector<Region> witness;
  std::vector<double> values;
  std::size_t checked = 0;
  std::string detail;

  void fail(std::string what, std::vector<Region> regions, std::vector<double> vals, std::string why = {}) {
    pass = false;
    failed = std::move(what);
    witness = std::move(regions);
    values = std::move(vals);
    detail = std::move(why);
  }
};

}  // namespace qm
