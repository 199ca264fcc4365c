#pragma once

#include <stdexcept>
#include <string>

namespace qm {

// Raised for violated preconditions and detected inconsistencies.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& message) {
  if (!cond) throw Error(message);
}

}  // namespace qm
