#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qm/grid.hpp"
#include "qm/image_transform.hpp"
#include "qm/kr.hpp"
#include "qm/markov.hpp"
#include "qm/measure.hpp"
#include "qm/sample_median.hpp"
#include "qm/solid_set_function.hpp"

namespace qm {

// Unknown names and malformed scene entries. Commands map this to exit 2.
class ReferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A scene is one JSON document: a grid, named regions, measures, functions,
// transforms, systems, families and discrete measures, plus a seed and
// tolerances. Objects are built on first use and cached.
class Scene {
 public:
  // Relative file references (family and discrete-measure CSVs) resolve
  // against base_dir.
  static Scene from_json_text(const std::string& text, const std::string& base_dir = "");
  static Scene load(const std::string& path);  // I/O failures throw std::ios_base::failure

  const GridSpace& space() const;
  std::optional<std::uint64_t> seed() const;
  double tolerance(const std::string& name, double fallback) const;

  bool has_measure(const std::string& name) const;
  bool has_seed_function(const std::string& name) const;  // measure defined by a solid-set function
  bool has_transform(const std::string& name) const;
  bool has_system(const std::string& name) const;
  bool has_family(const std::string& name) const;
  bool has_discrete(const std::string& name) const;
  bool has_region(const std::string& name) const;

  Region region(const std::string& name) const;
  std::vector<std::string> region_names() const;
  std::vector<std::string> probe_names() const;  // "probes" list, else every region
  TopoMeasure measure(const std::string& name) const;
  SolidSetFunction seed_function(const std::string& name) const;
  GridFunction function(const std::string& name) const;
  ImageTransform transform(const std::string& name) const;
  TransformSystem system(const std::string& name) const;
  DiscreteMeasure discrete(const std::string& name) const;
  bool family_is_1d(const std::string& name) const;
  VariableFamily1D family_1d(const std::string& name) const;
  VariableFamily2D family_2d(const std::string& name) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace qm
