#include "qm/scene.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qm/error.hpp"

namespace qm {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& why) { throw ReferenceError(where + ": " + why); }

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) bad(where, std::string("missing field '") + key + "'");
  return obj.at(key);
}

template <class T>
T get(const json& obj, const char* key, const std::string& where) {
  try {
    return field(obj, key, where).get<T>();
  } catch (const json::exception& e) {
    bad(where, std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return get<T>(obj, key, where);
}

Role parse_role(const json& obj, const std::string& where) {
  const auto r = get_or<std::string>(obj, "role", "compact", where);
  if (r == "compact") return Role::compact;
  if (r == "open") return Role::open;
  bad(where, "role must be 'compact' or 'open'");
}

// Runs `build` and turns library errors into reference errors naming the
// scene entry.
template <class F>
auto guarded(const std::string& where, F&& build) {
  try {
    return build();
  } catch (const ReferenceError&) {
    throw;
  } catch (const Error& e) {
    bad(where, e.what());
  } catch (const json::exception& e) {
    bad(where, e.what());
  }
}

template <class T>
class Cache {
 public:
  T get(const std::string& name, const std::function<T()>& build) {
    {
      std::lock_guard lock(mu_);
      if (auto it = items_.find(name); it != items_.end()) return it->second;
    }
    T value = build();
    std::lock_guard lock(mu_);
    return items_.emplace(name, std::move(value)).first->second;
  }

 private:
  std::mutex mu_;
  std::map<std::string, T> items_;
};

}  // namespace

struct Scene::Impl {
  json doc;
  std::string base_dir;
  GridSpace space;

  Cache<TopoMeasure> measures;
  Cache<ImageTransform> transforms;
  Cache<TransformSystem> systems;
  Cache<GridFunction> functions;

  // Names currently under construction, to reject reference cycles.
  std::mutex building_mu;
  std::set<std::string> building;

  const json* section_entry(const char* section, const std::string& name) const {
    if (!doc.contains(section) || !doc.at(section).is_object()) return nullptr;
    const auto& s = doc.at(section);
    auto it = s.find(name);
    return it == s.end() ? nullptr : &*it;
  }

  const json& entry(const char* section, const std::string& name) const {
    const json* e = section_entry(section, name);
    if (!e) throw ReferenceError(std::string("unknown ") + section + " entry '" + name + "'");
    return *e;
  }

  std::string path_of(const std::string& p) const {
    if (base_dir.empty() || std::filesystem::path(p).is_absolute()) return p;
    return (std::filesystem::path(base_dir) / p).string();
  }

  std::size_t cell(const json& xy, const std::string& where) const {
    if (!xy.is_array() || xy.size() != 2 || !xy[0].is_number_integer() || !xy[1].is_number_integer())
      bad(where, "cell must be [x, y] with integer grid coordinates");
    const int x = xy[0].get<int>(), y = xy[1].get<int>();
    if (!space.admissible(x, y)) bad(where, "cell [" + std::to_string(x) + ", " + std::to_string(y) + "] is not admissible");
    return space.index(x, y);
  }

  std::vector<std::size_t> cells(const json& list, const std::string& where) const {
    if (!list.is_array()) bad(where, "expected a list of cells");
    std::vector<std::size_t> out;
    for (const auto& c : list) out.push_back(cell(c, where));
    return out;
  }

  Point point(const json& xy, const std::string& where) const {
    if (!xy.is_array() || xy.size() != 2 || !xy[0].is_number() || !xy[1].is_number())
      bad(where, "point must be [x, y]");
    return {xy[0].get<double>(), xy[1].get<double>()};
  }

  // A region literal, or the name of one in "regions".
  Region region_literal(const json& r, const std::string& where) const {
    if (r.is_string()) {
      const auto name = r.get<std::string>();
      return region_literal(entry("regions", name), "regions." + name);
    }
    const Role role = parse_role(r, where);
    Region out;
    if (r.contains("rle")) {
      out = guarded(where, [&] { return Region{CellSet::from_rle(get<std::string>(r, "rle", where), space.cell_count()), role}; });
    } else if (r.contains("rect")) {
      const auto v = get<std::vector<int>>(r, "rect", where);
      if (v.size() != 4) bad(where, "rect must be [x0, y0, x1, y1]");
      out = guarded(where, [&] { return space.rect(v[0], v[1], v[2], v[3], role); });
    } else if (r.contains("ball")) {
      const auto& b = r.at("ball");
      out = space.ball(point(field(b, "center", where), where), get<double>(b, "radius", where), role);
    } else if (r.contains("cells")) {
      out = space.region(cells(r.at("cells"), where), role);
    } else if (get_or<bool>(r, "full", false, where)) {
      out = space.full(role);
    } else {
      bad(where, "region needs one of rle, rect, ball, cells, full");
    }
    if (!space.admissible(out)) bad(where, "region uses cells outside the space");
    return out;
  }

  void enter(const std::string& key) {
    std::lock_guard lock(building_mu);
    if (!building.insert(key).second) throw ReferenceError("reference cycle through " + key);
  }
  void leave(const std::string& key) {
    std::lock_guard lock(building_mu);
    building.erase(key);
  }

  template <class F>
  auto build_named(const std::string& key, F&& f) {
    enter(key);
    try {
      auto v = guarded(key, f);
      leave(key);
      return v;
    } catch (...) {
      leave(key);
      throw;
    }
  }

  std::optional<SolidSetFunction> seed_function(const std::string& name) const {
    const json& m = entry("measures", name);
    const std::string where = "measures." + name;
    const auto type = get<std::string>(m, "type", where);
    return guarded(where, [&]() -> std::optional<SolidSetFunction> {
      if (type == "point_mass") return make_point_mass_seed(space, cell(field(m, "cell", where), where));
      if (type == "points_2n1") return make_point_config(space, cells(field(m, "cells", where), where));
      if (type == "two_point_weighted") {
        const auto ps = cells(field(m, "cells", where), where);
        if (ps.size() != 2) bad(where, "two_point_weighted needs exactly two cells");
        const double area = get_or<double>(m, "cell_area", space.cell_size() * space.cell_size(), where);
        return make_weighted_two_point(space, ps[0], ps[1], area);
      }
      if (type == "aarnes_circle") return make_aarnes_circle(space, cell(field(m, "cell", where), where));
      return std::nullopt;
    });
  }
};

Scene Scene::from_json_text(const std::string& text, const std::string& base_dir) {
  Scene s;
  s.impl_ = std::make_shared<Impl>();
  Impl& im = *s.impl_;
  im.base_dir = base_dir;
  try {
    im.doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ReferenceError(std::string("scene is not valid JSON: ") + e.what());
  }
  if (!im.doc.is_object()) throw ReferenceError("scene must be a JSON object");
  const json& sp = field(im.doc, "space", "scene");
  const auto mode = get_or<std::string>(sp, "mode", "compact", "space");
  im.space = guarded("space", [&] {
    if (mode == "disk")
      return GridSpace::disk(get<int>(sp, "diameter", "space"), get<double>(sp, "radius", "space"));
    Mode m;
    if (mode == "compact")
      m = Mode::compact;
    else if (mode == "marked_infinity")
      m = Mode::marked_infinity;
    else
      bad("space", "mode must be compact, marked_infinity or disk");
    Point origin{};
    if (sp.contains("origin")) origin = im.point(sp.at("origin"), "space.origin");
    return GridSpace(get<int>(sp, "width", "space"), get<int>(sp, "height", "space"), m,
                     get_or<double>(sp, "cell_size", 1.0, "space"), origin);
  });
  return s;
}

Scene Scene::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot read scene file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str(), std::filesystem::path(path).parent_path().string());
}

const GridSpace& Scene::space() const { return impl_->space; }

std::optional<std::uint64_t> Scene::seed() const {
  const json& d = impl_->doc;
  if (!d.contains("seed")) return std::nullopt;
  if (!d.at("seed").is_number_unsigned()) throw ReferenceError("seed must be a nonnegative integer");
  return d.at("seed").get<std::uint64_t>();
}

double Scene::tolerance(const std::string& name, double fallback) const {
  const json& d = impl_->doc;
  if (!d.contains("tolerances")) return fallback;
  return get_or<double>(d.at("tolerances"), name.c_str(), fallback, "tolerances");
}

bool Scene::has_measure(const std::string& name) const { return impl_->section_entry("measures", name); }
bool Scene::has_transform(const std::string& name) const { return impl_->section_entry("transforms", name); }
bool Scene::has_system(const std::string& name) const { return impl_->section_entry("systems", name); }
bool Scene::has_family(const std::string& name) const { return impl_->section_entry("families", name); }
bool Scene::has_discrete(const std::string& name) const { return impl_->section_entry("discrete", name); }
bool Scene::has_region(const std::string& name) const { return impl_->section_entry("regions", name); }

bool Scene::has_seed_function(const std::string& name) const {
  return has_measure(name) && impl_->seed_function(name).has_value();
}

Region Scene::region(const std::string& name) const {
  return impl_->region_literal(impl_->entry("regions", name), "regions." + name);
}

std::vector<std::string> Scene::region_names() const {
  std::vector<std::string> out;
  if (impl_->doc.contains("regions"))
    for (const auto& [k, v] : impl_->doc.at("regions").items()) out.push_back(k);
  return out;
}

std::vector<std::string> Scene::probe_names() const {
  const json& d = impl_->doc;
  if (!d.contains("probes")) return region_names();
  auto names = get<std::vector<std::string>>(d, "probes", "scene");
  for (const auto& n : names)
    if (!has_region(n)) throw ReferenceError("probes: unknown region '" + n + "'");
  return names;
}

SolidSetFunction Scene::seed_function(const std::string& name) const {
  auto f = impl_->seed_function(name);
  if (!f) throw ReferenceError("measures." + name + ": not a solid-set function seed");
  return *f;
}

TopoMeasure Scene::measure(const std::string& name) const {
  const json& m = impl_->entry("measures", name);
  const std::string where = "measures." + name;
  return impl_->measures.get(name, [&] {
    return impl_->build_named(where, [&]() -> TopoMeasure {
      const GridSpace& space = impl_->space;
      const auto type = get<std::string>(m, "type", where);
      if (type == "point_mass") return point_mass(space, impl_->cell(field(m, "cell", where), where));
      if (auto seed = impl_->seed_function(name)) return extend(*seed);
      if (type == "diffuse_dtm")
        return make_diffuse_dtm(space, impl_->region_literal(field(m, "region", where), where).cells);
      if (type == "cell_count") return cell_count_measure(space);
      if (type == "weighted") {
        auto w = get<std::vector<double>>(m, "weights", where);
        if (w.size() != space.cell_count()) bad(where, "weights must list every grid cell in row-major order");
        return weighted_measure(space, std::move(w));
      }
      if (type == "linear") {
        std::vector<std::pair<double, TopoMeasure>> terms;
        for (const auto& t : field(m, "terms", where))
          terms.emplace_back(get<double>(t, "coef", where), measure(get<std::string>(t, "measure", where)));
        return linear_combination(terms);
      }
      if (type == "adjoint")
        return adjoint(transform(get<std::string>(m, "transform", where)),
                       measure(get<std::string>(m, "measure", where)));
      if (type == "markov") {
        const int level = get_or<int>(m, "level", 1, where);
        return LazyMeasure(system(get<std::string>(m, "system", where)),
                           measure(get<std::string>(m, "measure", where)), level)
            .measure();
      }
      bad(where, "unknown measure type '" + type + "'");
    });
  });
}

GridFunction Scene::function(const std::string& name) const {
  const json& f = impl_->entry("functions", name);
  const std::string where = "functions." + name;
  return impl_->functions.get(name, [&] {
    return impl_->build_named(where, [&]() -> GridFunction {
      const GridSpace& space = impl_->space;
      if (f.is_array()) {
        auto v = f.get<std::vector<double>>();
        if (v.size() != space.cell_count()) bad(where, "dense function must list every grid cell");
        GridFunction g;
        g.values = std::move(v);
        return g;
      }
      const auto type = get<std::string>(f, "type", where);
      if (type == "dense") {
        auto v = get<std::vector<double>>(f, "values", where);
        if (v.size() != space.cell_count()) bad(where, "dense function must list every grid cell");
        GridFunction g;
        g.values = std::move(v);
        return g;
      }
      if (type == "radial")
        return radial_function(space, impl_->point(field(f, "center", where), where), get<double>(f, "radius", where),
                               get_or<double>(f, "height", 1.0, where));
      if (type == "coordinate_x") return coordinate_x_function(space);
      if (type == "indicator")
        return indicator_function(space, impl_->region_literal(field(f, "region", where), where).cells,
                                  get_or<double>(f, "value", 1.0, where));
      if (type == "theta") return theta(transform(get<std::string>(f, "transform", where)), function(get<std::string>(f, "function", where)));
      bad(where, "unknown function type '" + type + "'");
    });
  });
}

ImageTransform Scene::transform(const std::string& name) const {
  const json& t = impl_->entry("transforms", name);
  const std::string where = "transforms." + name;
  return impl_->transforms.get(name, [&] {
    return impl_->build_named(where, [&]() -> ImageTransform {
      const GridSpace& space = impl_->space;
      const auto type = get<std::string>(t, "type", where);
      if (type == "inverse_map") {
        const auto map = get<std::string>(t, "map", where);
        CellMap u;
        if (map == "identity") {
          u = identity_map(space);
        } else if (map == "isometry") {
          u = grid_isometry(space, get<int>(t, "k", where));
        } else if (map == "constant") {
          u = constant_map(space, impl_->cell(field(t, "cell", where), where));
        } else if (map == "cells") {
          u = get<std::vector<std::size_t>>(t, "cells", where);
          if (u.size() != space.cell_count()) bad(where, "cell map must list every grid cell");
        } else {
          bad(where, "map must be identity, isometry, constant or cells");
        }
        return from_proper_map(space, space, u, "inverse_map(" + name + ")");
      }
      if (type == "constant_simple") return constant_from_simple(measure(get<std::string>(t, "measure", where)), space);
      if (type == "two_point_hull") {
        const auto ps = impl_->cells(field(t, "cells", where), where);
        if (ps.size() != 2) bad(where, "two_point_hull needs exactly two cells");
        return two_point_hull(space, ps[0], ps[1]);
      }
      if (type == "compose")
        return compose(transform(get<std::string>(t, "outer", where)), transform(get<std::string>(t, "inner", where)));
      if (type == "corrupted")
        return with_cell_removed(transform(get<std::string>(t, "base", where)),
                                 impl_->cell(field(t, "cell", where), where));
      bad(where, "unknown transform type '" + type + "'");
    });
  });
}

TransformSystem Scene::system(const std::string& name) const {
  const json& s = impl_->entry("systems", name);
  const std::string where = "systems." + name;
  return impl_->systems.get(name, [&] {
    return impl_->build_named(where, [&]() -> TransformSystem {
      if (get_or<std::string>(s, "type", "", where) == "sierpinski") return sierpinski_system();
      const json& terms = field(s, "terms", where);
      auto alphas = get<std::vector<double>>(s, "alphas", where);
      if (!terms.is_array() || terms.size() != alphas.size()) bad(where, "terms and alphas must have equal length");
      if (terms.empty()) bad(where, "system needs at least one term");
      std::vector<AffineMap> maps;
      std::vector<ImageTransform> ts;
      std::vector<double> factors;
      for (const auto& term : terms) {
        if (term.contains("affine")) {
          const auto c = get<std::vector<double>>(term, "affine", where);
          if (c.size() != 6) bad(where, "affine needs a, b, c, d, e, f");
          maps.push_back({c[0], c[1], c[2], c[3], c[4], c[5]});
        } else {
          ts.push_back(transform(get<std::string>(term, "transform", where)));
          factors.push_back(get_or<double>(term, "factor", 1.0, where));
        }
      }
      if (!maps.empty() && !ts.empty()) bad(where, "a system cannot mix affine maps and grid transforms");
      if (!s.contains("tail_eps")) return ts.empty() ? make_system(maps, alphas) : make_system(ts, alphas, factors);
      // Long lists are truncated like an infinite generator: trailing terms
      // are dropped while their total mass stays below tail_eps.
      std::vector<double> suffix(alphas.size() + 1, 0.0);
      for (std::size_t i = alphas.size(); i-- > 0;) suffix[i] = suffix[i + 1] + alphas[i];
      SystemGenerator gen;
      gen.alpha = [alphas](std::size_t i) { return alphas.at(i - 1); };
      gen.tail = [suffix](std::size_t k) { return suffix.at(k); };
      if (ts.empty())
        gen.map = [maps](std::size_t i) { return maps.at(i - 1); };
      else
        gen.transform = [ts](std::size_t i) { return ts.at(i - 1); };
      auto sys = make_system(gen, get<double>(s, "tail_eps", where), alphas.size());
      if (!ts.empty()) sys.factors.assign(factors.begin(), factors.begin() + sys.transforms.size());
      return sys;
    });
  });
}

DiscreteMeasure Scene::discrete(const std::string& name) const {
  const json& d = impl_->entry("discrete", name);
  const std::string where = "discrete." + name;
  if (d.contains("csv")) {
    const auto path = impl_->path_of(get<std::string>(d, "csv", where));
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot read " + path);
    return guarded(where, [&] { return DiscreteMeasure::read_csv(in); });
  }
  DiscreteMeasure out;
  for (const auto& row : field(d, "points", where)) {
    const auto v = row.get<std::vector<double>>();
    if (v.size() != 3) bad(where, "points are [x, y, weight]");
    out.add({v[0], v[1]}, v[2]);
  }
  if (out.size() == 0) bad(where, "discrete measure has no points");
  return out;
}

bool Scene::family_is_1d(const std::string& name) const {
  const json& f = impl_->entry("families", name);
  const auto type = get<std::string>(f, "type", "families." + name);
  if (type == "line" || type == "line_csv" || type == "constants") return true;
  if (type == "grid") return false;
  bad("families." + name, "unknown family type '" + type + "'");
}

VariableFamily1D Scene::family_1d(const std::string& name) const {
  const json& f = impl_->entry("families", name);
  const std::string where = "families." + name;
  const auto type = get<std::string>(f, "type", where);
  return guarded(where, [&] {
    VariableFamily1D fam;
    if (type == "line_csv") {
      const auto path = impl_->path_of(get<std::string>(f, "path", where));
      std::ifstream in(path);
      if (!in) throw std::ios_base::failure("cannot read " + path);
      return VariableFamily1D::read_csv(in, get_or<std::int64_t>(f, "cells", 0, where));
    }
    if (type == "line") {
      fam.cells = get<std::int64_t>(f, "cells", where);
      fam.weights = get<std::vector<std::int64_t>>(f, "weights", where);
      fam.maps = get<std::vector<std::vector<int>>>(f, "maps", where);
    } else if (type == "constants") {
      // Each variable is constant; one sample point carries all the mass.
      fam.cells = get<std::int64_t>(f, "cells", where);
      fam.weights = {1};
      for (int v : get<std::vector<int>>(f, "values", where)) fam.maps.push_back({v});
    } else {
      bad(where, "not a 1-D family");
    }
    fam.validate();
    return fam;
  });
}

VariableFamily2D Scene::family_2d(const std::string& name) const {
  const json& f = impl_->entry("families", name);
  const std::string where = "families." + name;
  if (get<std::string>(f, "type", where) != "grid") bad(where, "not a 2-D family");
  return guarded(where, [&] {
    const GridSpace& space = impl_->space;
    VariableFamily2D fam{space, space, {}, measure(get<std::string>(f, "measure", where))};
    for (const auto& m : field(f, "maps", where)) {
      if (m.contains("isometry"))
        fam.maps.push_back(grid_isometry(space, get<int>(m, "isometry", where)));
      else if (m.contains("constant"))
        fam.maps.push_back(constant_map(space, impl_->cell(m.at("constant"), where)));
      else if (m.contains("cells"))
        fam.maps.push_back(get<std::vector<std::size_t>>(m, "cells", where));
      else if (get_or<bool>(m, "identity", false, where))
        fam.maps.push_back(identity_map(space));
      else
        bad(where, "map needs isometry, constant, cells or identity");
    }
    fam.validate();
    return fam;
  });
}

}  // namespace qm
