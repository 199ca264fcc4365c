#include "qm/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "qm/error.hpp"
#include "qm/quasi_integral.hpp"
#include "qm/random.hpp"
#include "qm/scene.hpp"

namespace qm {

std::string format_number(double v) {
  if (v == 0) v = 0;  // no "-0"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

std::string field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return q + "\"";
}

class Csv {
 public:
  explicit Csv(std::ostream& os) : os_(os) {}

  template <class... T>
  void row(const T&... cells) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(cells), first = false), ...);
    os_ << '\n';
  }

 private:
  static std::string cell(const std::string& s) { return field(s); }
  static std::string cell(const char* s) { return field(s); }
  static std::string cell(double v) { return format_number(v); }
  template <class I>
    requires std::is_integral_v<I>
  static std::string cell(I v) { return std::to_string(v); }

  std::ostream& os_;
};

// Failure that still produces a CSV body: the rows written so far plus a
// diagnostic row, with exit code 1.
struct PropertyFailure {
  std::string message;
};

struct Context {
  const CommandOptions& opts;
  const Scene& scene;
  Csv& csv;

  std::uint64_t seed(const std::string& stream) const {
    std::optional<std::uint64_t> s = opts.seed ? opts.seed : scene.seed();
    if (!s) throw ReferenceError(opts.verb + " is stochastic and needs a seed (--seed or scene \"seed\")");
    return derive_seed(*s, stream_id(stream));
  }
  std::size_t budget(std::size_t fallback) const { return opts.budget.value_or(fallback); }
  double tol(const std::string& name, double fallback) const { return opts.tol.value_or(scene.tolerance(name, fallback)); }

  void arity(std::size_t lo, std::size_t hi) const {
    if (opts.args.size() < lo || opts.args.size() > hi)
      throw ReferenceError(opts.verb + " takes " + std::to_string(lo) +
                           (hi == lo ? "" : " to " + std::to_string(hi)) + " names");
  }
};

bool report_rows(Context& c, const std::string& check, const CheckReport& r) {
  std::string detail;
  if (!r.pass) detail = r.failed + (r.detail.empty() ? "" : ": " + r.detail);
  c.csv.row("check", check, r.pass ? "pass" : "fail", r.checked, detail);
  if (r.pass) return true;
  for (std::size_t i = 0; i < r.witness.size(); ++i)
    c.csv.row("witness", i, role_name(r.witness[i].role), r.witness[i].size(), r.witness[i].cells.to_rle());
  for (std::size_t i = 0; i < r.values.size(); ++i) c.csv.row("value", i, r.values[i], "", "");
  return false;
}

int cmd_axioms(Context& c) {
  c.arity(1, 1);
  const std::string& name = c.opts.args[0];
  const std::size_t budget = c.budget(2000);
  c.csv.row("row", "name", "result", "count", "detail");
  bool pass = true;
  if (c.scene.has_measure(name)) {
    if (c.scene.has_seed_function(name)) {
      pass = report_rows(c, "solid_set_function", check_ssf_axioms(c.scene.seed_function(name), budget, c.seed("axioms/ssf")));
      if (!pass) return exit_property;
    }
    const TopoMeasure mu = c.scene.measure(name);
    pass = report_rows(c, "tm1", check_tm1_sampled(mu, budget, c.seed("axioms/tm1"))) && pass;
    pass = report_rows(c, "superadditivity", check_superadditivity(mu, budget, c.seed("axioms/super"))) && pass;
  } else if (c.scene.has_transform(name)) {
    pass = report_rows(c, "image_transform", check_it_axioms(c.scene.transform(name), budget, c.seed("axioms/it")));
  } else {
    throw ReferenceError("axioms: '" + name + "' is neither a measure nor a transform");
  }
  return pass ? exit_pass : exit_property;
}

int cmd_eval(Context& c) {
  if (c.opts.args.empty()) c.arity(1, 1);
  const TopoMeasure mu = c.scene.measure(c.opts.args[0]);
  std::vector<std::string> names(c.opts.args.begin() + 1, c.opts.args.end());
  if (names.empty()) names = c.scene.probe_names();
  c.csv.row("region", "role", "value");
  for (const auto& n : names) {
    const Region r = c.scene.region(n);
    c.csv.row(n, role_name(r.role), mu(r));
  }
  return exit_pass;
}

int cmd_integrate(Context& c) {
  c.arity(2, 2);
  const TopoMeasure mu = c.scene.measure(c.opts.args[0]);
  const GridFunction f = c.scene.function(c.opts.args[1]);
  if (f.size() != mu.space().cell_count()) throw ReferenceError("integrate: function and measure live on different grids");
  c.csv.row("measure", "function", "value");
  c.csv.row(c.opts.args[0], c.opts.args[1], quasi_integral(mu, f));
  return exit_pass;
}

int cmd_kr(Context& c) {
  c.arity(2, 2);
  const auto& a = c.opts.args[0];
  const auto& b = c.opts.args[1];
  if (c.scene.has_discrete(a) && c.scene.has_discrete(b)) {
    const W1Result w = w1_discrete(c.scene.discrete(a).normalized(), c.scene.discrete(b).normalized());
    c.csv.row("value", "dual", "gap");
    c.csv.row(w.value, w.dual, w.gap);
    const double tol = c.tol("kr_gap", 1e-9);
    if (w.gap > tol) throw PropertyFailure{"primal-dual gap " + format_number(w.gap) + " above " + format_number(tol)};
    return exit_pass;
  }
  if (c.scene.has_measure(a) && c.scene.has_measure(b)) {
    const auto lb = d_kr_topo_lower(c.scene.measure(a), c.scene.measure(b), 4, c.budget(50), c.seed("kr/lower"));
    c.csv.row("lower_bound", "raw_gap", "lipschitz");
    c.csv.row(lb.value, lb.raw_gap, lb.lipschitz);
    return exit_pass;
  }
  throw ReferenceError("kr: '" + a + "' and '" + b + "' must both be discrete measures or both grid measures");
}

int cmd_markov(Context& c) {
  c.arity(1, 1);
  const TransformSystem sys = c.scene.system(c.opts.args[0]);
  if (sys.continuous()) {
    const DiscreteMeasure mu0 = c.opts.initial.empty() ? DiscreteMeasure::dirac({0, 0}) : c.scene.discrete(c.opts.initial);
    const double factor = sys.contraction_factor();
    DiscreteFixedPoint fp;
    try {
      fp = fixed_point(sys, mu0, c.tol("markov", 0.0), c.opts.iterations);
    } catch (const Error& e) {
      throw PropertyFailure{e.what()};
    }
    c.csv.row("k", "d_k", "ratio", "exact");
    std::string violation;
    for (std::size_t k = 0; k < fp.trace.size(); ++k) {
      const bool has_ratio = k > 0 && fp.trace[k - 1] > 0;
      const double ratio = has_ratio ? fp.trace[k] / fp.trace[k - 1] : 0;
      c.csv.row(k, fp.trace[k], has_ratio ? format_number(ratio) : std::string(), fp.exact[k] ? 1 : 0);
      if (has_ratio && ratio > factor + 1e-9 && violation.empty())
        violation = "ratio " + format_number(ratio) + " at k=" + std::to_string(k) + " above factor " + format_number(factor);
    }
    if (!violation.empty()) throw PropertyFailure{violation};
    return exit_pass;
  }
  if (c.opts.initial.empty()) throw ReferenceError("markov: grid systems need --initial <measure>");
  const TopoMeasure mu0 = c.scene.measure(c.opts.initial);
  GridFixedPoint fp;
  try {
    fp = fixed_point(sys, mu0, c.tol("markov", 0.0), c.opts.iterations, c.seed("markov/grid"));
  } catch (const Error& e) {
    throw PropertyFailure{e.what()};
  }
  c.csv.row("k", "d_k", "kr_lower", "probe_sup");
  for (std::size_t k = 0; k < fp.trace.size(); ++k) c.csv.row(k, fp.trace[k], fp.kr_lower[k], fp.probe_sup[k]);
  return exit_pass;
}

Bounds square_bounds(const DiscreteMeasure& nu) {
  double x0 = nu.points[0].x, x1 = x0, y0 = nu.points[0].y, y1 = y0;
  for (const Point& p : nu.points) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double cx = (x0 + x1) / 2, cy = (y0 + y1) / 2;
  const double extent = std::max(x1 - x0, y1 - y0);
  const double half = extent > 1e-9 ? 0.51 * extent : 0.5;
  return {cx - half, cx + half, cy - half, cy + half};
}

int cmd_render(Context& c, std::ostream& raster_out) {
  c.arity(1, 1);
  const TransformSystem sys = c.scene.system(c.opts.args[0]);
  if (!sys.continuous()) throw ReferenceError("render needs a system of affine maps");
  const DiscreteMeasure pts = chaos_game(sys, c.opts.samples, c.opts.burn_in, c.seed("render"));
  const Raster r = render_density(pts, c.opts.resolution, square_bounds(pts));
  write_ppm(r, raster_out);
  std::size_t occupied = 0;
  std::uint64_t binned = 0;
  for (auto n : r.counts) {
    occupied += n > 0;
    binned += n;
  }
  c.csv.row("width", "height", "samples", "binned", "occupied");
  c.csv.row(r.width, r.height, c.opts.samples, binned, occupied);
  return exit_pass;
}

int cmd_median(Context& c) {
  c.arity(1, 1);
  const auto& name = c.opts.args[0];
  if (!c.scene.has_family(name)) throw ReferenceError("median: unknown family '" + name + "'");
  if (c.scene.family_is_1d(name)) {
    std::vector<Fraction> mass;
    try {
      mass = gdsm_measure_1d(c.scene.family_1d(name));
    } catch (const Error& e) {
      throw PropertyFailure{e.what()};
    }
    c.csv.row("cell", "mass");
    for (std::size_t i = 0; i < mass.size(); ++i)
      if (mass[i].num != 0) c.csv.row(i, mass[i].value());
    return exit_pass;
  }
  const VariableFamily2D fam = c.scene.family_2d(name);
  const GridSpace& x = fam.x;
  const bool odd = fam.maps.size() % 2 == 1;
  const double tol = c.tol("median", 1e-12);
  // Values on single cells. In two dimensions these need not add up to the
  // total mass.
  c.csv.row("x", "y", "value");
  for (std::size_t i : x.interior().indices()) {
    const Region cell = x.region({i}, Role::compact);
    double v;
    if (odd) {
      v = gdsm_2d(fam, cell);
    } else {
      const EvenGdsm2D e = gdsm_even_2d(fam, cell);
      if (std::abs(e.augmented - e.leave_one_out) > tol)
        throw PropertyFailure{"even readings disagree at cell " + std::to_string(x.x_of(i)) + "," + std::to_string(x.y_of(i))};
      v = e.augmented;
    }
    if (v != 0) c.csv.row(x.x_of(i), x.y_of(i), v);
  }
  return exit_pass;
}

}  // namespace

int run_command(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> verbs{"axioms", "eval", "integrate", "kr", "markov", "render", "median"};
  if (std::find(verbs.begin(), verbs.end(), opts.verb) == verbs.end()) {
    err << "unknown verb '" << opts.verb << "'\n";
    return exit_reference;
  }
  std::ostringstream body;
  Csv csv(body);
  int code = exit_pass;
  std::ostringstream raster;
  try {
    if (opts.scene.empty()) throw ReferenceError("--scene is required");
    const Scene scene = Scene::load(opts.scene);
    Context c{opts, scene, csv};
    try {
      if (opts.verb == "axioms") code = cmd_axioms(c);
      else if (opts.verb == "eval") code = cmd_eval(c);
      else if (opts.verb == "integrate") code = cmd_integrate(c);
      else if (opts.verb == "kr") code = cmd_kr(c);
      else if (opts.verb == "markov") code = cmd_markov(c);
      else if (opts.verb == "median") code = cmd_median(c);
      else {
        if (opts.out.empty()) throw ReferenceError("render needs --out <file.ppm>");
        code = cmd_render(c, raster);
      }
    } catch (const PropertyFailure& f) {
      csv.row("error", f.message);
      err << opts.verb << ": " << f.message << '\n';
      code = exit_property;
    }
  } catch (const ReferenceError& e) {
    err << "reference error: " << e.what() << '\n';
    return exit_reference;
  } catch (const std::ios_base::failure& e) {
    err << "i/o error: " << e.what() << '\n';
    return exit_io;
  } catch (const Error& e) {
    err << opts.verb << ": " << e.what() << '\n';
    csv.row("error", e.what());
    code = exit_property;
  }

  // Render writes the raster to --out and its summary to stdout; every
  // other verb writes its CSV to --out when given.
  const bool render = opts.verb == "render";
  if (!opts.out.empty() && (!render || code == exit_pass)) {
    std::ofstream f(opts.out, std::ios::binary);
    const std::string data = render ? raster.str() : body.str();
    if (!(f << data) || !f.flush()) {
      err << "i/o error: cannot write " << opts.out << '\n';
      return exit_io;
    }
    if (!render) return code;
  }
  out << body.str();
  out.flush();
  return code;
}

}  // namespace qm
