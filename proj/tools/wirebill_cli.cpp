// wirebill: configuration-driven experiment runner for wire billiards.
//
// Every subcommand reads an optional JSON config (--config) whose values are
// overridden by explicit flags, and writes CSV or JSON outputs stamped with
// the digest of the effective config and the seed, so identical configs
// byte-reproduce their numeric columns.
//
// Exit codes: 0 success, 2 config/schema violation (message names the field
// path), 3 numerical failure (message names the operation).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "wirebill/serialization.hpp"
#include "wirebill/wirebill.hpp"

namespace {

using nlohmann::json;
using namespace wirebill;

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct OutputContext {
  json effective;  // config echo for the digest
  std::uint64_t seed = 0;

  std::string digest() const {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(effective.dump())));
    return buf;
  }

  void write_csv(const std::string& path, const std::string& header,
                 const std::vector<std::vector<double>>& rows) const {
    std::ofstream out(resolve(path));
    if (!out) throw NumericalError("cannot open output file " + path);
    out << "# config-digest " << digest() << "\n";
    out << "# seed " << seed << "\n";
    out << header << "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i)
        out << (i ? "," : "") << format_full(row[i]);
      out << "\n";
    }
  }

  void write_json(const std::string& path, json report) const {
    report["config_digest"] = digest();
    report["seed"] = seed;
    std::ofstream out(resolve(path));
    if (!out) throw NumericalError("cannot open output file " + path);
    out << report.dump(2) << "\n";
  }

  static std::string resolve(const std::string& path) {
    const char* dir = std::getenv("WIREBILL_OUT_DIR");
    if (!dir || !*dir || path.empty() || path.front() == '/') return path;
    return std::string(dir) + "/" + path;
  }
};

int thread_count() {
  const char* env = std::getenv("WIREBILL_THREADS");
  if (!env || !*env) return 1;
  const int n = std::atoi(env);
  if (n < 1) throw SchemaError("WIREBILL_THREADS: must be a positive integer");
  return n;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw SchemaError("config: cannot open file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("config: invalid JSON (") + e.what() + ")");
  }
  if (!j.is_object()) throw SchemaError("config: top level must be an object");
  return j;
}

/// Merges a flag value into the effective config when the flag was given.
template <class T>
void override_if(json& cfg, const CLI::Option* opt, const char* key,
                 const T& value) {
  if (opt && opt->count() > 0) cfg[key] = value;
}

Curve curve_from_config(const json& cfg, OutputContext& ctx) {
  if (!cfg.contains("curve"))
    throw SchemaError("curve: required (inline object or via --curve file)");
  const CurveSpec spec = curve_spec_from_json(cfg["curve"], "curve");
  int resolution = detail::int_or(cfg, "resolution", 256, "config");
  if (resolution < 64) throw SchemaError("config.resolution: must be >= 64");
  ctx.effective["curve"] = to_json(spec);
  ctx.effective["resolution"] = resolution;
  try {
    return Curve::build(spec, resolution);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("curve: ") + e.what());
  }
}

void load_curve_file(json& cfg, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw SchemaError("curve: cannot open spec file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("curve: invalid JSON (") + e.what() + ")");
  }
  cfg["curve"] = j;
}

std::uint64_t seed_from(const json& cfg, OutputContext& ctx) {
  const auto seed = static_cast<std::uint64_t>(
      detail::number_or(cfg, "seed", 20240817.0, "config"));
  ctx.seed = seed;
  ctx.effective["seed"] = seed;
  return seed;
}

// ---------------------------------------------------------------------------
// subcommand implementations

int run_curve_info(const json& cfg) {
  OutputContext ctx;
  const Curve curve = curve_from_config(cfg, ctx);
  json report;
  report["kind"] = to_string(curve.spec().kind);
  report["dimension"] = curve.dimension();
  report["closed"] = curve.closed();
  report["length"] = curve.length();
  report["raw_period"] = curve.raw_period();
  report["min_curvature"] = curve.min_curvature();
  report["max_curvature"] = curve.max_curvature();
  report["config_digest"] = ctx.digest();
  std::cout << report.dump(2) << "\n";
  return 0;
}

int run_check_nice(const json& cfg) {
  OutputContext ctx;
  const Curve curve = curve_from_config(cfg, ctx);
  const int grid = detail::int_or(cfg, "grid", 64, "config");
  const double margin = detail::number_or(cfg, "margin", 0.05, "config");
  if (grid < 8) throw SchemaError("config.grid: must be >= 8");
  if (!(margin > 0.0)) throw SchemaError("config.margin: must be positive");
  ctx.effective["grid"] = grid;
  ctx.effective["margin"] = margin;

  const NicenessReport rep = check_nice(curve, grid, margin);
  json report;
  report["pass"] = rep.passed();
  report["min_curvature"] = rep.min_curvature;
  report["min_cos_phi"] = rep.min_cos_phi;
  report["min_twist"] = rep.min_twist;
  report["min_sin_product"] = rep.min_sin_product;
  report["margin"] = rep.margin;
  report["conditions"] = {{"chord", rep.chord_condition_ok},
                          {"curvature", rep.curvature_ok},
                          {"plane_angle", rep.plane_angle_ok},
                          {"twist", rep.twist_ok}};
  json wits = json::array();
  for (const auto& w : rep.witnesses)
    wits.push_back({{"x", w.x}, {"y", w.y}, {"t", w.t}, {"distance", w.distance}});
  report["witnesses"] = wits;
  const std::string out = cfg.value("out", std::string());
  if (!out.empty())
    ctx.write_json(out, report);
  else
    std::cout << report.dump(2) << "\n";
  return 0;
}

int run_orbit(const json& cfg) {
  OutputContext ctx;
  const Curve curve = curve_from_config(cfg, ctx);
  const double x0 = detail::require_number(cfg, "x0", "config");
  const double y0 = detail::require_number(cfg, "y0", "config");
  const int steps = detail::int_or(cfg, "steps", 100, "config");
  if (steps < 1) throw SchemaError("config.steps: must be >= 1");
  ctx.effective["x0"] = x0;
  ctx.effective["y0"] = y0;
  ctx.effective["steps"] = steps;
  seed_from(cfg, ctx);

  const Orbit orbit = iterate_orbit(curve, {x0, y0}, steps);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i + 1 < orbit.vertices.size(); ++i) {
    rows.push_back({static_cast<double>(i), curve.reduce(orbit.vertices[i]),
                    curve.reduce(orbit.vertices[i + 1]), orbit.alphas[i],
                    orbit.lengths[i], i > 0 ? orbit.residuals[i - 1] : 0.0});
  }
  ctx.write_csv(cfg.value("out", std::string("orbit.csv")),
                "step,x,y,alpha,L,residual", rows);
  if (!orbit.completed)
    throw NumericalError("orbit: reflection returned no successor at step " +
                         std::to_string(orbit.steps_done));
  return 0;
}

int run_phase_portrait(const json& cfg) {
  OutputContext ctx;
  const Curve curve = curve_from_config(cfg, ctx);
  const int orbits = detail::int_or(cfg, "orbits", 24, "config");
  const int steps = detail::int_or(cfg, "steps", 400, "config");
  if (orbits < 1) throw SchemaError("config.orbits: must be >= 1");
  if (steps < 1) throw SchemaError("config.steps: must be >= 1");
  ctx.effective["orbits"] = orbits;
  ctx.effective["steps"] = steps;
  const std::uint64_t seed = seed_from(cfg, ctx);

  // deterministic initial conditions regardless of thread count
  std::vector<PhasePoint> starts;
  Rng rng(seed);
  for (int i = 0; i < orbits; ++i) {
    const double x = rng.uniform(0.0, curve.length());
    const double alpha = rng.uniform(0.05, kPi - 0.05);
    starts.push_back({x, chord_with_angle(curve, x, alpha)});
  }
  std::vector<Orbit> results(starts.size());
  const int workers = std::min(thread_count(), orbits);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = static_cast<std::size_t>(w); i < starts.size();
           i += static_cast<std::size_t>(workers))
        results[i] = iterate_orbit(curve, starts[i], steps);
    });
  }
  for (auto& th : pool) th.join();

  std::vector<std::vector<double>> rows;
  for (std::size_t oi = 0; oi < results.size(); ++oi) {
    const Orbit& orbit = results[oi];
    for (std::size_t i = 0; i + 1 < orbit.vertices.size(); ++i)
      rows.push_back({static_cast<double>(oi), static_cast<double>(i),
                      curve.reduce(orbit.vertices[i]),
                      std::cos(orbit.alphas[i])});
  }
  ctx.write_csv(cfg.value("out", std::string("phase_portrait.csv")),
                "orbit,step,x,cos_alpha", rows);
  return 0;
}

int run_lazutkin(const json& cfg) {
  OutputContext ctx;
  const Curve curve = curve_from_config(cfg, ctx);
  const int table = detail::int_or(cfg, "table", 256, "config");
  if (table < 2) throw SchemaError("config.table: must be >= 2");
  ctx.effective["table"] = table;
  seed_from(cfg, ctx);

  const LazutkinChart chart = LazutkinChart::build(curve);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i <= table; ++i) {
    const double x = curve.length() * i / table;
    rows.push_back({x, chart.u(x), curve.curvature(x)});
  }
  ctx.write_csv(cfg.value("out", std::string("lazutkin.csv")), "x,u,k", rows);

  if (cfg.value("residuals", false)) {
    std::vector<double> alphas;
    for (int k = 3; k <= 12; ++k) alphas.push_back(std::pow(2.0, -k));
    const auto fit = lazutkin_residuals(curve, alphas, ctx.seed);
    std::vector<std::vector<double>> fit_rows;
    for (const auto& s : fit.samples)
      fit_rows.push_back({s.alpha, s.v, s.residual_u, s.residual_v});
    ctx.write_csv(cfg.value("residuals_out", std::string("lazutkin_residuals.csv")),
                  "alpha,v,residual_u,residual_v", fit_rows);
    json report;
    report["e_u"] = fit.e_u;
    report["e_v"] = fit.e_v;
    std::cout << report.dump(2) << "\n";
  }
  return 0;
}

int run_deficit(const json& cfg) {
  OutputContext ctx;
  const Curve curve = curve_from_config(cfg, ctx);
  const double arc_start = detail::number_or(cfg, "arc_start", 0.0, "config");
  const double arc_end =
      detail::number_or(cfg, "arc_end", curve.length() / 4.0, "config");
  std::vector<int> n_list = {32, 64, 128, 256};
  if (cfg.contains("n_list")) {
    n_list.clear();
    if (!cfg["n_list"].is_array())
      throw SchemaError("config.n_list: expected an array of integers");
    for (const auto& e : cfg["n_list"]) {
      if (!e.is_number_integer())
        throw SchemaError("config.n_list: expected integers");
      n_list.push_back(e.get<int>());
    }
  }
  ctx.effective["arc_start"] = arc_start;
  ctx.effective["arc_end"] = arc_end;
  ctx.effective["n_list"] = n_list;

  const DeficitResult res = deficit_limit(curve, arc_start, arc_end, n_list);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < res.n_values.size(); ++i)
    rows.push_back({static_cast<double>(res.n_values[i]), res.scaled_deficits[i],
                    res.polygon_lengths[i]});
  ctx.write_csv(cfg.value("out", std::string("deficit.csv")),
                "n,scaled_deficit,polygon_length", rows);
  json report;
  report["extrapolated_limit"] = res.extrapolated;
  report["extrapolation_residual"] = res.extrapolation_residual;
  report["reference_cubed"] = res.reference_cubed;
  report["reference_linear"] = res.reference_linear;
  report["arc_length"] = res.arc_length;
  std::cout << report.dump(2) << "\n";
  return 0;
}

int run_periodic(const json& cfg) {
  OutputContext ctx;
  const Curve curve = curve_from_config(cfg, ctx);
  const int p = detail::int_or(cfg, "p", 1, "config");
  const int q = detail::int_or(cfg, "q", 3, "config");
  ctx.effective["p"] = p;
  ctx.effective["q"] = q;
  Polygon poly;
  try {
    poly = periodic_orbit_search(curve, p, q);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < poly.vertices.size(); ++i)
    rows.push_back({static_cast<double>(i), curve.reduce(poly.vertices[i]),
                    poly.residuals[i]});
  ctx.write_csv(cfg.value("out", std::string("periodic.csv")), "i,x,residual",
                rows);
  json report;
  report["perimeter"] = poly.total_length;
  report["max_residual"] = poly.max_residual();
  report["converged"] = poly.converged;
  report["collapsed"] = poly.collapsed;
  std::cout << report.dump(2) << "\n";
  if (poly.collapsed)
    throw NumericalError("periodic: polygon collapsed to lower winding");
  if (!poly.converged)
    throw NumericalError("periodic: optimizer did not converge");
  return 0;
}

int run_glance(const json& cfg) {
  OutputContext ctx;
  const Curve curve = curve_from_config(cfg, ctx);
  const double alpha0 = detail::number_or(cfg, "alpha0", 0.05, "config");
  const int steps = detail::int_or(cfg, "steps", 10000, "config");
  const double x0 = detail::number_or(cfg, "x0", 0.0, "config");
  if (!(alpha0 > 0.0 && alpha0 < kPi))
    throw SchemaError("config.alpha0: must lie in (0, pi)");
  if (steps < 1) throw SchemaError("config.steps: must be >= 1");
  ctx.effective["alpha0"] = alpha0;
  ctx.effective["steps"] = steps;
  ctx.effective["x0"] = x0;

  const GlanceResult res = glancing_escape(curve, alpha0, steps, x0);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < res.alphas.size(); ++i)
    rows.push_back({static_cast<double>(i), curve.reduce(res.vertices[i]),
                    res.alphas[i]});
  ctx.write_csv(cfg.value("out", std::string("glance.csv")), "step,x,alpha",
                rows);
  json report;
  report["alpha_min"] = res.alpha_min;
  report["alpha_max"] = res.alpha_max;
  report["steps_done"] = res.steps_done;
  report["multivalued_encountered"] = res.multivalued_encountered;
  report["stopped_early"] = res.stopped_early;
  std::cout << report.dump(2) << "\n";
  return 0;
}

int run_striction(const json& cfg) {
  OutputContext ctx;
  const Curve curve = curve_from_config(cfg, ctx);
  const int samples = detail::int_or(cfg, "samples", 256, "config");
  if (samples < 4) throw SchemaError("config.samples: must be >= 4");
  ctx.effective["samples"] = samples;

  ChordFamily fam;
  if (cfg.contains("d")) {
    const double d = detail::require_number(cfg, "d", "config");
    ctx.effective["d"] = d;
    try {
      fam = ChordFamily::shift(curve, d);
    } catch (const std::invalid_argument& e) {
      throw SchemaError(std::string("config.d: ") + e.what());
    }
  } else {
    // invariant-circle family reconstructed from a glancing orbit
    const double alpha0 = detail::number_or(cfg, "alpha0", 0.3, "config");
    const int steps = detail::int_or(cfg, "orbit_steps", 6000, "config");
    ctx.effective["alpha0"] = alpha0;
    ctx.effective["orbit_steps"] = steps;
    const double y0 = chord_with_angle(curve, 0.0, alpha0);
    const Orbit orbit = iterate_orbit(curve, {0.0, y0}, steps);
    if (!orbit.completed)
      throw NumericalError("striction: orbit construction stopped early");
    fam = ChordFamily::from_orbit(curve, orbit);
  }

  const auto prof = striction_profile(curve, fam, samples);
  std::vector<std::vector<double>> rows;
  for (const auto& s : prof) {
    if (s.degenerate) continue;
    rows.push_back({s.t, s.s_star_over_length, s.deviation});
  }
  ctx.write_csv(cfg.value("out", std::string("striction.csv")),
                "t,sStarOverL,deviation", rows);
  json report;
  report["string_identity_residual"] = string_invariant(curve, fam);
  std::cout << report.dump(2) << "\n";
  return 0;
}

int run_gutkin(const json& cfg) {
  OutputContext ctx;
  const int m = detail::int_or(cfg, "m", 4, "config");
  if (m < 2) throw SchemaError("config.m: must be an integer >= 2");
  ctx.effective["m"] = m;
  const auto roots = gutkin_roots(m);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < roots.size(); ++i)
    rows.push_back({static_cast<double>(i), roots[i]});
  const std::string out = cfg.value("out", std::string());
  if (!out.empty()) {
    ctx.write_csv(out, "index,d", rows);
  } else {
    std::printf("# gutkin m=%d roots in (0, 2pi)\n", m);
    for (double d : roots) std::printf("%s\n", format_full(d).c_str());
  }
  return 0;
}

ConfocalFamily family_from_config(const json& cfg, OutputContext& ctx) {
  if (!cfg.contains("axes"))
    throw SchemaError("axes: required for ellipsoid subcommands");
  const ConfocalFamily fam = confocal_from_json(cfg["axes"], "axes");
  ctx.effective["axes"] = cfg["axes"];
  return fam;
}

int run_ellipsoid_commute(const json& cfg) {
  OutputContext ctx;
  const ConfocalFamily fam = family_from_config(cfg, ctx);
  const double lambda = detail::require_number(cfg, "lambda", "config");
  const double tau = detail::require_number(cfg, "tau", "config");
  if (!(lambda > 0.0)) throw SchemaError("config.lambda: must be positive");
  ctx.effective["lambda"] = lambda;
  ctx.effective["tau"] = tau;
  const std::uint64_t seed = seed_from(cfg, ctx);

  // deterministic pseudo-random geodesic state on M_0
  Rng rng(seed);
  const int n = fam.dim();
  Vec x(n), t(n);
  for (int i = 0; i < n; ++i) x[i] = rng.uniform(-1.0, 1.0);
  x /= std::sqrt(fam.form(0.0, x));
  const Vec normal = fam.unit_normal(0.0, x);
  for (int i = 0; i < n; ++i) t[i] = rng.uniform(-1.0, 1.0);
  t -= t.dot(normal) * normal;
  t /= t.norm();

  OdeOptions opts;
  opts.rel_tol = opts.abs_tol =
      detail::number_or(cfg, "tolerance", 1e-11, "config");
  ctx.effective["tolerance"] = opts.rel_tol;
  const CommuteReport rep = commute_report(fam, lambda, {x, t, 0.0}, tau, opts);
  json report;
  report["xi_gap"] = rep.xi_gap;
  report["arc_length_gap"] = rep.arc_length_gap;
  report["integrator_tolerance"] = opts.rel_tol;
  const std::string out = cfg.value("out", std::string());
  if (!out.empty())
    ctx.write_json(out, report);
  else
    std::cout << report.dump(2) << "\n";
  return 0;
}

int run_ellipsoid_orbit(const json& cfg) {
  OutputContext ctx;
  const ConfocalFamily fam = family_from_config(cfg, ctx);
  const double mu = detail::number_or(cfg, "lambda", 0.5, "config");
  const int steps = detail::int_or(cfg, "steps", 100, "config");
  if (!(mu > 0.0)) throw SchemaError("config.lambda: must be positive");
  if (steps < 1) throw SchemaError("config.steps: must be >= 1");
  ctx.effective["lambda"] = mu;
  ctx.effective["steps"] = steps;
  const std::uint64_t seed = seed_from(cfg, ctx);

  Rng rng(seed);
  const int n = fam.dim();
  Vec p(n), q(n);
  for (int i = 0; i < n; ++i) {
    p[i] = 0.3 * rng.uniform(-1.0, 1.0) * fam.axes()[i];
    q[i] = rng.uniform(-1.0, 1.0);
  }
  q /= q.norm();
  LineState line{p, q};
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < steps; ++i) {
    line = reflect_line(fam, mu, line);
    const auto lams = tangency_parameters(fam, line);
    std::vector<double> row = {static_cast<double>(i)};
    for (double l : lams) row.push_back(l);
    rows.push_back(std::move(row));
  }
  std::string header = "step";
  for (int i = 1; i < n; ++i) header += ",lambda" + std::to_string(i);
  ctx.write_csv(cfg.value("out", std::string("ellipsoid_orbit.csv")), header,
                rows);
  return 0;
}

int run_phase_area(const json& cfg) {
  OutputContext ctx;
  const Curve curve = curve_from_config(cfg, ctx);
  const int grid = detail::int_or(cfg, "grid", 128, "config");
  if (grid < 128) throw SchemaError("config.grid: must be >= 128");
  ctx.effective["grid"] = grid;
  const double area = phase_area(curve, grid);
  json report;
  report["phase_area"] = area;
  report["twice_length"] = 2.0 * curve.length();
  report["relative_gap"] =
      std::abs(area - 2.0 * curve.length()) / (2.0 * curve.length());
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wire billiards experiment runner"};
  app.require_subcommand(1);

  std::string config_path, curve_path, out_path;
  double x0 = 0, y0 = 0, alpha0 = 0, d_shift = 0, lambda = 0, tau = 0;
  double arc_start = 0, arc_end = 0, margin = 0;
  int steps = 0, grid = 0, p_wind = 0, q_verts = 0, m_gutkin = 0, orbits = 0,
      samples = 0;
  std::string n_list_raw, axes_raw;
  bool residuals_flag = false;

  auto add_common = [&](CLI::App* sub, bool with_curve = true) {
    sub->add_option("--config", config_path, "JSON config file");
    if (with_curve)
      sub->add_option("--curve", curve_path, "curve spec JSON file");
    sub->add_option("--out", out_path, "output file");
  };

  auto* info =
      app.add_subcommand("curve-info", "curve summary (length, curvature range)");
  add_common(info);

  auto* nice = app.add_subcommand("check-nice", "certify the niceness conditions");
  add_common(nice);
  auto* nice_grid = nice->add_option("--grid", grid, "chord grid resolution");
  auto* nice_margin = nice->add_option("--margin", margin, "cos(phi) floor");

  auto* orbit = app.add_subcommand("orbit", "iterate the reflection map");
  add_common(orbit);
  auto* orbit_x0 = orbit->add_option("--x0", x0, "first chord endpoint (arc length)");
  auto* orbit_y0 = orbit->add_option("--y0", y0, "second chord endpoint (arc length)");
  auto* orbit_steps = orbit->add_option("--steps", steps, "reflection count");

  auto* pp = app.add_subcommand("phase-portrait",
                                "orbit ensemble (x, cos alpha) samples");
  add_common(pp);
  auto* pp_orbits = pp->add_option("--orbits", orbits, "number of orbits");
  auto* pp_steps = pp->add_option("--steps", steps, "steps per orbit");

  auto* laz = app.add_subcommand("lazutkin", "Lazutkin chart table and residual fit");
  add_common(laz);
  auto* laz_res =
      laz->add_flag("--residuals", residuals_flag, "fit residual exponents");

  auto* def =
      app.add_subcommand("deficit", "length deficit of longest inscribed polygons");
  add_common(def);
  auto* def_a = def->add_option("--arc-start", arc_start, "arc start (arc length)");
  auto* def_b = def->add_option("--arc-end", arc_end, "arc end (arc length)");
  auto* def_n =
      def->add_option("--n-list", n_list_raw, "comma-separated interior point counts");

  auto* per = app.add_subcommand("periodic", "closed orbit of rotation number p/q");
  add_common(per);
  auto* per_p = per->add_option("--p", p_wind, "winding number");
  auto* per_q = per->add_option("--q", q_verts, "vertex count");

  auto* gla = app.add_subcommand("glance", "glancing orbit alpha excursion");
  add_common(gla);
  auto* gla_a = gla->add_option("--alpha0", alpha0, "initial angle (radians)");
  auto* gla_s = gla->add_option("--steps", steps, "reflection count");
  auto* gla_x = gla->add_option("--x0", x0, "starting point (arc length)");

  auto* str = app.add_subcommand("striction", "striction profile of a chord family");
  add_common(str);
  auto* str_d = str->add_option("--d", d_shift, "shift offset (raw parameter)");
  auto* str_n = str->add_option("--samples", samples, "profile sample count");

  auto* gut = app.add_subcommand("gutkin", "roots of tan(m d/2) = m tan(d/2)");
  add_common(gut, false);
  auto* gut_m = gut->add_option("--m", m_gutkin, "harmonic index m >= 2");

  auto* ell = app.add_subcommand("ellipsoid", "confocal-ellipsoid experiments");
  ell->require_subcommand(1);
  auto* com =
      ell->add_subcommand("commute", "reflection vs reparameterized geodesic flow");
  add_common(com, false);
  com->add_option("--axes", axes_raw, "comma-separated semi-axes");
  auto* com_l = com->add_option("--lambda", lambda, "reflecting member");
  auto* com_t = com->add_option("--tau", tau, "flow duration");
  auto* eorb = ell->add_subcommand("orbit", "billiard orbit tangency-parameter log");
  add_common(eorb, false);
  eorb->add_option("--axes", axes_raw, "comma-separated semi-axes");
  auto* eorb_l = eorb->add_option("--lambda", lambda, "reflecting member");
  auto* eorb_s = eorb->add_option("--steps", steps, "reflection count");

  auto* parea =
      app.add_subcommand("phase-area", "total phase area of the chord cylinder");
  add_common(parea);
  auto* parea_grid = parea->add_option("--grid", grid, "quadrature grid");

  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json cfg = load_config(config_path);
    load_curve_file(cfg, curve_path);
    if (!out_path.empty()) cfg["out"] = out_path;

    auto parse_axes = [&](nlohmann::json& c) {
      if (axes_raw.empty()) return;
      std::vector<double> axes;
      std::stringstream ss(axes_raw);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        try {
          axes.push_back(std::stod(tok));
        } catch (...) {
          throw SchemaError("axes: expected comma-separated numbers");
        }
      }
      c["axes"] = axes;
    };

    if (info->parsed()) return run_curve_info(cfg);
    if (nice->parsed()) {
      override_if(cfg, nice_grid, "grid", grid);
      override_if(cfg, nice_margin, "margin", margin);
      return run_check_nice(cfg);
    }
    if (orbit->parsed()) {
      override_if(cfg, orbit_x0, "x0", x0);
      override_if(cfg, orbit_y0, "y0", y0);
      override_if(cfg, orbit_steps, "steps", steps);
      return run_orbit(cfg);
    }
    if (pp->parsed()) {
      override_if(cfg, pp_orbits, "orbits", orbits);
      override_if(cfg, pp_steps, "steps", steps);
      return run_phase_portrait(cfg);
    }
    if (laz->parsed()) {
      override_if(cfg, laz_res, "residuals", residuals_flag);
      return run_lazutkin(cfg);
    }
    if (def->parsed()) {
      override_if(cfg, def_a, "arc_start", arc_start);
      override_if(cfg, def_b, "arc_end", arc_end);
      if (def_n->count() > 0) {
        std::vector<int> ns;
        std::stringstream ss(n_list_raw);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          try {
            ns.push_back(std::stoi(tok));
          } catch (...) {
            throw SchemaError("n_list: expected comma-separated integers");
          }
        }
        cfg["n_list"] = ns;
      }
      return run_deficit(cfg);
    }
    if (per->parsed()) {
      override_if(cfg, per_p, "p", p_wind);
      override_if(cfg, per_q, "q", q_verts);
      return run_periodic(cfg);
    }
    if (gla->parsed()) {
      override_if(cfg, gla_a, "alpha0", alpha0);
      override_if(cfg, gla_s, "steps", steps);
      override_if(cfg, gla_x, "x0", x0);
      return run_glance(cfg);
    }
    if (str->parsed()) {
      override_if(cfg, str_d, "d", d_shift);
      override_if(cfg, str_n, "samples", samples);
      return run_striction(cfg);
    }
    if (gut->parsed()) {
      override_if(cfg, gut_m, "m", m_gutkin);
      return run_gutkin(cfg);
    }
    if (com->parsed()) {
      parse_axes(cfg);
      override_if(cfg, com_l, "lambda", lambda);
      override_if(cfg, com_t, "tau", tau);
      return run_ellipsoid_commute(cfg);
    }
    if (eorb->parsed()) {
      parse_axes(cfg);
      override_if(cfg, eorb_l, "lambda", lambda);
      override_if(cfg, eorb_s, "steps", steps);
      return run_ellipsoid_orbit(cfg);
    }
    if (parea->parsed()) {
      override_if(cfg, parea_grid, "grid", grid);
      return run_phase_area(cfg);
    }
  } catch (const SchemaError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
