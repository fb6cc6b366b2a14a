#include "addkit/harness_cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "addkit/closed_form_oracle.hpp"
#include "addkit/density_engine.hpp"
#include "addkit/error.hpp"
#include "addkit/evolution_ops.hpp"
#include "addkit/expression.hpp"
#include "addkit/metric_geometry.hpp"
#include "addkit/nd_validator.hpp"
#include "addkit/path_simulator.hpp"
#include "addkit/report.hpp"

namespace addkit {

using ojson = nlohmann::ordered_json;

SymbolFamily family_from_spec(const std::string& spec) {
  if (spec.empty()) throw Error(ErrorCode::config, "--family is required");
  if (spec.rfind("builtin:", 0) == 0) return builtin_family(spec);
  std::string text;
  if (spec.front() == '{') {
    text = spec;
  } else {
    if (!std::filesystem::exists(spec)) throw Error(ErrorCode::config, "family config '" + spec + "' does not exist");
    text = read_file(spec);
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::config, "family config '" + spec + "': " + e.what());
  }
  return family_from_json(j);
}

GridSpec parse_grid(const std::string& text, int dimension) {
  GridSpec g = default_grid(dimension);
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::config, "grid entry '" + part + "' is not key=value");
    const std::string key = part.substr(0, eq), value = part.substr(eq + 1);
    try {
      if (key == "N") {
        g.points = std::stoul(value);
      } else if (key == "L") {
        g.half_width = value == "auto" ? 0.0 : std::stod(value);
        if (!(g.half_width >= 0.0)) throw Error(ErrorCode::config, "grid L must be positive or auto");
      } else {
        throw Error(ErrorCode::config, "unknown grid key '" + key + "' (N, L)");
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::config, "bad grid value '" + value + "'");
    }
  }
  try {
    g.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::config, e.what());
  }
  return g;
}

namespace {

ojson grid_json(const GridSpec& g) {
  return {{"dimension", g.dimension}, {"points", g.points}, {"half_width", g.half_width}};
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::config, message);
}

void require_times(const std::vector<double>& ts, const std::string& what, bool allow_zero = false) {
  require(!ts.empty(), what + " needs at least one value");
  for (double t : ts) {
    const bool ok = std::isfinite(t) && (allow_zero ? t >= 0.0 : t > 0.0);
    require(ok, what + " must be " + (allow_zero ? "nonnegative" : "positive") + ", got " + format_double(t));
  }
}

void require_increasing(const std::vector<double>& ts, const std::string& what) {
  for (std::size_t i = 1; i < ts.size(); ++i)
    require(ts[i] > ts[i - 1], what + " must be strictly increasing");
}

std::string time_label(double t) {
  std::ostringstream os;
  os << t;
  return os.str();
}

/// NdReport as itemized checks under `prefix`.
void add_nd_items(Report& report, const NdReport& nd, const std::string& prefix) {
  std::vector<CheckItem> items;
  for (const auto& s : nd.scales)
    items.push_back({"schoenberg_min_eigenvalue.s=" + time_label(s.scale), s.min_eigenvalue, -s.threshold, s.pass, {}});
  items.push_back({"constrained_form_max", nd.worst_form, nd.worst_form_threshold, nd.worst_form <= nd.worst_form_threshold,
                   nd.witnesses.empty() ? "" : "witness recorded"});
  items.push_back({"projected_form_max", nd.projected_max, nd.projected_threshold, nd.projected_max <= nd.projected_threshold, {}});
  for (const auto& e : nd.extra) items.push_back(e);
  bool all = std::all_of(items.begin(), items.end(), [](const CheckItem& i) { return i.pass; });
  if (all != nd.pass) items.push_back({"verdict", nd.pass ? 1.0 : 0.0, 1.0, nd.pass, nd.verdict()});
  for (auto& i : items) {
    i.name = prefix + i.name;
    report.add(std::move(i));
  }
}

/// Runs `body`, turning a library error into a failing item named `name`.
void guarded(Report& report, const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const Error& e) {
    report.add({name + ".error", 0.0, 0.0, false, std::string(to_string(e.code())) + ": " + e.what()});
  }
}

// ---------------------------------------------------------------------------
// Subcommand state

struct Options {
  std::string format = "json";
  std::string report_path = "-";
  std::string family;
  std::string grid;
  std::string out;
  double t = 1.0;
  double s = 0.0;
  double tol = 0.0;
  double tail_eps = 1e-14;
  std::vector<double> ts;
  std::uint64_t seed = 42;

  // verify-cndf
  std::string symbol;
  int dimension = 1;
  std::size_t point_sets = 16, set_size = 12, weights = 256;

  // geometry
  std::string metric = "dQ";
  std::string curve;
  std::size_t triples = 10000;
  double r_min = 1e-3, r_max = 1e3;
  int per_decade = 8;
  double axiom_tol = 1e-10;

  // operator-check
  double bump_radius = 5.0;

  // simulate / cf-check
  std::string process = "Y";
  std::size_t paths = 100000;
  std::uint64_t sim_seed = 7;
  std::vector<double> probes{0.5, 1.0, 2.0};
  double sigmas = 4.0;
  std::size_t grid_points = std::size_t{1} << 20;
  double oversample = 8.0;
  std::string in, meta;
  double at_time = -1.0;

  // oracle
  std::string name;
  std::string profile = "t";
};

using Body = std::function<void(Report&)>;

double tol_or(const Options& o, double fallback) { return o.tol > 0.0 ? o.tol : fallback; }

// ---------------------------------------------------------------------------
// Commands. Each prepare_* validates the options (config errors) and
// returns the computation.

Body prepare_density(const Options& o, Report& r) {
  const SymbolFamily fam = family_from_spec(o.family);
  require_times({o.t}, "--t");
  require(std::isfinite(o.s) && o.s >= 0.0, "--s must be nonnegative");
  require(o.s < o.t, "--s must be smaller than --t");
  const GridSpec grid = parse_grid(o.grid, fam.dimension());
  const double tol = tol_or(o, 1e-4);
  require(o.tail_eps > 0.0 && o.tail_eps < 1.0, "--tail-eps must lie in (0, 1)");
  r.config["family"] = fam.to_json();
  r.config["s"] = o.s;
  r.config["t"] = o.t;
  r.config["grid"] = grid_json(grid);
  r.config["tail_eps"] = o.tail_eps;
  r.config["tol"] = tol;
  r.config["out"] = o.out;
  return [=](Report& rep) {
    const DensityTable table = density_grid(fam, o.s, o.t, grid, DensityOptions{o.tail_eps});
    const double peak = density_peak(fam, o.s, o.t);
    rep.data["grid"] = grid_json(table.grid);
    rep.data["total_mass"] = table.total_mass;
    rep.data["clipped_mass"] = table.clipped_mass;
    rep.data["origin_value"] = table.origin_value();
    rep.data["peak_quadrature"] = peak;
    rep.add({"mass_error", std::abs(table.total_mass - 1.0), tol, std::abs(table.total_mass - 1.0) <= tol, {}});
    const double perr = std::abs(table.origin_value() - peak) / peak;
    rep.add({"peak_relative_error", perr, tol, perr <= tol, "table origin vs quadrature"});
    if (!o.out.empty()) {
      write_file_atomic(o.out, to_csv(density_csv(table)));
      rep.data["out"] = o.out;
    }
  };
}

Body prepare_adjoint(const Options& o, Report& r) {
  const SymbolFamily fam = family_from_spec(o.family);
  require_times({o.t}, "--t");
  const GridSpec grid = parse_grid(o.grid, fam.dimension());
  const double tol = tol_or(o, 1e-4);
  r.config["family"] = fam.to_json();
  r.config["t"] = o.t;
  r.config["grid"] = grid_json(grid);
  r.config["tol"] = tol;
  r.config["out"] = o.out;
  return [=](Report& rep) {
    // Phi_t lives on the frequency side of p_{1/t}
    const GridSpec g = resolve_grid(fam, 0.0, 1.0 / o.t, grid);
    const auto phi = adjoint_density_function(fam, o.t);
    const SpectralTransform tr(g);
    const std::vector<double> values = tr.sample_spectrum(phi);
    const double cell = std::pow(g.frequency_spacing(), g.dimension);
    double mass = 0.0;
    for (double v : values) mass += v * cell;
    const std::vector<double> origin(static_cast<std::size_t>(g.dimension), 0.0);
    rep.data["frequency_cutoff"] = g.cutoff();
    rep.data["frequency_spacing"] = g.frequency_spacing();
    rep.data["peak"] = phi(origin);
    rep.data["total_mass"] = mass;
    rep.add({"mass_error", std::abs(mass - 1.0), tol, std::abs(mass - 1.0) <= tol, "trapezoidal sum"});
    if (!o.out.empty()) {
      CsvTable csv;
      const std::size_t n = g.points;
      if (g.dimension == 1) {
        csv.header = {"x", "value"};
        for (std::size_t k = 0; k < n; ++k) csv.rows.push_back({g.frequency(k), values[k]});
      } else {
        csv.header = {"x", "y", "value"};
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t k = 0; k < n; ++k) csv.rows.push_back({g.frequency(i), g.frequency(k), values[i * n + k]});
      }
      write_file_atomic(o.out, to_csv(csv));
      rep.data["out"] = o.out;
    }
  };
}

Body prepare_check_adjoint(const Options& o, Report& r) {
  const SymbolFamily fam = family_from_spec(o.family);
  const std::vector<double> ts = o.ts.empty() ? std::vector<double>{o.t} : o.ts;
  require_times(ts, "--t");
  const GridSpec grid = parse_grid(o.grid, fam.dimension());
  const double tol = tol_or(o, 1e-6);
  r.config["family"] = fam.to_json();
  r.config["t"] = ts;
  r.config["grid"] = grid_json(grid);
  r.config["tol"] = tol;
  return [=](Report& rep) {
    for (double t : ts) rep.add(adjointness_check(fam, t, grid, tol), "adjointness.t=" + time_label(t));
  };
}

Body prepare_verify_cndf(const Options& o, Report& r) {
  NdConfig cfg;
  cfg.tol = tol_or(o, 1e-9);
  cfg.seed = o.seed;
  cfg.num_point_sets = o.point_sets;
  cfg.set_size = o.set_size;
  cfg.num_weight_vectors = o.weights;
  require(cfg.set_size >= 2 && cfg.set_size <= 64, "--set-size must lie in [2, 64]");
  require(cfg.num_weight_vectors > 0, "--weights must be positive");
  r.config["tol"] = cfg.tol;
  r.config["seed"] = cfg.seed;
  r.config["point_sets"] = cfg.num_point_sets;
  r.config["set_size"] = cfg.set_size;
  r.config["weights"] = cfg.num_weight_vectors;

  if (!o.symbol.empty()) {
    require(o.family.empty(), "--symbol and --family are exclusive");
    require(o.dimension == 1 || o.dimension == 2, "--dimension must be 1 or 2");
    const Expression expr = Expression::parse(o.symbol);
    std::vector<double> ts;
    if (expr.uses_t()) {
      ts = o.ts.empty() ? std::vector<double>{0.5, 1.0, 2.0} : o.ts;
      require_times(ts, "--t");
    } else {
      ts = {0.0};
    }
    r.config["symbol"] = o.symbol;
    r.config["dimension"] = o.dimension;
    r.config["t"] = ts;
    const int dim = o.dimension;
    return [=](Report& rep) {
      auto reports = ojson::array();
      for (double t : ts) {
        const FieldFunction psi = [expr, t](std::span<const double> xi) {
          double n2 = 0.0;
          for (double v : xi) n2 += v * v;
          return expr(std::sqrt(n2), t);
        };
        NdReport nd = is_negative_definite(psi, dim, cfg);
        nd.t = t;
        add_nd_items(rep, nd, expr.uses_t() ? "t=" + time_label(t) + "." : "");
        reports.push_back(nd.to_json());
      }
      rep.data["reports"] = std::move(reports);
    };
  }

  const SymbolFamily fam = family_from_spec(o.family);
  const std::vector<double> ts = o.ts.empty() ? std::vector<double>{0.5, 1.0, 2.0} : o.ts;
  require_times(ts, "--t");
  r.config["family"] = fam.to_json();
  r.config["t"] = ts;
  return [=](Report& rep) {
    auto reports = ojson::array();
    for (const auto& nd : validate_basic_assumption_I(fam, ts, cfg)) {
      add_nd_items(rep, nd, "t=" + time_label(nd.t) + ".");
      reports.push_back(nd.to_json());
    }
    rep.data["reports"] = std::move(reports);
  };
}

Body prepare_verify_dual(const Options& o, Report& r) {
  const SymbolFamily fam = family_from_spec(o.family);
  require_times({o.t}, "--t");
  const GridSpec grid = parse_grid(o.grid, fam.dimension());
  const double tol = tol_or(o, 1e-5);
  r.config["family"] = fam.to_json();
  r.config["t"] = o.t;
  r.config["grid"] = grid_json(grid);
  r.config["tol"] = tol;
  return [=](Report& rep) {
    rep.add(dual_formula_check(fam, o.t, grid, tol));
    rep.data["p_peak_ball_integral"] = peak_via_ball_integral(metric_dQ(fam, 0.0, o.t));
    rep.data["p_peak"] = density_peak(fam, 0.0, o.t);
    rep.data["phi_peak_ball_integral"] = peak_via_ball_integral(metric_deltaQ(fam, 1.0 / o.t));
    const std::vector<double> origin(static_cast<std::size_t>(fam.dimension()), 0.0);
    rep.data["phi_peak"] = adjoint_density(fam, o.t, origin);
  };
}

Body prepare_geometry(const Options& o, Report& r) {
  const SymbolFamily fam = family_from_spec(o.family);
  require_times({o.t}, "--t");
  require(o.metric == "dQ" || o.metric == "deltaQ", "--metric must be dQ or deltaQ");
  require(std::isfinite(o.s) && o.s >= 0.0 && o.s < o.t, "--s must lie in [0, t)");
  require(o.r_min > 0.0 && o.r_max > o.r_min, "radii need 0 < r-min < r-max");
  require(o.per_decade > 0, "--per-decade must be positive");
  require(o.axiom_tol > 0.0, "--axiom-tol must be positive");
  r.config["family"] = fam.to_json();
  r.config["metric"] = o.metric;
  r.config["s"] = o.s;
  r.config["t"] = o.t;
  r.config["triples"] = o.triples;
  r.config["seed"] = o.seed;
  r.config["axiom_tol"] = o.axiom_tol;
  r.config["radii"] = {{"min", o.r_min}, {"max", o.r_max}, {"per_decade", o.per_decade}};
  r.config["curve"] = o.curve;
  return [=](Report& rep) {
    const MetricHandle m = o.metric == "dQ" ? metric_dQ(fam, o.s, o.t) : metric_deltaQ(fam, o.t);
    rep.add(metric_axioms_check(m, o.triples, o.seed, o.axiom_tol), "axioms");
    const std::vector<double> radii = log_spaced(o.r_min, o.r_max, o.per_decade);
    const DoublingReport d = doubling_estimate(m, radii);
    rep.add({"doubling.c0", d.c0, 0.1 * d.c0, d.pass, "c0 without the outer decade: " + format_double(d.c0_inner)});
    rep.data["c0"] = d.c0;
    rep.data["c0_inner"] = d.c0_inner;
    rep.data["peak_ball_integral"] = peak_via_ball_integral(m);
    if (!o.curve.empty()) {
      const BallVolumeCurve c = ball_volume_curve(m, radii);
      CsvTable csv{{"r", "volume"}, {}};
      for (std::size_t i = 0; i < c.radii.size(); ++i) csv.rows.push_back({c.radii[i], c.volumes[i]});
      write_file_atomic(o.curve, to_csv(csv));
      rep.data["curve"] = o.curve;
      rep.data["volume_method"] = c.method;
    }
  };
}

GridSpec operator_grid(const Options& o, int dimension) {
  if (!o.grid.empty()) {
    GridSpec g = parse_grid(o.grid, dimension);
    require(g.resolved(), "operator-check needs an explicit grid half width L");
    return g;
  }
  return dimension == 1 ? GridSpec{1, 4096, 40.0} : GridSpec{2, 256, 20.0};
}

// Smooth test function with both signs: a few seeded Gaussian bumps.
FunctionGrid random_bumps(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> c(-0.2 * g.half_width, 0.2 * g.half_width), a(-1.0, 1.0), w(0.3, 2.0);
  std::vector<std::array<double, 4>> terms(6);
  for (auto& tm : terms) tm = {c(rng), c(rng), a(rng), w(rng)};
  return FunctionGrid::sample(g, [terms](std::span<const double> x) {
    double v = 0.0;
    for (const auto& tm : terms) {
      double d2 = (x[0] - tm[0]) * (x[0] - tm[0]);
      if (x.size() > 1) d2 += (x[1] - tm[1]) * (x[1] - tm[1]);
      v += tm[2] * std::exp(-d2 / (tm[3] * tm[3]));
    }
    return v;
  });
}

void contraction_items(Report& rep, const std::string& name, const FunctionGrid& u, const FunctionGrid& v) {
  const double slack = 1.0 + 1e-12;
  rep.add({name + ".sup_contraction", v.sup_norm(), u.sup_norm() * slack, v.sup_norm() <= u.sup_norm() * slack, {}});
  rep.add({name + ".l2_contraction", v.l2_norm(), u.l2_norm() * slack, v.l2_norm() <= u.l2_norm() * slack, {}});
}

void run_operator_checks(Report& rep, const SymbolFamily& fam, const std::vector<double>& times, const GridSpec& g,
                         double tol, double ck_tol, double bump_radius, std::uint64_t seed, const std::string& prefix) {
  const double s = times[0], r = times[1], t = times[2];
  const FunctionGrid b = bump_function(g, bump_radius);
  guarded(rep, prefix + "fundamental",
          [&] { rep.add(fundamental_solution_check(fam, s, r, t, b, tol), prefix + "fundamental"); });
  guarded(rep, prefix + "contraction", [&] {
    const FunctionGrid u = random_bumps(g, seed);
    contraction_items(rep, prefix + "contraction.H", u, apply_H(fam, s, t, u));
    if (s > 0.0) contraction_items(rep, prefix + "contraction.V", u, apply_V(fam, s, t, u));
    contraction_items(rep, prefix + "contraction.S", u, apply_S(fam, t, u));
  });
  guarded(rep, prefix + "chapman_kolmogorov",
          [&] { rep.add(chapman_kolmogorov_check(fam, s, r, t, GridSpec{g.dimension, default_grid(g.dimension).points, 0.0}, ck_tol), prefix + "chapman_kolmogorov"); });
}

Body prepare_operator_check(const Options& o, Report& r) {
  const SymbolFamily fam = family_from_spec(o.family);
  const std::vector<double> times = o.ts.empty() ? std::vector<double>{0.2, 0.5, 1.0} : o.ts;
  require(times.size() == 3, "--times needs exactly three values s,r,t");
  require_times(times, "--times", true);
  require(times[0] <= times[1] && times[1] <= times[2], "--times must be ordered s <= r <= t");
  require(times[2] > 0.0, "--times needs t > 0");
  require(o.bump_radius > 0.0, "--bump-radius must be positive");
  const GridSpec g = operator_grid(o, fam.dimension());
  const double tol = tol_or(o, 1e-5);
  r.config["family"] = fam.to_json();
  r.config["times"] = times;
  r.config["grid"] = grid_json(g);
  r.config["tol"] = tol;
  r.config["bump_radius"] = o.bump_radius;
  r.config["seed"] = o.seed;
  return [=](Report& rep) {
    // Chapman-Kolmogorov needs distinct times
    if (times[0] < times[1] && times[1] < times[2]) {
      run_operator_checks(rep, fam, times, g, tol, tol, o.bump_radius, o.seed, "");
    } else {
      const FunctionGrid b = bump_function(g, o.bump_radius);
      rep.add(fundamental_solution_check(fam, times[0], times[1], times[2], b, tol), "fundamental");
    }
  };
}

ojson paths_sidecar(const SymbolFamily& fam, ProcessTag tag, const std::vector<double>& times, std::size_t n,
                    std::uint64_t seed) {
  ojson j;
  j["format"] = "addkit-paths";
  j["schema_version"] = report_schema_version;
  j["family"] = fam.to_json();
  j["process"] = to_string(tag);
  j["times"] = times;
  j["paths"] = n;
  j["seed"] = seed;
  return j;
}

std::string paths_csv(const std::vector<ProcessPath>& paths, int dimension) {
  std::string out = dimension == 1 ? "path_id,time,position\n" : "path_id,time,position_1,position_2\n";
  out.reserve(paths.size() * paths.front().times.size() * 48);
  for (const auto& p : paths) {
    const std::string id = std::to_string(p.id);
    for (std::size_t k = 0; k < p.times.size(); ++k) {
      out += id;
      out += ',';
      out += format_double(p.times[k]);
      for (double x : p.positions[k]) {
        out += ',';
        out += format_double(x);
      }
      out += '\n';
    }
  }
  return out;
}

Body prepare_simulate(const Options& o, Report& r) {
  const SymbolFamily fam = family_from_spec(o.family);
  ProcessTag tag;
  try {
    tag = process_tag_from_string(o.process);
  } catch (const Error&) {
    throw Error(ErrorCode::config, "--process must be Y or X");
  }
  const std::vector<double> times = o.ts.empty() ? std::vector<double>{0.0, 0.25, 0.5, 1.0} : o.ts;
  require(times.size() >= 2 && times.front() == 0.0, "--times must start at 0 and contain a positive time");
  require_times(times, "--times", true);
  require_increasing(times, "--times");
  require(o.paths > 0, "--paths must be positive");
  require(o.sigmas > 0.0, "--sigmas must be positive");
  require(o.grid_points >= 64 && (o.grid_points & (o.grid_points - 1)) == 0, "--grid-points must be a power of two >= 64");
  require(o.oversample >= 1.0, "--oversample must be >= 1");
  SimulationOptions opt;
  opt.grid_points = o.grid_points;
  opt.oversample = o.oversample;
  r.config["family"] = fam.to_json();
  r.config["process"] = to_string(tag);
  r.config["times"] = times;
  r.config["paths"] = o.paths;
  r.config["seed"] = o.sim_seed;
  r.config["probes"] = o.probes;
  r.config["sigmas"] = o.sigmas;
  r.config["grid_points"] = opt.grid_points;
  r.config["oversample"] = opt.oversample;
  r.config["out"] = o.out;
  return [=](Report& rep) {
    const auto paths = simulate_paths(fam, times, o.paths, o.sim_seed, tag, opt);
    rep.add(empirical_cf_check(paths, fam, times.back(), std::span<const double>(o.probes), o.sigmas),
            "empirical_cf.t=" + time_label(times.back()));
    if (!o.out.empty()) {
      write_file_atomic(o.out, paths_csv(paths, fam.dimension()));
      write_file_atomic(o.out + ".json", paths_sidecar(fam, tag, times, o.paths, o.sim_seed).dump(2) + "\n");
      rep.data["out"] = o.out;
      rep.data["sidecar"] = o.out + ".json";
    }
  };
}

/// Reassembles paths from the CSV written by `simulate`.
std::vector<ProcessPath> read_paths(const CsvTable& csv, const std::vector<double>& times, ProcessTag tag,
                                    std::uint64_t seed, std::size_t n, int dimension) {
  const std::size_t id_col = csv.column("path_id"), t_col = csv.column("time");
  std::vector<std::size_t> pos_cols;
  if (dimension == 1) {
    pos_cols.push_back(csv.column("position"));
  } else {
    for (int c = 1; c <= dimension; ++c) pos_cols.push_back(csv.column("position_" + std::to_string(c)));
  }
  std::vector<ProcessPath> paths(n);
  std::vector<std::size_t> filled(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    paths[i].id = i;
    paths[i].times = times;
    paths[i].positions.assign(times.size(), Point(static_cast<std::size_t>(dimension), 0.0));
    paths[i].tag = tag;
    paths[i].seed = seed;
  }
  for (const auto& row : csv.rows) {
    const double idv = row[id_col];
    require(idv >= 0.0 && idv < static_cast<double>(n) && idv == std::floor(idv), "path_id " + format_double(idv) + " out of range");
    const auto id = static_cast<std::size_t>(idv);
    const auto it = std::find(times.begin(), times.end(), row[t_col]);
    require(it != times.end(), "time " + format_double(row[t_col]) + " is not on the recorded grid");
    const auto k = static_cast<std::size_t>(it - times.begin());
    for (std::size_t c = 0; c < pos_cols.size(); ++c) paths[id].positions[k][c] = row[pos_cols[c]];
    ++filled[id];
  }
  for (std::size_t i = 0; i < n; ++i)
    require(filled[i] == times.size(), "path " + std::to_string(i) + " has " + std::to_string(filled[i]) + " rows, expected " +
                                           std::to_string(times.size()));
  return paths;
}

Body prepare_cf_check(const Options& o, Report& r) {
  require(!o.in.empty(), "--in is required");
  const std::string meta_path = o.meta.empty() ? o.in + ".json" : o.meta;
  require(std::filesystem::exists(o.in), "paths file '" + o.in + "' does not exist");
  require(std::filesystem::exists(meta_path), "sidecar '" + meta_path + "' does not exist");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(meta_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::config, "sidecar '" + meta_path + "': " + e.what());
  }
  require(meta.value("format", "") == "addkit-paths", "'" + meta_path + "' is not a paths sidecar");
  SymbolFamily fam = o.family.empty() ? family_from_json(meta.at("family")) : family_from_spec(o.family);
  const auto times = meta.at("times").get<std::vector<double>>();
  const ProcessTag tag = process_tag_from_string(meta.at("process").get<std::string>());
  const auto n = meta.at("paths").get<std::size_t>();
  const auto seed = meta.value("seed", std::uint64_t{0});
  const double t = o.at_time < 0.0 ? times.back() : o.at_time;
  require(std::find(times.begin(), times.end(), t) != times.end(), "--time " + format_double(t) + " is not on the path grid");
  require(t > 0.0, "--time must be positive");
  require(o.sigmas > 0.0, "--sigmas must be positive");
  const CsvTable csv = parse_csv(read_file(o.in));
  const auto paths = read_paths(csv, times, tag, seed, n, fam.dimension());
  r.config["in"] = o.in;
  r.config["family"] = fam.to_json();
  r.config["process"] = to_string(tag);
  r.config["time"] = t;
  r.config["probes"] = o.probes;
  r.config["sigmas"] = o.sigmas;
  return [=](Report& rep) {
    rep.add(empirical_cf_check(paths, fam, t, std::span<const double>(o.probes), o.sigmas), "empirical_cf.t=" + time_label(t));
    rep.data["paths"] = paths.size();
  };
}

TimeProfile profile_from_name(const std::string& name) {
  if (name == "t") return TimeProfile::linear();
  if (name == "t^2") return TimeProfile::power(2.0);
  if (name == "sqrt(t)") return TimeProfile::power(0.5);
  throw Error(ErrorCode::config, "--profile must be t, t^2 or sqrt(t)");
}

GridSpec oracle_grid(const std::string& tag, const std::string& text, int dimension) {
  if (!text.empty()) return parse_grid(text, dimension);
  // the Cauchy kernel's algebraic tails need a wide window
  if (tag == "poisson" && dimension == 1) return GridSpec{1, std::size_t{1} << 16, 0.0};
  return default_grid(dimension);
}

Body prepare_oracle(const Options& o, Report& r) {
  require(o.name == "gaussian" || o.name == "poisson" || o.name == "coshlog" || o.name == "lewis",
          "--name must be gaussian, poisson, coshlog or lewis");
  const double tol = tol_or(o, o.name == "lewis" ? 1e-5 : 1e-6);
  r.config["name"] = o.name;
  r.config["tol"] = tol;
  r.config["out"] = o.out;
  if (o.name == "lewis") {
    return [=](Report& rep) {
      auto fixtures = lewis_fixtures();
      auto names = ojson::array();
      for (const auto& f : fixtures) {
        rep.add(f.check(tol), "lewis." + f.name);
        names.push_back(f.name);
      }
      rep.data["fixtures"] = std::move(names);
      rep.data["sinh_printed_form_error"] = lewis_sinh_printed_form_error();
      if (!o.out.empty()) {
        CsvTable csv{{"fixture", "x", "p", "phi"}, {}};
        for (std::size_t i = 0; i < fixtures.size(); ++i)
          for (int k = -400; k <= 400; ++k) {
            const double x = 0.05 * k;
            csv.rows.push_back({static_cast<double>(i), x, fixtures[i].p(x), fixtures[i].phi(x)});
          }
        write_file_atomic(o.out, to_csv(csv));
        rep.data["out"] = o.out;
      }
    };
  }
  require_times({o.t}, "--t");
  require(o.dimension == 1 || (o.dimension == 2 && o.name != "coshlog"), "--dimension must be 1 (or 2 for gaussian, poisson)");
  const TimeProfile h = profile_from_name(o.profile);
  const OraclePair pair = o.name == "gaussian"  ? gaussian_pair(h, o.dimension)
                          : o.name == "poisson" ? poisson_laplace_pair(h, o.dimension)
                                                : coshlog_pair(h);
  const GridSpec grid = oracle_grid(o.name, o.grid, o.dimension);
  r.config["t"] = o.t;
  r.config["profile"] = o.profile;
  r.config["dimension"] = o.dimension;
  r.config["grid"] = grid_json(grid);
  return [=](Report& rep) {
    rep.add(oracle_cross_validation(pair, o.t, grid, tol), "cross_validation");
    rep.data["tag"] = pair.tag;
    if (!pair.notes.empty()) rep.data["notes"] = pair.notes;
    if (!o.out.empty()) {
      const GridSpec g = resolve_grid(pair.family, 0.0, o.t, grid);
      CsvTable csv;
      const std::size_t n = g.points;
      if (g.dimension == 1) {
        csv.header = {"x", "p", "phi"};
        for (std::size_t j = 0; j < n; ++j) {
          const double x = g.coordinate(j);
          csv.rows.push_back({x, pair.density(o.t, x), pair.adjoint(o.t, x)});
        }
      } else {
        csv.header = {"x", "y", "p", "phi"};
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) {
            const double x[2] = {g.coordinate(i), g.coordinate(j)};
            csv.rows.push_back({x[0], x[1], pair.p(o.t, x), pair.phi(o.t, x)});
          }
      }
      write_file_atomic(o.out, to_csv(csv));
      rep.data["out"] = o.out;
    }
  };
}

struct SuiteTolerances {
  double adjoint = 1e-5;
  double fundamental = 1e-4;
  double chapman_kolmogorov = 1e-6;
  double dual = 1e-5;
  double dual_time = 1.0;
  double oracle = 1e-6;
};

SuiteTolerances suite_tolerances(const SymbolFamily& fam) {
  SuiteTolerances s;
  switch (fam.kind()) {
    case FamilyKind::gaussian:
      s.adjoint = 1e-6;
      s.fundamental = 1e-5;
      break;
    case FamilyKind::coshlog:
      s.fundamental = 1e-5;
      s.dual_time = 2.0;
      break;
    default:
      break;
  }
  return s;
}

void run_suite(Report& rep, const SymbolFamily& fam, const std::string& label, std::size_t triples, std::uint64_t seed) {
  const SuiteTolerances tol = suite_tolerances(fam);
  const std::string p = label + ".";
  const int n = fam.dimension();
  const std::vector<double> unit_times{0.5, 1.0, 2.0};

  guarded(rep, p + "comparability", [&] {
    std::vector<std::vector<double>> xs;
    for (double x : log_spaced(1e-3, 1e3, 4)) {
      std::vector<double> xi(static_cast<std::size_t>(n), 0.0);
      xi[0] = x;
      xs.push_back(xi);
      if (n == 2) xs.push_back({x / std::numbers::sqrt2, x / std::numbers::sqrt2});
    }
    const std::vector<double> ts{0.25, 0.5, 1.0, 2.0, 4.0};
    const ComparabilityReport c = comparability_bounds(fam, xs, ts);
    const double cond = c.kappa1 / c.kappa0;
    rep.add({p + "comparability.condition", cond, c.max_condition, c.pass,
             "kappa0=" + format_double(c.kappa0) + " kappa1=" + format_double(c.kappa1) +
                 (c.message.empty() ? "" : " " + c.message)});
  });
  guarded(rep, p + "basic_assumption_I", [&] {
    for (const auto& nd : validate_basic_assumption_I(fam, unit_times))
      add_nd_items(rep, nd, p + "basic_assumption_I.t=" + time_label(nd.t) + ".");
  });
  guarded(rep, p + "axioms_dQ", [&] { rep.add(metric_axioms_check(metric_dQ(fam, 0.0, 1.0), triples, seed), p + "axioms_dQ"); });
  guarded(rep, p + "axioms_deltaQ",
          [&] { rep.add(metric_axioms_check(metric_deltaQ(fam, 1.0), triples, seed), p + "axioms_deltaQ"); });
  guarded(rep, p + "doubling_dQ", [&] {
    const DoublingReport d = doubling_estimate(metric_dQ(fam, 0.0, 1.0));
    rep.add({p + "doubling_dQ.c0", d.c0, 0.1 * d.c0, d.pass, "c0 without the outer decade: " + format_double(d.c0_inner)});
  });
  guarded(rep, p + "dual_formula",
          [&] { rep.add(dual_formula_check(fam, tol.dual_time, GridSpec{}, tol.dual), p + "dual_formula"); });
  guarded(rep, p + "adjointness", [&] {
    for (double t : unit_times)
      rep.add(adjointness_check(fam, t, GridSpec{n, default_grid(n).points, 0.0}, tol.adjoint), p + "adjointness.t=" + time_label(t));
  });
  const GridSpec og = n == 1 ? GridSpec{1, 4096, 40.0} : GridSpec{2, 256, 20.0};
  run_operator_checks(rep, fam, {0.2, 0.5, 1.0}, og, tol.fundamental, tol.chapman_kolmogorov, 5.0, seed, p);
  if (fam.is_product() && (fam.kind() == FamilyKind::gaussian || fam.kind() == FamilyKind::poisson || fam.kind() == FamilyKind::coshlog)) {
    guarded(rep, p + "oracle", [&] {
      const TimeProfile& h = fam.profile();
      const OraclePair pair = fam.kind() == FamilyKind::gaussian  ? gaussian_pair(h, n)
                              : fam.kind() == FamilyKind::poisson ? poisson_laplace_pair(h, n)
                                                                  : coshlog_pair(h);
      rep.add(oracle_cross_validation(pair, 1.0, oracle_grid(pair.family.kind() == FamilyKind::poisson ? "poisson" : "", "", n), tol.oracle),
              p + "oracle");
    });
  }
}

Body prepare_suite(const Options& o, Report& r) {
  std::vector<std::pair<std::string, SymbolFamily>> families;
  if (o.family.empty()) {
    for (const char* name : {"gaussian", "poisson", "coshlog"}) families.emplace_back(name, builtin_family(std::string("builtin:") + name));
  } else {
    const SymbolFamily fam = family_from_spec(o.family);
    std::string label = o.family.rfind("builtin:", 0) == 0 ? o.family.substr(8) : to_string(fam.kind());
    families.emplace_back(label, fam);
  }
  require(o.triples > 0, "--triples must be positive");
  auto fams = ojson::array();
  for (const auto& [label, fam] : families) fams.push_back({{"label", label}, {"family", fam.to_json()}});
  r.config["families"] = std::move(fams);
  r.config["triples"] = o.triples;
  r.config["seed"] = o.seed;
  return [=](Report& rep) {
    for (const auto& [label, fam] : families) run_suite(rep, fam, label, o.triples, o.seed);
  };
}

// ---------------------------------------------------------------------------
// Parsing

struct Subcommand {
  CLI::App* app;
  std::function<Body(const Options&, Report&)> prepare;
};

void add_output_options(CLI::App* sub, Options& o) {
  sub->add_option("--format", o.format, "Report format: json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));
  sub->add_option("--report", o.report_path, "Report destination ('-' for stdout)");
}

std::vector<Subcommand> build_cli(CLI::App& app, Options& o) {
  std::vector<Subcommand> subs;
  auto add = [&](const std::string& name, const std::string& help, std::function<Body(const Options&, Report&)> prepare) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_output_options(sub, o);
    subs.push_back({sub, std::move(prepare)});
    return sub;
  };
  auto family_opt = [&](CLI::App* sub) {
    sub->add_option("--family", o.family, "builtin:<name>, a JSON config file or inline JSON");
  };

  auto* density = add("density", "Transition density p_{t,s} on a grid", prepare_density);
  family_opt(density);
  density->add_option("--t", o.t, "End time")->required();
  density->add_option("--s", o.s, "Start time");
  density->add_option("--grid", o.grid, "Grid, e.g. N=4096,L=auto");
  density->add_option("--out", o.out, "CSV output (x[, y], value)");
  density->add_option("--tol", o.tol, "Mass and peak tolerance");
  density->add_option("--tail-eps", o.tail_eps, "Spectral level e^{-Q} must reach at the grid cutoff");

  auto* adjoint = add("adjoint", "Adjoint density Phi_t on a grid", prepare_adjoint);
  family_opt(adjoint);
  adjoint->add_option("--t", o.t, "Time")->required();
  adjoint->add_option("--grid", o.grid, "Grid, e.g. N=4096,L=auto");
  adjoint->add_option("--out", o.out, "CSV output (x[, y], value)");
  adjoint->add_option("--tol", o.tol, "Mass tolerance");

  auto* check_adjoint = add("check-adjoint", "Fourier transform of p_t against Phi_{1/t}", prepare_check_adjoint);
  family_opt(check_adjoint);
  check_adjoint->add_option("--t", o.ts, "Times")->delimiter(',');
  check_adjoint->add_option("--grid", o.grid, "Grid, e.g. N=4096,L=auto");
  check_adjoint->add_option("--tol", o.tol, "Sup error tolerance");

  auto* cndf = add("verify-cndf", "Negative definiteness falsifier", prepare_verify_cndf);
  family_opt(cndf);
  cndf->add_option("--symbol", o.symbol, "Exponent psi as an expression in x = |xi| (and t)");
  cndf->add_option("--dimension", o.dimension, "Dimension for --symbol");
  cndf->add_option("--t", o.ts, "Times")->delimiter(',');
  cndf->add_option("--tol", o.tol, "Relative tolerance");
  cndf->add_option("--seed", o.seed, "Seed");
  cndf->add_option("--point-sets", o.point_sets, "Random point sets");
  cndf->add_option("--set-size", o.set_size, "Points per set");
  cndf->add_option("--weights", o.weights, "Random zero-sum weight vectors");

  auto* dual = add("verify-dual", "Dual reconstruction of p_t and Phi_t from ball volumes", prepare_verify_dual);
  family_opt(dual);
  dual->add_option("--t", o.t, "Time");
  dual->add_option("--grid", o.grid, "Grid, e.g. N=4096,L=auto");
  dual->add_option("--tol", o.tol, "Sup relative error tolerance");

  auto* geometry = add("geometry", "Metric axioms, ball volumes and doubling", prepare_geometry);
  family_opt(geometry);
  geometry->add_option("--t", o.t, "Time");
  geometry->add_option("--s", o.s, "Start time (dQ)");
  geometry->add_option("--metric", o.metric, "dQ or deltaQ");
  geometry->add_option("--triples", o.triples, "Random triples for the axioms");
  geometry->add_option("--seed", o.seed, "Seed");
  geometry->add_option("--axiom-tol", o.axiom_tol, "Axiom tolerance");
  geometry->add_option("--curve", o.curve, "CSV output (r, volume)");
  geometry->add_option("--r-min", o.r_min, "Smallest radius");
  geometry->add_option("--r-max", o.r_max, "Largest radius");
  geometry->add_option("--per-decade", o.per_decade, "Radii per decade");

  auto* op = add("operator-check", "Evolution families: fundamental solution and Chapman-Kolmogorov", prepare_operator_check);
  family_opt(op);
  op->add_option("--times", o.ts, "s,r,t")->delimiter(',');
  op->add_option("--tol", o.tol, "Tolerance");
  op->add_option("--grid", o.grid, "Grid with explicit L, e.g. N=4096,L=40");
  op->add_option("--bump-radius", o.bump_radius, "Support radius of the test bump");
  op->add_option("--seed", o.seed, "Seed for the random test function");

  auto* sim = add("simulate", "Simulate Y or X paths", prepare_simulate);
  family_opt(sim);
  sim->add_option("--process", o.process, "Y or X");
  sim->add_option("--times", o.ts, "Time grid starting at 0")->delimiter(',');
  sim->add_option("--paths", o.paths, "Number of paths");
  sim->add_option("--seed", o.sim_seed, "Seed");
  sim->add_option("--out", o.out, "CSV output (path_id, time, position); a .json sidecar is written next to it");
  sim->add_option("--probes", o.probes, "Frequencies for the built-in cf check")->delimiter(',');
  sim->add_option("--sigmas", o.sigmas, "Band width in standard errors");
  sim->add_option("--grid-points", o.grid_points, "Points of the increment tables");
  sim->add_option("--oversample", o.oversample, "Spatial refinement of the increment tables");

  auto* cf = add("cf-check", "Empirical characteristic function of simulated paths", prepare_cf_check);
  family_opt(cf);
  cf->add_option("--in", o.in, "Paths CSV written by simulate")->required();
  cf->add_option("--meta", o.meta, "Sidecar JSON (default: <in>.json)");
  cf->add_option("--probes", o.probes, "Frequencies")->delimiter(',');
  cf->add_option("--sigmas", o.sigmas, "Band width in standard errors");
  cf->add_option("--time", o.at_time, "Time on the path grid (default: last)");

  auto* oracle = add("oracle", "Closed-form oracles and the adjoint-pair fixtures", prepare_oracle);
  oracle->add_option("--name", o.name, "gaussian, poisson, coshlog or lewis")->required();
  oracle->add_option("--t", o.t, "Time");
  oracle->add_option("--profile", o.profile, "Time change: t, t^2 or sqrt(t)");
  oracle->add_option("--dimension", o.dimension, "Dimension (gaussian, poisson)");
  oracle->add_option("--grid", o.grid, "Grid, e.g. N=4096,L=auto");
  oracle->add_option("--out", o.out, "CSV output (x, p, phi)");
  oracle->add_option("--tol", o.tol, "Tolerance");

  auto* suite = add("suite", "Every check on one family (default: all built-ins)", prepare_suite);
  family_opt(suite);
  suite->add_option("--triples", o.triples, "Random triples for the metric axioms");
  suite->add_option("--seed", o.seed, "Seed");

  return subs;
}

int run_parsed(const std::vector<Subcommand>& subs, const Options& o, const std::string& argv_echo) {
  const Subcommand* chosen = nullptr;
  for (const auto& s : subs)
    if (s.app->parsed()) chosen = &s;
  if (chosen == nullptr) return exit_config_error;

  Report report;
  report.command = chosen->app->get_name();
  ReportFormat format;
  Body body;
  try {
    format = report_format_from_string(o.format);
    body = chosen->prepare(o, report);
  } catch (const Error& e) {
    std::cerr << "addkit " << report.command << ": " << e.what() << "\n";
    return exit_config_error;
  } catch (const std::exception& e) {
    std::cerr << "addkit " << report.command << ": invalid configuration: " << e.what() << "\n";
    return exit_config_error;
  }
  report.data["argv"] = argv_echo;

  const auto start = std::chrono::steady_clock::now();
  try {
    body(report);
  } catch (const Error& e) {
    report.error = std::string(to_string(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    report.error = e.what();
  }
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  try {
    emit_report(report, format, o.report_path);
  } catch (const Error& e) {
    std::cerr << "addkit " << report.command << ": " << e.what() << "\n";
    return exit_config_error;
  }
  if (!report.error.empty()) std::cerr << "addkit " << report.command << ": " << report.error << "\n";
  return report.pass() ? exit_pass : exit_check_failure;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"addkit: additive processes, their adjoints and the checks relating them"};
  app.name("addkit");
  app.require_subcommand(1);
  Options o;
  const auto subs = build_cli(app, o);
  if (argc > 1 && argv[1][0] != '-') {
    const std::string name = argv[1];
    if (std::none_of(subs.begin(), subs.end(), [&](const Subcommand& s) { return s.app->get_name() == name; })) {
      std::cerr << "addkit: unknown subcommand '" << name << "'\n\n" << app.help();
      return exit_config_error;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "addkit: " << e.what() << "\n\n" << app.help();
    return exit_config_error;
  }
  std::string echo;
  for (int i = 1; i < argc; ++i) echo += (i > 1 ? " " : "") + std::string(argv[i]);
  return run_parsed(subs, o, echo);
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace addkit
