#include "eqcont/harness.hpp"

#include "eqcont/cmc.hpp"
#include "eqcont/geodesics.hpp"
#include "eqcont/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

namespace eqc::harness {

namespace {

constexpr const char* kVersion = "0.1.0";
const std::vector<std::string> kKinds = {"cmc", "geodesic", "harmonic"};

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::ConfigInvalid, msg); }

std::vector<std::string> keys_of(const json& obj) {
  std::vector<std::string> out;
  for (auto it = obj.begin(); it != obj.end(); ++it) out.push_back(it.key());
  return out;
}

void reject_unknown(const json& obj, const std::vector<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) invalid(where + " must be an object");
  for (const std::string& key : keys_of(obj)) {
    if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
    std::string msg = "unknown key '" + key + "' in " + where;
    const std::string hint = suggest(key, allowed);
    if (!hint.empty()) msg += "; did you mean '" + hint + "'?";
    invalid(msg);
  }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    invalid("bad value for '" + key + "': " + e.what());
  }
}

double positive(const json& obj, const std::string& key, double fallback) {
  const double v = get_or<double>(obj, key, fallback);
  if (!(v > 0.0)) invalid("'" + key + "' must be positive");
  return v;
}

Eigen::Vector2i int_pair(const json& obj, const std::string& key, Eigen::Vector2i fallback) {
  if (!obj.contains(key)) return fallback;
  const auto v = get_or<std::vector<int>>(obj, key, {});
  if (v.size() != 2) invalid("'" + key + "' must be a pair of integers");
  return Eigen::Vector2i(v[0], v[1]);
}

Vec2 real_pair(const json& obj, const std::string& key, Vec2 fallback) {
  if (!obj.contains(key)) return fallback;
  const auto v = get_or<std::vector<double>>(obj, key, {});
  if (v.size() != 2) invalid("'" + key + "' must be a pair of numbers");
  return Vec2(v[0], v[1]);
}

void check_family(const std::string& family) {
  const auto& names = metric_family_names();
  if (std::find(names.begin(), names.end(), family) != names.end()) return;
  std::string msg = "unknown metric family '" + family + "'";
  const std::string hint = suggest(family, names);
  if (!hint.empty()) msg += "; did you mean '" + hint + "'?";
  invalid(msg);
}

// Random trigonometric perturbation, one grid function per component.
Vec smooth_random(const Grid& grid, int grid_dim, Index components, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  const Index n = grid.n();
  const Index m = grid.size();
  Vec out = Vec::Zero(components * m);
  for (Index c = 0; c < components; ++c) {
    if (grid_dim == 1) {
      for (int k = 0; k <= 3; ++k) {
        const double a = gauss(rng), b = gauss(rng);
        for (Index j = 0; j < n; ++j) {
          const double t = k * grid.node(j);
          out[c * m + j] += scale * (a * std::cos(t) + b * std::sin(t));
        }
      }
    } else {
      for (int k = 0; k <= 2; ++k)
        for (int l = -2; l <= 2; ++l) {
          const double a = gauss(rng), b = gauss(rng);
          for (Index j = 0; j < n; ++j)
            for (Index i = 0; i < n; ++i) {
              const double t = k * grid.node(i) + l * grid.node(j);
              out[c * m + i + n * j] += scale * (a * std::cos(t) + b * std::sin(t));
            }
        }
    }
  }
  return out;
}

Vec random_element(Index dim, double radius, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec g(dim);
  for (Index i = 0; i < dim; ++i) g[i] = gauss(rng);
  const double r = radius * std::pow(unif(rng), 1.0 / static_cast<double>(dim));
  return g * (r / std::max(g.norm(), 1e-300));
}

Check make_check(std::string name, double value, double threshold, bool pass, std::string detail = {}) {
  return Check{std::move(name), value, threshold, pass, std::move(detail)};
}

Check at_most(std::string name, double value, double threshold) {
  return make_check(std::move(name), value, threshold, value <= threshold);
}

json to_json(const Check& c) {
  json j = {{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}};
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

json vec_json(const Vec& v, Index limit = -1) {
  json arr = json::array();
  const Index n = limit < 0 ? v.size() : std::min(limit, v.size());
  for (Index i = 0; i < n; ++i) arr.push_back(v[i]);
  return arr;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Grid grid_for(const ExperimentConfig& c) {
  if (c.kind == "harmonic") return make_grid(c.n, 2.0 * std::numbers::pi, 2);
  return make_grid(c.n);
}

// Problem-specific invariant suites for the verify mode.
void extra_checks(const ExperimentConfig& c, const BuiltProblem& built, std::mt19937_64& rng,
                  std::vector<Check>& checks) {
  const Grid grid = grid_for(c);
  if (c.kind == "cmc") {
    const cmc::Ambient2D amb = cmc::make_ambient(cmc::parse_ambient(c.params.value("ambient", "plane")));
    cmc::NormalGraph ref = cmc::default_reference(amb, grid);
    if (amb.kind == cmc::AmbientKind::Plane) ref = cmc::circle_reference(grid, c.params.value("radius", 1.0));
    if (amb.kind == cmc::AmbientKind::FlatTorus) ref = cmc::straight_loop_reference(grid, c.params.value("x0", 0.0));
    ref.phi = built.x0;
    const cmc::Curve curve = cmc::graph_to_curve(amb, ref);
    const cmc::StokesResult s = cmc::stokes_identity_check(amb, curve);
    checks.push_back(at_most("stokes_r1", s.r1, 1e-12));
    if (s.r2) {
      checks.push_back(at_most("stokes_r2", *s.r2, 1e-12));
    } else {
      // non-contractible loop: the transverse flux equals the length instead of vanishing
      const double length = cmc::curve_length(curve);
      checks.push_back(make_check("transverse_flux_equals_length", std::abs(s.flux[0] - length), 1e-12,
                                  std::abs(s.flux[0] - length) <= 1e-12 && length > 0.0,
                                  "flux " + fmt(s.flux[0]) + ", length " + fmt(length)));
    }
    if (amb.has_primitive()) {
      const cmc::Vec3 q = amb.kind == cmc::AmbientKind::Sphere ? cmc::excluded_point(ref) : cmc::Vec3(0, 0, -1);
      const double v0 = cmc::volume_functional(amb, curve, q);
      double worst = 0.0;
      for (int t = 0; t < c.trials; ++t) {
        const Vec g = random_element(amb.killing_count(), 0.2, rng);
        cmc::Curve moved = curve;
        for (Index k = 0; k < curve.n(); ++k)
          moved.points.row(k) = amb.isometry(g, curve.points.row(k).transpose()).transpose();
        worst = std::max(worst, std::abs(cmc::volume_functional(amb, moved, q) - v0));
      }
      checks.push_back(at_most("volume_invariance", worst, 1e-8));
    }
    return;
  }
  if (c.kind == "geodesic") {
    const MetricField metric = metric_family(c.params.value("family", "channel_torus"), c.lambda0,
                                             c.params.value("eps", 0.1));
    const Eigen::Vector2i winding = int_pair(c.params, "winding", Eigen::Vector2i(0, 1));
    std::uniform_real_distribution<double> shift(-0.3, 0.3);
    double worst = 0.0;
    for (int t = 0; t < c.trials; ++t) {
      const Vec x = built.x0 + smooth_random(grid, 1, 2, 0.05, rng);
      const geodesics::ClosedCurve curve = geodesics::curve_from_state(grid, x, winding);
      const double e0 = geodesics::energy(curve, metric, c.scheme);
      worst = std::max(worst,
                       std::abs(geodesics::energy(geodesics::rotation_action(curve, shift(rng)), metric, c.scheme) - e0));
    }
    checks.push_back(at_most("energy_rotation_invariance", worst, 1e-10));
    return;
  }
  // harmonic: the energy is invariant under target isometries
  harmonic::HarmonicSetup setup;
  setup.target = harmonic::parse_target(c.params.value("target", "circle"));
  setup.family = c.params.value("family", "warped_torus");
  setup.eps = c.params.value("eps", 0.1);
  setup.degree = int_pair(c.params, "degree", Eigen::Vector2i(1, 0));
  double worst = 0.0;
  for (int t = 0; t < c.trials; ++t) {
    const Vec x = built.x0 + smooth_random(grid, 2, built.components, 0.01, rng);
    const Vec g = random_element(built.problem.group.dim, 0.3, rng);
    const std::optional<Vec> moved = built.problem.group.local_action(g, x);
    if (!moved) continue;
    worst = std::max(worst, std::abs(built.problem.functional(*moved, c.lambda0) -
                                     built.problem.functional(x, c.lambda0)));
  }
  checks.push_back(at_most("energy_target_invariance", worst, 1e-10));
}

json nondegeneracy_json(const NondegeneracyReport& r) {
  return {{"kernel_dim", r.kernel_dim},
          {"group_dim", r.group_dim},
          {"orbit_rank", r.orbit_rank},
          {"principal_angle", r.principal_angle},
          {"verdict", to_string(r.verdict)},
          {"smallest_singular_values", vec_json(r.singular_values.reverse(), 8)}};
}

}  // namespace

Mode parse_mode(const std::string& name) {
  if (name == "analyze") return Mode::Analyze;
  if (name == "continue") return Mode::Continue;
  if (name == "verify") return Mode::Verify;
  if (name == "project") return Mode::Project;
  invalid("unknown mode '" + name + "'");
}

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::Analyze: return "analyze";
    case Mode::Continue: return "continue";
    case Mode::Verify: return "verify";
    case Mode::Project: return "project";
  }
  return "unknown";
}

std::string suggest(const std::string& name, const std::vector<std::string>& candidates) {
  auto distance = [](const std::string& a, const std::string& b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
      std::size_t diag = row[0];
      row[0] = i;
      for (std::size_t j = 1; j <= b.size(); ++j) {
        const std::size_t up = row[j];
        row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
        diag = up;
      }
    }
    return row[b.size()];
  };
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const std::string& c : candidates) {
    // a near-miss of a prefix counts too ("cmc-plain" -> "cmc-plane-circle")
    const std::size_t d = std::min(distance(name, c), distance(name, c.substr(0, name.size())) + 1);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best_d <= std::max<std::size_t>(2, name.size() / 3) ? best : std::string();
}

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = [] {
  std::vector<CatalogEntry> list = {
      {"cmc-plane-circle", "unit circle in the plane, curvature 1 -> 2", {},
       {{"problem", "cmc"}, {"params", {{"ambient", "plane"}}}, {"grid", {{"n", 128}}},
        {"run", {{"lambda0", 1.0}, {"lambda1", 2.0}}}}},
      {"cmc-sphere-latitude", "equator of S2 continued through latitudes", {},
       {{"problem", "cmc"}, {"params", {{"ambient", "sphere"}}}, {"grid", {{"n", 64}}},
        {"run", {{"lambda0", 0.0}, {"lambda1", 0.5}}}}},
      {"cmc-torus-loop", "straight loop on the flat torus; obstructed for lambda != 0", {},
       {{"problem", "cmc"}, {"params", {{"ambient", "flat_torus"}}}, {"grid", {{"n", 64}}},
        {"run", {{"lambda0", 0.0}, {"lambda1", 0.3}}}, {"expect", {{"status", "obstructed"}}}}},
      {"geodesic-flat", "straight loop on the flat torus with the translation group", {},
       {{"problem", "geodesic"}, {"params", {{"family", "flat_torus"}, {"translations", true}}},
        {"run", {{"lambda0", 0.0}, {"lambda1", 1.0}}}}},
      {"geodesic-channel", "closed geodesic x = 0 of channel_torus(eps = 0.1)", {},
       {{"problem", "geodesic"}, {"params", {{"family", "channel_torus"}, {"eps", 0.1}}},
        {"run", {{"lambda0", 0.2}, {"lambda1", 1.0}}}}},
      {"geodesic-lorentz", "spacelike loop of the Lorentzian flat torus", {},
       {{"problem", "geodesic"},
        {"params", {{"family", "lorentz_flat"}, {"winding", {1, 0}}, {"translations", true}}},
        {"run", {{"lambda0", 0.0}, {"lambda1", 1.0}}}}},
      {"geodesic-wavy", "moving closed geodesic of wavy_channel(eps = 0.2)", {},
       {{"problem", "geodesic"}, {"params", {{"family", "wavy_channel"}, {"eps", 0.2}}},
        {"run", {{"lambda0", 0.0}, {"lambda1", 1.0}}}}},
      {"harmonic-circle-warped", "degree (1,0) maps to S1 over the warped torus family", {},
       {{"problem", "harmonic"}, {"params", {{"target", "circle"}, {"family", "warped_torus"}, {"eps", 0.3}}},
        {"grid", {{"n", 16}}}, {"run", {{"lambda0", 0.0}, {"lambda1", 1.0}}}}},
      {"harmonic-circle-conformal", "degree (1,0) maps to S1 over conformal metrics", {},
       {{"problem", "harmonic"}, {"params", {{"target", "circle"}, {"family", "conformal_torus"}, {"eps", 0.3}}},
        {"grid", {{"n", 16}}}, {"run", {{"lambda0", 0.0}, {"lambda1", 1.0}}}}},
      {"harmonic-sphere-equator", "equator map into S2; degenerate, continuation refuses", {},
       {{"problem", "harmonic"}, {"params", {{"target", "sphere"}, {"family", "warped_torus"}, {"eps", 0.3}}},
        {"grid", {{"n", 12}}}, {"run", {{"lambda0", 0.0}, {"lambda1", 0.5}}},
        {"expect", {{"error", "degenerate-orbit"}, {"verdict", "degenerate"}}}}},
  };
  // the advertised range is the one the assembled problem accepts
  for (CatalogEntry& e : list) e.lambda_range = build_problem(parse_config(e.config)).problem.parameter_range;
  return list;
  }();
  return entries;
}

ExperimentConfig parse_config(const json& input) {
  if (!input.is_object()) invalid("config must be a JSON object");
  if (!input.contains("problem") || !input.at("problem").is_string()) invalid("config needs a 'problem' string");
  json doc = input;
  ExperimentConfig c;
  const std::string problem = input.at("problem").get<std::string>();
  if (std::find(kKinds.begin(), kKinds.end(), problem) == kKinds.end()) {
    const auto& entries = catalog();
    const auto it = std::find_if(entries.begin(), entries.end(), [&](const CatalogEntry& e) { return e.name == problem; });
    if (it == entries.end()) {
      std::vector<std::string> names = kKinds;
      for (const CatalogEntry& e : entries) names.push_back(e.name);
      std::string msg = "unknown problem '" + problem + "'";
      const std::string hint = suggest(problem, names);
      if (!hint.empty()) msg += "; did you mean '" + hint + "'?";
      invalid(msg);
    }
    json overrides = input;
    overrides.erase("problem");
    doc = it->config;
    doc.merge_patch(overrides);
    c.catalog = it->name;
  }
  reject_unknown(doc, {"problem", "params", "grid", "solver", "run", "expect", "output", "seed"}, "config");
  c.raw = doc;
  c.kind = doc.at("problem").get<std::string>();
  c.params = doc.value("params", json::object());
  const json grid = doc.value("grid", json::object());
  const json solver = doc.value("solver", json::object());
  const json run = doc.value("run", json::object());
  const json expect = doc.value("expect", json::object());

  if (c.kind == "cmc") {
    reject_unknown(c.params, {"ambient", "radius", "x0"}, "params");
    cmc::parse_ambient(c.params.value("ambient", "plane"));
    if (c.params.contains("radius")) positive(c.params, "radius", 1.0);
  } else if (c.kind == "geodesic") {
    reject_unknown(c.params, {"family", "eps", "winding", "base", "translations"}, "params");
    check_family(c.params.value("family", "channel_torus"));
    int_pair(c.params, "winding", Eigen::Vector2i(0, 1));
    real_pair(c.params, "base", Vec2::Zero());
  } else {
    reject_unknown(c.params, {"target", "family", "eps", "degree"}, "params");
    harmonic::parse_target(c.params.value("target", "circle"));
    check_family(c.params.value("family", "warped_torus"));
    int_pair(c.params, "degree", Eigen::Vector2i(1, 0));
  }

  reject_unknown(grid, {"n", "scheme"}, "grid");
  const Index default_n = c.kind == "cmc" ? 64 : c.kind == "geodesic" ? 32 : 16;
  c.n = get_or<Index>(grid, "n", default_n);
  const Index max_n = c.kind == "harmonic" ? 32 : 256;
  if (c.n < 8 || c.n % 2 != 0 || c.n > max_n)
    invalid("grid.n must be even and in [8, " + std::to_string(max_n) + "], got " + std::to_string(c.n));
  c.scheme = parse_scheme(get_or<std::string>(grid, "scheme", "spectral"));

  reject_unknown(solver,
                 {"newton_tol", "svd_tol", "angle_tol", "rank_tol", "residual_tol", "max_condition", "projection_tol",
                  "max_iter", "multiplier_tol", "critical_tol", "steps", "min_step", "track_kernel"},
                 "solver");
  c.solver.newton_tol = positive(solver, "newton_tol", c.solver.newton_tol);
  c.solver.svd_tol = positive(solver, "svd_tol", c.solver.svd_tol);
  c.solver.angle_tol = positive(solver, "angle_tol", c.solver.angle_tol);
  c.solver.rank_tol = positive(solver, "rank_tol", c.solver.rank_tol);
  c.solver.residual_tol = positive(solver, "residual_tol", c.solver.residual_tol);
  c.solver.max_condition = positive(solver, "max_condition", c.solver.max_condition);
  c.solver.projection_tol = positive(solver, "projection_tol", c.solver.projection_tol);
  c.solver.max_iter = get_or<int>(solver, "max_iter", c.solver.max_iter);
  if (c.solver.max_iter < 1) invalid("'max_iter' must be at least 1");
  c.policy.multiplier_tol = positive(solver, "multiplier_tol", c.policy.multiplier_tol);
  c.policy.critical_tol = positive(solver, "critical_tol", c.policy.critical_tol);
  c.policy.min_step = positive(solver, "min_step", c.policy.min_step);
  c.policy.steps = get_or<int>(solver, "steps", c.policy.steps);
  if (c.policy.steps < 1) invalid("'steps' must be at least 1");
  c.policy.track_kernel = get_or<bool>(solver, "track_kernel", c.policy.track_kernel);

  reject_unknown(run, {"lambda0", "lambda1", "trials", "radius"}, "run");
  // a planar circle of radius r is critical at curvature 1 / r, every other
  // reference is critical at 0
  double start = 0.0;
  if (c.kind == "cmc" && c.params.value("ambient", "plane") == "plane") start = 1.0 / c.params.value("radius", 1.0);
  c.lambda0 = get_or<double>(run, "lambda0", start);
  c.lambda1 = get_or<double>(run, "lambda1", start + 1.0);
  c.trials = get_or<int>(run, "trials", c.trials);
  if (c.trials < 1) invalid("'trials' must be at least 1");
  c.radius = positive(run, "radius", c.radius);

  reject_unknown(expect, {"status", "verdict", "error"}, "expect");
  if (expect.contains("status")) {
    c.expect_status = get_or<std::string>(expect, "status", "");
    if (*c.expect_status != "completed" && *c.expect_status != "obstructed" &&
        *c.expect_status != "degenerate_encounter")
      invalid("expect.status must be completed, obstructed or degenerate_encounter");
  }
  if (expect.contains("verdict")) c.expect_verdict = get_or<std::string>(expect, "verdict", "");
  if (expect.contains("error")) c.expect_error = get_or<std::string>(expect, "error", "");

  c.output = get_or<std::string>(doc, "output", c.output);
  c.seed = get_or<std::uint64_t>(doc, "seed", c.seed);
  return c;
}

BuiltProblem build_problem(const ExperimentConfig& c) {
  const Grid grid = grid_for(c);
  BuiltProblem b;
  if (c.kind == "cmc") {
    const cmc::Ambient2D amb = cmc::make_ambient(cmc::parse_ambient(c.params.value("ambient", "plane")));
    cmc::NormalGraph ref = cmc::default_reference(amb, grid);
    if (amb.kind == cmc::AmbientKind::Plane) ref = cmc::circle_reference(grid, c.params.value("radius", 1.0));
    if (amb.kind == cmc::AmbientKind::FlatTorus) ref = cmc::straight_loop_reference(grid, c.params.value("x0", 0.0));
    b.problem = cmc::make_cmc_problem(amb, ref, c.scheme);
    b.x0 = Vec::Zero(grid.n());
  } else if (c.kind == "geodesic") {
    geodesics::GeodesicSetup setup;
    setup.family = c.params.value("family", "channel_torus");
    setup.eps = c.params.value("eps", 0.1);
    setup.winding = int_pair(c.params, "winding", Eigen::Vector2i(0, 1));
    setup.translations = c.params.value("translations", false);
    setup.scheme = c.scheme;
    b.problem = geodesics::make_geodesic_problem(grid, setup);
    b.x0 = geodesics::straight_loop(grid, real_pair(c.params, "base", Vec2::Zero()), setup.winding).periodic;
    b.components = 2;
  } else {
    harmonic::HarmonicSetup setup;
    setup.target = harmonic::parse_target(c.params.value("target", "circle"));
    setup.family = c.params.value("family", "warped_torus");
    setup.eps = c.params.value("eps", 0.1);
    setup.degree = int_pair(c.params, "degree", Eigen::Vector2i(1, 0));
    setup.scheme = c.scheme;
    b.problem = harmonic::make_harmonic_problem(grid, setup);
    b.x0 = Vec::Zero(b.problem.n);
    b.components = setup.target == harmonic::Target::Circle ? 1 : 2;
    b.grid_dim = 2;
  }
  for (double l : {c.lambda0, c.lambda1})
    if (!b.problem.parameter_range.contains(l))
      invalid("lambda " + fmt(l) + " is outside the parameter range [" + fmt(b.problem.parameter_range.lo) + ", " +
              fmt(b.problem.parameter_range.hi) + "] of " + b.problem.name);
  return b;
}

bool RunReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

double state_checksum(const Vec& x) {
  double s = 0.0;
  for (Index i = 0; i < x.size(); ++i) s += static_cast<double>(i + 1) * x[i];
  return s / static_cast<double>(std::max<Index>(x.size(), 1));
}

RunReport run(const ExperimentConfig& c, Mode mode) {
  RunReport rep;
  rep.mode = mode;
  const BuiltProblem built = build_problem(c);
  const ProblemInstance& p = built.problem;
  std::mt19937_64 rng(c.seed);
  rep.doc = {{"version", kVersion}, {"mode", to_string(mode)}, {"problem", p.name},
             {"config", c.raw},     {"seed", c.seed},          {"state_size", p.n}};
  if (!c.catalog.empty()) rep.doc["catalog"] = c.catalog;
  if (c.kind == "harmonic" && c.params.value("target", "circle") == "sphere")
    rep.doc["frame"] = "E1 = Gram-Schmidt(e_z) against the value (e_x when |z| > 0.9), E2 = value x E1";

  try {
    const double g0 = p.gradient(built.x0, c.lambda0).lpNorm<Eigen::Infinity>();
    switch (mode) {
      case Mode::Analyze: {
        rep.checks.push_back(at_most("initial_gradient", g0, c.policy.critical_tol));
        const Linearization lin = assemble_linearization(p, built.x0, c.lambda0, c.solver);
        const KernelResult k = kernel_basis(lin.matrix, p.gram, c.solver.svd_tol);
        const NondegeneracyReport nd =
            nondegeneracy_check(k, p.group.orbit_tangent(built.x0), p.gram, c.solver.angle_tol, c.solver.rank_tol);
        rep.doc["nondegeneracy"] = nondegeneracy_json(nd);
        rep.doc["linearization"] = lin.analytic ? "analytic" : "finite-difference";
        const std::string want = c.expect_verdict.value_or("nondegenerate");
        rep.checks.push_back(make_check("verdict", static_cast<double>(nd.kernel_dim),
                                        static_cast<double>(nd.orbit_rank), to_string(nd.verdict) == want,
                                        std::string("verdict ") + to_string(nd.verdict) + ", expected " + want));
        break;
      }
      case Mode::Continue: {
        const Branch br = continue_branch(p, built.x0, c.lambda0, c.lambda1, c.policy, c.solver);
        rep.branch = br;
        double max_a = 0.0, max_res = 0.0;
        for (const BranchSample& s : br.samples) {
          max_a = std::max(max_a, s.multipliers.size() ? s.multipliers.lpNorm<Eigen::Infinity>() : 0.0);
          max_res = std::max(max_res, s.residual);
        }
        rep.doc["branch"] = {{"status", to_string(br.status)},
                             {"message", br.message},
                             {"samples", br.samples.size()},
                             {"effective_rank", br.slice.effective_rank()},
                             {"rank_warning", br.slice.rank_warning},
                             {"max_abs_multiplier", max_a},
                             {"final_lambda", br.samples.empty() ? c.lambda0 : br.samples.back().lambda}};
        rep.doc["nondegeneracy"] = nondegeneracy_json(br.slice.report);
        const std::string want = c.expect_status.value_or("completed");
        rep.checks.push_back(make_check("status", 0.0, 0.0, want == to_string(br.status),
                                        std::string("status ") + to_string(br.status) + ", expected " + want));
        rep.checks.push_back(at_most("max_residual", max_res, c.solver.residual_tol));
        if (want == "obstructed") {
          rep.checks.push_back(make_check("obstruction_multiplier", max_a, c.policy.multiplier_tol,
                                          max_a > c.policy.multiplier_tol, "nonzero multiplier expected"));
        } else {
          rep.checks.push_back(at_most("max_multiplier", max_a, c.policy.multiplier_tol));
        }
        break;
      }
      case Mode::Verify: {
        rep.checks.push_back(at_most("initial_gradient", g0, c.policy.critical_tol));
        const Grid grid = grid_for(c);
        const double scale = c.kind == "harmonic" ? 0.01 : 0.05;
        double worst_grad = 0.0, worst_eq = 0.0;
        for (int t = 0; t < c.trials; ++t) {
          const Vec x = built.x0 + smooth_random(grid, built.grid_dim, built.components, scale, rng);
          const Vec v = smooth_random(grid, built.grid_dim, built.components, 1.0, rng);
          worst_grad = std::max(worst_grad, gradient_consistency(p, x, v, c.lambda0));
          worst_eq = std::max(worst_eq, equivariance_residual(p, x, c.lambda0));
        }
        rep.checks.push_back(at_most("gradient_consistency", worst_grad, 1e-5));
        rep.checks.push_back(at_most("equivariance_residual", worst_eq, 1e-8));
        extra_checks(c, built, rng, rep.checks);
        break;
      }
      case Mode::Project: {
        const SliceBasis slice = build_slice(p, built.x0, c.lambda0, c.solver);
        double worst_res = 0.0, worst_inv = 0.0;
        int applied = 0;
        for (int t = 0; t < c.trials; ++t) {
          Vec g = random_element(p.group.dim, c.radius, rng);
          if (p.group.abelian && slice.effective_rank() < p.group.dim) {
            // redundant generators act like selected ones, so only elements
            // along the selected generators have a unique inverse on the slice
            Vec kept = Vec::Zero(p.group.dim);
            for (Index gen : slice.generators) kept[gen] = g[gen];
            g = kept;
          }
          const std::optional<Vec> y = p.group.local_action(g, built.x0);
          if (!y) continue;
          ++applied;
          const ProjectionResult pr = slice_project(p, *y, slice, c.solver);
          worst_res = std::max(worst_res, pr.residual);
          if (p.group.abelian)
            for (Index gen : slice.generators) worst_inv = std::max(worst_inv, std::abs(pr.g[gen] + g[gen]));
        }
        rep.doc["projection"] = {{"applied", applied},
                                 {"effective_rank", slice.effective_rank()},
                                 {"abelian", p.group.abelian}};
        rep.checks.push_back(make_check("elements_applied", applied, 1.0, applied > 0));
        rep.checks.push_back(at_most("projection_residual", worst_res, 1e-8));
        if (p.group.abelian) rep.checks.push_back(at_most("inverse_recovery", worst_inv, 1e-6));
        if (slice.effective_rank() == 1) {
          const int deg = winding_degree(p, built.x0, slice, c.radius);
          rep.doc["projection"]["winding_degree"] = deg;
          rep.checks.push_back(make_check("winding_degree", deg, 1.0, std::abs(deg) == 1));
        }
        break;
      }
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigInvalid) throw;
    rep.error_kind = to_string(e.kind());
    rep.doc["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
    if (c.expect_error) {
      rep.checks.push_back(make_check("expected_error", 0.0, 0.0, *c.expect_error == to_string(e.kind()),
                                      std::string("raised ") + to_string(e.kind()) + ", expected " + *c.expect_error));
      rep.error_kind.reset();
    }
  }
  if (c.expect_error && !rep.doc.contains("error") && mode == Mode::Continue)
    rep.checks.push_back(make_check("expected_error", 0.0, 0.0, false, "expected " + *c.expect_error + ", none raised"));

  json checks = json::array();
  for (const Check& ch : rep.checks) checks.push_back(to_json(ch));
  rep.doc["checks"] = checks;
  rep.doc["pass"] = rep.pass() && !rep.error_kind;
  return rep;
}

void write_outputs(const RunReport& report, const std::string& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw Error(ErrorKind::ConfigInvalid, "cannot create output directory '" + directory + "'");
  {
    std::ofstream out(fs::path(directory) / "report.json");
    out << report.doc.dump(2) << "\n";
  }
  if (!report.branch) return;
  std::ofstream table(fs::path(directory) / "branch.csv");
  table << "lambda,checksum,max_abs_a,residual,kernel_dim\n";
  std::ofstream states(fs::path(directory) / "states.csv");
  for (const BranchSample& s : report.branch->samples) {
    const double a = s.multipliers.size() ? s.multipliers.lpNorm<Eigen::Infinity>() : 0.0;
    table << fmt(s.lambda) << "," << fmt(state_checksum(s.x)) << "," << fmt(a) << "," << fmt(s.residual) << ","
          << s.kernel_dim << "\n";
    states << fmt(s.lambda);
    for (Index i = 0; i < s.x.size(); ++i) states << "," << fmt(s.x[i]);
    states << "\n";
  }
}

int exit_code(const RunReport& report) {
  if (report.error_kind) return 3;
  return report.pass() ? 0 : 1;
}

}  // namespace eqc::harness
