#include "twistbeam/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "twistbeam/errors.hpp"

namespace twistbeam::config {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError("schema: " + path + ": " + msg);
}

void only_keys(const json& obj, const std::string& path, std::set<std::string> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) fail(path + "/" + k, "unknown property");
}

const json& need(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.contains(key)) fail(path, "missing required property '" + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "expected a finite number");
  return x;
}

double positive(const json& v, const std::string& path) {
  const double x = number(v, path);
  if (!(x > 0.0)) fail(path, "must be positive");
  return x;
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

int at_least(const json& v, const std::string& path, int lo) {
  const int x = integer(v, path);
  if (x < lo) fail(path, "must be >= " + std::to_string(lo));
  return x;
}

template <typename F>
void optional_field(const json& obj, const std::string& path, const std::string& key, F&& apply) {
  if (obj.contains(key)) apply(obj.at(key), path + "/" + key);
}

std::vector<std::array<double, 3>> triples(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of [z0, R, I]");
  std::vector<std::array<double, 3>> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::string p = path + "/" + std::to_string(k);
    if (!v[k].is_array() || v[k].size() != 3) fail(p, "expected [z0, R, I]");
    out.push_back({number(v[k][0], p + "/0"), number(v[k][1], p + "/1"), number(v[k][2], p + "/2")});
  }
  return out;
}

fields::FieldProfile parse_field(const json& f, const std::string& path) {
  if (!f.is_object()) fail(path, "expected an object");
  const json& kind = need(f, path, "kind");
  if (!kind.is_string()) fail(path + "/kind", "expected a string");
  const std::string k = kind.get<std::string>();
  if (k == "glaser") {
    only_keys(f, path, {"kind", "parameters"});
    const std::string pp = path + "/parameters";
    const json& p = need(f, path, "parameters");
    only_keys(p, pp, {"B0", "a", "c"});
    const double B0 = p.contains("B0") ? number(p.at("B0"), pp + "/B0") : 1.0;
    if (B0 == 0.0) fail(pp + "/B0", "must be nonzero");
    return fields::FieldProfile::glaser(B0, positive(need(p, pp, "a"), pp + "/a"), number(need(p, pp, "c"), pp + "/c"));
  }
  if (k == "tabulated") {
    only_keys(f, path, {"kind", "table"});
    const json& t = need(f, path, "table");
    if (!t.is_array() || t.size() < 4) fail(path + "/table", "expected at least four [z, B_z] rows");
    std::vector<double> z, b;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::string p = path + "/table/" + std::to_string(i);
      if (!t[i].is_array() || t[i].size() != 2) fail(p, "expected [z, B_z]");
      z.push_back(number(t[i][0], p + "/0"));
      b.push_back(number(t[i][1], p + "/1"));
    }
    return fields::FieldProfile::tabulated(std::move(z), std::move(b));
  }
  if (k == "synthesized") {
    only_keys(f, path, {"kind", "geometry", "samples"});
    const std::string gp = path + "/geometry";
    const json& g = need(f, path, "geometry");
    only_keys(g, gp, {"windings", "loops", "z_min", "z_max", "quadrature_order"});
    fields::SolenoidGeometry geom;
    if (g.contains("windings")) {
      std::vector<fields::SheetSample> sheet;
      for (const auto& t : triples(g.at("windings"), gp + "/windings")) sheet.push_back({t[0], t[1], t[2]});
      if (!sheet.empty()) geom.sheets.push_back(std::move(sheet));
    }
    if (g.contains("loops"))
      for (const auto& t : triples(g.at("loops"), gp + "/loops")) geom.loops.push_back({t[0], t[1], t[2]});
    if (geom.sheets.empty() && geom.loops.empty()) fail(gp, "needs windings or loops");
    if (!geom.sheets.empty()) {
      geom.z_min = geom.sheets[0].front().z0;
      geom.z_max = geom.sheets[0].back().z0;
    }
    optional_field(g, gp, "z_min", [&](const json& v, const std::string& p) { geom.z_min = number(v, p); });
    optional_field(g, gp, "z_max", [&](const json& v, const std::string& p) { geom.z_max = number(v, p); });
    optional_field(g, gp, "quadrature_order", [&](const json& v, const std::string& p) { geom.quadrature_order = integer(v, p); });
    const std::string sp = path + "/samples";
    const json& s = need(f, path, "samples");
    only_keys(s, sp, {"start", "end", "count"});
    const double a = number(need(s, sp, "start"), sp + "/start");
    const double b = number(need(s, sp, "end"), sp + "/end");
    const int n = at_least(need(s, sp, "count"), sp + "/count", 4);
    if (!(b > a)) fail(sp, "end must exceed start");
    std::vector<double> zs(n);
    for (int i = 0; i < n; ++i) zs[i] = a + (b - a) * i / (n - 1);
    return fields::FieldProfile::synthesized(geom, zs);
  }
  if (k == "free_space") {
    only_keys(f, path, {"kind"});
    return fields::FieldProfile::free_space();
  }
  fail(path + "/kind", "must be one of glaser, tabulated, synthesized, free_space");
}

}  // namespace

std::vector<double> ZSchedule::grid() const {
  std::vector<double> z(samples);
  if (samples == 1) return {start};
  for (int i = 0; i < samples; ++i) z[i] = start + (end - start) * i / (samples - 1);
  z.back() = end;
  return z;
}

fields::NormalizedField RunConfig::normalized() const { return fields::normalize(profile, units); }

decomposition::InitialState RunConfig::initial_state() const {
  decomposition::InitialState s;
  if (beam.state == StateKind::pure)
    s.shape = decomposition::PureState{beam.n_a, beam.l_a};
  else
    s.shape = decomposition::HalfBlockedState{beam.n_a, beam.l_a};
  s.b0 = beam.b0;
  s.b0_prime = beam.b0_prime;
  return s;
}

json RunConfig::tolerances() const {
  json t;
  t["envelope"] = {{"abs_tol", envelope.abs_tol}, {"rel_tol", envelope.rel_tol}, {"dense_tol", envelope.dense_tol},
                     {"max_step", envelope.max_step}};
  t["quadrature"] = {{"radial_order", quadrature.radial_order},
                     {"angular_order", quadrature.angular_order},
                     {"convergence_tol", quadrature.convergence_tol}};
  t["oracle"] = {{"rho_max", verify.oracle.rho_max},
                 {"n_rho", verify.oracle.n_rho},
                 {"dz", verify.oracle.dz},
                 {"richardson_levels", verify.oracle.richardson_levels},
                 {"radial_stretch", verify.oracle.radial_stretch},
                 {"moving_frame", verify.oracle.moving_frame},
                 {"boundary_tol", verify.oracle.boundary_tol}};
  if (verify.tolerance) t["verify_tolerance"] = *verify.tolerance;
  return t;
}

RunConfig parse_config(const json& doc) {
  RunConfig rc;
  rc.raw = doc;
  const std::string root = "";
  only_keys(doc, "/", {"field", "units", "beam", "truncation", "z", "grid", "envelope", "quadrature", "verify", "output"});

  rc.profile = parse_field(need(doc, "/", "field"), "/field");

  optional_field(doc, root, "units", [&](const json& u, const std::string& p) {
    only_keys(u, p, {"wavenumber", "charge"});
    optional_field(u, p, "wavenumber", [&](const json& v, const std::string& q) { rc.units.wavenumber = positive(v, q); });
    optional_field(u, p, "charge", [&](const json& v, const std::string& q) { rc.units.charge = positive(v, q); });
  });

  {
    const std::string p = "/beam";
    const json& b = need(doc, "/", "beam");
    only_keys(b, p, {"state", "n_a", "l_a", "b0", "b0_prime", "charge_sign", "omega0"});
    const json& st = need(b, p, "state");
    if (!st.is_string()) fail(p + "/state", "expected a string");
    if (st == "pure")
      rc.beam.state = StateKind::pure;
    else if (st == "half_blocked")
      rc.beam.state = StateKind::half_blocked;
    else
      fail(p + "/state", "must be pure or half_blocked");
    optional_field(b, p, "n_a", [&](const json& v, const std::string& q) { rc.beam.n_a = at_least(v, q, 0); });
    rc.beam.l_a = integer(need(b, p, "l_a"), p + "/l_a");
    optional_field(b, p, "b0", [&](const json& v, const std::string& q) { rc.beam.b0 = positive(v, q); });
    optional_field(b, p, "b0_prime", [&](const json& v, const std::string& q) { rc.beam.b0_prime = number(v, q); });
    optional_field(b, p, "omega0", [&](const json& v, const std::string& q) { rc.beam.omega0 = positive(v, q); });
    rc.beam.charge_sign = integer(need(b, p, "charge_sign"), p + "/charge_sign");
    if (rc.beam.charge_sign != 1 && rc.beam.charge_sign != -1) fail(p + "/charge_sign", "must be +1 or -1");
  }

  rc.truncation = Truncation::around(rc.beam.l_a);
  optional_field(doc, root, "truncation", [&](const json& t, const std::string& p) {
    only_keys(t, p, {"n_max", "l_min", "l_max"});
    optional_field(t, p, "n_max", [&](const json& v, const std::string& q) { rc.truncation.n_max = at_least(v, q, 0); });
    optional_field(t, p, "l_min", [&](const json& v, const std::string& q) { rc.truncation.l_min = integer(v, q); });
    optional_field(t, p, "l_max", [&](const json& v, const std::string& q) { rc.truncation.l_max = integer(v, q); });
    if (rc.truncation.l_max < rc.truncation.l_min) fail(p, "l_max must be >= l_min");
  });

  {
    const std::string p = "/z";
    const json& z = need(doc, "/", "z");
    only_keys(z, p, {"start", "end", "samples", "snapshots"});
    rc.z.start = number(need(z, p, "start"), p + "/start");
    rc.z.end = number(need(z, p, "end"), p + "/end");
    if (!(rc.z.end > rc.z.start)) fail(p, "end must exceed start");
    optional_field(z, p, "samples", [&](const json& v, const std::string& q) { rc.z.samples = at_least(v, q, 2); });
    optional_field(z, p, "snapshots", [&](const json& v, const std::string& q) {
      if (!v.is_array() || v.empty()) fail(q, "expected a non-empty array");
      for (std::size_t k = 0; k < v.size(); ++k) {
        const double s = number(v[k], q + "/" + std::to_string(k));
        if (s <= rc.z.start || s > rc.z.end) fail(q + "/" + std::to_string(k), "must lie in (start, end]");
        if (!rc.z.snapshots.empty() && s <= rc.z.snapshots.back()) fail(q, "must be strictly increasing");
        rc.z.snapshots.push_back(s);
      }
    });
    if (rc.z.snapshots.empty()) rc.z.snapshots = {rc.z.end};
  }

  optional_field(doc, root, "grid", [&](const json& g, const std::string& p) {
    only_keys(g, p, {"n_rho", "n_phi", "extent_factor", "cartesian"});
    optional_field(g, p, "n_rho", [&](const json& v, const std::string& q) { rc.grid.n_rho = at_least(v, q, 2); });
    optional_field(g, p, "n_phi", [&](const json& v, const std::string& q) { rc.grid.n_phi = at_least(v, q, 4); });
    optional_field(g, p, "extent_factor", [&](const json& v, const std::string& q) { rc.grid.extent_factor = positive(v, q); });
    optional_field(g, p, "cartesian", [&](const json& c, const std::string& q) {
      only_keys(c, q, {"enabled", "points", "half_width"});
      optional_field(c, q, "enabled", [&](const json& v, const std::string& r) {
        if (!v.is_boolean()) fail(r, "expected a boolean");
        rc.cartesian.enabled = v.get<bool>();
      });
      optional_field(c, q, "points", [&](const json& v, const std::string& r) { rc.cartesian.points = at_least(v, r, 2); });
      optional_field(c, q, "half_width", [&](const json& v, const std::string& r) { rc.cartesian.half_width = positive(v, r); });
    });
  });

  optional_field(doc, root, "envelope", [&](const json& e, const std::string& p) {
    only_keys(e, p, {"abs_tol", "rel_tol", "dense_tol", "initial_step", "max_step", "collapse_threshold"});
    optional_field(e, p, "abs_tol", [&](const json& v, const std::string& q) { rc.envelope.abs_tol = positive(v, q); });
    optional_field(e, p, "rel_tol", [&](const json& v, const std::string& q) { rc.envelope.rel_tol = positive(v, q); });
    optional_field(e, p, "dense_tol", [&](const json& v, const std::string& q) { rc.envelope.dense_tol = positive(v, q); });
    optional_field(e, p, "initial_step", [&](const json& v, const std::string& q) { rc.envelope.initial_step = positive(v, q); });
    optional_field(e, p, "max_step", [&](const json& v, const std::string& q) { rc.envelope.max_step = positive(v, q); });
    optional_field(e, p, "collapse_threshold",
                   [&](const json& v, const std::string& q) { rc.envelope.collapse_threshold = positive(v, q); });
  });
  rc.envelope.reference_frequency = rc.beam.omega0;

  optional_field(doc, root, "quadrature", [&](const json& e, const std::string& p) {
    only_keys(e, p, {"radial_order", "angular_order", "convergence_tol"});
    optional_field(e, p, "radial_order", [&](const json& v, const std::string& q) { rc.quadrature.radial_order = at_least(v, q, 8); });
    optional_field(e, p, "angular_order", [&](const json& v, const std::string& q) { rc.quadrature.angular_order = at_least(v, q, 8); });
    optional_field(e, p, "convergence_tol",
                   [&](const json& v, const std::string& q) { rc.quadrature.convergence_tol = positive(v, q); });
  });

  auto& oc = rc.verify.oracle;
  oc.l_min = rc.truncation.l_min;
  oc.l_max = rc.truncation.l_max;
  oc.frame_frequency = rc.beam.omega0;
  if (rc.beam.state == StateKind::half_blocked) {
    oc.angular_breakpoints = {0.0, std::numbers::pi};
    oc.richardson_levels = 1;
    oc.boundary_tol = 5e-2;
  }
  optional_field(doc, root, "verify", [&](const json& e, const std::string& p) {
    only_keys(e, p, {"rho_max", "n_rho", "dz", "richardson_levels", "angular_order", "n_phi", "boundary_tol", "l_min",
                     "l_max", "tolerance", "radial_stretch", "min_step_ratio", "max_step_ratio", "moving_frame",
                     "frame_width", "frame_slope", "frame_frequency"});
    optional_field(e, p, "rho_max", [&](const json& v, const std::string& q) { oc.rho_max = positive(v, q); });
    optional_field(e, p, "n_rho", [&](const json& v, const std::string& q) { oc.n_rho = at_least(v, q, 8); });
    optional_field(e, p, "dz", [&](const json& v, const std::string& q) { oc.dz = positive(v, q); });
    optional_field(e, p, "richardson_levels", [&](const json& v, const std::string& q) { oc.richardson_levels = at_least(v, q, 1); });
    optional_field(e, p, "angular_order", [&](const json& v, const std::string& q) { oc.angular_order = at_least(v, q, 2); });
    optional_field(e, p, "n_phi", [&](const json& v, const std::string& q) { oc.n_phi = at_least(v, q, 4); });
    optional_field(e, p, "boundary_tol", [&](const json& v, const std::string& q) { oc.boundary_tol = positive(v, q); });
    optional_field(e, p, "l_min", [&](const json& v, const std::string& q) { oc.l_min = integer(v, q); });
    optional_field(e, p, "l_max", [&](const json& v, const std::string& q) { oc.l_max = integer(v, q); });
    optional_field(e, p, "tolerance", [&](const json& v, const std::string& q) { rc.verify.tolerance = positive(v, q); });
    optional_field(e, p, "radial_stretch", [&](const json& v, const std::string& q) {
      oc.radial_stretch = number(v, q);
      if (oc.radial_stretch < 0.0) fail(q, "must be non-negative");
    });
    optional_field(e, p, "min_step_ratio", [&](const json& v, const std::string& q) { oc.min_step_ratio = positive(v, q); });
    optional_field(e, p, "max_step_ratio", [&](const json& v, const std::string& q) { oc.max_step_ratio = positive(v, q); });
    optional_field(e, p, "moving_frame", [&](const json& v, const std::string& q) {
      if (!v.is_boolean()) fail(q, "expected a boolean");
      oc.moving_frame = v.get<bool>();
    });
    optional_field(e, p, "frame_width", [&](const json& v, const std::string& q) { oc.frame_width = positive(v, q); });
    optional_field(e, p, "frame_slope", [&](const json& v, const std::string& q) { oc.frame_slope = number(v, q); });
    optional_field(e, p, "frame_frequency", [&](const json& v, const std::string& q) { oc.frame_frequency = positive(v, q); });
  });
  oc.validate();

  optional_field(doc, root, "output", [&](const json& o, const std::string& p) {
    only_keys(o, p, {"directory"});
    optional_field(o, p, "directory", [&](const json& v, const std::string& q) {
      if (!v.is_string() || v.get<std::string>().empty()) fail(q, "expected a non-empty string");
      rc.output_directory = v.get<std::string>();
    });
  });
  return rc;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

}  // namespace twistbeam::config
