#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>

#include <omp.h>

#include <CLI11.hpp>

#include "twistbeam/config.hpp"
#include "twistbeam/errors.hpp"
#include "twistbeam/io.hpp"

namespace fs = std::filesystem;
using namespace twistbeam;
using io::json;

namespace {

struct VerificationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Context {
  config::RunConfig cfg;
  fs::path out;
  io::Format format = io::Format::csv;
  std::string command;

  fs::path table(const std::string& stem) const { return out / (stem + io::extension(format)); }
  void sidecar(const fs::path& p) const { io::write_sidecar(p, cfg.raw, command, cfg.tolerances()); }
};

std::string snapshot_tag(std::size_t k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "z%03zu", k);
  return buf;
}

void cmd_field(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto nf = cfg.normalized();
  const auto zs = cfg.z.grid();
  const auto path = ctx.table("field");
  io::TableWriter w(path, {"z", "B_z", "Omega"}, ctx.format);
  double peak_z = zs.front(), peak = -1.0;
  for (double z : zs) {
    const double b = cfg.profile.bz(z);
    w.row({z, b, nf.omega(z / nf.z_scale)});
    if (std::abs(b) > peak) {
      peak = std::abs(b);
      peak_z = z;
    }
  }
  w.close();
  ctx.sidecar(path);
  json s;
  s["kind"] = fields::to_string(cfg.profile.kind());
  s["b_max"] = nf.b_max;
  s["z_peak"] = peak_z;
  s["rho_h"] = nf.free_space ? json(nullptr) : json(nf.rho_h);
  s["z_scale"] = nf.z_scale;
  s["samples"] = zs.size();
  const auto sp = ctx.out / "field_summary.json";
  io::write_json(sp, s);
  ctx.sidecar(sp);
}

envelope::EnvelopeSolution solve_envelope(const config::RunConfig& cfg, const fields::NormalizedField& nf) {
  return envelope::solve_ermakov(nf.omega, cfg.beam.b0, cfg.beam.b0_prime, cfg.z.start / nf.z_scale,
                                 cfg.z.end / nf.z_scale, cfg.envelope);
}

void cmd_envelope(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto nf = cfg.normalized();
  const auto env = solve_envelope(cfg, nf);
  const auto path = ctx.table("envelope");
  io::TableWriter w(path, {"z", "b", "b_prime", "phase_advance", "phi_plus", "phi_minus"}, ctx.format);
  double bmin = INFINITY, bmax = 0.0;
  for (double z : cfg.z.grid()) {
    const double zn = z / nf.z_scale;
    const auto p = env.at(zn);
    const auto a = envelope::rotation_angles(env, cfg.beam.charge_sign, zn);
    w.row({z, p.b, p.b_prime, p.phase_advance, a.plus, a.minus});
    bmin = std::min(bmin, p.b);
    bmax = std::max(bmax, p.b);
  }
  w.close();
  ctx.sidecar(path);
  const auto diag = envelope::ep_invariant(env, nf.omega);
  const auto end = env.at(env.z_end());
  json s;
  s["ep_max_abs_residual"] = diag.max_abs_residual;
  s["b_min"] = bmin;
  s["b_max"] = bmax;
  s["phase_advance_end"] = end.phase_advance;
  s["larmor_end"] = cfg.beam.charge_sign * end.omega_integral;
  s["nodes"] = env.nodes().size();
  if (end.phase_advance >= std::numbers::pi) s["z_phase_advance_pi"] = env.z_at_phase_advance(std::numbers::pi) * nf.z_scale;
  const auto sp = ctx.out / "envelope_summary.json";
  io::write_json(sp, s);
  ctx.sidecar(sp);
}

ModeSpectrum spectrum_for(const config::RunConfig& cfg) {
  decomposition::DecomposeOptions opts;
  opts.convention = cfg.convention();
  opts.quad = cfg.quadrature;
  return decomposition::decompose(cfg.initial_state(), cfg.truncation, opts);
}

void warn(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << json{{"status", "warning"}, {"message", w}}.dump() << '\n';
}

void cmd_coeffs(const Context& ctx) {
  const auto spec = spectrum_for(ctx.cfg);
  warn(spec.warnings);
  const auto path = ctx.table("spectrum");
  const auto meta = ctx.out / "spectrum.meta.json";
  io::write_spectrum(path, meta, spec, ctx.format);
  ctx.sidecar(path);
  ctx.sidecar(meta);
}

void write_cartesian(const fs::path& path, const ModeSpectrum& spec, const envelope::EnvelopeSolution& env, int charge,
                     double zn, int points, double half_width, io::Format format) {
  std::vector<std::pair<double, double>> pts;
  std::vector<std::pair<double, double>> xy;
  pts.reserve(static_cast<std::size_t>(points) * points);
  for (int iy = 0; iy < points; ++iy)
    for (int ix = 0; ix < points; ++ix) {
      const double x = -half_width + 2.0 * half_width * ix / (points - 1);
      const double y = -half_width + 2.0 * half_width * iy / (points - 1);
      xy.emplace_back(x, y);
      pts.emplace_back(std::hypot(x, y), std::atan2(y, x));
    }
  const auto v = propagation::evaluate_points(spec, env, charge, zn, pts);
  io::TableWriter w(path, {"x", "y", "intensity"}, format);
  for (std::size_t k = 0; k < v.size(); ++k) w.row({xy[k].first, xy[k].second, std::norm(v[k])});
  w.close();
}

void cmd_propagate(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto nf = cfg.normalized();
  const auto spec = spectrum_for(cfg);
  warn(spec.warnings);
  const auto env = solve_envelope(cfg, nf);
  const auto parts = propagation::component_split(spec);
  json obs = json::array();
  double norm_drift = 0.0, lz_drift = 0.0;
  double norm0 = NAN, lz0 = NAN;
  for (std::size_t k = 0; k < cfg.z.snapshots.size(); ++k) {
    const double z = cfg.z.snapshots[k];
    const double zn = z / nf.z_scale;
    const auto res = propagation::synthesize(spec, env, cfg.beam.charge_sign, zn, cfg.grid);
    const auto tag = snapshot_tag(k);
    const auto polar = ctx.table("polar_" + tag);
    io::write_polar(polar, res.total, ctx.format);
    ctx.sidecar(polar);
    if (cfg.cartesian.enabled) {
      const double hw = cfg.cartesian.half_width > 0.0 ? cfg.cartesian.half_width : res.total.rho.back();
      const std::pair<const char*, const ModeSpectrum*> sets[] = {
          {"intensity_", &spec}, {"intensity_plus_", &parts.plus}, {"intensity_minus_", &parts.minus}, {"intensity_zero_", &parts.zero}};
      for (const auto& [stem, s] : sets) {
        if (s->entries.empty()) continue;
        const auto p = ctx.table(stem + tag);
        write_cartesian(p, *s, env, cfg.beam.charge_sign, zn, cfg.cartesian.points, hw, ctx.format);
        ctx.sidecar(p);
      }
    }
    const auto r = propagation::resolution(res.total);
    const auto& o = res.observables;
    if (k == 0) {
      norm0 = o.norm;
      lz0 = o.mean_lz;
    }
    norm_drift = std::max(norm_drift, std::abs(o.norm - norm0));
    lz_drift = std::max(lz_drift, std::abs(o.mean_lz - lz0));
    obs.push_back({{"z", z},
                   {"tag", tag},
                   {"norm", o.norm},
                   {"captured_norm", spec.captured_norm},
                   {"mean_lz", o.mean_lz},
                   {"mean_rho2", o.mean_rho2},
                   {"gouy_phase", o.gouy_phase},
                   {"b", res.envelope.b},
                   {"phase_advance", res.envelope.phase_advance},
                   {"larmor", res.angles.larmor},
                   {"phi_plus", res.angles.plus},
                   {"phi_minus", res.angles.minus},
                   {"edge_fraction", r.edge_fraction},
                   {"angular_tail_fraction", r.angular_tail_fraction}});
  }
  json doc{{"snapshots", obs}, {"norm_drift", norm_drift}, {"mean_lz_drift", lz_drift}, {"deficit", spec.deficit()}};
  const auto p = ctx.out / "observables.json";
  io::write_json(p, doc);
  ctx.sidecar(p);
}

void cmd_verify(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto nf = cfg.normalized();
  const auto spec = spectrum_for(cfg);
  const auto env = solve_envelope(cfg, nf);
  const auto& b = cfg.beam;
  const auto psi0 = b.state == config::StateKind::pure ? oracle::lg_state(b.n_a, b.l_a, b.omega0, b.b0, b.b0_prime)
                                                       : oracle::half_blocked_state(b.n_a, b.l_a, b.omega0, b.b0, b.b0_prime);
  std::vector<double> zn;
  for (double z : cfg.z.snapshots) zn.push_back(z / nf.z_scale);
  const auto orc = oracle::oracle_propagate(psi0, nf.omega, b.charge_sign, cfg.z.start / nf.z_scale, zn, cfg.verify.oracle);

  const double relative_deficit = spec.source_norm > 0.0 ? std::max(0.0, spec.deficit()) / spec.source_norm : 0.0;
  const double tol = cfg.verify.tolerance.value_or(b.state == config::StateKind::pure ? 1e-4 : std::sqrt(relative_deficit) + 5e-3);
  json rows = json::array();
  bool pass = true;
  for (std::size_t k = 0; k < zn.size(); ++k) {
    const auto& g = orc.snapshots[k];
    propagation::GridSpec gs;
    gs.rho = g.rho;
    gs.rho_weight = g.rho_weight;
    gs.n_phi = static_cast<int>(g.n_phi());
    const auto res = propagation::synthesize(spec, env, b.charge_sign, zn[k], gs);
    const double d = oracle::l2_distance(res.total, g);
    pass = pass && d <= tol;
    rows.push_back({{"z", cfg.z.snapshots[k]}, {"distance", d}, {"oracle_norm", g.norm()}, {"analytic_norm", res.total.norm()}});
  }
  json doc{{"snapshots", rows},
           {"tolerance", tol},
           {"pass", pass},
           {"relative_deficit", relative_deficit},
           {"boundary_amplitude", orc.boundary_amplitude},
           {"level_norm_drift", orc.level_norm_drift}};
  const auto p = ctx.out / "verify.json";
  io::write_json(p, doc);
  ctx.sidecar(p);
  if (!pass) throw VerificationFailure("oracle and analytic solutions differ beyond tolerance " + io::format_double(tol));
}

int diagnose(const std::string& kind, int code, const std::string& command, const std::string& message) {
  std::cerr << json{{"status", "error"}, {"kind", kind}, {"exit_code", code}, {"command", command}, {"message", message}}.dump()
            << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twisted electron states in axially symmetric magnetic fields"};
  std::string config_path, out_dir, format = "csv";
  int threads = 0;
  app.add_option("--config", config_path, "Run configuration (JSON)")->required();
  app.add_option("--out", out_dir, "Output directory (overrides output.directory)");
  app.add_option("--threads", threads, "Upper bound on worker threads")->check(CLI::NonNegativeNumber);
  app.add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "jsonl"}));
  app.require_subcommand(1, 1);
  for (const char* name : {"field", "envelope", "coeffs", "propagate", "verify"}) app.add_subcommand(name);
  app.get_subcommand("field")->description("B_z and Omega over the z schedule");
  app.get_subcommand("envelope")->description("Envelope, phase advance and rotation angles");
  app.get_subcommand("coeffs")->description("Mode spectrum of the initial state");
  app.get_subcommand("propagate")->description("Intensity and observables at the snapshots");
  app.get_subcommand("verify")->description("Compare against the direct PDE solver");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return diagnose("config", 2, "", e.what());
  }

  Context ctx;
  ctx.command = app.get_subcommands().front()->get_name();
  try {
    if (threads > 0) omp_set_num_threads(threads);
    ctx.format = io::parse_format(format);
    ctx.cfg = config::load_config(config_path);
    ctx.out = out_dir.empty() ? fs::path(ctx.cfg.output_directory) : fs::path(out_dir);
    fs::create_directories(ctx.out);
    if (ctx.command == "field") cmd_field(ctx);
    else if (ctx.command == "envelope") cmd_envelope(ctx);
    else if (ctx.command == "coeffs") cmd_coeffs(ctx);
    else if (ctx.command == "propagate") cmd_propagate(ctx);
    else cmd_verify(ctx);
  } catch (const ConfigError& e) {
    return diagnose("config", 2, ctx.command, e.what());
  } catch (const NumericalError& e) {
    return diagnose("numerical", 3, ctx.command, e.what());
  } catch (const VerificationFailure& e) {
    return diagnose("verification", 4, ctx.command, e.what());
  } catch (const fs::filesystem_error& e) {
    return diagnose("config", 2, ctx.command, e.what());
  } catch (const std::exception& e) {
    return diagnose("numerical", 3, ctx.command, e.what());
  }
  return 0;
}
