#include "twistbeam/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "twistbeam/errors.hpp"
#include "twistbeam/special.hpp"

namespace twistbeam::oracle {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct AngularRule {
  std::vector<double> phi;
  std::vector<double> weight;  // sums to 2 pi
};

AngularRule angular_rule(const OracleConfig& cfg) {
  AngularRule r;
  std::vector<double> cuts;
  for (double b : cfg.angular_breakpoints) {
    double p = std::fmod(b, kTwoPi);
    if (p < 0.0) p += kTwoPi;
    cuts.push_back(p);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }),
             cuts.end());
  if (cuts.empty()) {
    const int m = std::max(2 * cfg.angular_order, 4 * (std::max(std::abs(cfg.l_min), std::abs(cfg.l_max)) + 1));
    for (int j = 0; j < m; ++j) {
      r.phi.push_back(kTwoPi * j / m);
      r.weight.push_back(kTwoPi / m);
    }
    return r;
  }
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = k + 1 < cuts.size() ? cuts[k + 1] : cuts.front() + kTwoPi;
    const QuadratureRule q = gauss_legendre(cfg.angular_order, a, b);
    r.phi.insert(r.phi.end(), q.nodes.begin(), q.nodes.end());
    r.weight.insert(r.weight.end(), q.weights.begin(), q.weights.end());
  }
  return r;
}

// chi_l(xi_j) = (1/2 pi) int chi(xi_j, phi) e^{-i l phi} dphi for every l, where chi is
// psi0 pulled back into the frame at z0.
std::vector<std::vector<Complex>> harmonics(const StateFn& psi0, const OracleConfig& cfg, const RadialMesh& mesh,
                                            const Frame::Point& fr, bool parallel) {
  const AngularRule ar = angular_rule(cfg);
  const int nl = cfg.l_max - cfg.l_min + 1;
  const int na = static_cast<int>(ar.phi.size());
  const int n = static_cast<int>(mesh.size());
  std::vector<Complex> kernel(static_cast<std::size_t>(nl) * na);
  for (int k = 0; k < nl; ++k)
    for (int a = 0; a < na; ++a)
      kernel[static_cast<std::size_t>(k) * na + a] = std::polar(ar.weight[a] / kTwoPi, -(cfg.l_min + k) * ar.phi[a]);
  std::vector<std::vector<Complex>> f(nl, std::vector<Complex>(n));
  auto node = [&](int j) {
    const double rho = fr.s * mesh.rho[j];
    const Complex pull = std::polar(fr.s, -0.5 * fr.ds / fr.s * rho * rho);
    std::vector<Complex> v(na);
    for (int a = 0; a < na; ++a) v[a] = psi0(rho, ar.phi[a]);
    for (int k = 0; k < nl; ++k) {
      Complex acc{};
      const Complex* kr = &kernel[static_cast<std::size_t>(k) * na];
      for (int a = 0; a < na; ++a) acc += kr[a] * v[a];
      f[k][j] = pull * acc;
    }
  };
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j) node(j);
  } else {
    for (int j = 0; j < n; ++j) node(j);
  }
  for (int k = 0; k < nl; ++k)
    if (cfg.l_min + k != 0) f[k][0] = 0.0;
  return f;
}

double max_abs(const std::vector<Complex>& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  return m;
}

double mesh_norm(const std::vector<Complex>& f, const RadialMesh& mesh) {
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) s += mesh.weight[j] * std::norm(f[j]);
  return s;
}

// Midpoint Crank-Nicolson for one frame harmonic: (I + i dz/2 H) f' = (I - i dz/2 H) f with
// H = s^-2 (W^-1 S + l^2 / (2 xi^2)) + (s s'' + Omega^2 s^2) xi^2 / 2 at z + dz/2. The
// rotation term -sign(q) Omega l commutes with H and is applied as an exact phase.
class Stepper {
 public:
  Stepper(const RadialMesh& mesh, int l, int charge_sign) : l_(l), charge_(charge_sign) {
    const int n = static_cast<int>(mesh.size());
    start_ = l == 0 ? 0 : 1;
    m_ = n - start_;
    base_.resize(m_);
    up_.assign(m_, 0.0);
    dn_.assign(m_, 0.0);
    r2_.resize(m_);
    rhs_.resize(m_);
    cp_.resize(m_);
    for (int k = 0; k < m_; ++k) {
      const int j = k + start_;
      const double r = mesh.rho[j];
      const double w = mesh.weight[j];
      const double next = j + 1 < n ? mesh.rho[j + 1] : mesh.rho_max;
      const double right = 0.5 * mesh.face[j] / (next - r);
      const double left = j > 0 ? 0.5 * mesh.face[j - 1] / (r - mesh.rho[j - 1]) : 0.0;
      r2_[k] = 0.5 * r * r;
      base_[k] = (right + left) / w + (j == 0 ? 0.0 : 0.5 * l * l / (r * r));
      if (k + 1 < m_) up_[k] = -right / w;
      if (k > 0) dn_[k] = -left / w;
    }
  }

  int start() const { return start_; }

  // f holds the unknowns only (nodes start..n-1).
  void step(std::vector<Complex>& f, double z, double dz, const OmegaFn& omega, const Frame& frame) {
    const double zm = z + 0.5 * dz;
    const Frame::Point fr = frame.at(zm);
    const double om = omega(zm);
    const double kin = 1.0 / (fr.s * fr.s);
    const double pot = fr.s * fr.d2s + om * om * fr.s * fr.s;
    const double a = 0.5 * dz;
    const Complex half(0.0, a);
    for (int k = 0; k < m_; ++k) {
      Complex hf = (kin * base_[k] + pot * r2_[k]) * f[k];
      if (k + 1 < m_) hf += kin * up_[k] * f[k + 1];
      if (k > 0) hf += kin * dn_[k] * f[k - 1];
      rhs_[k] = f[k] - half * hf;
    }
    // Thomas sweep; the pivots are 1 + i a d_k - (i a dn_k) c_{k-1}.
    for (int k = 0; k < m_; ++k) {
      double dr = 1.0, di = a * (kin * base_[k] + pot * r2_[k]);
      if (k > 0) {
        dr += a * kin * dn_[k] * cp_[k - 1].imag();
        di -= a * kin * dn_[k] * cp_[k - 1].real();
      }
      const double mag = dr * dr + di * di;
      if (!(mag > 0.0)) throw NumericalError("oracle: tridiagonal solve broke down");
      const Complex inv(dr / mag, -di / mag);
      cp_[k] = half * kin * up_[k] * inv;
      rhs_[k] = (k > 0 ? rhs_[k] - half * kin * dn_[k] * rhs_[k - 1] : rhs_[k]) * inv;
    }
    f[m_ - 1] = rhs_[m_ - 1];
    for (int k = m_ - 2; k >= 0; --k) f[k] = rhs_[k] - cp_[k] * f[k + 1];
    if (l_ != 0) {
      // Three-point Gauss-Legendre for the integral of Omega over the step.
      const double c = 0.5 * dz, d = c * std::sqrt(0.6);
      const double integral = c * (5.0 * omega(zm - d) + 8.0 * om + 5.0 * omega(zm + d)) / 9.0;
      const Complex rot = std::polar(1.0, charge_ * l_ * integral);
      for (auto& v : f) v *= rot;
    }
  }

 private:
  int l_, charge_, start_ = 0, m_ = 0;
  std::vector<double> base_, up_, dn_, r2_;
  std::vector<Complex> rhs_, cp_;
};

}  // namespace

Frame::Frame(const std::function<double(double)>& omega, double z0, double z1, const OracleConfig& cfg) {
  const double span = z1 - z0;
  if (!(span > 0.0)) throw ConfigError("oracle: frame needs z1 > z0");
  const double w2 = cfg.frame_frequency * cfg.frame_frequency;
  auto accel = [&](double z, double s) { return cfg.moving_frame ? -omega(z) * omega(z) * s + w2 / (s * s * s) : 0.0; };
  const int n = std::max(16, static_cast<int>(std::ceil(span / 1e-3)));
  const double h = span / n;
  double s = cfg.moving_frame ? cfg.frame_width : 1.0;
  double v = cfg.moving_frame ? cfg.frame_slope : 0.0;
  z_.reserve(n + 1);
  p_.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double z = z0 + span * i / n;
    if (!(s > 0.0) || !std::isfinite(s)) throw NumericalError("oracle: frame scale collapsed");
    z_.push_back(z);
    p_.push_back({s, v, accel(z, s)});
    if (i == n) break;
    const double k1s = v, k1v = accel(z, s);
    const double k2s = v + 0.5 * h * k1v, k2v = accel(z + 0.5 * h, s + 0.5 * h * k1s);
    const double k3s = v + 0.5 * h * k2v, k3v = accel(z + 0.5 * h, s + 0.5 * h * k2s);
    const double k4s = v + h * k3v, k4v = accel(z + h, s + h * k3s);
    s += h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
}

Frame::Point Frame::at(double z) const {
  if (z_.empty()) return {};
  const double tol = 1e-9 * std::max(1.0, std::abs(z_.back()));
  if (z < z_.front() - tol || z > z_.back() + tol) throw ConfigError("oracle: frame evaluated outside its range");
  const auto ub = std::upper_bound(z_.begin(), z_.end(), z) - z_.begin();
  const std::size_t i = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(ub - 1, 0, static_cast<std::ptrdiff_t>(z_.size()) - 2));
  const double h = z_[i + 1] - z_[i];
  const double t = std::clamp((z - z_[i]) / h, 0.0, 1.0);
  const Point& a = p_[i];
  const Point& b = p_[i + 1];
  // Quintic Hermite in t; c[k] multiplies t^k.
  const double y0 = a.s, y1 = b.s, d0 = h * a.ds, d1 = h * b.ds, e0 = h * h * a.d2s, e1 = h * h * b.d2s;
  const double c[6] = {y0,
                       d0,
                       0.5 * e0,
                       10.0 * (y1 - y0) - 6.0 * d0 - 4.0 * d1 - 1.5 * e0 + 0.5 * e1,
                       -15.0 * (y1 - y0) + 8.0 * d0 + 7.0 * d1 + 1.5 * e0 - e1,
                       6.0 * (y1 - y0) - 3.0 * d0 - 3.0 * d1 - 0.5 * e0 + 0.5 * e1};
  Point r;
  r.s = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
  r.ds = (c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * (4.0 * c[4] + t * 5.0 * c[5])))) / h;
  r.d2s = (2.0 * c[2] + t * (6.0 * c[3] + t * (12.0 * c[4] + t * 20.0 * c[5]))) / (h * h);
  return r;
}

RadialMesh make_radial_mesh(int n, double rho_max, double stretch) {
  if (n < 4) throw ConfigError("radial mesh: need at least four nodes");
  if (!(rho_max > 0.0)) throw ConfigError("radial mesh: rho_max must be positive");
  if (!(stretch >= 0.0)) throw ConfigError("radial mesh: stretch must be non-negative");
  auto map = [&](double s) { return stretch > 0.0 ? rho_max * std::sinh(stretch * s) / std::sinh(stretch) : rho_max * s; };
  RadialMesh m;
  m.rho_max = rho_max;
  m.rho.resize(n);
  m.face.resize(n);
  m.weight.resize(n);
  for (int j = 0; j < n; ++j) {
    m.rho[j] = map(static_cast<double>(j) / n);
    m.face[j] = map((j + 0.5) / n);
  }
  m.rho[0] = 0.0;
  for (int j = 0; j < n; ++j) {
    const double lo = j > 0 ? m.face[j - 1] : 0.0;
    m.weight[j] = 0.5 * (m.face[j] * m.face[j] - lo * lo);
  }
  return m;
}

void OracleConfig::validate() const {
  if (l_min > l_max) throw ConfigError("oracle: l_min > l_max");
  if (!(rho_max > 0.0)) throw ConfigError("oracle: rho_max must be positive");
  if (n_rho < 8) throw ConfigError("oracle: n_rho must be at least 8");
  if (!(radial_stretch >= 0.0)) throw ConfigError("oracle: radial_stretch must be non-negative");
  if (!(dz > 0.0)) throw ConfigError("oracle: dz must be positive");
  if (!(min_step_ratio > 0.0) || !(max_step_ratio >= min_step_ratio))
    throw ConfigError("oracle: need 0 < min_step_ratio <= max_step_ratio");
  if (richardson_levels < 1 || richardson_levels > 4) throw ConfigError("oracle: richardson_levels must be in 1..4");
  if (!(frame_width > 0.0) || !std::isfinite(frame_slope) || !(frame_frequency > 0.0))
    throw ConfigError("oracle: frame_width and frame_frequency must be positive");
  if (angular_order < 2) throw ConfigError("oracle: angular_order must be at least 2");
  if (n_phi < 1) throw ConfigError("oracle: n_phi must be positive");
  if (!(boundary_tol > 0.0)) throw ConfigError("oracle: boundary_tol must be positive");
}

std::vector<double> step_schedule(const Frame& frame, double z0, const std::vector<double>& snapshots,
                                  const OracleConfig& cfg) {
  std::vector<double> nodes{z0};
  double z = z0;
  for (double target : snapshots) {
    while (z < target) {
      const double s = frame.at(z).s;
      double dz = cfg.dz * std::clamp(s * s, cfg.min_step_ratio, cfg.max_step_ratio);
      // Land on the snapshot without leaving a sliver.
      if (z + 1.5 * dz >= target) dz = target - z > dz ? 0.5 * (target - z) : target - z;
      z = (z + dz >= target - 1e-15 * std::max(1.0, std::abs(target))) ? target : z + dz;
      nodes.push_back(z);
    }
  }
  return nodes;
}

std::vector<Complex> propagate_harmonic(const std::vector<Complex>& f0, int l, const OmegaFn& omega,
                                        int charge_sign, const Frame& frame, const RadialMesh& mesh,
                                        const std::vector<double>& z_nodes, int subdivide,
                                        std::vector<Complex>* edge_trace, double* norm_drift) {
  if (f0.size() != mesh.size()) throw ConfigError("oracle: profile does not match the mesh");
  if (subdivide < 1) throw ConfigError("oracle: subdivide must be positive");
  Stepper st(mesh, l, charge_sign);
  const int start = st.start();
  std::vector<Complex> f(f0.begin() + start, f0.end());
  std::vector<Complex> full(f0);
  if (start) full[0] = 0.0;
  const double n0 = mesh_norm(full, mesh);
  double drift = 0.0;
  if (edge_trace) {
    edge_trace->clear();
    edge_trace->push_back(f.back());
  }
  for (std::size_t s = 0; s + 1 < z_nodes.size(); ++s) {
    const double za = z_nodes[s];
    const double h = (z_nodes[s + 1] - za) / subdivide;
    for (int q = 0; q < subdivide; ++q) st.step(f, za + q * h, h, omega, frame);
    if (edge_trace) edge_trace->push_back(f.back());
    if (norm_drift && s % 64 == 63) {
      std::copy(f.begin(), f.end(), full.begin() + start);
      drift = std::max(drift, std::abs(mesh_norm(full, mesh) - n0));
    }
  }
  std::copy(f.begin(), f.end(), full.begin() + start);
  drift = std::max(drift, std::abs(mesh_norm(full, mesh) - n0));
  if (norm_drift) *norm_drift = drift;
  return full;
}

OracleResult oracle_propagate(const StateFn& psi0, const OmegaFn& omega, int charge_sign, double z0,
                              const std::vector<double>& snapshots, const OracleConfig& cfg, Execution exec) {
  cfg.validate();
  if (charge_sign != 1 && charge_sign != -1) throw ConfigError("oracle: charge_sign must be +1 or -1");
  if (snapshots.empty()) throw ConfigError("oracle: no snapshot requested");
  for (std::size_t s = 0; s < snapshots.size(); ++s)
    if (!(snapshots[s] > (s == 0 ? z0 : snapshots[s - 1]))) throw ConfigError("oracle: snapshots must increase beyond z0");

  const bool parallel = exec == Execution::parallel;
  const int levels = cfg.richardson_levels;
  const int nl = cfg.l_max - cfg.l_min + 1;
  const int nc = cfg.n_rho;

  const Frame frame(omega, z0, snapshots.back(), cfg);
  std::vector<RadialMesh> meshes;
  std::vector<std::vector<std::vector<Complex>>> init;
  for (int k = 0; k < levels; ++k) {
    meshes.push_back(make_radial_mesh(nc << k, cfg.rho_max, cfg.radial_stretch));
    init.push_back(harmonics(psi0, cfg, meshes.back(), frame.at(z0), parallel));
  }

  OracleResult res;
  res.step_nodes = step_schedule(frame, z0, snapshots, cfg);
  std::vector<std::size_t> seg_end;
  for (double z : snapshots) {
    const auto it = std::find(res.step_nodes.begin(), res.step_nodes.end(), z);
    if (it == res.step_nodes.end()) throw NumericalError("oracle: step schedule misses a snapshot");
    seg_end.push_back(static_cast<std::size_t>(it - res.step_nodes.begin()));
  }

  // coarse[l][snapshot][j]
  std::vector<std::vector<std::vector<Complex>>> coarse(nl);
  std::vector<double> edge(nl, 0.0);
  std::vector<std::vector<double>> drift(nl, std::vector<double>(levels, 0.0));
  std::vector<std::string> failure(nl);

  double peak = 0.0;
  std::vector<double> initial_norm(nl);
  for (int li = 0; li < nl; ++li) peak = std::max(peak, initial_norm[li] = mesh_norm(init[0][li], meshes[0]));
  if (!(peak > 0.0)) throw ConfigError("oracle: initial state vanishes on the mesh");

  auto romberg = [&](std::vector<std::vector<Complex>>& rows) {
    for (int m = 1; m < levels; ++m) {
      const double factor = std::pow(4.0, m) - 1.0;
      for (int k = levels - 1; k >= m; --k)
        for (std::size_t j = 0; j < rows[k].size(); ++j) rows[k][j] += (rows[k][j] - rows[k - 1][j]) / factor;
    }
  };

  auto run_l = [&](int li) {
    try {
      const int l = cfg.l_min + li;
      if (initial_norm[li] <= 1e-300 || initial_norm[li] < 1e-24 * peak) {
        coarse[li].assign(snapshots.size(), std::vector<Complex>(nc));
        return;
      }
      std::vector<std::vector<std::vector<Complex>>> table(snapshots.size(), std::vector<std::vector<Complex>>(levels));
      for (int k = 0; k < levels; ++k) {
        std::vector<Complex> f = init[k][li];
        std::size_t from = 0;
        for (std::size_t s = 0; s < snapshots.size(); ++s) {
          const std::vector<double> seg(res.step_nodes.begin() + from, res.step_nodes.begin() + seg_end[s] + 1);
          std::vector<Complex> e;
          double d = 0.0;
          f = propagate_harmonic(f, l, omega, charge_sign, frame, meshes[k], seg, 1 << k, &e, &d);
          if (k == levels - 1) edge[li] = std::max(edge[li], max_abs(e));
          drift[li][k] = std::max(drift[li][k], d);
          from = seg_end[s];
          std::vector<Complex> c(nc);
          for (int j = 0; j < nc; ++j) c[j] = f[static_cast<std::size_t>(j) << k];
          table[s][k] = std::move(c);
        }
      }
      for (std::size_t s = 0; s < snapshots.size(); ++s) {
        romberg(table[s]);
        coarse[li].push_back(std::move(table[s][levels - 1]));
      }
    } catch (const std::exception& e) {
      failure[li] = e.what();
    }
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int li = 0; li < nl; ++li) run_l(li);
  } else {
    for (int li = 0; li < nl; ++li) run_l(li);
  }
  for (const auto& msg : failure)
    if (!msg.empty()) throw NumericalError(msg);

  for (double e : edge) res.boundary_amplitude += e;
  res.level_norm_drift.assign(levels, 0.0);
  for (int li = 0; li < nl; ++li)
    for (int k = 0; k < levels; ++k) res.level_norm_drift[k] += drift[li][k];
  if (res.boundary_amplitude > cfg.boundary_tol) {
    std::ostringstream os;
    os << "oracle: boundary amplitude " << res.boundary_amplitude << " exceeds " << cfg.boundary_tol
       << "; enlarge rho_max";
    throw NumericalError(os.str());
  }

  const int np = cfg.n_phi;
  std::vector<Complex> phase(static_cast<std::size_t>(nl) * np);
  for (int li = 0; li < nl; ++li)
    for (int q = 0; q < np; ++q)
      phase[static_cast<std::size_t>(li) * np + q] = std::polar(1.0, (cfg.l_min + li) * kTwoPi * q / np);
  for (std::size_t s = 0; s < snapshots.size(); ++s) {
    const Frame::Point fr = frame.at(snapshots[s]);
    std::vector<double> rho(nc), weight(nc);
    for (int j = 0; j < nc; ++j) {
      rho[j] = fr.s * meshes[0].rho[j];
      weight[j] = fr.s * fr.s * meshes[0].weight[j];
    }
    StateGrid g = make_polar_grid(rho, weight, np, snapshots[s]);
    auto row = [&](int j) {
      const Complex push = std::polar(1.0 / fr.s, 0.5 * fr.ds / fr.s * rho[j] * rho[j]);
      for (int q = 0; q < np; ++q) {
        Complex acc{};
        for (int li = 0; li < nl; ++li) acc += coarse[li][s][j] * phase[static_cast<std::size_t>(li) * np + q];
        g.values[static_cast<std::size_t>(j) * np + q] = push * acc;
      }
    };
    if (parallel) {
#pragma omp parallel for schedule(static)
      for (int j = 0; j < nc; ++j) row(j);
    } else {
      for (int j = 0; j < nc; ++j) row(j);
    }
    res.snapshots.push_back(std::move(g));
  }
  return res;
}

StateFn lg_state(int n, int l, double omega0, double b0, double b0_prime) {
  if (n < 0) throw ConfigError("lg_state: n must be non-negative");
  if (!(omega0 > 0.0) || !(b0 > 0.0)) throw ConfigError("lg_state: omega0 and b0 must be positive");
  const int al = std::abs(l);
  const double norm = std::sqrt(omega0 / std::numbers::pi * std::exp(log_factorial(n) - log_factorial(n + al)));
  return [=](double rho, double phi) {
    const double r = b0 * rho;
    const double x = omega0 * r * r;
    const double radial = norm * std::pow(std::sqrt(omega0) * r, al) * laguerre(n, al, x) * std::exp(-0.5 * x);
    return b0 * radial * std::polar(1.0, l * phi - 0.5 * b0 * b0_prime * rho * rho);
  };
}

StateFn half_blocked_state(int n, int l, double omega0, double b0, double b0_prime) {
  const StateFn pure = lg_state(n, l, omega0, b0, b0_prime);
  return [pure](double rho, double phi) {
    double p = std::fmod(phi, kTwoPi);
    if (p < 0.0) p += kTwoPi;
    return p <= std::numbers::pi ? pure(rho, phi) : Complex{};
  };
}

double l2_distance(const StateGrid& g1, const StateGrid& g2) {
  g1.validate();
  g2.validate();
  if (g1.rho.size() != g2.rho.size() || g1.phi.size() != g2.phi.size())
    throw ConfigError("l2_distance: grids have different shapes");
  for (std::size_t i = 0; i < g1.rho.size(); ++i)
    if (std::abs(g1.rho[i] - g2.rho[i]) > 1e-12 * std::max(1.0, g1.rho[i]) ||
        std::abs(g1.rho_weight[i] - g2.rho_weight[i]) > 1e-12 * std::max(1e-300, std::abs(g1.rho_weight[i])))
      throw ConfigError("l2_distance: grids have different radial nodes");
  const std::size_t np = g1.n_phi();
  double a = 0.0, b = 0.0;
  Complex cross{};
  for (std::size_t i = 0; i < g1.n_rho(); ++i) {
    double ra = 0.0, rb = 0.0;
    Complex rc{};
    for (std::size_t j = 0; j < np; ++j) {
      const Complex u = g1.values[i * np + j], v = g2.values[i * np + j];
      ra += std::norm(u);
      rb += std::norm(v);
      rc += std::conj(v) * u;
    }
    a += g1.rho_weight[i] * ra;
    b += g1.rho_weight[i] * rb;
    cross += g1.rho_weight[i] * rc;
  }
  const double scale = std::max(a, b);
  if (!(scale > 0.0)) return 0.0;
  const Complex rot = std::abs(cross) > 0.0 ? cross / std::abs(cross) : Complex{1.0};
  double d2 = 0.0;
  for (std::size_t i = 0; i < g1.n_rho(); ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < np; ++j) r += std::norm(g1.values[i * np + j] - rot * g2.values[i * np + j]);
    d2 += g1.rho_weight[i] * r;
  }
  return std::sqrt(d2 / scale);
}

}  // namespace twistbeam::oracle
