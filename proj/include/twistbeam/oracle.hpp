#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "twistbeam/grid.hpp"

namespace twistbeam::oracle {

using Complex = std::complex<double>;
using StateFn = std::function<Complex(double rho, double phi)>;
using OmegaFn = std::function<double(double z)>;

/// Direct radial Crank-Nicolson solver, one independent problem per angular harmonic.
/// The harmonics are propagated in a scaled, chirp-free frame
///   psi(rho, z) = s^-1 exp(i s' rho^2 / (2 s)) chi(rho / s, z)
/// where s(z) solves s'' = -Omega^2 s + w^2 / s^3 from frame_width and frame_slope. The
/// transformed equation is exact for any smooth s; the choice only affects resolution.
/// Level k of the Richardson ladder refines both the mesh and every z step by 2^k;
/// results are combined on the level-0 nodes.
struct OracleConfig {
  int l_min = -25;
  int l_max = 25;
  double rho_max = 20.0;        // in frame units
  int n_rho = 1536;             // level-0 nodes; Dirichlet at rho_max
  double radial_stretch = 4.0;  // rho(s) = rho_max sinh(stretch s) / sinh(stretch); 0 for a uniform mesh
  double dz = 1e-3;             // level-0 step where s = 1; steps scale with s^2
  double min_step_ratio = 1.0 / 64.0;
  double max_step_ratio = 16.0;
  int richardson_levels = 2;    // 1 disables extrapolation
  bool moving_frame = true;     // false keeps s = 1
  double frame_width = 1.0;
  double frame_slope = 0.0;
  double frame_frequency = 1.0;
  int angular_order = 64;       // Gauss-Legendre points per smooth angular piece
  std::vector<double> angular_breakpoints;
  int n_phi = 256;              // output grid
  double boundary_tol = 1e-10;  // bound on boundary_amplitude

  void validate() const;
};

/// Frame scale s(z) with its first two derivatives, C2 in z.
class Frame {
 public:
  Frame() = default;
  Frame(const std::function<double(double)>& omega, double z0, double z1, const OracleConfig& cfg);

  struct Point {
    double s = 1.0, ds = 0.0, d2s = 0.0;
  };
  Point at(double z) const;

 private:
  std::vector<double> z_;
  std::vector<Point> p_;
};

/// Finite-volume radial mesh. Node 0 sits on the axis; faces are the images of the
/// half-integer points of the uniform parameter.
struct RadialMesh {
  std::vector<double> rho;     // n nodes
  std::vector<double> face;    // face[j] between node j and j + 1 (the last one before rho_max)
  std::vector<double> weight;  // cell integral of rho drho
  double rho_max = 0.0;

  std::size_t size() const { return rho.size(); }
};

RadialMesh make_radial_mesh(int n, double rho_max, double stretch);

struct OracleResult {
  std::vector<StateGrid> snapshots;      // one per requested z, level-0 nodes mapped to the lab frame
  std::vector<double> step_nodes;        // level-0 z step boundaries
  double boundary_amplitude = 0.0;       // sum over l of max_z |chi_l| next to rho_max, finest level
  std::vector<double> level_norm_drift;  // max |norm(z) - norm(z0)| per level, summed over l
};

/// Propagates psi0 given at z0 to each z in snapshots (ascending, > z0).
OracleResult oracle_propagate(const StateFn& psi0, const OmegaFn& omega, int charge_sign, double z0,
                              const std::vector<double>& snapshots, const OracleConfig& cfg,
                              Execution exec = Execution::parallel);

/// Level-0 step boundaries from z0 through every snapshot.
std::vector<double> step_schedule(const Frame& frame, double z0, const std::vector<double>& snapshots,
                                  const OracleConfig& cfg);

/// One frame-space harmonic across the step boundaries z_nodes, each step split into
/// `subdivide` equal midpoint Crank-Nicolson steps. Returns the profile on the mesh nodes;
/// edge_trace receives the value next to rho_max at every entry of z_nodes.
std::vector<Complex> propagate_harmonic(const std::vector<Complex>& f0, int l, const OmegaFn& omega,
                                        int charge_sign, const Frame& frame, const RadialMesh& mesh,
                                        const std::vector<double>& z_nodes,
                                        int subdivide = 1, std::vector<Complex>* edge_trace = nullptr,
                                        double* norm_drift = nullptr);

/// Initial states evaluated from the Laguerre polynomials directly.
StateFn lg_state(int n, int l, double omega0 = 1.0, double b0 = 1.0, double b0_prime = 0.0);
StateFn half_blocked_state(int n, int l, double omega0 = 1.0, double b0 = 1.0, double b0_prime = 0.0);

/// ||g1 - e^{i theta} g2|| / max(||g1||, ||g2||) minimized over theta. Grids must share
/// nodes and weights.
double l2_distance(const StateGrid& g1, const StateGrid& g2);

}  // namespace twistbeam::oracle
