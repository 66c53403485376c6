#pragma once

#include <functional>
#include <vector>

namespace twistbeam::envelope {

using OmegaFn = std::function<double(double)>;

struct StepControl {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double dense_tol = 1e-9;  // bound on |b'' + Omega^2 b - w^2/b^3| of the interpolant at step midpoints
  double initial_step = 1e-3;
  double max_step = 0.25;
  double min_step = 1e-13;
  double collapse_threshold = 1e-6;
  // Frequency of the reference oscillator; the envelope equation reads b'' + Omega^2 b = w^2 / b^3.
  double reference_frequency = 1.0;
};

/// Envelope state at one longitudinal position. beta = b^2, alpha = -b b'.
struct EnvelopePoint {
  double z = 0.0;
  double b = 1.0;
  double b_prime = 0.0;
  double b_second = 0.0;
  double phase_advance = 0.0;   // integral of dz / b^2 from the start point
  double omega_integral = 0.0;  // integral of Omega dz from the start point (unsigned Larmor angle)
  double omega = 0.0;

  double beta() const { return b * b; }
  double alpha() const { return -b * b_prime; }
};

/// Adaptive solution of the Ermakov-Pinney equation with dense output. Nodes are stored
/// in increasing z regardless of the integration direction.
class EnvelopeSolution {
 public:
  EnvelopeSolution() = default;
  EnvelopeSolution(std::vector<EnvelopePoint> nodes, double z_start, double reference_frequency);

  double z_begin() const { return nodes_.front().z; }
  double z_end() const { return nodes_.back().z; }
  double z_start() const { return z_start_; }
  double reference_frequency() const { return reference_frequency_; }
  const std::vector<EnvelopePoint>& nodes() const { return nodes_; }

  /// Dense evaluation; throws ConfigError outside [z_begin, z_end].
  EnvelopePoint at(double z) const;

  /// Smallest z at or after the start with phase_advance(z) == target (target on the
  /// integration side of zero). Throws ConfigError if the solved range never reaches it.
  double z_at_phase_advance(double target) const;

 private:
  std::vector<EnvelopePoint> nodes_;
  double z_start_ = 0.0;
  double reference_frequency_ = 1.0;
};

/// Integrates b'' + Omega^2 b = w^2/b^3 from (z_from, b0, b0') to z_to (either direction),
/// accumulating phase advance and the Omega integral as extra ODE components.
/// Throws NumericalError on envelope collapse (b below threshold) or step-size underflow.
EnvelopeSolution solve_ermakov(const OmegaFn& omega, double b0, double b0_prime, double z_from, double z_to,
                               const StepControl& control = {});

struct EpDiagnostics {
  std::vector<double> z;               // step midpoints
  std::vector<double> residual;        // b'' + Omega^2 b - w^2/b^3 from dense output
  std::vector<double> first_integral;  // b'^2 + Omega^2 b^2 + w^2/b^2 at each node
  double max_abs_residual = 0.0;
};

EpDiagnostics ep_invariant(const EnvelopeSolution& sol, const OmegaFn& omega);

struct RotationAngles {
  double z = 0.0;
  double larmor = 0.0;  // sign(q) * integral Omega
  double plus = 0.0;    // larmor - w * phase_advance
  double minus = 0.0;   // larmor + w * phase_advance
};

RotationAngles rotation_angles(const EnvelopeSolution& sol, int charge_sign, double z);
/// Angles at every solution node.
std::vector<RotationAngles> rotation_angles(const EnvelopeSolution& sol, int charge_sign);

}  // namespace twistbeam::envelope
