#include "twistbeam/lgbasis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "twistbeam/errors.hpp"
#include "twistbeam/special.hpp"

namespace twistbeam {

void BasisConvention::validate() const {
  if (!(omega0 > 0.0)) throw ConfigError("basis convention: omega0 must be positive");
}

namespace lgbasis {

namespace {

constexpr double kUnderflowArgument = 700.0;

// log of N (sqrt(omega0) rho)^|l| exp(-omega0 rho^2 / 2) without the Laguerre factor.
double log_envelope(int n, int al, double omega0, double rho) {
  const double x = omega0 * rho * rho;
  const double log_norm = 0.5 * (std::log(omega0) + log_factorial(n) - std::log(std::numbers::pi) - log_factorial(n + al));
  const double log_power = (al == 0) ? 0.0 : 0.5 * al * std::log(x);
  return log_norm + log_power - 0.5 * x;
}

}  // namespace

double eigenvalue(ModeIndex idx, BasisConvention conv) {
  if (idx.n < 0) throw ConfigError("mode index: n must be non-negative");
  return conv.omega0 * (2.0 * idx.n + std::abs(idx.l) + 1.0);
}

double normalization(ModeIndex idx, BasisConvention conv) {
  if (idx.n < 0) throw ConfigError("mode index: n must be non-negative");
  const int al = std::abs(idx.l);
  return std::exp(0.5 * (std::log(conv.omega0) + log_factorial(idx.n) - std::log(std::numbers::pi) -
                         log_factorial(idx.n + al)));
}

double radial(ModeIndex idx, BasisConvention conv, double rho) {
  if (idx.n < 0) throw ConfigError("mode index: n must be non-negative");
  if (rho < 0.0) throw ConfigError("basis_eval: rho must be non-negative");
  const int al = std::abs(idx.l);
  const double x = conv.omega0 * rho * rho;
  if (x > kUnderflowArgument) return 0.0;
  if (rho == 0.0) return (al == 0) ? normalization(idx, conv) * laguerre(idx.n, 0.0, 0.0) : 0.0;
  return std::exp(log_envelope(idx.n, al, conv.omega0, rho)) * laguerre(idx.n, al, x);
}

void radial_sequence(int l, BasisConvention conv, double rho, std::span<double> out) {
  if (out.empty()) return;
  if (rho < 0.0) throw ConfigError("basis_eval: rho must be non-negative");
  const int al = std::abs(l);
  const double x = conv.omega0 * rho * rho;
  if (x > kUnderflowArgument || (rho == 0.0 && al != 0)) {
    for (auto& v : out) v = 0.0;
    return;
  }
  laguerre_sequence(al, x, out);
  // envelope for n = 0, then N_n / N_{n-1} = sqrt(n / (n + |l|)).
  double env = (rho == 0.0) ? std::sqrt(conv.omega0 / std::numbers::pi) : std::exp(log_envelope(0, al, conv.omega0, rho));
  for (std::size_t n = 0; n < out.size(); ++n) {
    if (n > 0) env *= std::sqrt(static_cast<double>(n) / static_cast<double>(n + al));
    out[n] *= env;
  }
}

std::complex<double> basis_eval(ModeIndex idx, BasisConvention conv, double rho, double phi) {
  return radial(idx, conv, rho) * std::polar(1.0, idx.l * phi);
}

}  // namespace lgbasis
}  // namespace twistbeam
