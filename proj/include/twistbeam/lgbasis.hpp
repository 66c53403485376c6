#pragma once

#include <compare>
#include <complex>
#include <span>

namespace twistbeam {

/// Radial number n >= 0 and OAM projection l.
struct ModeIndex {
  int n = 0;
  int l = 0;
  auto operator<=>(const ModeIndex&) const = default;
};

/// Frequency of the reference oscillator p^2/2 + omega0^2 rho^2/2 whose eigenstates form the basis.
struct BasisConvention {
  double omega0 = 1.0;
  void validate() const;
};

namespace lgbasis {

/// omega0 (2n + |l| + 1).
double eigenvalue(ModeIndex idx, BasisConvention conv = {});

/// sqrt(omega0 n! / (pi (n+|l|)!)).
double normalization(ModeIndex idx, BasisConvention conv = {});

/// Real radial factor N (sqrt(omega0) rho)^|l| L_n^|l|(omega0 rho^2) exp(-omega0 rho^2 / 2).
double radial(ModeIndex idx, BasisConvention conv, double rho);

/// Radial factors for n = 0 .. out.size()-1 at fixed l, sharing one Laguerre recurrence.
void radial_sequence(int l, BasisConvention conv, double rho, std::span<double> out);

/// radial(idx, conv, rho) * exp(i l phi); unit norm over the plane.
std::complex<double> basis_eval(ModeIndex idx, BasisConvention conv, double rho, double phi);

}  // namespace lgbasis
}  // namespace twistbeam
