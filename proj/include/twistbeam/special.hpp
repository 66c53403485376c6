#pragma once

#include <span>
#include <vector>

namespace twistbeam {

/// Generalized Laguerre polynomial L_n^alpha(x) by upward three-term recurrence in n.
double laguerre(int n, double alpha, double x);

/// Fills out[k] = L_k^alpha(x) for k = 0 .. out.size()-1.
void laguerre_sequence(double alpha, double x, std::span<double> out);

/// Binomial coefficient with real upper argument: prod_{j=1..k} (x - j + 1) / j.
double generalized_binomial(double x, int k);

double log_factorial(int n);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule mapped onto [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

}  // namespace twistbeam
