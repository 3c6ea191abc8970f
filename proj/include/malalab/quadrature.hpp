#pragma once

#include <vector>

namespace malalab {

// Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree 2*order-1.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Cached per order; thread safe.
const GaussLegendre& gauss_legendre(int order);

// Integrates f over [a, b] with the given order.
template <typename F>
double integrate(F&& f, double a, double b, int order) {
  const GaussLegendre& gl = gauss_legendre(order);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double s = 0.0;
  for (int i = 0; i < order; ++i) s += gl.weights[i] * f(mid + half * gl.nodes[i]);
  return half * s;
}

}
