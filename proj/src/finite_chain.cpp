#include "malalab/finite_chain.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "malalab/errors.hpp"
#include "malalab/quadrature.hpp"
#include "malalab/stats.hpp"

namespace malalab {

void FiniteChain::validate(double tol) const {
  const Eigen::Index n = k();
  if (n < 2 || n > 20) throw precondition_error("FiniteChain: k must lie in [2, 20]");
  if (P.rows() != n || P.cols() != n)
    throw precondition_error("FiniteChain: P must be k x k");
  if (std::abs(pi.sum() - 1.0) > tol)
    throw precondition_error("FiniteChain: pi must sum to 1");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(pi[i] > 0.0)) throw precondition_error("FiniteChain: pi must be positive");
    double row = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (P(i, j) < -tol) throw precondition_error("FiniteChain: negative transition weight");
      row += P(i, j);
    }
    if (std::abs(row - 1.0) > tol)
      throw precondition_error("FiniteChain: row " + std::to_string(i) + " sums to " +
                               std::to_string(row));
    if (P(i, i) < 0.5 - tol)
      throw precondition_error("FiniteChain: chain is not lazy at state " + std::to_string(i));
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (std::abs(pi[i] * P(i, j) - pi[j] * P(j, i)) > tol)
        throw precondition_error("FiniteChain: detailed balance fails between states " +
                                 std::to_string(i) + " and " + std::to_string(j));
}

namespace {

// integral of exp(-f) over [lo, hi], fixed-order panels
double mass_on(const Target& target, double lo, double hi, int panels = 8, int order = 48) {
  double total = 0.0;
  const double w = (hi - lo) / panels;
  Eigen::VectorXd q(1);
  for (int p = 0; p < panels; ++p) {
    total += integrate(
        [&](double x) {
          q[0] = x;
          return std::exp(-target.potential(q));
        },
        lo + p * w, lo + (p + 1) * w, order);
  }
  return total;
}

// extends outward in chunks until added tail mass is negligible
double full_line_mass(const Target& target, double a, double b) {
  double total = mass_on(target, a, b);
  const double w = std::max(1.0, b - a);
  for (int side = 0; side < 2; ++side) {
    double edge = side == 0 ? a : b;
    const double dir = side == 0 ? -1.0 : 1.0;
    for (int chunk = 0; chunk < 64; ++chunk) {
      const double next = edge + dir * w;
      const double m = side == 0 ? mass_on(target, next, edge) : mass_on(target, edge, next);
      total += m;
      edge = next;
      if (m < 1e-18 * total) break;
    }
  }
  return total;
}

}

FiniteChain discretize_1d(const Target& target, double a, double b, int k,
                          const StepSizePolicy& policy) {
  if (target.dim() != 1) throw precondition_error("discretize_1d: target must be 1-dimensional");
  if (!(b > a)) throw precondition_error("discretize_1d: need b > a");
  if (k < 2 || k > 20) throw precondition_error("discretize_1d: k must lie in [2, 20]");

  const double width = (b - a) / k;
  Eigen::VectorXd mass(k);
  for (int i = 0; i < k; ++i) mass[i] = mass_on(target, a + i * width, a + (i + 1) * width);
  const double grid_mass = mass.sum();
  const double total_mass = full_line_mass(target, a, b);
  if (grid_mass < (1.0 - 1e-6) * total_mass)
    throw precondition_error("discretize_1d: grid [" + std::to_string(a) + ", " +
                             std::to_string(b) + "] covers only " +
                             std::to_string(grid_mass / total_mass) +
                             " of the target mass; enlarge the grid");

  FiniteChain chain;
  chain.pi = mass / grid_mass;

  // Gaussian proposal out of each bin center, mass binned by the exact CDF.
  const double h = policy.h, eta = policy.eta;
  Eigen::MatrixXd prop(k, k);
  Eigen::VectorXd q(1);
  for (int i = 0; i < k; ++i) {
    q[0] = a + (i + 0.5) * width;
    const double m = q[0] - h * target.gradient(q)[0];
    for (int j = 0; j < k; ++j) {
      const double lo = a + j * width, hi = lo + width;
      prop(i, j) = normal_cdf((hi - m) / eta) - normal_cdf((lo - m) / eta);
    }
  }

  // Metropolis correction against the binned weights; proposal mass falling
  // off the grid is rejected in place. Then the chain is made lazy.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    double off = 0.0;
    for (int j = 0; j < k; ++j) {
      if (j == i || prop(i, j) <= 0.0) continue;
      const double ratio = (chain.pi[j] * prop(j, i)) / (chain.pi[i] * prop(i, j));
      T(i, j) = prop(i, j) * std::min(1.0, ratio);
      off += T(i, j);
    }
    T(i, i) = 1.0 - off;
  }
  chain.P = 0.5 * (Eigen::MatrixXd::Identity(k, k) + T);
  chain.validate();
  return chain;
}

double s_conductance_exact(const FiniteChain& chain, double s) {
  chain.validate();
  if (!(s >= 0.0 && s < 0.5)) throw precondition_error("s_conductance_exact: need 0 <= s < 1/2");
  const int k = int(chain.k());

  Eigen::MatrixXd flow(k, k);  // flow(i, j) = pi_i P_ij
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) flow(i, j) = chain.pi[i] * chain.P(i, j);

  // Gray-code walk over all proper subsets, updating the cut flow and subset
  // mass by the single flipped state each time.
  std::vector<bool> in_set(k, false);
  long double cut = 0.0L, pi_s = 0.0L;
  double best = std::numeric_limits<double>::infinity();
  bool feasible = false;
  const std::uint32_t total = (1u << k) - 1;
  std::uint32_t prev_gray = 0;
  for (std::uint32_t m = 1; m <= total; ++m) {
    const std::uint32_t gray = m ^ (m >> 1);
    const std::uint32_t flipped = gray ^ prev_gray;
    prev_gray = gray;
    int v = 0;
    while (!((flipped >> v) & 1u)) ++v;

    if (in_set[v]) {  // removing v: update with S already lacking v
      in_set[v] = false;
      pi_s -= chain.pi[v];
      long double out_flow = 0.0L, in_flow = 0.0L;
      for (int j = 0; j < k; ++j) {
        if (j == v) continue;
        if (!in_set[j]) out_flow += flow(v, j);
        else in_flow += flow(j, v);
      }
      cut -= out_flow - in_flow;
    } else {
      long double out_flow = 0.0L, in_flow = 0.0L;
      for (int j = 0; j < k; ++j) {
        if (j == v) continue;
        if (!in_set[j]) out_flow += flow(v, j);
        else in_flow += flow(j, v);
      }
      cut += out_flow - in_flow;
      in_set[v] = true;
      pi_s += chain.pi[v];
    }
    if (gray == 0 || gray == total) continue;
    const double ps = double(pi_s);
    if (!(ps > s && 1.0 - ps > s)) continue;
    feasible = true;
    const double denom = std::min(ps, 1.0 - ps) - s;
    best = std::min(best, std::max(0.0, double(cut)) / denom);
  }
  if (!feasible)
    throw precondition_error("s_conductance_exact: no subset satisfies s < pi(S) < 1-s for s=" +
                             std::to_string(s));
  return best;
}

LovaszReport lovasz_bound_check(const FiniteChain& chain, const Eigen::VectorXd& mu0, double M,
                                double s, std::uint64_t n_max) {
  chain.validate();
  if (mu0.size() != chain.k()) throw precondition_error("lovasz_bound_check: mu0 size mismatch");
  if (std::abs(mu0.sum() - 1.0) > 1e-12 || (mu0.array() < -1e-15).any())
    throw precondition_error("lovasz_bound_check: mu0 is not a probability vector");
  double exact_m = 0.0;
  for (Eigen::Index i = 0; i < mu0.size(); ++i)
    exact_m = std::max(exact_m, mu0[i] / chain.pi[i]);
  if (exact_m > M * (1.0 + 1e-12))
    throw precondition_error("lovasz_bound_check: warmness violated, max mu0/pi = " +
                             std::to_string(exact_m) + " exceeds declared M = " +
                             std::to_string(M));

  LovaszReport rep;
  rep.M = M;
  rep.s = s;
  rep.phi_s = s_conductance_exact(chain, s);
  rep.rows.reserve(n_max + 1);
  rep.min_slack = std::numeric_limits<double>::infinity();

  const double decay = 1.0 - 0.5 * rep.phi_s * rep.phi_s;
  Eigen::VectorXd mu = mu0;
  for (std::uint64_t n = 0; n <= n_max; ++n) {
    LovaszRow row;
    row.n = n;
    row.tv = 0.5 * (mu - chain.pi).lpNorm<1>();
    row.bound = M * s + M * std::pow(decay, double(n));
    row.slack = row.bound - row.tv;
    rep.min_slack = std::min(rep.min_slack, row.slack);
    rep.rows.push_back(row);
    if (n < n_max) mu = chain.P.transpose() * mu;
  }
  rep.pass = rep.min_slack >= -1e-10;
  return rep;
}

}
