#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "malalab/kernel.hpp"
#include "malalab/targets.hpp"

namespace malalab {

// A small reversible lazy Markov chain with known stationary law; k <= 20 so
// conductance can be taken over every subset exactly.
struct FiniteChain {
  Eigen::MatrixXd P;   // row stochastic
  Eigen::VectorXd pi;  // stationary, positive, sums to 1

  Eigen::Index k() const { return pi.size(); }

  // Checks row sums, pi P = pi symmetry (detailed balance), laziness
  // P_ii >= 1/2, and positivity; throws precondition_error on violation.
  void validate(double tol = 1e-12) const;
};

// Bin-discretized 1D kernel on [a, b] with k cells: stationary weights are
// the bin integrals of exp(-f); transitions integrate the Gaussian proposal
// from each bin center over the destination bin, apply the Metropolis
// correction for the binned weights, and then the chain is made lazy.
// Requires the grid to cover all but 1e-6 of the target mass.
FiniteChain discretize_1d(const Target& target, double a, double b, int k,
                          const StepSizePolicy& policy);

// min over subsets S with s < pi(S) < 1 - s of
//   flow(S, S^c) / (min{pi(S), pi(S^c)} - s).
// Enumerates all 2^k - 2 proper subsets (Gray-code incremental updates);
// throws precondition_error when no subset satisfies the constraint.
double s_conductance_exact(const FiniteChain& chain, double s);

struct LovaszRow {
  std::uint64_t n = 0;
  double tv = 0.0;
  double bound = 0.0;
  double slack = 0.0;  // bound - tv
};

struct LovaszReport {
  double M = 0.0;
  double s = 0.0;
  double phi_s = 0.0;
  std::vector<LovaszRow> rows;  // one per iteration count 0..n_max
  double min_slack = 0.0;
  bool pass = false;  // every slack >= -1e-10
};

// Exact distribution-vs-bound comparison: tv_n = d_TV(mu0' P^n, pi) against
// M s + M (1 - phi_s^2 / 2)^n for every n <= n_max. mu0 must be a
// probability vector with mu0_i <= M pi_i entrywise (its exact warmness is
// computed here and must not exceed M by more than 1e-12).
LovaszReport lovasz_bound_check(const FiniteChain& chain, const Eigen::VectorXd& mu0, double M,
                                double s, std::uint64_t n_max);

}
