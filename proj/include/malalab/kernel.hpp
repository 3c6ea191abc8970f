#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "malalab/rng.hpp"
#include "malalab/targets.hpp"

namespace malalab {

struct PhasePoint {
  Eigen::VectorXd q;
  Eigen::VectorXd p;
};

// One velocity-Verlet step of size eta on the Hamiltonian f(q) + |p|^2/2.
// Exactly two gradient evaluations. Non-finite gradients raise numeric_error
// naming the offending position.
PhasePoint leapfrog(const Target& target, const PhasePoint& z0, double eta);

// Energy error of that step: f(q_eta)+|p_eta|^2/2 - f(q_0)-|p_0|^2/2.
// The acceptance probability is min{1, exp(-energy_difference)}.
double energy_difference(const Target& target, const PhasePoint& z0, double eta);

struct StepSizePolicy {
  double eta = 0.0;
  double h = 0.0;  // always eta^2/2
  std::string provenance;  // "manual" or "theorem1"

  // populated on the theorem1 path
  std::optional<double> c0;
  std::optional<double> denominator;  // max{sqrt(L*ups), L*log((L*ups)^(1/4)/psi * M/eps)}
  std::optional<double> psi;
  std::optional<double> log_m_over_eps;

  // c1 * denominator / psi^2 * log(M/eps); throws on a manual policy
  double predicted_iterations(double c1) const;
};

StepSizePolicy manual_policy(double eta);

// Step size h = c0 / max{(L*ups)^(1/2), L*log((L*ups)^(1/4)/psi * M/eps)}.
// Requires profile.psi. When c0 is omitted it defaults to the largest value
// for which eta^4 * max{L^2 log(20), L*ups} <= 1/4096, i.e. the acceptance
// tail condition at delta = 0.05.
StepSizePolicy theorem1_policy(const SmoothnessProfile& profile, double M, double eps,
                               std::optional<double> c0 = std::nullopt);

double default_c0(const SmoothnessProfile& profile, double M, double eps);

// Largest eta with eta^4 * max{L^2 log(1/delta), L*ups} <= 1/4096.
double tail_condition_max_eta(const SmoothnessProfile& profile, double delta);

struct ChainState {
  Eigen::VectorXd q;
  std::uint64_t iteration = 0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t held = 0;  // lazy steps that kept the state
  RngStream rng;

  ChainState(Eigen::VectorXd q0, std::uint64_t seed, std::uint64_t stream)
      : q(std::move(q0)), rng(seed, stream) {}
};

// One transition. All randomness is addressed by (seed, stream, iteration),
// so a step's draws do not depend on the history of rng consumption. With
// lazy=true the chain first holds with probability 1/2 (iteration still
// advances). Proposals with non-finite energy are rejected.
void mala_step(const Target& target, ChainState& state, const StepSizePolicy& policy,
               bool lazy);

struct Trajectory {
  Eigen::Index dim = 0;
  std::vector<std::uint64_t> steps;   // iteration index of each saved row
  std::vector<char> accepted;         // 1 iff that iteration accepted a proposal
  Eigen::MatrixXd positions;          // one saved state per row
  std::uint64_t n_steps = 0;
  std::uint64_t accepted_total = 0;
  std::uint64_t rejected_total = 0;
  std::uint64_t held_total = 0;
  double acceptance_rate() const;  // accepted / (accepted + rejected)
};

// Runs n_steps >= 1 transitions from init, saving every thinning-th state
// (thinning >= 1). Deterministic given (seed, stream).
Trajectory run_chain(const Target& target, const Eigen::VectorXd& init,
                     const StepSizePolicy& policy, std::uint64_t n_steps, std::uint64_t seed,
                     std::uint64_t thinning = 1, bool lazy = true, std::uint64_t stream = 0);

// Text form: "step,q_1,...,q_d,accepted" after the given comment header lines.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<std::string>& header_lines);

// Binary form: magic "MALA1", u32 dim, u64 rows, then row-major f64 positions
// (little endian).
void write_trajectory_bin(std::ostream& os, const Trajectory& traj);
Eigen::MatrixXd read_trajectory_bin(std::istream& is);

}
