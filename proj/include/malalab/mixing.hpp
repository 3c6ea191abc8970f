#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "malalab/kernel.hpp"
#include "malalab/stats.hpp"
#include "malalab/targets.hpp"

namespace malalab {

// An initial law together with its exact warmness sup_A mu0(A)/mu(A).
struct WarmStart {
  std::function<Eigen::VectorXd(RngStream&)> sampler;
  double M = 1.0;
  std::string description;
};

// The target itself; M = 1.
WarmStart warm_stationary(TargetPtr target);

// Product-Gaussian target with every coordinate's stddev divided by
// ratio > 1; the density ratio peaks at the origin, M = ratio^dim exactly.
WarmStart warm_scaled_all(TargetPtr target, double ratio);

// Only the given coordinate is compressed by ratio > 1, the others start at
// their stationary law; M = ratio exactly.
WarmStart warm_scaled_coordinate(TargetPtr target, Eigen::Index coord, double ratio);

// Total variation between the empirical law of one coordinate and the target
// marginal: 64 uniform cells spanning +/- 8 marginal stddevs plus the two
// tail cells. Requires >= 10^4 samples.
double tv_marginal(std::span<const double> samples, const Target& target, Eigen::Index coord,
                   int bins = 64, double range_sds = 8.0);

// Expected tv_marginal value for exact stationary samples of the same size:
// the estimator's resolution floor. Mean over `reps` independent batches.
double marginal_noise_floor(const Target& target, Eigen::Index coord, std::uint64_t n_samples,
                            std::uint64_t seed, int bins = 64, int reps = 4);

struct TVCurve {
  std::vector<std::uint64_t> iterations;
  std::vector<double> tv;
  Eigen::Index coord = 0;
  int bins = 64;
  std::uint64_t replicas = 0;
  double noise_floor = 0.0;
};

struct MixingResult {
  TVCurve curve;
  std::optional<std::uint64_t> tau_hat;  // first grid iteration at/below threshold
  double threshold = 0.0;                // eps + noise_floor
  double eps = 0.0;
};

// Runs n_replicas independent lazy chains from the warm start and records
// the marginal TV on a geometric iteration grid until it crosses
// eps + noise_floor or n_max is hit. Replica r draws its initial point and
// all its steps from streams addressed by r, so any worker count produces
// the same numbers.
MixingResult mixing_time_measure(const Target& target, const WarmStart& warm,
                                 const StepSizePolicy& policy, double eps,
                                 std::uint64_t n_replicas, std::uint64_t n_max,
                                 std::uint64_t seed, Eigen::Index coord, int workers = 1,
                                 double grid_factor = 1.2);

struct ScalingRow {
  int dim = 0;
  double eta = 0.0;
  double h = 0.0;
  std::optional<std::uint64_t> tau_hat;
  double noise_floor = 0.0;
  double threshold = 0.0;
  double predicted_n = 0.0;        // trace-aware policy, c1 = 1
  double predicted_n_kappa = 0.0;  // same formula with upsilon replaced by L*dim
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
  std::optional<LineFit> slope;  // log tau_hat vs log dim over reached dims
  std::vector<std::string> warnings;
  double eps = 0.0;
  double M_target = 0.0;
  std::uint64_t replicas = 0;
};

// Dimension sweep on the anisotropic quadratic with eigenvalues
// (L, L/d, ..., L/d): per d, the step size comes from the trace-aware policy
// with exact psi = sqrt(L/d) and warmness M_target; the warm start compresses
// the measured slow coordinate (eigenvalue L/d) by M_target so its warmness
// is exactly M_target for every d; tau_hat is the measured marginal mixing
// time of that coordinate.
ScalingResult scaling_experiment(std::span<const int> dims, double eps, double M_target,
                                 std::uint64_t replicas, std::uint64_t n_max,
                                 std::uint64_t seed, int workers = 1, double L = 1.0);

}
