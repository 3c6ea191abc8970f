#include "malalab/mixing.hpp"

#include <cmath>

#include "malalab/errors.hpp"
#include "malalab/parallel.hpp"

namespace malalab {

WarmStart warm_stationary(TargetPtr target) {
  if (!target->has_exact_sampler())
    throw precondition_error("warm_stationary: target has no exact sampler");
  WarmStart w;
  w.M = 1.0;
  w.description = "stationary";
  w.sampler = [target](RngStream& rng) { return target->sample(rng); };
  return w;
}

namespace {

void require_product_gaussian(const Target& target, const char* op) {
  if (!target.has_exact_sampler() || !target.has_marginal_law())
    throw precondition_error(std::string(op) + ": needs a product-Gaussian target");
}

}

WarmStart warm_scaled_all(TargetPtr target, double ratio) {
  require_product_gaussian(*target, "warm_scaled_all");
  if (!(ratio > 1.0)) throw precondition_error("warm_scaled_all: ratio must exceed 1");
  const Eigen::Index d = target->dim();
  Eigen::VectorXd sd(d);
  for (Eigen::Index i = 0; i < d; ++i) sd[i] = target->marginal_stddev(i) / ratio;
  WarmStart w;
  w.M = std::pow(ratio, double(d));
  w.description = "scaled_all_r" + std::to_string(ratio);
  w.sampler = [sd, d](RngStream& rng) {
    Eigen::VectorXd q(d);
    for (Eigen::Index i = 0; i < d; ++i) q[i] = sd[i] * rng.normal();
    return q;
  };
  return w;
}

WarmStart warm_scaled_coordinate(TargetPtr target, Eigen::Index coord, double ratio) {
  require_product_gaussian(*target, "warm_scaled_coordinate");
  if (!(ratio > 1.0)) throw precondition_error("warm_scaled_coordinate: ratio must exceed 1");
  const Eigen::Index d = target->dim();
  if (coord < 0 || coord >= d) throw precondition_error("warm_scaled_coordinate: bad coordinate");
  Eigen::VectorXd sd(d);
  for (Eigen::Index i = 0; i < d; ++i) sd[i] = target->marginal_stddev(i);
  sd[coord] /= ratio;
  WarmStart w;
  w.M = ratio;
  w.description = "scaled_coord" + std::to_string(coord) + "_r" + std::to_string(ratio);
  w.sampler = [sd, d](RngStream& rng) {
    Eigen::VectorXd q(d);
    for (Eigen::Index i = 0; i < d; ++i) q[i] = sd[i] * rng.normal();
    return q;
  };
  return w;
}

double tv_marginal(std::span<const double> samples, const Target& target, Eigen::Index coord,
                   int bins, double range_sds) {
  if (samples.size() < 10000)
    throw precondition_error("tv_marginal: need at least 10^4 samples");
  if (bins < 2) throw precondition_error("tv_marginal: need at least 2 bins");
  if (!target.has_marginal_law())
    throw precondition_error("tv_marginal: target has no closed-form marginal law");
  if (coord < 0 || coord >= target.dim()) throw precondition_error("tv_marginal: bad coordinate");

  const double R = range_sds * target.marginal_stddev(coord);
  const double cell = 2.0 * R / bins;
  // cells 0..bins-1 inside [-R, R]; two extra tail cells
  std::vector<std::uint64_t> counts(std::size_t(bins) + 2, 0);
  for (double x : samples) {
    if (x < -R)
      ++counts[std::size_t(bins)];
    else if (x >= R)
      ++counts[std::size_t(bins) + 1];
    else
      ++counts[std::size_t(std::min(double(bins - 1), std::floor((x + R) / cell)))];
  }
  const double inv_n = 1.0 / double(samples.size());
  double tv = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double lo = -R + b * cell, hi = lo + cell;
    const double mass = target.marginal_cdf(coord, hi) - target.marginal_cdf(coord, lo);
    tv += std::abs(double(counts[std::size_t(b)]) * inv_n - mass);
  }
  tv += std::abs(double(counts[std::size_t(bins)]) * inv_n - target.marginal_cdf(coord, -R));
  tv += std::abs(double(counts[std::size_t(bins) + 1]) * inv_n -
                 (1.0 - target.marginal_cdf(coord, R)));
  return 0.5 * tv;
}

double marginal_noise_floor(const Target& target, Eigen::Index coord, std::uint64_t n_samples,
                            std::uint64_t seed, int bins, int reps) {
  if (!target.has_exact_sampler())
    throw precondition_error("marginal_noise_floor: target has no exact sampler");
  if (reps < 1) throw precondition_error("marginal_noise_floor: reps must be >= 1");
  if (coord < 0 || coord >= target.dim())
    throw precondition_error("marginal_noise_floor: bad coordinate");
  std::vector<double> col(n_samples);
  double acc = 0.0;
  for (int r = 0; r < reps; ++r) {
    RngStream rng(seed, stream_area::kNoiseFloor + std::uint64_t(r));
    for (std::uint64_t i = 0; i < n_samples; ++i) {
      rng.set_step(i);
      col[i] = target.sample(rng)[coord];
    }
    acc += tv_marginal(col, target, coord, bins);
  }
  return acc / reps;
}

MixingResult mixing_time_measure(const Target& target, const WarmStart& warm,
                                 const StepSizePolicy& policy, double eps,
                                 std::uint64_t n_replicas, std::uint64_t n_max,
                                 std::uint64_t seed, Eigen::Index coord, int workers,
                                 double grid_factor) {
  if (!(eps > 0.0 && eps < 1.0)) throw precondition_error("mixing_time_measure: eps in (0,1)");
  if (!(warm.M >= 1.0)) throw precondition_error("mixing_time_measure: warmness M must be >= 1");
  if (!(grid_factor > 1.0))
    throw precondition_error("mixing_time_measure: grid factor must exceed 1");
  if (n_replicas < 10000)
    throw precondition_error("mixing_time_measure: need at least 10^4 replicas");
  if (coord < 0 || coord >= target.dim())
    throw precondition_error("mixing_time_measure: bad coordinate");

  MixingResult res;
  res.eps = eps;
  res.curve.coord = coord;
  res.curve.replicas = n_replicas;
  res.curve.noise_floor = marginal_noise_floor(target, coord, n_replicas, seed);
  res.threshold = eps + res.curve.noise_floor;

  std::vector<ChainState> chains;
  chains.reserve(n_replicas);
  for (std::uint64_t r = 0; r < n_replicas; ++r) {
    RngStream init_rng(seed, stream_area::kWarmInit + r);
    chains.emplace_back(warm.sampler(init_rng), seed, stream_area::kChains + r);
  }

  std::vector<double> col(n_replicas);
  std::uint64_t grid_n = 0;
  while (true) {
    for (std::uint64_t r = 0; r < n_replicas; ++r) col[r] = chains[r].q[coord];
    const double tv = tv_marginal(col, target, coord, res.curve.bins);
    res.curve.iterations.push_back(grid_n);
    res.curve.tv.push_back(tv);
    if (tv <= res.threshold) {
      res.tau_hat = grid_n;
      break;
    }
    if (grid_n >= n_max) break;  // tau_hat stays unset: not reached
    const std::uint64_t next =
        std::min(n_max, std::max(grid_n + 1, std::uint64_t(std::ceil(double(grid_n) * grid_factor))));
    parallel_for(n_replicas, workers, [&](std::size_t b, std::size_t e) {
      for (std::size_t r = b; r < e; ++r)
        for (std::uint64_t i = grid_n; i < next; ++i)
          mala_step(target, chains[r], policy, /*lazy=*/true);
    });
    grid_n = next;
  }
  return res;
}

ScalingResult scaling_experiment(std::span<const int> dims, double eps, double M_target,
                                 std::uint64_t replicas, std::uint64_t n_max,
                                 std::uint64_t seed, int workers, double L) {
  if (dims.empty()) throw precondition_error("scaling_experiment: empty dimension list");
  if (!(M_target > 1.0)) throw precondition_error("scaling_experiment: M_target must exceed 1");
  if (!(L > 0.0)) throw precondition_error("scaling_experiment: L must be positive");

  ScalingResult res;
  res.eps = eps;
  res.M_target = M_target;
  res.replicas = replicas;

  std::vector<double> log_d, log_tau;
  for (std::size_t idx = 0; idx < dims.size(); ++idx) {
    const int d = dims[idx];
    if (d < 2) throw precondition_error("scaling_experiment: dims must be >= 2");
    Eigen::VectorXd eig = Eigen::VectorXd::Constant(d, L / double(d));
    eig[0] = L;
    const TargetPtr target = make_quadratic(eig);

    const StepSizePolicy policy = theorem1_policy(target->profile(), M_target, eps);
    // the compressed slow coordinate (eigenvalue L/d) is the one measured
    const Eigen::Index coord = 1;
    const WarmStart warm = warm_scaled_coordinate(target, coord, M_target);

    const std::uint64_t dim_seed = derive_seed(seed, std::uint64_t(d));
    const MixingResult mix = mixing_time_measure(*target, warm, policy, eps, replicas, n_max,
                                                 dim_seed, coord, workers);

    ScalingRow row;
    row.dim = d;
    row.eta = policy.eta;
    row.h = policy.h;
    row.tau_hat = mix.tau_hat;
    row.noise_floor = mix.curve.noise_floor;
    row.threshold = mix.threshold;
    row.predicted_n = policy.predicted_iterations(1.0);
    SmoothnessProfile kappa_profile = target->profile();
    kappa_profile.upsilon = L * double(d);  // what a trace-blind rule would assume
    row.predicted_n_kappa = theorem1_policy(kappa_profile, M_target, eps)
                                .predicted_iterations(1.0);
    res.rows.push_back(row);

    if (mix.tau_hat && *mix.tau_hat >= 1) {
      log_d.push_back(std::log(double(d)));
      log_tau.push_back(std::log(double(*mix.tau_hat)));
    } else if (!mix.tau_hat) {
      res.warnings.push_back("dim " + std::to_string(d) + ": tau_hat not reached within n_max=" +
                             std::to_string(n_max) + "; excluded from the slope fit");
    } else {
      res.warnings.push_back("dim " + std::to_string(d) +
                             ": tau_hat = 0 (already mixed); excluded from the slope fit");
    }
  }
  if (log_d.size() >= 3) res.slope = fit_line(log_d, log_tau);
  else res.warnings.push_back("fewer than 3 dims with measurable tau_hat; slope not fitted");
  return res;
}

}
