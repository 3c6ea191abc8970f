#include "malalab/theory.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "malalab/errors.hpp"
#include "malalab/quadrature.hpp"
#include "malalab/stats.hpp"

namespace malalab {

double upsilon_ell(const SmoothnessProfile& profile, int ell) {
  if (ell < 1) throw precondition_error("upsilon_ell: ell must be >= 1");
  return profile.upsilon + 2.0 * double(ell - 1) * profile.L;
}

double EnergyDecomposition::residual() const {
  return std::abs(delta - b_eta - grad_diff_term);
}

namespace {

// b_eta and the gradient-difference term for one phase point. One gradient
// evaluation per quadrature node plus the two endpoint gradients.
struct BEtaParts {
  double b_eta;
  double grad_diff_term;
};

BEtaParts b_eta_quadrature(const Target& target, const Eigen::VectorXd& q0,
                           const Eigen::VectorXd& p0, double eta, int order) {
  const Eigen::VectorXd g0 = target.gradient(q0);
  const Eigen::VectorXd q_eta = q0 + eta * p0 - (0.5 * eta * eta) * g0;
  const Eigen::VectorXd g_eta = target.gradient(q_eta);

  const GaussLegendre& gl = gauss_legendre(order);
  const double half = 0.5 * eta;
  Eigen::VectorXd v1 = Eigen::VectorXd::Zero(q0.size());
  Eigen::VectorXd v2 = Eigen::VectorXd::Zero(q0.size());
  for (int i = 0; i < order; ++i) {
    const double t = half + half * gl.nodes[i];
    const double w = half * gl.weights[i];
    const Eigen::VectorXd gt = target.gradient(q0 + t * p0 - (0.5 * t * t) * g0);
    v1.noalias() += (-w * t) * (gt - g_eta);
    v2.noalias() += w * (gt - 0.5 * (g0 + g_eta));
  }
  BEtaParts parts;
  parts.b_eta = v1.dot(g0) + v2.dot(p0);
  parts.grad_diff_term = (eta * eta / 8.0) * (g_eta - g0).squaredNorm();
  return parts;
}

}

EnergyDecomposition decomposition_check(const Target& target, const PhasePoint& z0, double eta,
                                        int quadrature_order) {
  if (quadrature_order < 2)
    throw precondition_error("decomposition_check: quadrature order must be >= 2");
  if (!(eta > 0.0)) throw precondition_error("decomposition_check: eta must be positive");
  if (z0.q.size() != target.dim() || z0.p.size() != target.dim())
    throw precondition_error("decomposition_check: phase point dimension mismatch");

  EnergyDecomposition d;
  d.quadrature_order = quadrature_order;
  d.delta = energy_difference(target, z0, eta);
  const BEtaParts parts = b_eta_quadrature(target, z0.q, z0.p, eta, quadrature_order);
  d.b_eta = parts.b_eta;
  d.grad_diff_term = parts.grad_diff_term;
  return d;
}

namespace {

void require_exact_sampler(const Target& target, const char* op) {
  if (!target.has_exact_sampler())
    throw precondition_error(std::string(op) + ": target '" + target.name() +
                             "' has no exact sampler");
}

// Fills log_powers[i] = ell * log(x_i) from per-sample nonnegative values
// x_i produced by fn(i, rng). Parallel blocks clone the estimator stream and
// address each sample by its index, so results are worker-count invariant.
std::vector<double> collect_log_powers(std::uint64_t n, int ell, std::uint64_t seed,
                                       const std::function<double(std::uint64_t, RngStream&)>& fn) {
  std::vector<double> lps(n);
  RngStream rng(seed, stream_area::kEstimators);
  for (std::uint64_t i = 0; i < n; ++i) {
    rng.set_step(i);
    const double x = fn(i, rng);
    lps[i] = x > 0.0 ? double(ell) * std::log(x)
                     : -std::numeric_limits<double>::infinity();
  }
  return lps;
}

MomentReport finish_report(std::string lemma, std::string target_name, int ell, double bound,
                           std::vector<double> log_powers, std::uint64_t seed,
                           std::uint64_t boot_stream_offset = 0) {
  RngStream boot(seed, stream_area::kBootstrap + boot_stream_offset);
  const PowerMeanEstimate est = power_mean_bootstrap(log_powers, ell, 1000, 0.99, boot);
  MomentReport r;
  r.lemma = std::move(lemma);
  r.target = std::move(target_name);
  r.ell = ell;
  r.n = log_powers.size();
  r.estimate = est.estimate;
  r.ci_lo = est.ci_lo;
  r.ci_hi = est.ci_hi;
  r.bound = bound;
  r.margin = bound - est.estimate;
  r.pass = est.ci_lo <= bound;
  return r;
}

void require_positive_n(std::uint64_t n, const char* op) {
  if (n < 2) throw precondition_error(std::string(op) + ": need at least 2 samples");
}

}

MomentReport moment_grad_norm(const Target& target, int ell, std::uint64_t n,
                              std::uint64_t seed) {
  if (ell < 1) throw precondition_error("moment_grad_norm: ell must be >= 1");
  require_positive_n(n, "moment_grad_norm");
  require_exact_sampler(target, "moment_grad_norm");
  auto lps = collect_log_powers(n, ell, seed, [&](std::uint64_t, RngStream& rng) {
    return target.gradient(target.sample(rng)).squaredNorm();
  });
  return finish_report("grad_norm", target.name(), ell, upsilon_ell(target.profile(), ell),
                       std::move(lps), seed);
}

MomentReport moment_quadratic_form(const Target& target, const Eigen::VectorXd& x, int ell,
                                   std::uint64_t n, std::uint64_t seed) {
  if (ell < 1) throw precondition_error("moment_quadratic_form: ell must be >= 1");
  require_positive_n(n, "moment_quadratic_form");
  if (x.size() != target.dim())
    throw precondition_error("moment_quadratic_form: probe point dimension mismatch");
  auto lps = collect_log_powers(n, ell, seed, [&](std::uint64_t, RngStream& rng) {
    const Eigen::VectorXd p = rng.normal_vector(target.dim());
    return p.dot(target.hessian_vp(x, p));
  });
  return finish_report("quadratic_form", target.name(), ell,
                       upsilon_ell(target.profile(), ell), std::move(lps), seed);
}

MomentReport moment_quadratic_form_at_qt(const Target& target, double t, int ell,
                                         std::uint64_t n, std::uint64_t seed) {
  if (ell < 1) throw precondition_error("moment_quadratic_form_at_qt: ell must be >= 1");
  require_positive_n(n, "moment_quadratic_form_at_qt");
  require_exact_sampler(target, "moment_quadratic_form_at_qt");
  if (!(t >= 0.0)) throw precondition_error("moment_quadratic_form_at_qt: t must be >= 0");
  if (t * t * target.profile().L > 1.0)
    throw precondition_error("moment_quadratic_form_at_qt: requires t^2 L <= 1");
  auto lps = collect_log_powers(n, ell, seed, [&](std::uint64_t, RngStream& rng) {
    const Eigen::VectorXd q0 = target.sample(rng);
    const Eigen::VectorXd p0 = rng.normal_vector(target.dim());
    const Eigen::VectorXd qt = q0 + t * p0 - (0.5 * t * t) * target.gradient(q0);
    return p0.dot(target.hessian_vp(qt, p0));
  });
  return finish_report("quadratic_form_at_qt", target.name(), ell,
                       2.0 * upsilon_ell(target.profile(), ell), std::move(lps), seed);
}

GradDiffReports moment_grad_diff(const Target& target, double t, double eta, int ell,
                                 std::uint64_t n, std::uint64_t seed) {
  if (ell < 1) throw precondition_error("moment_grad_diff: ell must be >= 1");
  require_positive_n(n, "moment_grad_diff");
  require_exact_sampler(target, "moment_grad_diff");
  if (!(eta > 0.0) || t < 0.0 || t > eta)
    throw precondition_error("moment_grad_diff: need 0 <= t <= eta with eta > 0");
  const double L = target.profile().L;
  if (eta * eta * L > 1.0) throw precondition_error("moment_grad_diff: requires eta^2 L <= 1");

  std::vector<double> lps_q0(n), lps_qeta(n);
  RngStream rng(seed, stream_area::kEstimators);
  for (std::uint64_t i = 0; i < n; ++i) {
    rng.set_step(i);
    const Eigen::VectorXd q0 = target.sample(rng);
    const Eigen::VectorXd p0 = rng.normal_vector(target.dim());
    const Eigen::VectorXd g0 = target.gradient(q0);
    const Eigen::VectorXd gt = target.gradient(q0 + t * p0 - (0.5 * t * t) * g0);
    const Eigen::VectorXd geta = target.gradient(q0 + eta * p0 - (0.5 * eta * eta) * g0);
    const double x0 = (gt - g0).squaredNorm();
    const double xe = (gt - geta).squaredNorm();
    lps_q0[i] = x0 > 0.0 ? double(ell) * std::log(x0) : -std::numeric_limits<double>::infinity();
    lps_qeta[i] = xe > 0.0 ? double(ell) * std::log(xe) : -std::numeric_limits<double>::infinity();
  }
  const double ue = upsilon_ell(target.profile(), ell);
  GradDiffReports out;
  out.vs_q0 = finish_report("grad_diff_q0", target.name(), ell, 4.0 * t * t * L * ue,
                            std::move(lps_q0), seed, 0);
  out.vs_qeta = finish_report("grad_diff_qeta", target.name(), ell,
                              4.0 * (eta - t) * (eta - t) * L * ue, std::move(lps_qeta), seed, 1);
  return out;
}

MomentReport moment_b_eta(const Target& target, double eta, int ell, std::uint64_t n,
                          std::uint64_t seed, int quadrature_order) {
  if (ell < 2 || ell % 2 != 0) throw precondition_error("moment_b_eta: ell must be even");
  require_positive_n(n, "moment_b_eta");
  require_exact_sampler(target, "moment_b_eta");
  const double L = target.profile().L;
  if (!(eta > 0.0) || eta * eta * L > 0.5)
    throw precondition_error("moment_b_eta: requires eta > 0 and eta^2 L <= 1/2");
  auto lps = collect_log_powers(n, ell, seed, [&](std::uint64_t, RngStream& rng) {
    const Eigen::VectorXd q0 = target.sample(rng);
    const Eigen::VectorXd p0 = rng.normal_vector(target.dim());
    return std::abs(b_eta_quadrature(target, q0, p0, eta, quadrature_order).b_eta);
  });
  const double e4L = std::pow(eta, 4) * L;
  const double bound = e4L * target.profile().upsilon +
                       std::sqrt(11.0 * e4L * upsilon_ell(target.profile(), ell / 2));
  return finish_report("b_eta", target.name(), ell, bound, std::move(lps), seed);
}

MomentReport moment_delta(const Target& target, double eta, int ell, std::uint64_t n,
                          std::uint64_t seed) {
  if (ell < 2 || ell % 2 != 0) throw precondition_error("moment_delta: ell must be even");
  require_positive_n(n, "moment_delta");
  require_exact_sampler(target, "moment_delta");
  const double L = target.profile().L;
  if (!(eta > 0.0) || eta * eta * L > 0.5)
    throw precondition_error("moment_delta: requires eta > 0 and eta^2 L <= 1/2");
  auto lps = collect_log_powers(n, ell, seed, [&](std::uint64_t, RngStream& rng) {
    const Eigen::VectorXd q0 = target.sample(rng);
    const Eigen::VectorXd p0 = rng.normal_vector(target.dim());
    return std::abs(energy_difference(target, {q0, p0}, eta));
  });
  const double e4L = std::pow(eta, 4) * L;
  const double bound = 3.0 * e4L * upsilon_ell(target.profile(), ell) +
                       4.0 * std::sqrt(e4L * upsilon_ell(target.profile(), ell / 2));
  return finish_report("delta", target.name(), ell, bound, std::move(lps), seed);
}

DeltaDiagnostics delta_diagnostics(const Target& target, double eta, std::uint64_t n,
                                   std::uint64_t seed) {
  require_positive_n(n, "delta_diagnostics");
  require_exact_sampler(target, "delta_diagnostics");
  std::vector<double> deltas(n), exps(n);
  RngStream rng(seed, stream_area::kEstimators);
  for (std::uint64_t i = 0; i < n; ++i) {
    rng.set_step(i);
    const Eigen::VectorXd q0 = target.sample(rng);
    const Eigen::VectorXd p0 = rng.normal_vector(target.dim());
    deltas[i] = energy_difference(target, {q0, p0}, eta);
    exps[i] = std::exp(-deltas[i]);
  }
  DeltaDiagnostics d;
  d.n = n;
  d.mean_delta = mean(deltas);
  d.mean_exp_neg_delta = mean(exps);
  return d;
}

TailReport acceptance_tail(const Target& target, double delta, std::uint64_t n,
                           std::uint64_t seed) {
  require_positive_n(n, "acceptance_tail");
  require_exact_sampler(target, "acceptance_tail");
  TailReport r;
  r.target = target.name();
  r.delta = delta;
  r.eta = tail_condition_max_eta(target.profile(), delta);
  r.n = n;
  RngStream rng(seed, stream_area::kEstimators);
  for (std::uint64_t i = 0; i < n; ++i) {
    rng.set_step(i);
    const Eigen::VectorXd q0 = target.sample(rng);
    const Eigen::VectorXd p0 = rng.normal_vector(target.dim());
    if (energy_difference(target, {q0, p0}, r.eta) > 0.25) ++r.exceed_count;
  }
  r.exceed_rate = double(r.exceed_count) / double(n);
  r.threshold = delta + 3.0 * std::sqrt(delta * (1.0 - delta) / double(n));
  r.pass = r.exceed_rate <= r.threshold;
  return r;
}

OverlapReport proposal_overlap_exact(const Target& target, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& y, double eta) {
  if (!(eta > 0.0)) throw precondition_error("proposal_overlap_exact: eta must be positive");
  if (eta * eta * target.profile().L > 1.0)
    throw precondition_error("proposal_overlap_exact: requires eta^2 L <= 1");
  if (x.size() != target.dim() || y.size() != target.dim())
    throw precondition_error("proposal_overlap_exact: point dimension mismatch");
  const double h = 0.5 * eta * eta;
  const Eigen::VectorXd mx = x - h * target.gradient(x);
  const Eigen::VectorXd my = y - h * target.gradient(y);
  OverlapReport r;
  r.eta = eta;
  r.dist = (x - y).norm();
  // proposals are N(m, 2h I) with sqrt(2h) = eta; equal-covariance Gaussian
  // total variation has a closed form in the mean distance
  r.tv_exact = 2.0 * normal_cdf((mx - my).norm() / (2.0 * eta)) - 1.0;
  r.tv_bound = std::min(1.0, 2.0 * r.dist / eta);
  r.pass = r.tv_exact <= r.tv_bound;
  return r;
}

}
