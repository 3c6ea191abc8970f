#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "malalab/kernel.hpp"
#include "malalab/targets.hpp"

namespace malalab {

// The moment-lemma constant ups_ell = upsilon + 2*(ell-1)*L.
double upsilon_ell(const SmoothnessProfile& profile, int ell);

// Exact split of the one-step energy error:
//   delta = b_eta + (eta^2/8) * |grad f(q_eta) - grad f(q_0)|^2,
// where b_eta couples (grad f(q_0), p_0) to two time integrals of the
// gradient along the position curve q_t = q_0 + t p_0 - (t^2/2) grad f(q_0).
// The integrals are evaluated with Gauss-Legendre quadrature on [0, eta]
// (exact for quadratic targets at order >= 2), so residual() is a direct
// check of the identity.
struct EnergyDecomposition {
  double delta = 0.0;
  double b_eta = 0.0;
  double grad_diff_term = 0.0;
  int quadrature_order = 0;
  double residual() const;  // |delta - b_eta - grad_diff_term|
};

EnergyDecomposition decomposition_check(const Target& target, const PhasePoint& z0, double eta,
                                        int quadrature_order);

// Shared moment-estimate record. The estimate is [mean x_i]^(1/ell) of the
// lemma's ell-th power samples; pass means the lower end of the 99%
// percentile-bootstrap interval does not exceed the bound (one sided).
struct MomentReport {
  std::string lemma;
  std::string target;
  int ell = 0;
  std::uint64_t n = 0;
  double estimate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // bound - estimate
  bool pass = false;
};

// [E |grad f(q)|^(2 ell)]^(1/ell) <= ups_ell for q from the target.
MomentReport moment_grad_norm(const Target& target, int ell, std::uint64_t n,
                              std::uint64_t seed);

// [E (p' H(x) p)^ell]^(1/ell) <= ups_ell for p ~ N(0, I) at a fixed point x.
MomentReport moment_quadratic_form(const Target& target, const Eigen::VectorXd& x, int ell,
                                   std::uint64_t n, std::uint64_t seed);

// Same quadratic form but evaluated at q_t with (q_0, p_0) from the extended
// target; bound doubles to 2*ups_ell. Requires t^2 L <= 1.
MomentReport moment_quadratic_form_at_qt(const Target& target, double t, int ell,
                                         std::uint64_t n, std::uint64_t seed);

// [E |grad f(q_t) - grad f(q_0)|^(2 ell)]^(1/ell) <= 4 t^2 L ups_ell, plus
// the same comparison against q_eta with t replaced by eta - t. Requires
// 0 <= t <= eta and eta^2 L <= 1.
struct GradDiffReports {
  MomentReport vs_q0;
  MomentReport vs_qeta;
};
GradDiffReports moment_grad_diff(const Target& target, double t, double eta, int ell,
                                 std::uint64_t n, std::uint64_t seed);

// [E b_eta^ell]^(1/ell) <= eta^4 L ups + sqrt(11 eta^4 L ups_{ell/2});
// ell even, eta^2 L <= 1/2.
MomentReport moment_b_eta(const Target& target, double eta, int ell, std::uint64_t n,
                          std::uint64_t seed, int quadrature_order = 32);

// [E delta^ell]^(1/ell) <= 3 eta^4 L ups_ell + 4 sqrt(eta^4 L ups_{ell/2});
// ell even, eta^2 L <= 1/2.
MomentReport moment_delta(const Target& target, double eta, int ell, std::uint64_t n,
                          std::uint64_t seed);

// Stationarity diagnostics for the same samples: E delta (should be >= 0)
// and E exp(-delta) (should be 1); recorded, not asserted.
struct DeltaDiagnostics {
  double mean_delta = 0.0;
  double mean_exp_neg_delta = 0.0;
  std::uint64_t n = 0;
};
DeltaDiagnostics delta_diagnostics(const Target& target, double eta, std::uint64_t n,
                                   std::uint64_t seed);

// P(delta > 1/4) over stationary (q_0, p_0) at the largest eta allowed by
// the tail condition for this delta; pass means the empirical rate stays
// under delta + 3 binomial standard errors.
struct TailReport {
  std::string target;
  double delta = 0.0;   // tail budget, not the energy error
  double eta = 0.0;
  std::uint64_t n = 0;
  std::uint64_t exceed_count = 0;
  double exceed_rate = 0.0;
  double threshold = 0.0;
  bool pass = false;
};
TailReport acceptance_tail(const Target& target, double delta, std::uint64_t n,
                           std::uint64_t seed);

// Exact total variation between the Gaussian proposal laws at x and y
// (equal covariance 2h I), against the overlap bound min{1, 2|x-y|/eta}.
struct OverlapReport {
  double eta = 0.0;
  double dist = 0.0;      // |x - y|
  double tv_exact = 0.0;
  double tv_bound = 0.0;
  bool pass = false;
};
OverlapReport proposal_overlap_exact(const Target& target, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& y, double eta);

}
