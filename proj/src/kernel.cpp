#include "malalab/kernel.hpp"

#include <cmath>
#include <cstring>
#include <ostream>
#include <istream>
#include <sstream>

#include "malalab/errors.hpp"

namespace malalab {

namespace {

std::string point_to_string(const Eigen::VectorXd& q) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < q.size(); ++i) os << (i ? ", " : "") << q[i];
  os << ")";
  return os.str();
}

Eigen::VectorXd checked_gradient(const Target& target, const Eigen::VectorXd& q) {
  Eigen::VectorXd g = target.gradient(q);
  if (!g.allFinite())
    throw numeric_error("non-finite gradient at q=" + point_to_string(q) + " for target '" +
                        target.name() + "'");
  return g;
}

}

PhasePoint leapfrog(const Target& target, const PhasePoint& z0, double eta) {
  if (!(eta > 0.0)) throw precondition_error("leapfrog: eta must be positive");
  if (z0.q.size() != target.dim() || z0.p.size() != target.dim())
    throw precondition_error("leapfrog: phase point dimension mismatch");
  const Eigen::VectorXd g0 = checked_gradient(target, z0.q);
  PhasePoint z;
  z.q = z0.q + eta * z0.p - (0.5 * eta * eta) * g0;
  const Eigen::VectorXd g1 = checked_gradient(target, z.q);
  z.p = z0.p - (0.5 * eta) * (g0 + g1);
  return z;
}

double energy_difference(const Target& target, const PhasePoint& z0, double eta) {
  const PhasePoint z1 = leapfrog(target, z0, eta);
  return target.potential(z1.q) - target.potential(z0.q) +
         0.5 * (z1.p.squaredNorm() - z0.p.squaredNorm());
}

double StepSizePolicy::predicted_iterations(double c1) const {
  if (provenance != "theorem1" || !denominator || !psi || !log_m_over_eps)
    throw precondition_error("predicted_iterations: only available for theorem1 policies");
  return c1 * (*denominator) / ((*psi) * (*psi)) * (*log_m_over_eps);
}

StepSizePolicy manual_policy(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw precondition_error("manual_policy: eta must be positive and finite");
  StepSizePolicy p;
  p.eta = eta;
  p.h = 0.5 * eta * eta;
  p.provenance = "manual";
  return p;
}

double tail_condition_max_eta(const SmoothnessProfile& profile, double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw precondition_error("tail_condition_max_eta: delta must lie in (0,1)");
  if (!(profile.L > 0.0) || !(profile.upsilon > 0.0))
    throw precondition_error("tail_condition_max_eta: profile needs positive L and upsilon");
  const double cap = std::max(profile.L * profile.L * std::log(1.0 / delta),
                              profile.L * profile.upsilon);
  return std::pow(1.0 / (4096.0 * cap), 0.25);
}

namespace {

double theorem1_denominator(const SmoothnessProfile& profile, double M, double eps) {
  if (!profile.psi)
    throw precondition_error("theorem1 policy: profile has no isoperimetric coefficient psi");
  if (!(*profile.psi > 0.0)) throw precondition_error("theorem1 policy: psi must be positive");
  if (!(M >= 1.0)) throw precondition_error("theorem1 policy: warmness M must be >= 1");
  if (!(eps > 0.0)) throw precondition_error("theorem1 policy: eps must be positive");
  if (!(profile.L > 0.0) || !(profile.upsilon > 0.0))
    throw precondition_error("theorem1 policy: profile needs positive L and upsilon");
  const double lu = profile.L * profile.upsilon;
  const double log_arg = std::pow(lu, 0.25) / *profile.psi * (M / eps);
  return std::max(std::sqrt(lu), profile.L * std::log(log_arg));
}

}

double default_c0(const SmoothnessProfile& profile, double M, double eps) {
  // calibrated so the resulting eta passes the delta = 0.05 tail condition
  const double eta_max = tail_condition_max_eta(profile, 0.05);
  const double h_max = 0.5 * eta_max * eta_max;
  return h_max * theorem1_denominator(profile, M, eps);
}

StepSizePolicy theorem1_policy(const SmoothnessProfile& profile, double M, double eps,
                               std::optional<double> c0) {
  const double denom = theorem1_denominator(profile, M, eps);
  const double c0v = c0 ? *c0 : default_c0(profile, M, eps);
  if (!(c0v > 0.0)) throw precondition_error("theorem1 policy: c0 must be positive");
  StepSizePolicy p;
  p.h = c0v / denom;
  p.eta = std::sqrt(2.0 * p.h);
  p.provenance = "theorem1";
  p.c0 = c0v;
  p.denominator = denom;
  p.psi = *profile.psi;
  p.log_m_over_eps = std::log(M / eps);
  return p;
}

void mala_step(const Target& target, ChainState& state, const StepSizePolicy& policy,
               bool lazy) {
  state.rng.set_step(state.iteration);
  if (lazy && state.rng.uniform() < 0.5) {
    ++state.held;
    ++state.iteration;
    return;
  }
  const Eigen::VectorXd p0 = state.rng.normal_vector(target.dim());
  double delta;
  PhasePoint z1;
  bool proposal_ok = true;
  try {
    const PhasePoint z0{state.q, p0};
    z1 = leapfrog(target, z0, policy.eta);
    delta = target.potential(z1.q) - target.potential(state.q) +
            0.5 * (z1.p.squaredNorm() - p0.squaredNorm());
    if (!std::isfinite(delta) || !z1.q.allFinite()) proposal_ok = false;
  } catch (const numeric_error&) {
    proposal_ok = false;  // treated as delta = +inf
  }
  const double u = state.rng.uniform_pos();
  if (proposal_ok && std::log(u) < -delta) {
    state.q = std::move(z1.q);
    ++state.accepted;
  } else {
    ++state.rejected;
  }
  ++state.iteration;
}

double Trajectory::acceptance_rate() const {
  const std::uint64_t proposals = accepted_total + rejected_total;
  return proposals ? double(accepted_total) / double(proposals) : 0.0;
}

Trajectory run_chain(const Target& target, const Eigen::VectorXd& init,
                     const StepSizePolicy& policy, std::uint64_t n_steps, std::uint64_t seed,
                     std::uint64_t thinning, bool lazy, std::uint64_t stream) {
  if (n_steps < 1) throw precondition_error("run_chain: n_steps must be >= 1");
  if (thinning < 1) throw precondition_error("run_chain: thinning must be >= 1");
  if (init.size() != target.dim()) throw precondition_error("run_chain: init dimension mismatch");

  ChainState state(init, seed, stream);
  Trajectory traj;
  traj.dim = target.dim();
  traj.n_steps = n_steps;
  const std::uint64_t n_saved = n_steps / thinning;
  traj.positions.resize(Eigen::Index(n_saved), target.dim());
  traj.steps.reserve(n_saved);
  traj.accepted.reserve(n_saved);

  Eigen::Index row = 0;
  for (std::uint64_t i = 0; i < n_steps; ++i) {
    const std::uint64_t acc_before = state.accepted;
    mala_step(target, state, policy, lazy);
    if ((i + 1) % thinning == 0 && row < traj.positions.rows()) {
      traj.positions.row(row) = state.q;
      traj.steps.push_back(state.iteration);
      traj.accepted.push_back(state.accepted > acc_before ? 1 : 0);
      ++row;
    }
  }
  traj.accepted_total = state.accepted;
  traj.rejected_total = state.rejected;
  traj.held_total = state.held;
  return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<std::string>& header_lines) {
  for (const auto& line : header_lines) os << "# " << line << "\n";
  os << "step";
  for (Eigen::Index j = 0; j < traj.dim; ++j) os << ",q_" << (j + 1);
  os << ",accepted\n";
  char buf[32];
  for (Eigen::Index i = 0; i < traj.positions.rows(); ++i) {
    os << traj.steps[std::size_t(i)];
    for (Eigen::Index j = 0; j < traj.dim; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", traj.positions(i, j));
      os << ',' << buf;
    }
    os << ',' << int(traj.accepted[std::size_t(i)]) << "\n";
  }
}

void write_trajectory_bin(std::ostream& os, const Trajectory& traj) {
  os.write("MALA1", 5);
  const std::uint32_t d = std::uint32_t(traj.dim);
  const std::uint64_t n = std::uint64_t(traj.positions.rows());
  os.write(reinterpret_cast<const char*>(&d), sizeof d);
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (Eigen::Index i = 0; i < traj.positions.rows(); ++i)
    for (Eigen::Index j = 0; j < traj.dim; ++j) {
      const double v = traj.positions(i, j);
      os.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
}

Eigen::MatrixXd read_trajectory_bin(std::istream& is) {
  char magic[5];
  is.read(magic, 5);
  if (!is || std::memcmp(magic, "MALA1", 5) != 0)
    throw precondition_error("read_trajectory_bin: bad magic");
  std::uint32_t d = 0;
  std::uint64_t n = 0;
  is.read(reinterpret_cast<char*>(&d), sizeof d);
  is.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!is || d == 0) throw precondition_error("read_trajectory_bin: bad shape");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double v;
      is.read(reinterpret_cast<char*>(&v), sizeof v);
      if (!is) throw precondition_error("read_trajectory_bin: truncated payload");
      m(i, j) = v;
    }
  return m;
}

}
