#include "flagsim/windings.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace flagsim {

using std::complex;

std::vector<SpherePathPoint> sphere_bm_skew(
    const std::vector<FlagPoint>& flags, const std::vector<AreaState>& areas,
    const DeformationParams& def, double dt, PathRng& rng) {
  if (flags.size() != areas.size())
    throw std::invalid_argument("sphere_bm_skew: path length mismatch");
  const int n = static_cast<int>(flags.front().w.cols());
  if (def.mu.size() != n)
    throw std::invalid_argument("sphere_bm_skew: mu dimension mismatch");
  if (def.mu.minCoeff() <= 0.0)
    throw std::invalid_argument("sphere_bm_skew: mu entries must be positive");
  const double sd = std::sqrt(dt);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(n);
  std::vector<SpherePathPoint> out;
  out.reserve(flags.size());
  for (std::size_t k = 0; k < flags.size(); ++k) {
    if (k > 0)
      for (int j = 0; j < n; ++j) beta(j) += rng.gaussian(sd);
    SpherePathPoint pt;
    pt.t = areas[k].t;
    pt.eta = def.mu.cwiseProduct(beta) + areas[k].theta;
    pt.X.resize(n);
    for (int j = 0; j < n; ++j) {
      const double mod = 1.0 / std::sqrt(1.0 + flags[k].r2(j));
      pt.X(j) = mod * complex<double>(std::cos(pt.eta(j)), std::sin(pt.eta(j)));
    }
    out.push_back(std::move(pt));
  }
  return out;
}

UnwrapResult unwrap_windings(const std::vector<Eigen::VectorXcd>& path) {
  UnwrapResult res;
  if (path.empty()) return res;
  const int n = static_cast<int>(path.front().size());
  res.angles.reserve(path.size());
  Eigen::VectorXd ang(n);
  for (int j = 0; j < n; ++j) {
    if (std::abs(path[0](j)) < 1e-6)
      throw std::domain_error("unwrap_windings: modulus below 1e-6");
    ang(j) = std::arg(path[0](j));
    if (ang(j) < 0.0) ang(j) += 2.0 * M_PI;  // start on the [0, 2pi) branch
  }
  res.angles.push_back(ang);
  for (std::size_t k = 1; k < path.size(); ++k) {
    for (int j = 0; j < n; ++j) {
      if (std::abs(path[k](j)) < 1e-6)
        throw std::domain_error("unwrap_windings: modulus below 1e-6");
      const double inc = std::arg(path[k](j) / path[k - 1](j));
      if (std::abs(inc) >= M_PI / 2.0) ++res.flagged_steps;
      ang(j) += inc;
    }
    res.angles.push_back(ang);
  }
  return res;
}

SpitzerState spitzer_functionals(const FlatComplexPath& path) {
  SpitzerState st;
  if (path.z.empty()) return st;
  const int n = static_cast<int>(path.z.front().size());
  st.zeta = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k + 1 < path.z.size(); ++k) {
    const Eigen::VectorXcd& z = path.z[k];
    double r2tot = 0.0;
    for (int j = 0; j < n; ++j) {
      const double r2 = std::norm(z(j));
      if (r2 < 1e-12) st.aborted = true;
      r2tot += r2;
      const complex<double> dz = path.z[k + 1](j) - z(j);
      st.zeta(j) += std::imag(std::conj(z(j)) * dz) / r2;
    }
    st.clock += path.dt / r2tot;
    ++st.steps;
  }
  st.t = path.dt * static_cast<double>(st.steps);
  return st;
}

namespace {

// Log-scale excursion of coordinate j inside opt.dip_radius. In the clock
// time change dh = dt / |Z_j|^2 the process log Z_j is a standard complex
// Brownian motion, so the excursion law carries no step-size bias: the
// log-modulus takes distance-proportional Gaussian steps with a bridge test
// for exit-level crossings between grid points, and the winding angle gains
// an independent N(0, dh) increment per step. The other coordinates advance
// on accumulated slices of the physical time the dip consumes (flat
// increments are exact at any step size) and the clock accrues per slice at
// the current moduli. Returns the physical time spent; ends early when
// another coordinate falls inside the dip radius, leaving the caller's
// dispatch loop to hand that coordinate its own excursion.
double run_winding_dip(int j, Eigen::VectorXcd& z, SpitzerState& st,
                       double budget, const SpitzerOptions& opt, PathRng& rng) {
  const int n = static_cast<int>(z.size());
  double rho = 0.5 * std::log(std::max(std::norm(z(j)), 1e-300));
  double phi = std::arg(z(j));
  const double rho_exit = std::log(2.0 * opt.dip_radius);
  const double dip_r2 = opt.dip_radius * opt.dip_radius;
  double dip_t = 0.0, pending = 0.0;

  // advance every other coordinate across the accrued physical time and
  // charge the clock at the pre-slice moduli; reports a new dip candidate
  const auto flush = [&](double slice) {
    double r2tot = std::exp(2.0 * rho);
    for (int l = 0; l < n; ++l)
      if (l != j) r2tot += std::norm(z(l));
    st.clock += slice / r2tot;
    const double sd = std::sqrt(slice);
    bool entered = false;
    for (int l = 0; l < n; ++l) {
      if (l == j) continue;
      const complex<double> dz(rng.gaussian(sd), rng.gaussian(sd));
      st.zeta(l) += std::arg((z(l) + dz) * std::conj(z(l)));
      z(l) += dz;
      if (std::norm(z(l)) < dip_r2) entered = true;
    }
    return entered;
  };

  while (rho < rho_exit && st.steps < opt.max_steps) {
    ++st.steps;
    const double d = rho_exit - rho;
    double dh = std::max(d * d / 9.0, 0.01);
    const double r2 = std::exp(2.0 * rho);  // may underflow deep down; fine
    bool final_step = false;
    if (dip_t + r2 * dh >= budget) {
      // land exactly on t_end mid-dip
      dh = (budget - dip_t) / r2;
      final_step = true;
    }
    double rho_new = rho + std::sqrt(dh) * rng.gaussian();
    double used = dh;
    if (!final_step) {
      // the walk must stop at the barrier: physical time above it is not
      // h-parameterized, so an endpoint overshoot or a bridge crossing both
      // restart from the exit level and charge the expected half step
      bool crossed = rho_new >= rho_exit;
      if (!crossed) {
        const double d1 = rho_exit - rho_new;
        crossed = rng.uniform() < std::exp(-2.0 * d * d1 / dh);
      }
      if (crossed) {
        rho_new = rho_exit;
        used = 0.5 * dh;
      }
    }
    const double dzeta = std::sqrt(used) * rng.gaussian();
    st.zeta(j) += dzeta;
    phi += dzeta;
    // midpoint modulus for the physical-time charge; clamp so the dip can
    // never run past its share of the horizon
    double step_t = final_step ? r2 * used : std::exp(rho + rho_new) * used;
    if (dip_t + step_t >= budget) {
      step_t = budget - dip_t;
      final_step = true;
    }
    rho = rho_new;
    dip_t = final_step ? budget : dip_t + step_t;
    pending += step_t;

    double r2min_other = std::numeric_limits<double>::infinity();
    for (int l = 0; l < n; ++l)
      if (l != j) r2min_other = std::min(r2min_other, std::norm(z(l)));
    double cap = opt.target_phase_var * r2min_other;
    if (opt.dt_cap > 0.0) cap = std::min(cap, opt.dt_cap);
    if (n > 1 && pending >= cap) {
      const bool entered = flush(pending);
      pending = 0.0;
      if (entered) break;
    }
    if (final_step) break;
  }
  if (n > 1 && pending > 0.0) flush(pending);
  z(j) = std::polar(std::exp(rho), phi);
  return dip_t;
}

}  // namespace

SpitzerState simulate_spitzer(const Eigen::VectorXcd& z0, double t_end,
                              const SpitzerOptions& opt, PathRng& rng) {
  const int n = static_cast<int>(z0.size());
  SpitzerState st;
  st.zeta = Eigen::VectorXd::Zero(n);
  Eigen::VectorXcd z = z0;
  const double dip_r2 = opt.dip_radius * opt.dip_radius;
  while (st.t < t_end) {
    if (st.steps >= opt.max_steps) {
      st.aborted = true;
      break;
    }
    double r2min = std::norm(z(0));
    double r2tot = r2min;
    int jmin = 0;
    for (int j = 1; j < n; ++j) {
      const double r2 = std::norm(z(j));
      r2tot += r2;
      if (r2 < r2min) {
        r2min = r2;
        jmin = j;
      }
    }
    if (r2min < dip_r2) {
      st.t += run_winding_dip(jmin, z, st, t_end - st.t, opt, rng);
      continue;
    }
    double dt = opt.target_phase_var * r2min;
    if (opt.dt_cap > 0.0) dt = std::min(dt, opt.dt_cap);
    dt = std::min(dt, t_end - st.t);
    const double sd = std::sqrt(dt);
    st.clock += dt / r2tot;
    for (int j = 0; j < n; ++j) {
      const complex<double> dz(rng.gaussian(sd), rng.gaussian(sd));
      st.zeta(j) += std::arg((z(j) + dz) * std::conj(z(j)));
      z(j) += dz;
    }
    st.t += dt;
    ++st.steps;
  }
  return st;
}

}  // namespace flagsim
