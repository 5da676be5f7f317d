#pragma once

#include <Eigen/Dense>
#include <vector>

#include "flagsim/flag_area.hpp"
#include "flagsim/rng.hpp"
#include "flagsim/unitary_sde.hpp"

namespace flagsim {

// Per-coordinate speed multipliers of the deformed-sphere construction.
struct DeformationParams {
  Eigen::VectorXd mu;
};

struct SpherePathPoint {
  Eigen::VectorXcd X;     // point on the unit sphere of C^n
  Eigen::VectorXd eta;    // accumulated winding angles mu_j beta_j + theta_j
  double t = 0.0;
};

// Skew-product assembly of a sphere Brownian motion: the radial part comes
// from the flag path (|X_j| = sqrt(lambda_j)), the phases advance by the
// stochastic areas plus independent scaled Brownian phases.
std::vector<SpherePathPoint> sphere_bm_skew(
    const std::vector<FlagPoint>& flags, const std::vector<AreaState>& areas,
    const DeformationParams& def, double dt, PathRng& rng);

struct UnwrapResult {
  std::vector<Eigen::VectorXd> angles;  // continuous angle per coordinate
  long flagged_steps = 0;               // increments with |d angle| >= pi/2
};

// Reconstructs continuous winding angles from principal-branch increments.
// Throws std::domain_error if any modulus drops below 1e-6.
UnwrapResult unwrap_windings(const std::vector<Eigen::VectorXcd>& path);

struct SpitzerState {
  Eigen::VectorXd zeta;   // winding angles of each coordinate
  double clock = 0.0;     // integral of dt / |Z|^2
  double t = 0.0;
  long steps = 0;
  bool aborted = false;   // hit the step cap before reaching t_end
};

// Left-point Ito sums along a stored uniform-step path.
SpitzerState spitzer_functionals(const FlatComplexPath& path);

struct SpitzerOptions {
  double target_phase_var = 0.02;  // per-step variance of the winding angle
  double dt_cap = 0.0;             // 0 disables the absolute cap
  double dip_radius = 0.1;         // log-scale handling below this modulus
  long max_steps = 2'000'000;
};

// Simulates flat complex Brownian motion with state-adapted steps
// (dt ~ phase_var * min_j |Z_j|^2, so increments stay exact in law) and
// accumulates the winding and clock functionals on the fly. Excursions of a
// coordinate inside the dip radius run in log scale under the clock time
// change, where log Z_j is again a complex Brownian motion; this resolves
// arbitrarily deep approaches to the origin at logarithmic cost instead of
// stalling or abandoning the path.
SpitzerState simulate_spitzer(const Eigen::VectorXcd& z0, double t_end,
                              const SpitzerOptions& opt, PathRng& rng);

}  // namespace flagsim
