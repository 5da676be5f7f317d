#pragma once

#include <Eigen/Dense>
#include <vector>

#include "flagsim/rng.hpp"
#include "flagsim/unitary_sde.hpp"

namespace flagsim {

// Affine chart coordinates of a full flag: column j of an n x n unitary,
// divided by its last-row entry. Valid while every |U(n-1,j)| stays positive.
struct FlagPoint {
  Eigen::MatrixXcd w;   // (n-1) x n
  Eigen::VectorXd r2;   // squared column norms of w
};

// Hard floor on |U(n-1,j)| below which the chart is abandoned (throws).
// Columns merely below kChartWarn are usable but should be flagged upstream.
inline constexpr double kChartFloor = 1e-12;
inline constexpr double kChartWarn = 1e-4;

FlagPoint project_to_flag(const Eigen::MatrixXcd& U);
// In-place variant for hot loops; p is resized on first use only.
void project_to_flag_into(const Eigen::MatrixXcd& U, FlagPoint& p);
double chart_margin(const Eigen::MatrixXcd& U);  // min_j |U(n-1,j)|

Eigen::VectorXd lambda_from_U(const Eigen::MatrixXcd& U);     // |last row|^2
Eigen::VectorXd lambda_from_flag(const FlagPoint& p);         // 1/(1+r2)

// Stochastic areas theta_j plus the integrated clock sum_k (1-lambda_j)/lambda_j
// that drives their conditional Gaussian law.
struct AreaState {
  Eigen::VectorXd theta;
  Eigen::VectorXd diag_clock;
  double t = 0.0;
};

// Left-point Ito sums along a flag path:
//   dtheta_j = -sum_k Im(conj(w_kj) dw_kj) / (1 + r_j^2)
//   dclock_j = r_j^2 dt
class AreaAccumulator {
 public:
  explicit AreaAccumulator(FlagPoint start);
  void step(const FlagPoint& next, double dt);
  const AreaState& state() const { return s_; }
  const FlagPoint& point() const { return prev_; }
  // Steps where some column moved by more than its own scale 1 + r_j^2:
  // the left-point sum is then unreliable and the caller should refine dt.
  long under_resolved_steps() const { return under_resolved_; }

 private:
  FlagPoint prev_;
  AreaState s_;
  long under_resolved_ = 0;
};

std::vector<AreaState> integrate_area(const std::vector<FlagPoint>& path,
                                      double dt);

// Conditional covariance of theta(t) given the radial path: the diagonal is
// the accumulated clock, every off-diagonal entry is exactly t.
Eigen::MatrixXd area_covariance(const AreaState& s);

// Draws theta ~ N(0, area_covariance). Tiny negative eigenvalues (down to
// -1e-6 * scale) are clipped to zero; anything worse is a logic error.
Eigen::VectorXd sample_area_given_radial(const AreaState& s, PathRng& rng);

// Column-wise phase rotation of the normalized chart point: the horizontal
// lift of the flag path at areas theta. Unitary whenever the chart columns
// satisfy the mutual-orthogonality relation w_i^* w_j = -1.
Eigen::MatrixXcd horizontal_lift_state(const FlagPoint& p,
                                       const Eigen::VectorXd& theta);

// One Euler step of the radial simplex diffusion
//   dlambda_j = 2(1 - n lambda_j) dt + 2 sum_{l != j} sqrt(lambda_l lambda_j) dgamma_lj
// with antisymmetric Gaussian drivers gamma_lj = -gamma_jl. Negative
// coordinates are reflected, then the vector is renormalized to sum 1.
Eigen::VectorXd jacobi_sde_step(const Eigen::VectorXd& lambda, double dt,
                                PathRng& rng);

struct RadialOptions {
  double dt = 1e-3;          // base step
  double dip_enter = 0.04;   // switch to log-scale handling below this
  double dip_exit = 0.08;    // and return to Euler above this
  double bulk_refine = 3.75e-3;  // bulk step cap: dt <= bulk_refine * min lambda
  long max_dip_iters = 10'000'000;
};

struct RadialClockState {
  Eigen::VectorXd lambda;
  Eigen::VectorXd diag_clock;
  double t = 0.0;
};

// Simulates the radial diffusion to t_end while accumulating the clock.
// Excursions of a coordinate toward zero are handled in log scale through
// the time change dh = 4((1-lambda)/lambda)dt, under which ln(lambda) is a
// near-driftless Brownian motion and the clock gains exactly dh/4. That keeps
// the heavy clock tails intact, which fixed-step Euler distorts badly. The
// remaining coordinates keep their own dynamics during an excursion, stepped
// on accumulated slices of the physical time it consumes.
RadialClockState run_radial_clock(const Eigen::VectorXd& lambda0, double t_end,
                                  const RadialOptions& opt, PathRng& rng);

}  // namespace flagsim
