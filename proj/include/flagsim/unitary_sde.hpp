#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "flagsim/rng.hpp"

namespace flagsim {

// One Lie-algebra noise increment over a step of length dt. Off-diagonal
// pairs carry independent real/imaginary parts of variance dt each, the
// diagonal is purely imaginary with variance 2*dt, so entrywise
// d[A,conj(A)] = 2 dt and A*A contracts to -2n dt on the diagonal.
struct SkewHermitianIncrement {
  Eigen::MatrixXcd A;
  double dt = 0.0;
};

// Fills inc.A in place (draw order: off-diagonal row-major, then diagonal).
void sample_increment_into(SkewHermitianIncrement& inc, PathRng& rng);
SkewHermitianIncrement sample_increment(int n, double dt, PathRng& rng);

struct UnitaryState {
  Eigen::MatrixXcd U;
  double t = 0.0;
};

// Normalized discrete Fourier matrix: the default start. Every last-row
// entry has modulus 1/sqrt(n), so the affine chart is comfortably valid.
Eigen::MatrixXcd fourier_start(int n);

// Real orthogonal start whose last row is sqrt(lambda0), so the projected
// radial part is exactly lambda0. Requires an interior point summing to 1.
Eigen::MatrixXcd start_with_lambda(const Eigen::VectorXd& lambda0);

// U <- U * exp(A) for skew-Hermitian A, reusing factorization workspace.
// exp(A) is computed exactly (unitary to machine precision): closed Pauli
// form for n == 2, Hermitian eigendecomposition of -iA otherwise.
class UnitaryStepper {
 public:
  explicit UnitaryStepper(int n);
  void apply(Eigen::MatrixXcd& U, const Eigen::MatrixXcd& A);

 private:
  void renormalize(Eigen::MatrixXcd& U);

  int n_;
  long calls_ = 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver_;
  Eigen::MatrixXcd H_, T_;
};

Eigen::MatrixXcd expm_skew(const Eigen::MatrixXcd& A);

UnitaryState step_unitary(const UnitaryState& state,
                          const SkewHermitianIncrement& inc);

// Streams every state (including the start) through visit; stores nothing.
template <class Visit>
void simulate_unitary_path(UnitaryState state, double t_end, double dt,
                           PathRng& rng, Visit&& visit) {
  const int n = static_cast<int>(state.U.rows());
  UnitaryStepper stepper(n);
  SkewHermitianIncrement inc{Eigen::MatrixXcd::Zero(n, n), dt};
  const long steps = std::lround(t_end / dt);
  const double t0 = state.t;
  visit(state);
  for (long k = 0; k < steps; ++k) {
    sample_increment_into(inc, rng);
    stepper.apply(state.U, inc.A);
    state.t = t0 + static_cast<double>(k + 1) * dt;
    visit(state);
  }
}

std::vector<UnitaryState> unitary_path(const UnitaryState& start, double t_end,
                                       double dt, PathRng& rng);

// Flat Brownian motion in C^m: each coordinate gains N(0,dt) + i N(0,dt)
// per step. Used as the base process for winding functionals.
struct FlatComplexPath {
  std::vector<Eigen::VectorXcd> z;
  double dt = 0.0;
};

FlatComplexPath simulate_flat_complex(const Eigen::VectorXcd& z0, double t_end,
                                      double dt, PathRng& rng);

}  // namespace flagsim
