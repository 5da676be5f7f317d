#include "flagsim/unitary_sde.hpp"

#include <stdexcept>

namespace flagsim {

using std::complex;

namespace {
// How many exponential steps to take between Gram-Schmidt sweeps. Rounding
// moves U off the group by about 1e-16 per step, so this cadence keeps the
// worst-case deviation near 1e-14 while the sweep cost stays negligible.
constexpr long kRenormEvery = 128;
}  // namespace

void sample_increment_into(SkewHermitianIncrement& inc, PathRng& rng) {
  const int n = static_cast<int>(inc.A.rows());
  const double sd = std::sqrt(inc.dt);
  for (int l = 0; l < n; ++l) {
    for (int j = l + 1; j < n; ++j) {
      const double re = rng.gaussian(sd);
      const double im = rng.gaussian(sd);
      inc.A(l, j) = complex<double>(re, im);
      inc.A(j, l) = complex<double>(-re, im);
    }
  }
  const double sqrt2 = std::sqrt(2.0);
  for (int j = 0; j < n; ++j)
    inc.A(j, j) = complex<double>(0.0, sqrt2 * rng.gaussian(sd));
}

SkewHermitianIncrement sample_increment(int n, double dt, PathRng& rng) {
  SkewHermitianIncrement inc{Eigen::MatrixXcd::Zero(n, n), dt};
  sample_increment_into(inc, rng);
  return inc;
}

Eigen::MatrixXcd fourier_start(int n) {
  Eigen::MatrixXcd F(n, n);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      const double a = 2.0 * M_PI * static_cast<double>(k) * j / n;
      F(k, j) = s * complex<double>(std::cos(a), std::sin(a));
    }
  return F;
}

Eigen::MatrixXcd start_with_lambda(const Eigen::VectorXd& lambda0) {
  const int n = static_cast<int>(lambda0.size());
  if (n < 2) throw std::invalid_argument("start_with_lambda: need n >= 2");
  for (int j = 0; j < n; ++j)
    if (!(lambda0(j) > 0.0) || !(lambda0(j) < 1.0))
      throw std::invalid_argument("start_with_lambda: point must be interior");
  if (std::abs(lambda0.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("start_with_lambda: coordinates must sum to 1");

  // Householder reflection mapping e_n to sqrt(lambda0): real orthogonal,
  // hence unitary, with last row exactly the requested moduli.
  Eigen::VectorXd v = lambda0.cwiseSqrt();
  Eigen::VectorXd u = -v;
  u(n - 1) += 1.0;
  const double nrm2 = u.squaredNorm();
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  if (nrm2 > 0.0) H.noalias() -= (2.0 / nrm2) * u * u.transpose();
  return H.cast<complex<double>>();
}

UnitaryStepper::UnitaryStepper(int n) : n_(n) {
  if (n_ > 2) {
    H_.resize(n, n);
    T_.resize(n, n);
  }
}

void UnitaryStepper::apply(Eigen::MatrixXcd& U, const Eigen::MatrixXcd& A) {
  if (n_ == 2) {
    // A = i(t0 I + v.sigma); exp(A) = e^{i t0}(cos|v| I + i sin|v|/|v| v.sigma)
    const double h11 = A(0, 0).imag();
    const double h22 = A(1, 1).imag();
    const complex<double> h12(A(0, 1).imag(), -A(0, 1).real());  // -i*A(0,1)
    const double t0 = 0.5 * (h11 + h22);
    const double d = 0.5 * (h11 - h22);
    const double vn = std::sqrt(d * d + std::norm(h12));
    double c = std::cos(vn);
    double snc = (vn < 1e-12) ? 1.0 - vn * vn / 6.0 : std::sin(vn) / vn;
    const complex<double> phase(std::cos(t0), std::sin(t0));
    const complex<double> i1(0.0, 1.0);
    const complex<double> e00 = phase * (c + i1 * snc * d);
    const complex<double> e11 = phase * (c - i1 * snc * d);
    const complex<double> e01 = phase * i1 * snc * h12;
    const complex<double> e10 = phase * i1 * snc * std::conj(h12);
    for (int r = 0; r < 2; ++r) {
      const complex<double> u0 = U(r, 0), u1 = U(r, 1);
      U(r, 0) = u0 * e00 + u1 * e10;
      U(r, 1) = u0 * e01 + u1 * e11;
    }
  } else {
    H_ = complex<double>(0.0, -1.0) * A;  // Hermitian
    solver_.compute(H_);
    const auto& V = solver_.eigenvectors();
    const auto& ev = solver_.eigenvalues();
    Eigen::VectorXcd phases(n_);
    for (int k = 0; k < n_; ++k)
      phases(k) = complex<double>(std::cos(ev(k)), std::sin(ev(k)));
    T_.noalias() = V * phases.asDiagonal() * V.adjoint();
    U = (U * T_).eval();
  }
  // Each product is unitary in exact arithmetic, but rounding pushes U off
  // the group by ~1e-16 per step and the deviation grows with the step
  // count. A periodic Gram-Schmidt sweep caps it near machine precision.
  if (++calls_ % kRenormEvery == 0) renormalize(U);
}

void UnitaryStepper::renormalize(Eigen::MatrixXcd& U) {
  for (int j = 0; j < n_; ++j) {
    for (int k = 0; k < j; ++k) U.col(j) -= U.col(k).dot(U.col(j)) * U.col(k);
    U.col(j) /= U.col(j).norm();
  }
}

Eigen::MatrixXcd expm_skew(const Eigen::MatrixXcd& A) {
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXcd E = Eigen::MatrixXcd::Identity(n, n);
  UnitaryStepper stepper(n);
  stepper.apply(E, A);
  return E;
}

UnitaryState step_unitary(const UnitaryState& state,
                          const SkewHermitianIncrement& inc) {
  UnitaryState next{state.U, state.t + inc.dt};
  UnitaryStepper stepper(static_cast<int>(state.U.rows()));
  stepper.apply(next.U, inc.A);
  return next;
}

std::vector<UnitaryState> unitary_path(const UnitaryState& start, double t_end,
                                       double dt, PathRng& rng) {
  std::vector<UnitaryState> path;
  path.reserve(static_cast<std::size_t>(std::lround(t_end / dt)) + 1);
  simulate_unitary_path(start, t_end, dt, rng,
                        [&](const UnitaryState& s) { path.push_back(s); });
  return path;
}

FlatComplexPath simulate_flat_complex(const Eigen::VectorXcd& z0, double t_end,
                                      double dt, PathRng& rng) {
  const long steps = std::lround(t_end / dt);
  const double sd = std::sqrt(dt);
  FlatComplexPath path;
  path.dt = dt;
  path.z.reserve(steps + 1);
  path.z.push_back(z0);
  Eigen::VectorXcd z = z0;
  for (long k = 0; k < steps; ++k) {
    for (int j = 0; j < z.size(); ++j)
      z(j) += complex<double>(rng.gaussian(sd), rng.gaussian(sd));
    path.z.push_back(z);
  }
  return path;
}

}  // namespace flagsim
