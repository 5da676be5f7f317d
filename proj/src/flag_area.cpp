#include "flagsim/flag_area.hpp"

#include <cmath>
#include <stdexcept>

#include "flagsim/errors.hpp"

namespace flagsim {

FlagPoint project_to_flag(const Eigen::MatrixXcd& U) {
  FlagPoint p;
  project_to_flag_into(U, p);
  return p;
}

void project_to_flag_into(const Eigen::MatrixXcd& U, FlagPoint& p) {
  const int n = static_cast<int>(U.rows());
  p.w.resize(n - 1, n);
  p.r2.resize(n);
  for (int j = 0; j < n; ++j) {
    const std::complex<double> base = U(n - 1, j);
    if (std::abs(base) < kChartFloor)
      throw ChartExitError(j, std::abs(base));
    double r2 = 0.0;
    for (int k = 0; k < n - 1; ++k) {
      p.w(k, j) = U(k, j) / base;
      r2 += std::norm(p.w(k, j));
    }
    p.r2(j) = r2;
  }
}

double chart_margin(const Eigen::MatrixXcd& U) {
  const int n = static_cast<int>(U.rows());
  double m = std::abs(U(n - 1, 0));
  for (int j = 1; j < n; ++j) m = std::min(m, std::abs(U(n - 1, j)));
  return m;
}

Eigen::VectorXd lambda_from_U(const Eigen::MatrixXcd& U) {
  const int n = static_cast<int>(U.rows());
  Eigen::VectorXd lam(n);
  for (int j = 0; j < n; ++j) lam(j) = std::norm(U(n - 1, j));
  return lam;
}

Eigen::VectorXd lambda_from_flag(const FlagPoint& p) {
  return (1.0 + p.r2.array()).inverse().matrix();
}

AreaAccumulator::AreaAccumulator(FlagPoint start) : prev_(std::move(start)) {
  const int n = static_cast<int>(prev_.w.cols());
  s_.theta = Eigen::VectorXd::Zero(n);
  s_.diag_clock = Eigen::VectorXd::Zero(n);
  s_.t = 0.0;
}

void AreaAccumulator::step(const FlagPoint& next, double dt) {
  const int n = static_cast<int>(prev_.w.cols());
  bool coarse = false;
  for (int j = 0; j < n; ++j) {
    double im_sum = 0.0;
    double dw2 = 0.0;
    for (int k = 0; k < n - 1; ++k) {
      const std::complex<double> dw = next.w(k, j) - prev_.w(k, j);
      im_sum += std::imag(std::conj(prev_.w(k, j)) * dw);
      dw2 += std::norm(dw);
    }
    const double scale = 1.0 + prev_.r2(j);
    if (std::sqrt(dw2) > scale) coarse = true;
    s_.theta(j) -= im_sum / scale;
    s_.diag_clock(j) += prev_.r2(j) * dt;
  }
  if (coarse) ++under_resolved_;
  s_.t += dt;
  prev_ = next;
}

std::vector<AreaState> integrate_area(const std::vector<FlagPoint>& path,
                                      double dt) {
  std::vector<AreaState> out;
  if (path.empty()) return out;
  AreaAccumulator acc(path.front());
  out.reserve(path.size());
  out.push_back(acc.state());
  for (std::size_t k = 1; k < path.size(); ++k) {
    acc.step(path[k], dt);
    out.push_back(acc.state());
  }
  return out;
}

Eigen::MatrixXd area_covariance(const AreaState& s) {
  const int n = static_cast<int>(s.theta.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Constant(n, n, s.t);
  for (int j = 0; j < n; ++j) M(j, j) = s.diag_clock(j);
  return M;
}

Eigen::VectorXd sample_area_given_radial(const AreaState& s, PathRng& rng) {
  if (s.theta.size() < 2)
    throw std::invalid_argument("sample_area_given_radial: need n >= 2");
  const Eigen::MatrixXd M = area_covariance(s);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  Eigen::VectorXd ev = es.eigenvalues();
  const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  if (ev.minCoeff() < -1e-6 * scale) throw CovarianceNotPsd(ev.minCoeff());
  Eigen::VectorXd g(ev.size());
  for (int k = 0; k < ev.size(); ++k)
    g(k) = std::sqrt(std::max(ev(k), 0.0)) * rng.gaussian();
  return es.eigenvectors() * g;
}

Eigen::MatrixXcd horizontal_lift_state(const FlagPoint& p,
                                       const Eigen::VectorXd& theta) {
  const int n = static_cast<int>(p.w.cols());
  Eigen::MatrixXcd X(n, n);
  for (int j = 0; j < n; ++j) {
    const double norm = std::sqrt(1.0 + p.r2(j));
    const std::complex<double> phase(std::cos(theta(j)), std::sin(theta(j)));
    for (int k = 0; k < n - 1; ++k) X(k, j) = phase * p.w(k, j) / norm;
    X(n - 1, j) = phase / norm;
  }
  return X;
}

namespace {

/// Shared Euler kernel: increments lambda in place; reflect + renormalize.
void euler_radial_step(Eigen::VectorXd& lam, double dt, PathRng& rng,
                       Eigen::VectorXd& delta) {
  const int n = static_cast<int>(lam.size());
  const double sd = std::sqrt(dt);
  for (int j = 0; j < n; ++j) delta(j) = 2.0 * (1.0 - n * lam(j)) * dt;
  for (int l = 0; l < n; ++l) {
    for (int j = l + 1; j < n; ++j) {
      const double g = rng.gaussian(sd);
      const double vol = 2.0 * std::sqrt(lam(l) * lam(j)) * g;
      delta(j) += vol;   // the antisymmetric driver moves lambda_j ...
      delta(l) -= vol;   // ... and lambda_l by opposite amounts
    }
  }
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    lam(j) = std::abs(lam(j) + delta(j));
    sum += lam(j);
  }
  lam /= sum;
}

}  // namespace

Eigen::VectorXd jacobi_sde_step(const Eigen::VectorXd& lambda, double dt,
                                PathRng& rng) {
  Eigen::VectorXd lam = lambda;
  Eigen::VectorXd delta(lam.size());
  euler_radial_step(lam, dt, rng, delta);
  return lam;
}

namespace {

// Euler step for every coordinate except j, with lambda_j held at x. Pair
// noise between two block members stays antisymmetric; pairs involving j are
// dropped (their variance is O(x)) and the block is renormalized to 1 - x.
void euler_others_step(Eigen::VectorXd& lam, int j, double x, double dt,
                       PathRng& rng) {
  const int n = static_cast<int>(lam.size());
  const double sd = std::sqrt(dt);
  Eigen::VectorXd nl = lam;
  for (int l = 0; l < n; ++l)
    if (l != j) nl(l) += 2.0 * (1.0 - n * lam(l)) * dt;
  for (int l = 0; l < n; ++l) {
    if (l == j) continue;
    for (int m = l + 1; m < n; ++m) {
      if (m == j) continue;
      const double vol = 2.0 * std::sqrt(lam(l) * lam(m)) * rng.gaussian(sd);
      nl(m) += vol;
      nl(l) -= vol;
    }
  }
  double sum = 0.0;
  for (int l = 0; l < n; ++l)
    if (l != j) {
      nl(l) = std::abs(nl(l));
      sum += nl(l);
    }
  const double scale = (1.0 - x) / sum;
  for (int l = 0; l < n; ++l)
    if (l != j) lam(l) = nl(l) * scale;
}

// Log-scale excursion of coordinate j below opt.dip_enter. In the quadratic
// time change the log coordinate is Brownian motion with an O(x) drift, so
// distance-proportional steps simulate it without step-size bias; a bridge
// test catches barrier crossings that land back below the exit level. The
// other coordinates keep evolving on accumulated slices of the physical time
// the dip consumes, and every clock accrues per step at the current state.
// Returns the physical time spent. May end early (still below opt.dip_exit)
// when another coordinate falls below opt.dip_enter mid-dip; the caller's
// dispatch loop then hands the deeper coordinate its own excursion.
double run_dip(int j, Eigen::VectorXd& lam, Eigen::VectorXd& clock, double t_now,
               double t_end, const RadialOptions& opt, PathRng& rng) {
  const int n = static_cast<int>(lam.size());
  double x = lam(j);
  double ell = std::log(std::max(x, 1e-300));
  const double ell_exit = std::log(opt.dip_exit);
  const double budget = t_end - t_now;
  double dip_t = 0.0, pending = 0.0;
  long iters = 0;
  while (ell < ell_exit && iters++ < opt.max_dip_iters) {
    const double d = ell_exit - ell;
    double dh = std::max(d * d / 9.0, 0.01);
    x = std::exp(ell);  // may underflow to 0 deep down; fine
    const double time_rate = x / (4.0 * (1.0 - x));
    bool final_step = false;
    if (dip_t + time_rate * dh >= budget) {
      // land exactly on t_end mid-dip
      dh = (budget - dip_t) / time_rate;
      final_step = true;
    }
    double ell_new =
        ell + -(n - 1) * x / (2.0 * (1.0 - x)) * dh + std::sqrt(dh) * rng.gaussian();
    double used = dh;
    if (!final_step && ell_new < ell_exit) {
      const double d1 = ell_exit - ell_new;
      if (rng.uniform() < std::exp(-2.0 * d * d1 / dh)) {
        // crossed between grid points; charge the expected half step
        ell_new = ell_exit;
        used = 0.5 * dh;
      }
    }
    const double step_t = time_rate * used;
    clock(j) += used / 4.0;
    double min_other = 2.0;
    for (int l = 0; l < n; ++l) {
      if (l == j) continue;
      clock(l) += (1.0 - lam(l)) / lam(l) * step_t;
      min_other = std::min(min_other, lam(l));
    }
    dip_t = final_step ? budget : dip_t + step_t;
    pending += step_t;
    ell = ell_new;
    const double x_new = std::exp(std::min(ell, ell_exit));
    const double rescale = (1.0 - x_new) / (1.0 - x);
    for (int l = 0; l < n; ++l)
      if (l != j) lam(l) *= rescale;
    x = x_new;
    if (n > 2 && pending >= std::min(opt.dt, opt.bulk_refine * min_other)) {
      euler_others_step(lam, j, x, pending, rng);
      pending = 0.0;
      min_other = 2.0;
      for (int l = 0; l < n; ++l)
        if (l != j) min_other = std::min(min_other, lam(l));
      if (min_other < opt.dip_enter) break;
    }
    if (final_step) break;
  }
  if (n > 2 && pending > 0.0) euler_others_step(lam, j, x, pending, rng);
  const double lam_j = std::min(std::exp(ell), 2.0 * opt.dip_exit);
  double sum = 0.0;
  for (int l = 0; l < n; ++l)
    if (l != j) sum += lam(l);
  const double scale = (1.0 - lam_j) / sum;
  for (int l = 0; l < n; ++l)
    if (l != j) lam(l) *= scale;
  lam(j) = lam_j;
  return dip_t;
}

}  // namespace

RadialClockState run_radial_clock(const Eigen::VectorXd& lambda0, double t_end,
                                  const RadialOptions& opt, PathRng& rng) {
  RadialClockState s;
  s.lambda = lambda0;
  s.diag_clock = Eigen::VectorXd::Zero(lambda0.size());
  s.t = 0.0;
  const int n = static_cast<int>(lambda0.size());
  Eigen::VectorXd delta(n);
  while (s.t < t_end) {
    int jmin = 0;
    for (int j = 1; j < n; ++j)
      if (s.lambda(j) < s.lambda(jmin)) jmin = j;
    if (s.lambda(jmin) < opt.dip_enter) {
      s.t += run_dip(jmin, s.lambda, s.diag_clock, s.t, t_end, opt, rng);
      continue;
    }
    double dt = std::min(opt.dt, opt.bulk_refine * s.lambda(jmin));
    dt = std::min(dt, t_end - s.t);
    for (int j = 0; j < n; ++j)
      s.diag_clock(j) += (1.0 - s.lambda(j)) / s.lambda(j) * dt;
    euler_radial_step(s.lambda, dt, rng, delta);
    s.t += dt;
  }
  return s;
}

}  // namespace flagsim
