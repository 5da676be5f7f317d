#include "flagsim/charfn.hpp"

#include <cmath>
#include <stdexcept>

#include "flagsim/errors.hpp"

namespace flagsim {

namespace {

void check_args(const Eigen::VectorXd& u, double t,
                const Eigen::VectorXd& lambda0) {
  if (u.size() != lambda0.size())
    throw std::invalid_argument("cf: u and lambda0 sizes differ");
  if (u.size() < 2) throw std::invalid_argument("cf: need n >= 2");
  if (t <= 0.0) throw std::invalid_argument("cf: t must be positive");
  if (lambda0.minCoeff() <= 0.0)
    throw std::invalid_argument("cf: lambda0 must be interior");
  if (std::abs(lambda0.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("cf: lambda0 must sum to 1");
}

// exp(-(n-1) sum|u_j| t) * exp(-(t/2) sum_{j != m} (u_j u_m + |u_j u_m|))
double prefactor(const Eigen::VectorXd& u, double t) {
  const int n = static_cast<int>(u.size());
  double abs_sum = u.cwiseAbs().sum();
  double cross = 0.0;
  for (int j = 0; j < n; ++j)
    for (int m = 0; m < n; ++m) {
      if (m == j) continue;
      const double prod = u(j) * u(m);
      cross += prod + std::abs(prod);
    }
  return std::exp(-(n - 1.0) * abs_sum * t - 0.5 * cross * t);
}

// log of the Dirichlet normalizer Gamma(|k|+n/2) / prod Gamma(k_j+1/2)
double log_weight_normalizer(const JacobiParams& p) {
  double lg = std::lgamma(p.total() + 0.5 * p.n());
  for (int j = 0; j < p.n(); ++j) lg -= std::lgamma(p.kappa(j) + 0.5);
  return lg;
}

struct KernelSeries {
  SimplexBasis basis;
  Eigen::VectorXd coeff_at_x;  // decay(deg) * P_tau(x) per index
  double tail_bound = 0.0;
  int levels = 0;
};

// Truncated spectral kernel q_{s}(x, .) for params p: same sup-norm envelope
// tail rule as heat_kernel, so the cut is valid at every second argument.
KernelSeries kernel_series_at(const JacobiParams& p, double s,
                              const Eigen::VectorXd& x, double tol,
                              int degree_cap = 60) {
  const int d = p.n() - 1;
  const double c = p.total() + 0.5 * (p.n() - 2);
  SimplexBasis basis(p, degree_cap);
  const auto& idx = basis.indices();

  std::vector<double> level_env(degree_cap + 1, 0.0);
  std::vector<double> level_count(degree_cap + 1, 0.0);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const double e = basis.sup_bound(i);
    double& slot = level_env[degree(idx[i])];
    slot = std::max(slot, e * e);
    level_count[degree(idx[i])] += 1.0;
  }
  std::vector<double> tail(degree_cap + 2, 0.0);
  for (int J = degree_cap; J >= 0; --J)
    tail[J] = tail[J + 1] +
              level_count[J] * level_env[J] * std::exp(-J * (J + c) * s);

  Eigen::VectorXd coeff = Eigen::VectorXd::Zero(idx.size());
  std::size_t i = 0;
  for (int J = 0; J <= degree_cap; ++J) {
    const double decay = std::exp(-J * (J + c) * s);
    while (i < idx.size() && degree(idx[i]) == J) {
      coeff(i) = decay * basis.evaluate_one(i, x);
      ++i;
    }
    if (J < degree_cap) {
      const double bound = 2.0 * tail[J + 1];
      if (bound < tol)
        return {std::move(basis), std::move(coeff), bound, J};
    }
  }
  throw ToleranceNotMet("cf kernel truncation",
                        level_count[degree_cap] * level_env[degree_cap] *
                            std::exp(-degree_cap * (degree_cap + c) * s),
                        tol);
}

}  // namespace

double limit_cf(const Eigen::VectorXd& u) {
  const int n = static_cast<int>(u.size());
  return std::exp(-(n - 1.0) * u.cwiseAbs().sum());
}

CFResult conditional_cf(const Eigen::VectorXd& u, double t,
                        const Eigen::VectorXd& lambda0,
                        const Eigen::VectorXd& lambda_t) {
  check_args(u, t, lambda0);
  if (lambda_t.size() != u.size() || lambda_t.minCoeff() <= 0.0)
    throw std::invalid_argument("conditional_cf: lambda_t must be interior");
  if (u.isZero(0.0)) return {1.0, 0.0, 0.0};  // every factor collapses
  const int n = static_cast<int>(u.size());
  Eigen::VectorXd ku(n);
  for (int j = 0; j < n; ++j) ku(j) = 0.5 + std::abs(u(j));
  const JacobiParams tilted{ku};
  const JacobiParams base{Eigen::VectorXd::Constant(n, 0.5)};

  const Eigen::VectorXd x = lambda0.head(n - 1);
  const Eigen::VectorXd y = lambda_t.head(n - 1);
  const KernelResult qt = heat_kernel(tilted, 2.0 * t, x, y);
  const KernelResult qb = heat_kernel(base, 2.0 * t, x, y);

  double radial = 1.0;
  for (int j = 0; j < n; ++j)
    radial *= std::pow(lambda0(j) / lambda_t(j), 0.5 * std::abs(u(j)));
  const double weight_ratio =
      dirichlet_weight(tilted, y) / dirichlet_weight(base, y);

  CFResult res;
  res.value = prefactor(u, t) * radial * (qt.value / qb.value) * weight_ratio;
  res.tail_bound = std::max(qt.tail_bound, qb.tail_bound);
  return res;
}

CFResult unconditional_cf(const Eigen::VectorXd& u, double t,
                          const Eigen::VectorXd& lambda0) {
  check_args(u, t, lambda0);
  if (u.isZero(0.0)) return {1.0, 0.0, 0.0};  // every factor collapses
  const int n = static_cast<int>(u.size());
  Eigen::VectorXd ku(n), keff(n);
  for (int j = 0; j < n; ++j) {
    ku(j) = 0.5 + std::abs(u(j));
    keff(j) = 0.5 + 0.5 * std::abs(u(j));
  }
  const JacobiParams tilted{ku};
  const JacobiParams effective{keff};

  const Eigen::VectorXd x = lambda0.head(n - 1);
  KernelSeries ks = kernel_series_at(tilted, 2.0 * t, x, 1e-10);

  // int prod_j lambda_j^{-|u_j|/2} q W^{ku} d lambda reduces to an integral
  // against the W^{keff} measure times a ratio of weight normalizers;
  // the integrand is then a polynomial, so the rule below is exact and the
  // degree-doubling refinement converges immediately.
  const double z_ratio =
      std::exp(log_weight_normalizer(tilted) - log_weight_normalizer(effective));

  double integral = 0.0;
  double quad_err = 0.0;
  int deg = std::max(2 * ks.levels, 4);
  double prev = 0.0;
  for (int pass = 0; pass < 6; ++pass) {
    const Quadrature q = simplex_quadrature(effective, deg);
    double acc = 0.0;
    for (long r = 0; r < q.weights.size(); ++r) {
      const Eigen::VectorXd node = q.nodes.row(r);
      acc += q.weights(r) * ks.coeff_at_x.dot(ks.basis.evaluate(node));
    }
    if (pass > 0) {
      quad_err = std::abs(acc - prev);
      if (quad_err < 1e-6 * std::max(1.0, std::abs(acc))) {
        integral = acc;
        break;
      }
    }
    prev = acc;
    integral = acc;
    deg *= 2;
  }

  double radial0 = 1.0;
  for (int j = 0; j < n; ++j)
    radial0 *= std::pow(lambda0(j), 0.5 * std::abs(u(j)));

  CFResult res;
  res.value = prefactor(u, t) * radial0 * z_ratio * integral;
  res.tail_bound = ks.tail_bound;
  res.quad_error = quad_err;
  return res;
}

double cauchy_pdf(double x, double scale) {
  return scale / (M_PI * (scale * scale + x * x));
}

double cauchy_cdf(double x, double scale) {
  return 0.5 + std::atan(x / scale) / M_PI;
}

}  // namespace flagsim
