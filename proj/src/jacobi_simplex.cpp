#include "flagsim/jacobi_simplex.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "flagsim/errors.hpp"

namespace flagsim {

JacobiParams::JacobiParams(Eigen::VectorXd k) : kappa(std::move(k)) {
  if (kappa.size() < 2)
    throw std::invalid_argument("JacobiParams: need at least two weights");
  for (int j = 0; j < kappa.size(); ++j)
    if (!(kappa(j) > -0.5))
      throw std::invalid_argument("JacobiParams: kappa entries must be > -1/2");
}

int degree(const MultiIndex& tau) {
  return std::accumulate(tau.begin(), tau.end(), 0);
}

double jacobi_poly_1d(int m, double a, double b, double x) {
  if (m < 0) throw std::invalid_argument("jacobi_poly_1d: negative degree");
  if (m == 0) return 1.0;
  double pm1 = 1.0;
  double p = 0.5 * (a - b) + 0.5 * (a + b + 2.0) * x;
  for (int k = 2; k <= m; ++k) {
    // standard three-term recurrence; denominators are safe for a,b > -1
    const double c = 2.0 * k + a + b;
    const double a1 = 2.0 * k * (k + a + b) * (c - 2.0);
    const double a2 = (c - 1.0) * (a * a - b * b);
    const double a3 = (c - 2.0) * (c - 1.0) * c;
    const double a4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * c;
    const double next = ((a2 + a3 * x) * p - a4 * pm1) / a1;
    pm1 = p;
    p = next;
  }
  return p;
}

namespace {

// log of int_0^1 s^b (1-s)^a P_m^{(a,b)}(2s-1)^2 ds. The m = 0 case is the
// Beta normalizer written in shifted form so every lgamma argument stays
// positive even when a + b + 1 < 0 (possible since a, b > -1).
double log_norm_1d(int m, double a, double b) {
  if (m == 0)
    return std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
           std::lgamma(a + b + 2.0);
  return -std::log(2.0 * m + a + b + 1.0) + std::lgamma(m + a + 1.0) +
         std::lgamma(m + b + 1.0) - std::lgamma(m + a + b + 1.0) -
         std::lgamma(m + 1.0);
}

// max over [-1,1] of |P_m^{(a,b)}|. For max(a,b) >= -1/2 this is the
// endpoint value binom(m + max(a,b), m) (Szego 7.32.1); otherwise the
// maximum sits at an interior extremum and stays below one.
double jacobi_sup_1d(int m, double a, double b) {
  if (m == 0) return 1.0;
  const double q = std::max(a, b);
  if (q < -0.5) return 1.0;
  return std::exp(std::lgamma(m + q + 1.0) - std::lgamma(q + 1.0) -
                  std::lgamma(m + 1.0));
}

// 1-d alpha parameter of coordinate j (0-based) for suffix degree T_j:
//   a_j = 2 T_j + sum_{i=j+1}^{n-1} kappa_i + (n - j - 3)/2
// The tau = 0 value a0_j is the exponent the stick-breaking weight itself
// carries, which is what makes the coordinate factors orthogonal.
double a_param(const JacobiParams& p, int j, int suffix_tau) {
  const int n = p.n();
  double s = 0.0;
  for (int i = j + 1; i < n; ++i) s += p.kappa(i);
  return 2.0 * suffix_tau + s + 0.5 * (n - j - 3);
}

void enumerate_level(int dims, int total, MultiIndex& cur, int pos,
                     std::vector<MultiIndex>& out) {
  if (pos == dims - 1) {
    cur[pos] = total;
    out.push_back(cur);
    return;
  }
  for (int v = total; v >= 0; --v) {
    cur[pos] = v;
    enumerate_level(dims, total - v, cur, pos + 1, out);
  }
}

std::vector<MultiIndex> enumerate_up_to(int dims, int max_degree) {
  std::vector<MultiIndex> out;
  MultiIndex cur(dims, 0);
  for (int d = 0; d <= max_degree; ++d) enumerate_level(dims, d, cur, 0, out);
  return out;
}

}  // namespace

double dirichlet_weight(const JacobiParams& p, const Eigen::VectorXd& lam) {
  const int n = p.n();
  if (lam.size() != n - 1)
    throw std::invalid_argument("dirichlet_weight: expected n-1 coordinates");
  double lam_n = 1.0 - lam.sum();
  double logw = std::lgamma(p.total() + 0.5 * n);
  for (int j = 0; j < n; ++j) logw -= std::lgamma(p.kappa(j) + 0.5);
  for (int j = 0; j < n - 1; ++j)
    logw += (p.kappa(j) - 0.5) * std::log(lam(j));
  logw += (p.kappa(n - 1) - 0.5) * std::log(lam_n);
  return std::exp(logw);
}

double eigenvalue(const JacobiParams& p, int deg) {
  return -deg * (deg + p.total() + 0.5 * (p.n() - 2));
}

SimplexBasis::SimplexBasis(const JacobiParams& p, int max_degree)
    : params_(p), max_degree_(max_degree) {
  const int d = p.n() - 1;
  indices_ = enumerate_up_to(d, max_degree);
  a_param_.reserve(indices_.size());
  inv_sqrt_norm_.reserve(indices_.size());
  sup_bound_.reserve(indices_.size());
  for (const auto& tau : indices_) {
    Eigen::VectorXd a(d);
    double log_c = 0.0;
    double sup = 1.0;
    int suffix = 0;
    for (int j = d - 1; j >= 0; --j) {
      a(j) = a_param(p, j, suffix);
      const double beta = p.kappa(j) - 0.5;
      const double a0 = a_param(p, j, 0);
      log_c += log_norm_1d(tau[j], a(j), beta) - log_norm_1d(0, a0, beta);
      sup *= jacobi_sup_1d(tau[j], a(j), beta);
      suffix += tau[j];
    }
    a_param_.push_back(std::move(a));
    inv_sqrt_norm_.push_back(std::exp(-0.5 * log_c));
    // the stick-breaking prefactors are powers of numbers in [0,1], so the
    // product of 1-d maxima still dominates on the whole simplex
    sup_bound_.push_back(sup * std::exp(-0.5 * log_c));
  }
}

double SimplexBasis::evaluate_one(std::size_t idx,
                                  const Eigen::VectorXd& lam) const {
  const MultiIndex& tau = indices_[idx];
  const Eigen::VectorXd& a = a_param_[idx];
  const int d = static_cast<int>(lam.size());
  double rem = 1.0;
  double val = 1.0;
  for (int j = 0; j < d; ++j) {
    const double s = lam(j) / rem;
    if (tau[j] > 0) val *= std::pow(rem, tau[j]);
    val *= jacobi_poly_1d(tau[j], a(j), params_.kappa(j) - 0.5, 2.0 * s - 1.0);
    rem -= lam(j);
  }
  return val * inv_sqrt_norm_[idx];
}

Eigen::VectorXd SimplexBasis::evaluate(const Eigen::VectorXd& lam) const {
  Eigen::VectorXd out(indices_.size());
  for (std::size_t i = 0; i < indices_.size(); ++i)
    out(i) = evaluate_one(i, lam);
  return out;
}

double simplex_jacobi(const JacobiParams& p, const MultiIndex& tau,
                      const Eigen::VectorXd& lam) {
  const int d = p.n() - 1;
  if (static_cast<int>(tau.size()) != d || lam.size() != d)
    throw std::invalid_argument("simplex_jacobi: dimension mismatch");
  double rem = 1.0;
  double val = 1.0;
  double log_c = 0.0;
  int suffix = 0;
  // walk right-to-left for the suffix sums, then evaluate left-to-right
  Eigen::VectorXd a(d);
  for (int j = d - 1; j >= 0; --j) {
    a(j) = a_param(p, j, suffix);
    const double beta = p.kappa(j) - 0.5;
    log_c += log_norm_1d(tau[j], a(j), beta) -
             log_norm_1d(0, a_param(p, j, 0), beta);
    suffix += tau[j];
  }
  for (int j = 0; j < d; ++j) {
    const double s = lam(j) / rem;
    if (tau[j] > 0) val *= std::pow(rem, tau[j]);
    val *= jacobi_poly_1d(tau[j], a(j), p.kappa(j) - 0.5, 2.0 * s - 1.0);
    rem -= lam(j);
  }
  return val * std::exp(-0.5 * log_c);
}

namespace {

long level_count(int dims, int deg) {
  // compositions of deg into dims nonnegative parts
  long num = 1, den = 1;
  for (int i = 1; i < dims; ++i) {
    num *= deg + i;
    den *= i;
  }
  return num / den;
}

}  // namespace

KernelResult heat_kernel(const JacobiParams& p, double t,
                         const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                         double tol, int degree_cap) {
  if (t <= 0.0) throw std::invalid_argument("heat_kernel: t must be positive");
  const int d = p.n() - 1;
  const double c = p.total() + 0.5 * (p.n() - 2);

  SimplexBasis basis(p, degree_cap);
  const auto& idx = basis.indices();

  // worst |phi_tau(x) phi_tau(y)| per level, valid at any pair of points
  std::vector<double> level_env(degree_cap + 1, 0.0);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const double s = basis.sup_bound(i);
    double& slot = level_env[degree(idx[i])];
    slot = std::max(slot, s * s);
  }
  // tail[J] bounds the mass of all levels >= J that the cap can see; the
  // factor two in the exit test covers the superexponential remainder
  // beyond the cap
  std::vector<double> tail(degree_cap + 2, 0.0);
  for (int J = degree_cap; J >= 0; --J)
    tail[J] = tail[J + 1] + static_cast<double>(level_count(d, J)) *
                                level_env[J] * std::exp(-J * (J + c) * t);

  double sum = 0.0;
  std::size_t i = 0;
  for (int J = 0; J <= degree_cap; ++J) {
    const double decay = std::exp(-J * (J + c) * t);
    while (i < idx.size() && degree(idx[i]) == J) {
      sum += decay * basis.evaluate_one(i, x) * basis.evaluate_one(i, y);
      ++i;
    }
    if (J < degree_cap) {
      const double bound = 2.0 * tail[J + 1];
      if (bound < tol) return {sum, bound, J};
    }
  }
  const double last = static_cast<double>(level_count(d, degree_cap)) *
                      level_env[degree_cap] *
                      std::exp(-degree_cap * (degree_cap + c) * t);
  throw ToleranceNotMet("heat_kernel truncation", last, tol);
}

namespace {

// Recurrence coefficients for monic Jacobi polynomials on [-1,1] with weight
// (1-x)^a (1+x)^b, Golub-Welsch form.
void gauss_jacobi_01(double a, double b, int m, Eigen::VectorXd& nodes,
                     Eigen::VectorXd& weights) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
  const double ab = a + b;
  J(0, 0) = (b - a) / (ab + 2.0);
  for (int k = 1; k < m; ++k) {
    const double tk = 2.0 * k + ab;
    J(k, k) = (b * b - a * a) / (tk * (tk + 2.0));
    double bk;
    if (k == 1)
      bk = 4.0 * (a + 1.0) * (b + 1.0) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0));
    else
      bk = 4.0 * k * (k + a) * (k + b) * (k + ab) /
           (tk * tk * (tk + 1.0) * (tk - 1.0));
    const double off = std::sqrt(bk);
    J(k, k - 1) = off;
    J(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  nodes.resize(m);
  weights.resize(m);
  for (int k = 0; k < m; ++k) {
    nodes(k) = 0.5 * (1.0 + es.eigenvalues()(k));  // map [-1,1] -> [0,1]
    const double v = es.eigenvectors()(0, k);
    weights(k) = v * v;
  }
  weights /= weights.sum();  // normalized Beta measure per coordinate
}

}  // namespace

Quadrature simplex_quadrature(const JacobiParams& p, int poly_degree) {
  const int d = p.n() - 1;
  const int m = poly_degree / 2 + 1;
  std::vector<Eigen::VectorXd> nodes1(d), weights1(d);
  for (int j = 0; j < d; ++j)
    gauss_jacobi_01(a_param(p, j, 0), p.kappa(j) - 0.5, m, nodes1[j],
                    weights1[j]);

  long total = 1;
  for (int j = 0; j < d; ++j) total *= m;
  Quadrature q;
  q.nodes.resize(total, d);
  q.weights.resize(total);
  std::vector<int> pick(d, 0);
  for (long row = 0; row < total; ++row) {
    double w = 1.0, rem = 1.0;
    for (int j = 0; j < d; ++j) {
      const double s = nodes1[j](pick[j]);
      q.nodes(row, j) = s * rem;
      rem *= 1.0 - s;
      w *= weights1[j](pick[j]);
    }
    q.weights(row) = w;
    for (int j = d - 1; j >= 0; --j) {
      if (++pick[j] < m) break;
      pick[j] = 0;
    }
  }
  return q;
}

double apply_generator_fd(const JacobiParams& p,
                          const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& lam, double h) {
  const int d = p.n() - 1;
  const double abs_k = p.total();
  const double half_n = 0.5 * p.n();
  const double f0 = f(lam);
  double out = 0.0;
  Eigen::VectorXd z = lam;
  for (int j = 0; j < d; ++j) {
    z(j) = lam(j) + h;
    const double fp = f(z);
    z(j) = lam(j) - h;
    const double fm = f(z);
    z(j) = lam(j);
    const double fj = (fp - fm) / (2.0 * h);
    const double fjj = (fp - 2.0 * f0 + fm) / (h * h);
    out += lam(j) * (1.0 - lam(j)) * fjj;
    out += ((p.kappa(j) + 0.5) - (abs_k + half_n) * lam(j)) * fj;
  }
  for (int j = 0; j < d; ++j) {
    for (int l = j + 1; l < d; ++l) {
      z(j) = lam(j) + h; z(l) = lam(l) + h;
      double cross = f(z);
      z(l) = lam(l) - h;
      cross -= f(z);
      z(j) = lam(j) - h;
      cross += f(z);
      z(l) = lam(l) + h;
      cross -= f(z);
      z(j) = lam(j); z(l) = lam(l);
      const double fjl = cross / (4.0 * h * h);
      out -= 2.0 * lam(j) * lam(l) * fjl;
    }
  }
  return out;
}

}  // namespace flagsim
