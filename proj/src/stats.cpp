#include "flagsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace flagsim {

TestVerdict TestVerdict::make(std::string name, double statistic,
                              double threshold, std::uint64_t seed,
                              long n_samples) {
  TestVerdict v;
  v.name = std::move(name);
  v.statistic = statistic;
  v.threshold = threshold;
  v.pass = statistic <= threshold;
  v.seed = seed;
  v.n_samples = n_samples;
  return v;
}

std::string TestVerdict::line() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s %.17g %.17g %s %llu %ld", name.c_str(),
                statistic, threshold, pass ? "pass" : "fail",
                static_cast<unsigned long long>(seed), n_samples);
  return buf;
}

EmpiricalCF empirical_cf(const std::vector<Eigen::VectorXd>& samples,
                         const std::vector<Eigen::VectorXd>& grid) {
  if (samples.size() < 100)
    throw std::invalid_argument("empirical_cf: need at least 100 samples");
  const double n = static_cast<double>(samples.size());
  EmpiricalCF out;
  out.grid = grid;
  out.values.reserve(grid.size());
  out.stderrs.reserve(grid.size());
  for (const auto& u : grid) {
    double sc = 0.0, ss = 0.0, sc2 = 0.0, ss2 = 0.0;
    for (const auto& x : samples) {
      const double p = u.dot(x);
      const double c = std::cos(p), s = std::sin(p);
      sc += c;
      ss += s;
      sc2 += c * c;
      ss2 += s * s;
    }
    const double mc = sc / n, ms = ss / n;
    const double var_c = (sc2 - n * mc * mc) / (n - 1.0);
    const double var_s = (ss2 - n * ms * ms) / (n - 1.0);
    out.values.emplace_back(mc, ms);
    out.stderrs.push_back(
        std::sqrt(std::max(0.0, var_c + var_s) / n));
  }
  return out;
}

EmpiricalCF empirical_cf_1d(const std::vector<double>& samples,
                            const std::vector<double>& grid) {
  std::vector<Eigen::VectorXd> s;
  s.reserve(samples.size());
  for (double x : samples) s.push_back(Eigen::VectorXd::Constant(1, x));
  std::vector<Eigen::VectorXd> g;
  g.reserve(grid.size());
  for (double u : grid) g.push_back(Eigen::VectorXd::Constant(1, u));
  return empirical_cf(s, g);
}

double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf) {
  if (samples.size() < 100)
    throw std::invalid_argument("ks_statistic: need at least 100 samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    sup = std::max(sup, std::abs((i + 1.0) / n - f));
    sup = std::max(sup, std::abs(f - i / n));
  }
  return sup;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.size() < 100 || b.size() < 100)
    throw std::invalid_argument("ks_two_sample: need at least 100 samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double sup = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    sup = std::max(sup, std::abs(i / na - j / nb));
  }
  return sup;
}

double sample_mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_variance(const std::vector<double>& x) {
  const double m = sample_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / (static_cast<double>(x.size()) - 1.0);
}

double sample_median(std::vector<double> x) {
  if (x.empty()) throw std::invalid_argument("sample_median: empty");
  const std::size_t mid = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + mid, x.end());
  double hi = x[mid];
  if (x.size() % 2 == 1) return hi;
  std::nth_element(x.begin(), x.begin() + mid - 1, x.begin() + mid);
  return 0.5 * (x[mid - 1] + hi);
}

Eigen::VectorXd realized_qv(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            int window, double dt) {
  if (window < 10) throw std::invalid_argument("realized_qv: window < 10");
  if (x.size() != y.size() || x.size() < window + 1)
    throw std::invalid_argument("realized_qv: series too short");
  const long nw = (x.size() - 1) / window;
  Eigen::VectorXd rates(nw);
  for (long w = 0; w < nw; ++w) {
    double acc = 0.0;
    for (long k = w * window; k < (w + 1) * window; ++k)
      acc += (x(k + 1) - x(k)) * (y(k + 1) - y(k));
    rates(w) = acc / (window * dt);
  }
  return rates;
}

Eigen::VectorXd realized_qv(const Eigen::VectorXcd& z, int window, double dt) {
  if (window < 10) throw std::invalid_argument("realized_qv: window < 10");
  if (z.size() < window + 1)
    throw std::invalid_argument("realized_qv: series too short");
  const long nw = (z.size() - 1) / window;
  Eigen::VectorXd rates(nw);
  for (long w = 0; w < nw; ++w) {
    double acc = 0.0;
    for (long k = w * window; k < (w + 1) * window; ++k)
      acc += std::norm(z(k + 1) - z(k));
    rates(w) = acc / (window * dt);
  }
  return rates;
}

TestVerdict generator_check(const std::string& name,
                            const std::vector<double>& f_at_h, double f_at_x,
                            double generator_value, double h, double disc_coeff,
                            std::uint64_t seed) {
  const double n = static_cast<double>(f_at_h.size());
  const double slope = (sample_mean(f_at_h) - f_at_x) / h;
  const double se = std::sqrt(sample_variance(f_at_h) / n) / h;
  return TestVerdict::make(name, std::abs(slope - generator_value),
                           3.0 * se + disc_coeff * h, seed,
                           static_cast<long>(f_at_h.size()));
}

}  // namespace flagsim
