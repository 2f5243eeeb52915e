#include "coverlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace coverlab {

double MeanVar::stderr_mean() const {
  return n_ > 1 ? std::sqrt(variance() / double(n_)) : 0.0;
}

double falling_factorial(double z, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= z - i;
  return r;
}

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double s = 0.0;
  for (int j = 1; j <= 200; ++j) {
    double term = std::exp(-2.0 * double(j) * double(j) * lambda * lambda);
    s += (j % 2 == 1) ? term : -term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  size_t n = sample.size();
  double d = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double f = cdf(sample[i]);
    d = std::max(d, double(i + 1) / double(n) - f);
    d = std::max(d, f - double(i) / double(n));
  }
  return d;
}

double ks_p_value(double d, size_t n) {
  double sn = std::sqrt(double(n));
  // Stephens' small-sample correction keeps the asymptotic series usable
  // down to a few dozen points.
  return kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
}

double ks_two_sample(std::vector<double> a, std::vector<double> b,
                     double* p_value) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / double(a.size()) -
                             double(j) / double(b.size())));
  }
  if (p_value) {
    double ne = double(a.size()) * double(b.size()) /
                double(a.size() + b.size());
    double sn = std::sqrt(ne);
    *p_value = kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
  }
  return d;
}

double chi_square_p(double stat, int dof) {
  if (dof <= 0) throw std::invalid_argument("chi_square_p: dof must be > 0");
  if (stat <= 0.0) return 1.0;
  return boost::math::gamma_q(double(dof) / 2.0, stat / 2.0);
}

}  // namespace coverlab
