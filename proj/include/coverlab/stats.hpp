#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace coverlab {

// Welford accumulator
class MeanVar {
public:
  void add(double x) {
    ++n_;
    double d = x - mean_;
    mean_ += d / double(n_);
    m2_ += d * (x - mean_);
  }
  size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / double(n_ - 1) : 0.0; }
  double stderr_mean() const;

private:
  size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// z (z-1) ... (z-k+1)
double falling_factorial(double z, int k);

// Kolmogorov tail Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2)
double kolmogorov_q(double lambda);

// One-sample KS statistic against a cdf; the sample is copied and sorted.
double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf);

// Asymptotic p-value for the one-sample statistic
double ks_p_value(double d, size_t n);

// Two-sample KS; p-value uses the effective size n*m/(n+m)
double ks_two_sample(std::vector<double> a, std::vector<double> b,
                     double* p_value = nullptr);

// Upper tail of chi-square with dof degrees of freedom
double chi_square_p(double stat, int dof);

}  // namespace coverlab
