#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>

namespace pdmpis {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// log(sum_i exp(x_i)); -inf for an empty span or all -inf entries.
double log_sum_exp(std::span<const double> xs) noexcept;

/// Quantile of the standard normal distribution, 0 < p < 1.
double normal_quantile(double p);

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 40);

}  // namespace pdmpis
