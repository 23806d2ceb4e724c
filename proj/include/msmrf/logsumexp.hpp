#pragma once

#include <cmath>
#include <limits>

namespace msmrf {

/// Streaming log(sum exp(x_k)).
class LogSumExp {
 public:
  void add(double x) {
    if (x == -kInf) return;
    if (x > max_) {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    } else {
      sum_ += std::exp(x - max_);
    }
  }
  void merge(const LogSumExp& other) {
    if (other.max_ == -kInf) return;
    if (other.max_ > max_) {
      sum_ = sum_ * std::exp(max_ - other.max_) + other.sum_;
      max_ = other.max_;
    } else {
      sum_ += other.sum_ * std::exp(other.max_ - max_);
    }
  }
  double value() const { return max_ == -kInf ? -kInf : max_ + std::log(sum_); }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  double max_ = -kInf;
  double sum_ = 0.0;
};

}  // namespace msmrf
