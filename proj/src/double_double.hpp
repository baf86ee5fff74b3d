#pragma once

// Unevaluated sum of two doubles (about 32 significant digits), with the
// Eigen traits needed by the dense decompositions used in the M/M/k solver.

#include <cmath>
#include <limits>
#include <type_traits>

#include <Eigen/Core>

namespace twoclass::detail {

class DoubleDouble {
 public:
  constexpr DoubleDouble() = default;
  constexpr DoubleDouble(double v) : hi_(v) {}  // NOLINT(implicit)
  template <class I, std::enable_if_t<std::is_integral_v<I>, int> = 0>
  constexpr DoubleDouble(I v) : hi_(static_cast<double>(v)) {}  // NOLINT
  constexpr DoubleDouble(double hi, double lo) : hi_(hi), lo_(lo) {}

  explicit constexpr operator double() const { return hi_ + lo_; }
  double hi() const { return hi_; }
  double lo() const { return lo_; }

  DoubleDouble operator-() const { return {-hi_, -lo_}; }

  friend DoubleDouble operator+(const DoubleDouble& a, const DoubleDouble& b) {
    double e1, e2;
    const double s = two_sum(a.hi_, b.hi_, e1);
    const double t = two_sum(a.lo_, b.lo_, e2);
    e1 += t;
    double hi = quick_two_sum(s, e1, e1);
    e1 += e2;
    hi = quick_two_sum(hi, e1, e1);
    return {hi, e1};
  }
  friend DoubleDouble operator-(const DoubleDouble& a, const DoubleDouble& b) {
    return a + (-b);
  }
  friend DoubleDouble operator*(const DoubleDouble& a, const DoubleDouble& b) {
    double e;
    const double p = two_prod(a.hi_, b.hi_, e);
    e += a.hi_ * b.lo_ + a.lo_ * b.hi_;
    const double hi = quick_two_sum(p, e, e);
    return {hi, e};
  }
  friend DoubleDouble operator/(const DoubleDouble& a, const DoubleDouble& b) {
    const double q1 = a.hi_ / b.hi_;
    DoubleDouble r = a - b * DoubleDouble(q1);
    const double q2 = r.hi_ / b.hi_;
    r = r - b * DoubleDouble(q2);
    const double q3 = r.hi_ / b.hi_;
    double e;
    const double hi = quick_two_sum(q1, q2, e);
    return DoubleDouble(hi, e) + DoubleDouble(q3);
  }

  DoubleDouble& operator+=(const DoubleDouble& o) { return *this = *this + o; }
  DoubleDouble& operator-=(const DoubleDouble& o) { return *this = *this - o; }
  DoubleDouble& operator*=(const DoubleDouble& o) { return *this = *this * o; }
  DoubleDouble& operator/=(const DoubleDouble& o) { return *this = *this / o; }

  friend bool operator==(const DoubleDouble& a, const DoubleDouble& b) {
    return a.hi_ == b.hi_ && a.lo_ == b.lo_;
  }
  friend bool operator!=(const DoubleDouble& a, const DoubleDouble& b) {
    return !(a == b);
  }
  friend bool operator<(const DoubleDouble& a, const DoubleDouble& b) {
    return a.hi_ < b.hi_ || (a.hi_ == b.hi_ && a.lo_ < b.lo_);
  }
  friend bool operator>(const DoubleDouble& a, const DoubleDouble& b) {
    return b < a;
  }
  friend bool operator<=(const DoubleDouble& a, const DoubleDouble& b) {
    return !(b < a);
  }
  friend bool operator>=(const DoubleDouble& a, const DoubleDouble& b) {
    return !(a < b);
  }

  friend DoubleDouble abs(const DoubleDouble& a) { return a.hi_ < 0.0 ? -a : a; }
  friend DoubleDouble sqrt(const DoubleDouble& a) {
    if (!(a.hi_ > 0.0)) return DoubleDouble(std::sqrt(a.hi_));
    const double y = std::sqrt(a.hi_);
    const DoubleDouble yy(y);
    return yy + (a - yy * yy) / DoubleDouble(2.0 * y);
  }
  // Logarithms are only needed to double accuracy.
  friend DoubleDouble log(const DoubleDouble& a) {
    return DoubleDouble(std::log(a.hi_) + a.lo_ / a.hi_);
  }
  friend DoubleDouble log10(const DoubleDouble& a) {
    return DoubleDouble(std::log10(a.hi_) + a.lo_ / (a.hi_ * std::log(10.0)));
  }
  friend DoubleDouble exp(const DoubleDouble& a) {
    // exp(hi + lo) = exp(hi) (1 + lo) to double-double accuracy for |lo| tiny
    const DoubleDouble base(std::exp(a.hi_));
    return base + base * DoubleDouble(a.lo_);
  }
  friend bool isfinite(const DoubleDouble& a) { return std::isfinite(a.hi_); }
  friend bool isnan(const DoubleDouble& a) { return std::isnan(a.hi_); }
  friend bool isinf(const DoubleDouble& a) { return std::isinf(a.hi_); }

 private:
  static double two_sum(double a, double b, double& err) {
    const double s = a + b;
    const double bb = s - a;
    err = (a - (s - bb)) + (b - bb);
    return s;
  }
  static double quick_two_sum(double a, double b, double& err) {
    const double s = a + b;
    err = b - (s - a);
    return s;
  }
  static double two_prod(double a, double b, double& err) {
    const double p = a * b;
#ifdef FP_FAST_FMA
    err = std::fma(a, b, -p);
#else
    constexpr double kSplit = 134217729.0;  // 2^27 + 1
    const double ta = kSplit * a, tb = kSplit * b;
    const double ah = ta - (ta - a), al = a - ah;
    const double bh = tb - (tb - b), bl = b - bh;
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
#endif
    return p;
  }

  double hi_ = 0.0;
  double lo_ = 0.0;
};

}  // namespace twoclass::detail

namespace Eigen {

template <>
struct NumTraits<twoclass::detail::DoubleDouble>
    : GenericNumTraits<twoclass::detail::DoubleDouble> {
  using DD = twoclass::detail::DoubleDouble;
  using Real = DD;
  using NonInteger = DD;
  using Literal = DD;
  using Nested = DD;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 0,
    ReadCost = 2,
    AddCost = 20,
    MulCost = 20
  };
  static DD epsilon() { return DD(4.93038065763132e-32); }  // 2^-104
  static DD dummy_precision() { return DD(1e-28); }
  static DD highest() { return DD(std::numeric_limits<double>::max()); }
  static DD lowest() { return DD(-std::numeric_limits<double>::max()); }
  static DD infinity() { return DD(std::numeric_limits<double>::infinity()); }
  static DD quiet_NaN() { return DD(std::numeric_limits<double>::quiet_NaN()); }
  static int digits10() { return 31; }
};

}  // namespace Eigen
