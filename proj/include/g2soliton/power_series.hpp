#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace g2s {

// Truncated power series in t; all operands share the same truncation length.
template <typename T>
class BasicSeries {
 public:
  BasicSeries() = default;
  explicit BasicSeries(std::size_t n, T c0 = T(0)) : a_(n, T(0)) {
    if (n > 0) a_[0] = c0;
  }
  static BasicSeries variable(std::size_t n) {
    BasicSeries s(n);
    if (n > 1) s.a_[1] = T(1);
    return s;
  }

  std::size_t size() const { return a_.size(); }
  T& operator[](std::size_t k) { return a_[k]; }
  T operator[](std::size_t k) const { return a_[k]; }
  const std::vector<T>& coefficients() const { return a_; }

  BasicSeries& operator+=(const BasicSeries& o) {
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  BasicSeries& operator-=(const BasicSeries& o) {
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  BasicSeries& operator*=(T s) {
    for (T& x : a_) x *= s;
    return *this;
  }

  friend BasicSeries operator+(BasicSeries a, const BasicSeries& b) { return a += b; }
  friend BasicSeries operator-(BasicSeries a, const BasicSeries& b) { return a -= b; }
  friend BasicSeries operator-(BasicSeries a) { return a *= T(-1); }
  friend BasicSeries operator*(BasicSeries a, T s) { return a *= s; }
  friend BasicSeries operator*(T s, BasicSeries a) { return a *= s; }
  friend BasicSeries operator+(BasicSeries a, T s) {
    a.a_[0] += s;
    return a;
  }
  friend BasicSeries operator+(T s, BasicSeries a) { return a + s; }
  friend BasicSeries operator-(BasicSeries a, T s) { return a + (-s); }
  friend BasicSeries operator-(T s, const BasicSeries& a) { return (-a) + s; }

  // Cauchy product with Neumaier-compensated accumulation.
  friend BasicSeries operator*(const BasicSeries& x, const BasicSeries& y) {
    const std::size_t n = x.size();
    BasicSeries r(n);
    for (std::size_t k = 0; k < n; ++k) {
      T sum = 0, comp = 0;
      for (std::size_t i = 0; i <= k; ++i) neumaier(sum, comp, x.a_[i] * y.a_[k - i]);
      r.a_[k] = sum + comp;
    }
    return r;
  }

  friend BasicSeries operator/(const BasicSeries& x, const BasicSeries& y) {
    if (y.a_.empty() || y.a_[0] == T(0)) throw std::domain_error("Series: division by series with zero constant term");
    const std::size_t n = x.size();
    BasicSeries q(n);
    for (std::size_t k = 0; k < n; ++k) {
      T sum = x.a_[k], comp = 0;
      for (std::size_t i = 1; i <= k; ++i) neumaier(sum, comp, -y.a_[i] * q.a_[k - i]);
      q.a_[k] = (sum + comp) / y.a_[0];
    }
    return q;
  }
  friend BasicSeries operator/(T s, const BasicSeries& y) { return BasicSeries(y.size(), s) / y; }
  friend BasicSeries operator/(BasicSeries x, T s) { return x *= T(1) / s; }

 private:
  static void neumaier(T& sum, T& comp, const T& v) {
    using std::abs;
    T t = sum + v;
    if (abs(sum) >= abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }

  std::vector<T> a_;
};

using Series = BasicSeries<double>;

// Horner evaluation of sum_k a_k t^k and its derivative.
template <typename T>
T horner(const std::vector<T>& a, const T& t) {
  T r = 0;
  for (std::size_t k = a.size(); k-- > 0;) r = r * t + a[k];
  return r;
}

template <typename T>
T horner_derivative(const std::vector<T>& a, const T& t) {
  T r = 0;
  for (std::size_t k = a.size(); k-- > 1;) r = r * t + T(static_cast<double>(k)) * a[k];
  return r;
}

}  // namespace g2s
