#pragma once

#include <mpfr.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <string>
#include <type_traits>
#include <utility>

#include "xebstat/errors.hpp"

namespace xebstat {

/// Working precision for BigFloat scalars, in bits of mantissa.
/// Every BigFloat carries the precision it was created under; arithmetic
/// between values of different precision is rejected rather than silently
/// rounded. The active precision is thread-local so that independent
/// parameter points can run on worker threads with their own contexts.
class PrecisionContext {
 public:
  static constexpr long kMinBits = 53;
  static constexpr long kDefaultBits = 256;

  explicit PrecisionContext(long mantissa_bits = kDefaultBits) : bits_(mantissa_bits) {
    if (bits_ < kMinBits) {
      throw ConfigError("PrecisionContext: mantissa_bits must be >= 53, got " +
                        std::to_string(bits_));
    }
  }

  long mantissa_bits() const { return bits_; }

  static long& active_bits() {
    static thread_local long bits = kDefaultBits;
    return bits;
  }

  /// RAII activation of a context on the current thread.
  class Use {
   public:
    explicit Use(const PrecisionContext& ctx) : saved_(active_bits()) {
      active_bits() = ctx.mantissa_bits();
    }
    explicit Use(long mantissa_bits) : Use(PrecisionContext(mantissa_bits)) {}
    ~Use() { active_bits() = saved_; }
    Use(const Use&) = delete;
    Use& operator=(const Use&) = delete;

   private:
    long saved_;
  };

 private:
  long bits_;
};

/// Arbitrary-precision real scalar (MPFR-backed, round-to-nearest).
/// Deterministic: identical inputs and precision give bit-identical results.
class BigFloat {
 public:
  BigFloat() { mpfr_init2(v_, PrecisionContext::active_bits()); mpfr_set_zero(v_, 1); }
  explicit BigFloat(double d) : BigFloat() { mpfr_set_d(v_, d, MPFR_RNDN); }
  explicit BigFloat(long i) : BigFloat() { mpfr_set_si(v_, i, MPFR_RNDN); }
  explicit BigFloat(int i) : BigFloat(static_cast<long>(i)) {}
  explicit BigFloat(unsigned long i) : BigFloat() { mpfr_set_ui(v_, i, MPFR_RNDN); }

  BigFloat(const BigFloat& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  BigFloat(BigFloat&& o) noexcept {
    v_[0] = o.v_[0];
    o.v_[0]._mpfr_d = nullptr;  // mark moved-from; dtor skips clear
  }
  BigFloat& operator=(const BigFloat& o) {
    if (this != &o) {
      if (v_[0]._mpfr_d == nullptr) mpfr_init2(v_, mpfr_get_prec(o.v_));
      else if (mpfr_get_prec(v_) != mpfr_get_prec(o.v_)) mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  BigFloat& operator=(BigFloat&& o) noexcept {
    if (this != &o) {
      if (v_[0]._mpfr_d != nullptr) mpfr_clear(v_);
      v_[0] = o.v_[0];
      o.v_[0]._mpfr_d = nullptr;
    }
    return *this;
  }
  ~BigFloat() {
    if (v_[0]._mpfr_d != nullptr) mpfr_clear(v_);
  }

  static BigFloat with_prec(long bits, double d = 0.0) {
    BigFloat r{raw_tag{}, bits};
    mpfr_set_d(r.v_, d, MPFR_RNDN);
    return r;
  }
  static BigFloat from_string(const std::string& s, long bits = 0) {
    BigFloat r{raw_tag{}, bits > 0 ? bits : PrecisionContext::active_bits()};
    if (mpfr_set_str(r.v_, s.c_str(), 10, MPFR_RNDN) != 0) {
      throw ConfigError("BigFloat: cannot parse number '" + s + "'");
    }
    return r;
  }
  /// 2^e at the active precision (exact).
  static BigFloat pow2(long e) {
    BigFloat r;
    mpfr_set_ui_2exp(r.v_, 1, e, MPFR_RNDN);
    return r;
  }

  long precision() const { return mpfr_get_prec(v_); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }

  std::string to_string(int digits) const {
    char buf[128];
    std::string out;
    if (digits + 16 < static_cast<int>(sizeof buf)) {
      mpfr_snprintf(buf, sizeof buf, "%.*Re", digits, v_);
      out = buf;
    } else {
      char* big = nullptr;
      mpfr_asprintf(&big, "%.*Re", digits, v_);
      out = big;
      mpfr_free_str(big);
    }
    return out;
  }

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

  friend BigFloat operator+(const BigFloat& a, const BigFloat& b) {
    BigFloat r{raw_tag{}, matched_prec(a, b)};
    mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat operator-(const BigFloat& a, const BigFloat& b) {
    BigFloat r{raw_tag{}, matched_prec(a, b)};
    mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat operator*(const BigFloat& a, const BigFloat& b) {
    BigFloat r{raw_tag{}, matched_prec(a, b)};
    mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat operator/(const BigFloat& a, const BigFloat& b) {
    BigFloat r{raw_tag{}, matched_prec(a, b)};
    mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  BigFloat operator-() const {
    BigFloat r{raw_tag{}, precision()};
    mpfr_neg(r.v_, v_, MPFR_RNDN);
    return r;
  }
  BigFloat& operator+=(const BigFloat& b) { matched_prec(*this, b); mpfr_add(v_, v_, b.v_, MPFR_RNDN); return *this; }
  BigFloat& operator-=(const BigFloat& b) { matched_prec(*this, b); mpfr_sub(v_, v_, b.v_, MPFR_RNDN); return *this; }
  BigFloat& operator*=(const BigFloat& b) { matched_prec(*this, b); mpfr_mul(v_, v_, b.v_, MPFR_RNDN); return *this; }
  BigFloat& operator/=(const BigFloat& b) { matched_prec(*this, b); mpfr_div(v_, v_, b.v_, MPFR_RNDN); return *this; }
  template <class T, std::enable_if_t<std::is_arithmetic_v<T>, int> = 0>
  BigFloat& operator+=(T b) { return *this += lift(*this, b); }
  template <class T, std::enable_if_t<std::is_arithmetic_v<T>, int> = 0>
  BigFloat& operator-=(T b) { return *this -= lift(*this, b); }
  template <class T, std::enable_if_t<std::is_arithmetic_v<T>, int> = 0>
  BigFloat& operator*=(T b) { return *this *= lift(*this, b); }
  template <class T, std::enable_if_t<std::is_arithmetic_v<T>, int> = 0>
  BigFloat& operator/=(T b) { return *this /= lift(*this, b); }

  friend bool operator==(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) == 0; }
  friend bool operator!=(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) != 0; }
  friend bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) < 0; }
  friend bool operator<=(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) <= 0; }
  friend bool operator>(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) > 0; }
  friend bool operator>=(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) >= 0; }

  // Arithmetic with plain numeric literals adopts the BigFloat operand's
  // precision (the literal is exact; no mixed-precision rounding occurs).
  template <class T, std::enable_if_t<std::is_arithmetic_v<T>, int> = 0>
  friend BigFloat operator+(const BigFloat& a, T b) { return a + lift(a, b); }
  template <class T, std::enable_if_t<std::is_arithmetic_v<T>, int> = 0>
  friend BigFloat operator+(T a, const BigFloat& b) { return lift(b, a) + b; }
  template <class T, std::enable_if_t<std::is_arithmetic_v<T>, int> = 0>
  friend BigFloat operator-(const BigFloat& a, T b) { return a - lift(a, b); }
  template <class T, std::enable_if_t<std::is_arithmetic_v<T>, int> = 0>
  friend BigFloat operator-(T a, const BigFloat& b) { return lift(b, a) - b; }
  template <class T, std::enable_if_t<std::is_arithmetic_v<T>, int> = 0>
  friend BigFloat operator*(const BigFloat& a, T b) { return a * lift(a, b); }
  template <class T, std::enable_if_t<std::is_arithmetic_v<T>, int> = 0>
  friend BigFloat operator*(T a, const BigFloat& b) { return lift(b, a) * b; }
  template <class T, std::enable_if_t<std::is_arithmetic_v<T>, int> = 0>
  friend BigFloat operator/(const BigFloat& a, T b) { return a / lift(a, b); }
  template <class T, std::enable_if_t<std::is_arithmetic_v<T>, int> = 0>
  friend BigFloat operator/(T a, const BigFloat& b) { return lift(b, a) / b; }
  template <class T, std::enable_if_t<std::is_arithmetic_v<T>, int> = 0>
  friend bool operator==(const BigFloat& a, T b) { return a == lift(a, b); }
  template <class T, std::enable_if_t<std::is_arithmetic_v<T>, int> = 0>
  friend bool operator!=(const BigFloat& a, T b) { return a != lift(a, b); }
  template <class T, std::enable_if_t<std::is_arithmetic_v<T>, int> = 0>
  friend bool operator<(const BigFloat& a, T b) { return a < lift(a, b); }
  template <class T, std::enable_if_t<std::is_arithmetic_v<T>, int> = 0>
  friend bool operator<=(const BigFloat& a, T b) { return a <= lift(a, b); }
  template <class T, std::enable_if_t<std::is_arithmetic_v<T>, int> = 0>
  friend bool operator>(const BigFloat& a, T b) { return a > lift(a, b); }
  template <class T, std::enable_if_t<std::is_arithmetic_v<T>, int> = 0>
  friend bool operator>=(const BigFloat& a, T b) { return a >= lift(a, b); }

  friend void swap(BigFloat& a, BigFloat& b) noexcept { std::swap(a.v_[0], b.v_[0]); }

 private:
  struct raw_tag {};
  BigFloat(raw_tag, long bits) { mpfr_init2(v_, bits); }

  static long matched_prec(const BigFloat& a, const BigFloat& b) {
    if (mpfr_get_prec(a.v_) != mpfr_get_prec(b.v_)) {
      throw NumericError("BigFloat: mixed-precision arithmetic rejected (" +
                         std::to_string(mpfr_get_prec(a.v_)) + " vs " +
                         std::to_string(mpfr_get_prec(b.v_)) + " bits)");
    }
    return mpfr_get_prec(a.v_);
  }
  template <class T>
  static BigFloat lift(const BigFloat& like, T x) {
    BigFloat r{raw_tag{}, like.precision()};
    if constexpr (std::is_floating_point_v<T>) mpfr_set_d(r.v_, static_cast<double>(x), MPFR_RNDN);
    else if constexpr (std::is_signed_v<T>) mpfr_set_si(r.v_, static_cast<long>(x), MPFR_RNDN);
    else mpfr_set_ui(r.v_, static_cast<unsigned long>(x), MPFR_RNDN);
    return r;
  }

  mpfr_t v_;

  friend BigFloat sqrt(const BigFloat&);
  friend BigFloat abs(const BigFloat&);
  friend BigFloat log(const BigFloat&);
  friend BigFloat exp(const BigFloat&);
  friend BigFloat cos(const BigFloat&);
  friend BigFloat sin(const BigFloat&);
  friend BigFloat atan(const BigFloat&);
  friend BigFloat hypot(const BigFloat&, const BigFloat&);
  friend BigFloat fma(const BigFloat&, const BigFloat&, const BigFloat&);
  friend BigFloat pow_int(const BigFloat&, long);
};

inline BigFloat sqrt(const BigFloat& a) { BigFloat r(a); mpfr_sqrt(r.v_, r.v_, MPFR_RNDN); return r; }
inline BigFloat abs(const BigFloat& a) { BigFloat r(a); mpfr_abs(r.v_, r.v_, MPFR_RNDN); return r; }
inline BigFloat log(const BigFloat& a) { BigFloat r(a); mpfr_log(r.v_, r.v_, MPFR_RNDN); return r; }
inline BigFloat exp(const BigFloat& a) { BigFloat r(a); mpfr_exp(r.v_, r.v_, MPFR_RNDN); return r; }
inline BigFloat cos(const BigFloat& a) { BigFloat r(a); mpfr_cos(r.v_, r.v_, MPFR_RNDN); return r; }
inline BigFloat sin(const BigFloat& a) { BigFloat r(a); mpfr_sin(r.v_, r.v_, MPFR_RNDN); return r; }
inline BigFloat atan(const BigFloat& a) { BigFloat r(a); mpfr_atan(r.v_, r.v_, MPFR_RNDN); return r; }
inline BigFloat hypot(const BigFloat& a, const BigFloat& b) {
  BigFloat r(a);
  mpfr_hypot(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}
inline BigFloat fma(const BigFloat& a, const BigFloat& b, const BigFloat& c) {
  BigFloat r(a);
  mpfr_fma(r.v_, a.v_, b.v_, c.v_, MPFR_RNDN);
  return r;
}
inline BigFloat pow_int(const BigFloat& a, long e) {
  BigFloat r(a);
  mpfr_pow_si(r.v_, a.v_, e, MPFR_RNDN);
  return r;
}
inline bool is_finite(const BigFloat& a) { return a.is_finite(); }
inline double to_double(const BigFloat& a) { return a.to_double(); }

// double overloads so that generic code compiles with Real = double.
inline double sqrt(double a) { return std::sqrt(a); }
inline double abs(double a) { return std::fabs(a); }
inline double log(double a) { return std::log(a); }
inline double exp(double a) { return std::exp(a); }
inline double cos(double a) { return std::cos(a); }
inline double sin(double a) { return std::sin(a); }
inline double atan(double a) { return std::atan(a); }
inline double hypot(double a, double b) { return std::hypot(a, b); }
inline double fma(double a, double b, double c) { return std::fma(a, b, c); }
inline double pow_int(double a, long e) { return std::pow(a, static_cast<double>(e)); }
inline bool is_finite(double a) { return std::isfinite(a); }
inline double to_double(double a) { return a; }

/// Mantissa bits of a Real under the active context.
template <class Real>
long mantissa_bits() {
  if constexpr (std::is_same_v<Real, double>) return 53;
  else return PrecisionContext::active_bits();
}

/// Machine epsilon 2^(1-mantissa_bits) of the active context.
template <class Real>
Real real_eps() {
  if constexpr (std::is_same_v<Real, double>) return std::numeric_limits<double>::epsilon();
  else return BigFloat::pow2(1 - PrecisionContext::active_bits());
}

/// 2^(-mantissa_bits/2): the residual/orthogonality tolerance scale.
template <class Real>
Real half_precision_tol() {
  if constexpr (std::is_same_v<Real, double>) return std::ldexp(1.0, -26);
  else return BigFloat::pow2(-(PrecisionContext::active_bits() / 2));
}

/// 2^(-2 mantissa_bits/3): deflation/split threshold for the QR iteration.
/// Perturbations at this scale stay well below the 2^(-mantissa_bits/2)
/// residual tolerance while keeping shifts effective across tiny couplings.
template <class Real>
Real qr_split_tol() {
  if constexpr (std::is_same_v<Real, double>) return std::ldexp(1.0, -35);
  else return BigFloat::pow2(-(PrecisionContext::active_bits() * 2 / 3));
}

template <class Real>
Real real_from(double x) {
  if constexpr (std::is_same_v<Real, double>) return x;
  else return BigFloat(x);
}

template <class Real>
Real real_from_string(const std::string& s) {
  if constexpr (std::is_same_v<Real, double>) {
    std::size_t pos = 0;
    double d = std::stod(s, &pos);
    if (pos != s.size()) throw ConfigError("cannot parse number '" + s + "'");
    return d;
  } else {
    return BigFloat::from_string(s);
  }
}

/// Decimal digits that faithfully represent `bits` of mantissa.
inline int decimal_digits_for_bits(long bits) {
  return static_cast<int>(std::ceil(static_cast<double>(bits) * 0.3010299956639812)) + 1;
}

template <class Real>
std::string format_real(const Real& x) {
  if constexpr (std::is_same_v<Real, double>) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*e", decimal_digits_for_bits(53), x);
    return buf;
  } else {
    return x.to_string(decimal_digits_for_bits(x.precision()));
  }
}

}  // namespace xebstat
