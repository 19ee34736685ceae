#pragma once

// Bicomplex and hyper-dual scalars.
//
// Both types carry four real components and overload the arithmetic operators
// and the elementary functions, so any problem function written as a template
// over its scalar type can be evaluated in either number system.  Comparisons
// look at real parts only: seeding a derivative direction never changes
// control flow.

#include <cmath>
#include <complex>
#include <concepts>
#include <ostream>
#include <stdexcept>
#include <string>

namespace radau {

// ---------------------------------------------------------------------------
// Bicomplex: z = re + i1*im1 + i2*im2 + i1*i2*im12, with i1^2 = i2^2 = -1 and
// i1*i2 = i2*i1.  Equivalently z = c1 + i2*c2 with c1 = re + i1*im1 and
// c2 = im2 + i1*im12 ordinary complex numbers.
// ---------------------------------------------------------------------------
struct Bicomplex {
  double re = 0.0;
  double im1 = 0.0;
  double im2 = 0.0;
  double im12 = 0.0;

  constexpr Bicomplex() = default;
  constexpr Bicomplex(double x) : re(x) {}  // NOLINT: implicit promotion from real
  constexpr Bicomplex(double r, double a, double b, double c) : re(r), im1(a), im2(b), im12(c) {}

  [[nodiscard]] constexpr bool is_real() const { return im1 == 0.0 && im2 == 0.0 && im12 == 0.0; }
  [[nodiscard]] std::complex<double> c1() const { return {re, im1}; }
  [[nodiscard]] std::complex<double> c2() const { return {im2, im12}; }

  static Bicomplex from_pair(std::complex<double> c1, std::complex<double> c2) {
    return {c1.real(), c1.imag(), c2.real(), c2.imag()};
  }

  Bicomplex& operator+=(const Bicomplex& o) {
    re += o.re;
    im1 += o.im1;
    im2 += o.im2;
    im12 += o.im12;
    return *this;
  }
  Bicomplex& operator-=(const Bicomplex& o) {
    re -= o.re;
    im1 -= o.im1;
    im2 -= o.im2;
    im12 -= o.im12;
    return *this;
  }
  Bicomplex& operator*=(const Bicomplex& o);
  Bicomplex& operator/=(const Bicomplex& o);
};

inline Bicomplex operator-(const Bicomplex& a) { return {-a.re, -a.im1, -a.im2, -a.im12}; }
inline Bicomplex operator+(const Bicomplex& a) { return a; }

inline Bicomplex operator+(Bicomplex a, const Bicomplex& b) { return a += b; }
inline Bicomplex operator-(Bicomplex a, const Bicomplex& b) { return a -= b; }

inline Bicomplex operator*(const Bicomplex& a, const Bicomplex& b) {
  // i1*i1 = -1, i2*i2 = -1, (i1 i2)^2 = +1, i1*(i1 i2) = -i2, i2*(i1 i2) = -i1
  return {a.re * b.re - a.im1 * b.im1 - a.im2 * b.im2 + a.im12 * b.im12,
          a.re * b.im1 + a.im1 * b.re - a.im2 * b.im12 - a.im12 * b.im2,
          a.re * b.im2 + a.im2 * b.re - a.im1 * b.im12 - a.im12 * b.im1,
          a.re * b.im12 + a.im12 * b.re + a.im1 * b.im2 + a.im2 * b.im1};
}

inline Bicomplex operator*(const Bicomplex& a, double b) { return {a.re * b, a.im1 * b, a.im2 * b, a.im12 * b}; }
inline Bicomplex operator*(double a, const Bicomplex& b) { return b * a; }

inline Bicomplex operator/(const Bicomplex& a, double b) { return {a.re / b, a.im1 / b, a.im2 / b, a.im12 / b}; }

inline Bicomplex operator/(const Bicomplex& a, const Bicomplex& b) {
  if (b.is_real()) {
    return a / b.re;
  }
  // (a1 + i2 a2) / (b1 + i2 b2) = (a1 + i2 a2)(b1 - i2 b2) / (b1^2 + b2^2)
  const std::complex<double> b1 = b.c1();
  const std::complex<double> b2 = b.c2();
  const std::complex<double> den = b1 * b1 + b2 * b2;
  if (den == std::complex<double>(0.0, 0.0)) {
    throw std::domain_error("bicomplex division by a zero divisor (c1^2 + c2^2 = 0)");
  }
  const std::complex<double> a1 = a.c1();
  const std::complex<double> a2 = a.c2();
  return Bicomplex::from_pair((a1 * b1 + a2 * b2) / den, (a2 * b1 - a1 * b2) / den);
}

inline Bicomplex operator/(double a, const Bicomplex& b) { return Bicomplex(a) / b; }

inline Bicomplex& Bicomplex::operator*=(const Bicomplex& o) { return *this = *this * o; }
inline Bicomplex& Bicomplex::operator/=(const Bicomplex& o) { return *this = *this / o; }

inline Bicomplex operator+(const Bicomplex& a, double b) { return {a.re + b, a.im1, a.im2, a.im12}; }
inline Bicomplex operator+(double a, const Bicomplex& b) { return b + a; }
inline Bicomplex operator-(const Bicomplex& a, double b) { return {a.re - b, a.im1, a.im2, a.im12}; }
inline Bicomplex operator-(double a, const Bicomplex& b) { return {a - b.re, -b.im1, -b.im2, -b.im12}; }

inline std::ostream& operator<<(std::ostream& os, const Bicomplex& z) {
  return os << '(' << z.re << ", " << z.im1 << " i1, " << z.im2 << " i2, " << z.im12 << " i1i2)";
}

// ---------------------------------------------------------------------------
// HyperDual: w = re + e1*ep1 + e2*ep2 + e1e2*ep12 with e1^2 = e2^2 = 0.
// ---------------------------------------------------------------------------
struct HyperDual {
  double re = 0.0;
  double ep1 = 0.0;
  double ep2 = 0.0;
  double ep12 = 0.0;

  constexpr HyperDual() = default;
  constexpr HyperDual(double x) : re(x) {}  // NOLINT: implicit promotion from real
  constexpr HyperDual(double r, double a, double b, double c) : re(r), ep1(a), ep2(b), ep12(c) {}

  [[nodiscard]] constexpr bool is_real() const { return ep1 == 0.0 && ep2 == 0.0 && ep12 == 0.0; }

  HyperDual& operator+=(const HyperDual& o) {
    re += o.re;
    ep1 += o.ep1;
    ep2 += o.ep2;
    ep12 += o.ep12;
    return *this;
  }
  HyperDual& operator-=(const HyperDual& o) {
    re -= o.re;
    ep1 -= o.ep1;
    ep2 -= o.ep2;
    ep12 -= o.ep12;
    return *this;
  }
  HyperDual& operator*=(const HyperDual& o);
  HyperDual& operator/=(const HyperDual& o);
};

inline HyperDual operator-(const HyperDual& a) { return {-a.re, -a.ep1, -a.ep2, -a.ep12}; }
inline HyperDual operator+(const HyperDual& a) { return a; }
inline HyperDual operator+(HyperDual a, const HyperDual& b) { return a += b; }
inline HyperDual operator-(HyperDual a, const HyperDual& b) { return a -= b; }

inline HyperDual operator*(const HyperDual& a, const HyperDual& b) {
  return {a.re * b.re, a.re * b.ep1 + a.ep1 * b.re, a.re * b.ep2 + a.ep2 * b.re,
          a.re * b.ep12 + a.ep1 * b.ep2 + a.ep2 * b.ep1 + a.ep12 * b.re};
}
inline HyperDual operator*(const HyperDual& a, double b) { return {a.re * b, a.ep1 * b, a.ep2 * b, a.ep12 * b}; }
inline HyperDual operator*(double a, const HyperDual& b) { return b * a; }

inline HyperDual operator/(const HyperDual& a, double b) { return {a.re / b, a.ep1 / b, a.ep2 / b, a.ep12 / b}; }

inline HyperDual operator/(const HyperDual& a, const HyperDual& b) {
  if (b.re == 0.0) {
    throw std::domain_error("hyper-dual division by a number with zero real part");
  }
  // Solve a = q*b component by component.
  const double q = a.re / b.re;
  const double q1 = (a.ep1 - q * b.ep1) / b.re;
  const double q2 = (a.ep2 - q * b.ep2) / b.re;
  const double q12 = (a.ep12 - q * b.ep12 - q1 * b.ep2 - q2 * b.ep1) / b.re;
  return {q, q1, q2, q12};
}
inline HyperDual operator/(double a, const HyperDual& b) { return HyperDual(a) / b; }

inline HyperDual& HyperDual::operator*=(const HyperDual& o) { return *this = *this * o; }
inline HyperDual& HyperDual::operator/=(const HyperDual& o) { return *this = *this / o; }

inline HyperDual operator+(const HyperDual& a, double b) { return {a.re + b, a.ep1, a.ep2, a.ep12}; }
inline HyperDual operator+(double a, const HyperDual& b) { return b + a; }
inline HyperDual operator-(const HyperDual& a, double b) { return {a.re - b, a.ep1, a.ep2, a.ep12}; }
inline HyperDual operator-(double a, const HyperDual& b) { return {a - b.re, -b.ep1, -b.ep2, -b.ep12}; }

inline std::ostream& operator<<(std::ostream& os, const HyperDual& w) {
  return os << '(' << w.re << ", " << w.ep1 << " e1, " << w.ep2 << " e2, " << w.ep12 << " e1e2)";
}

// ---------------------------------------------------------------------------
// Scalar concept and real-part access
// ---------------------------------------------------------------------------
template <class T>
concept Scalar = std::same_as<T, double> || std::same_as<T, Bicomplex> || std::same_as<T, HyperDual>;

template <class T>
concept Hypercomplex = std::same_as<T, Bicomplex> || std::same_as<T, HyperDual>;

constexpr double real_part(double x) { return x; }
constexpr double real_part(const Bicomplex& z) { return z.re; }
constexpr double real_part(const HyperDual& w) { return w.re; }

// Comparisons use the real part only.
#define RADAU_REAL_COMPARISONS(T)                                                    \
  inline bool operator<(const T& a, const T& b) { return a.re < b.re; }              \
  inline bool operator<(const T& a, double b) { return a.re < b; }                   \
  inline bool operator<(double a, const T& b) { return a < b.re; }                   \
  inline bool operator>(const T& a, const T& b) { return a.re > b.re; }              \
  inline bool operator>(const T& a, double b) { return a.re > b; }                   \
  inline bool operator>(double a, const T& b) { return a > b.re; }                   \
  inline bool operator<=(const T& a, const T& b) { return a.re <= b.re; }            \
  inline bool operator<=(const T& a, double b) { return a.re <= b; }                 \
  inline bool operator<=(double a, const T& b) { return a <= b.re; }                 \
  inline bool operator>=(const T& a, const T& b) { return a.re >= b.re; }            \
  inline bool operator>=(const T& a, double b) { return a.re >= b; }                 \
  inline bool operator>=(double a, const T& b) { return a >= b.re; }                 \
  inline bool operator==(const T& a, double b) { return a.re == b; }                 \
  inline bool operator!=(const T& a, double b) { return a.re != b; }

RADAU_REAL_COMPARISONS(Bicomplex)
RADAU_REAL_COMPARISONS(HyperDual)
#undef RADAU_REAL_COMPARISONS

// ---------------------------------------------------------------------------
// Hyper-dual elementary functions: f(x + d) = f(x) + f'(x) d + f''(x) ep1 ep2 e1e2
// ---------------------------------------------------------------------------
namespace detail {

inline HyperDual chain(const HyperDual& w, double f0, double f1, double f2) {
  return {f0, f1 * w.ep1, f1 * w.ep2, f1 * w.ep12 + f2 * w.ep1 * w.ep2};
}

[[noreturn]] inline void domain_fail(const char* fn, double x) {
  throw std::domain_error(std::string(fn) + ": argument " + std::to_string(x) + " outside the function's domain");
}

inline bool is_integer(double p) { return std::isfinite(p) && std::floor(p) == p; }

}  // namespace detail

inline HyperDual exp(const HyperDual& w) {
  const double e = std::exp(w.re);
  return detail::chain(w, e, e, e);
}
inline HyperDual log(const HyperDual& w) {
  if (!(w.re > 0.0)) detail::domain_fail("log", w.re);
  return detail::chain(w, std::log(w.re), 1.0 / w.re, -1.0 / (w.re * w.re));
}
inline HyperDual log10(const HyperDual& w) { return log(w) / std::log(10.0); }
inline HyperDual sin(const HyperDual& w) {
  const double s = std::sin(w.re);
  return detail::chain(w, s, std::cos(w.re), -s);
}
inline HyperDual cos(const HyperDual& w) {
  const double c = std::cos(w.re);
  return detail::chain(w, c, -std::sin(w.re), -c);
}
inline HyperDual tan(const HyperDual& w) {
  const double t = std::tan(w.re);
  const double sec2 = 1.0 + t * t;
  return detail::chain(w, t, sec2, 2.0 * t * sec2);
}
inline HyperDual sinh(const HyperDual& w) {
  const double s = std::sinh(w.re);
  return detail::chain(w, s, std::cosh(w.re), s);
}
inline HyperDual cosh(const HyperDual& w) {
  const double c = std::cosh(w.re);
  return detail::chain(w, c, std::sinh(w.re), c);
}
inline HyperDual tanh(const HyperDual& w) {
  const double t = std::tanh(w.re);
  const double d = 1.0 - t * t;
  return detail::chain(w, t, d, -2.0 * t * d);
}
inline HyperDual sqrt(const HyperDual& w) {
  if (w.is_real() && w.re >= 0.0) return HyperDual(std::sqrt(w.re));
  if (!(w.re > 0.0)) detail::domain_fail("sqrt", w.re);
  const double s = std::sqrt(w.re);
  return detail::chain(w, s, 0.5 / s, -0.25 / (s * w.re));
}
inline HyperDual pow(const HyperDual& w, double p) {
  if (w.is_real()) return HyperDual(std::pow(w.re, p));
  if (w.re == 0.0) {
    if (p == 0.0) return HyperDual(1.0);
    if (!(detail::is_integer(p) && p >= 2.0)) detail::domain_fail("pow", w.re);
  } else if (w.re < 0.0 && !detail::is_integer(p)) {
    detail::domain_fail("pow", w.re);
  }
  return detail::chain(w, std::pow(w.re, p), p * std::pow(w.re, p - 1.0), p * (p - 1.0) * std::pow(w.re, p - 2.0));
}
inline HyperDual pow(const HyperDual& a, const HyperDual& b) {
  if (b.is_real()) return pow(a, b.re);
  return exp(b * log(a));
}
inline HyperDual pow(double a, const HyperDual& b) {
  if (!(a > 0.0)) detail::domain_fail("pow", a);
  return exp(b * std::log(a));
}
inline HyperDual atan(const HyperDual& w) {
  const double d = 1.0 / (1.0 + w.re * w.re);
  return detail::chain(w, std::atan(w.re), d, -2.0 * w.re * d * d);
}
inline HyperDual asin(const HyperDual& w) {
  if (w.is_real() && std::abs(w.re) <= 1.0) return HyperDual(std::asin(w.re));
  if (!(std::abs(w.re) < 1.0)) detail::domain_fail("asin", w.re);
  const double q = 1.0 - w.re * w.re;
  const double r = 1.0 / std::sqrt(q);
  return detail::chain(w, std::asin(w.re), r, w.re * r / q);
}
inline HyperDual acos(const HyperDual& w) {
  if (w.is_real() && std::abs(w.re) <= 1.0) return HyperDual(std::acos(w.re));
  if (!(std::abs(w.re) < 1.0)) detail::domain_fail("acos", w.re);
  const double q = 1.0 - w.re * w.re;
  const double r = 1.0 / std::sqrt(q);
  return detail::chain(w, std::acos(w.re), -r, -w.re * r / q);
}
inline HyperDual atan2(const HyperDual& y, const HyperDual& x) {
  if (x.re == 0.0 && y.re == 0.0) detail::domain_fail("atan2", 0.0);
  // atan(y/x) and atan2(y, x) differ by a constant on each half plane.
  HyperDual r = (std::abs(x.re) >= std::abs(y.re)) ? atan(y / x) : -atan(x / y);
  r.re = std::atan2(y.re, x.re);
  return r;
}
inline HyperDual abs(const HyperDual& w) { return w.re >= 0.0 ? w : -w; }
inline HyperDual fabs(const HyperDual& w) { return abs(w); }

// ---------------------------------------------------------------------------
// Bicomplex elementary functions.
//
// exp, sin, cos and the hyperbolic functions use the closed forms in terms of
// the (c1, c2) pair, e.g. sin(c1 + i2 c2) = sin c1 cosh c2 + i2 cos c1 sinh c2,
// which involve no differences.  The remaining functions go through the
// idempotent split z = (c1 - i1 c2) e+ + (c1 + i1 c2) e-, which applies the
// ordinary complex function to each half; recombining the halves subtracts
// nearly equal numbers in the i1i2 channel.
// ---------------------------------------------------------------------------
namespace detail {

template <class F>
Bicomplex idempotent_lift(const Bicomplex& z, F&& f) {
  const std::complex<double> i1(0.0, 1.0);
  const std::complex<double> c1 = z.c1();
  const std::complex<double> c2 = z.c2();
  const std::complex<double> wp = f(c1 - i1 * c2);
  const std::complex<double> wm = f(c1 + i1 * c2);
  return Bicomplex::from_pair(0.5 * (wp + wm), 0.5 * i1 * (wp - wm));
}

}  // namespace detail

inline Bicomplex exp(const Bicomplex& z) {
  if (z.is_real()) return Bicomplex(std::exp(z.re));
  const std::complex<double> e = std::exp(z.c1());
  const std::complex<double> c2 = z.c2();
  return Bicomplex::from_pair(e * std::cos(c2), e * std::sin(c2));
}
inline Bicomplex sin(const Bicomplex& z) {
  if (z.is_real()) return Bicomplex(std::sin(z.re));
  const std::complex<double> c1 = z.c1();
  const std::complex<double> c2 = z.c2();
  return Bicomplex::from_pair(std::sin(c1) * std::cosh(c2), std::cos(c1) * std::sinh(c2));
}
inline Bicomplex cos(const Bicomplex& z) {
  if (z.is_real()) return Bicomplex(std::cos(z.re));
  const std::complex<double> c1 = z.c1();
  const std::complex<double> c2 = z.c2();
  return Bicomplex::from_pair(std::cos(c1) * std::cosh(c2), -std::sin(c1) * std::sinh(c2));
}
inline Bicomplex sinh(const Bicomplex& z) {
  if (z.is_real()) return Bicomplex(std::sinh(z.re));
  const std::complex<double> c1 = z.c1();
  const std::complex<double> c2 = z.c2();
  return Bicomplex::from_pair(std::sinh(c1) * std::cos(c2), std::cosh(c1) * std::sin(c2));
}
inline Bicomplex cosh(const Bicomplex& z) {
  if (z.is_real()) return Bicomplex(std::cosh(z.re));
  const std::complex<double> c1 = z.c1();
  const std::complex<double> c2 = z.c2();
  return Bicomplex::from_pair(std::cosh(c1) * std::cos(c2), std::sinh(c1) * std::sin(c2));
}
inline Bicomplex tan(const Bicomplex& z) {
  if (z.is_real()) return Bicomplex(std::tan(z.re));
  return sin(z) / cos(z);
}
inline Bicomplex tanh(const Bicomplex& z) {
  if (z.is_real()) return Bicomplex(std::tanh(z.re));
  return sinh(z) / cosh(z);
}
inline Bicomplex log(const Bicomplex& z) {
  if (!(z.re > 0.0)) detail::domain_fail("log", z.re);
  if (z.is_real()) return Bicomplex(std::log(z.re));
  return detail::idempotent_lift(z, [](std::complex<double> c) { return std::log(c); });
}
inline Bicomplex log10(const Bicomplex& z) { return log(z) / std::log(10.0); }
inline Bicomplex sqrt(const Bicomplex& z) {
  if (z.is_real() && z.re >= 0.0) return Bicomplex(std::sqrt(z.re));
  if (!(z.re > 0.0)) detail::domain_fail("sqrt", z.re);
  return detail::idempotent_lift(z, [](std::complex<double> c) { return std::sqrt(c); });
}
inline Bicomplex pow(const Bicomplex& z, double p) {
  if (z.is_real()) return Bicomplex(std::pow(z.re, p));
  if (detail::is_integer(p) && std::abs(p) <= 64.0) {
    // Exact repeated multiplication; keeps polynomial channels free of roundoff.
    auto n = static_cast<long>(std::abs(p));
    Bicomplex result(1.0);
    Bicomplex base = z;
    while (n > 0) {
      if (n & 1) result = result * base;
      base = base * base;
      n >>= 1;
    }
    return p < 0.0 ? 1.0 / result : result;
  }
  if (!(z.re > 0.0)) detail::domain_fail("pow", z.re);
  return detail::idempotent_lift(z, [p](std::complex<double> c) { return std::pow(c, p); });
}
inline Bicomplex pow(const Bicomplex& a, const Bicomplex& b) {
  if (b.is_real()) return pow(a, b.re);
  return exp(b * log(a));
}
inline Bicomplex pow(double a, const Bicomplex& b) {
  if (!(a > 0.0)) detail::domain_fail("pow", a);
  return exp(b * std::log(a));
}
inline Bicomplex atan(const Bicomplex& z) {
  if (z.is_real()) return Bicomplex(std::atan(z.re));
  return detail::idempotent_lift(z, [](std::complex<double> c) { return std::atan(c); });
}
inline Bicomplex asin(const Bicomplex& z) {
  if (z.is_real() && std::abs(z.re) <= 1.0) return Bicomplex(std::asin(z.re));
  if (!(std::abs(z.re) < 1.0)) detail::domain_fail("asin", z.re);
  return detail::idempotent_lift(z, [](std::complex<double> c) { return std::asin(c); });
}
inline Bicomplex acos(const Bicomplex& z) {
  if (z.is_real() && std::abs(z.re) <= 1.0) return Bicomplex(std::acos(z.re));
  if (!(std::abs(z.re) < 1.0)) detail::domain_fail("acos", z.re);
  return detail::idempotent_lift(z, [](std::complex<double> c) { return std::acos(c); });
}
inline Bicomplex atan2(const Bicomplex& y, const Bicomplex& x) {
  if (x.re == 0.0 && y.re == 0.0) detail::domain_fail("atan2", 0.0);
  if (x.is_real() && y.is_real()) return Bicomplex(std::atan2(y.re, x.re));
  Bicomplex r = (std::abs(x.re) >= std::abs(y.re)) ? atan(y / x) : -atan(x / y);
  r.re = std::atan2(y.re, x.re);
  return r;
}
inline Bicomplex abs(const Bicomplex& z) { return z.re >= 0.0 ? z : -z; }
inline Bicomplex fabs(const Bicomplex& z) { return abs(z); }

// min/max pick by real part; ties keep the first argument.
template <Hypercomplex T>
T max(const T& a, const T& b) {
  return (a.re < b.re) ? b : a;
}
template <Hypercomplex T>
T min(const T& a, const T& b) {
  return (b.re < a.re) ? b : a;
}
template <Hypercomplex T>
T max(const T& a, double b) {
  return max(a, T(b));
}
template <Hypercomplex T>
T max(double a, const T& b) {
  return max(T(a), b);
}
template <Hypercomplex T>
T min(const T& a, double b) {
  return min(a, T(b));
}
template <Hypercomplex T>
T min(double a, const T& b) {
  return min(T(a), b);
}

}  // namespace radau
