#ifndef KFADING_DETAIL_DD_HPP
#define KFADING_DETAIL_DD_HPP

// Double-double arithmetic: an unevaluated sum hi + lo with |lo| <= ulp(hi)/2,
// giving ~32 significant digits.  Algorithms follow the classic QD library
// (Hida/Li/Bailey); products use std::fma.

#include <cmath>
#include <cstdint>
#include <limits>

namespace kfading {
namespace detail {

struct dd {
  double hi = 0.0;
  double lo = 0.0;

  constexpr dd() = default;
  constexpr dd(double h) : hi(h), lo(0.0) {}
  constexpr dd(double h, double l) : hi(h), lo(l) {}

  explicit operator double() const { return hi; }
};

inline dd two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

inline dd quick_two_sum(double a, double b) {  // requires |a| >= |b|
  double s = a + b;
  return {s, b - (s - a)};
}

inline dd two_prod(double a, double b) {
  double p = a * b;
  return {p, std::fma(a, b, -p)};
}

inline dd operator+(dd a, dd b) {
  dd s = two_sum(a.hi, b.hi);
  s.lo += a.lo + b.lo;
  return quick_two_sum(s.hi, s.lo);
}

inline dd operator+(dd a, double b) {
  dd s = two_sum(a.hi, b);
  s.lo += a.lo;
  return quick_two_sum(s.hi, s.lo);
}

inline dd operator+(double a, dd b) { return b + a; }

inline dd operator-(dd a) { return {-a.hi, -a.lo}; }
inline dd operator-(dd a, dd b) { return a + (-b); }
inline dd operator-(dd a, double b) { return a + (-b); }
inline dd operator-(double a, dd b) { return dd(a) + (-b); }

inline dd operator*(dd a, dd b) {
  dd p = two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return quick_two_sum(p.hi, p.lo);
}

inline dd operator*(dd a, double b) {
  dd p = two_prod(a.hi, b);
  p.lo += a.lo * b;
  return quick_two_sum(p.hi, p.lo);
}

inline dd operator*(double a, dd b) { return b * a; }

inline dd operator/(dd a, dd b) {
  double q1 = a.hi / b.hi;
  dd r = a - b * q1;
  double q2 = r.hi / b.hi;
  r = r - b * q2;
  double q3 = r.hi / b.hi;
  dd q = quick_two_sum(q1, q2);
  return q + q3;
}

inline dd operator/(dd a, double b) { return a / dd(b); }
inline dd operator/(double a, dd b) { return dd(a) / b; }

inline dd& operator+=(dd& a, dd b) { a = a + b; return a; }
inline dd& operator+=(dd& a, double b) { a = a + b; return a; }
inline dd& operator-=(dd& a, dd b) { a = a - b; return a; }
inline dd& operator*=(dd& a, dd b) { a = a * b; return a; }
inline dd& operator*=(dd& a, double b) { a = a * b; return a; }
inline dd& operator/=(dd& a, dd b) { a = a / b; return a; }

inline bool operator<(dd a, dd b) { return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo); }
inline bool operator>(dd a, dd b) { return b < a; }

inline dd fabs(dd a) { return a.hi < 0.0 ? -a : a; }

inline dd ldexp(dd a, int n) { return {std::ldexp(a.hi, n), std::ldexp(a.lo, n)}; }

inline constexpr dd dd_pi   = {3.141592653589793116e+00, 1.224646799147353207e-16};
inline constexpr dd dd_ln2  = {6.931471805599452862e-01, 2.319046813846299558e-17};
inline constexpr dd dd_2pi  = {6.283185307179586232e+00, 2.449293598294706414e-16};

inline dd dd_sqrt(dd a) {
  if (a.hi <= 0.0) return dd(0.0);
  double y = std::sqrt(a.hi);
  // one Newton step: y + (a - y^2) / (2y), residual formed in dd
  dd r = a - two_prod(y, y);
  return dd(y) + r.hi / (2.0 * y);
}

// exp via 2^m * (e^{r/256})^256 with |r| < ln2/2, Taylor on the reduced arg
inline dd dd_exp(dd a) {
  if (a.hi > 709.0) return dd(std::numeric_limits<double>::infinity());
  if (a.hi < -746.0) return dd(0.0);
  double m = std::floor(a.hi / dd_ln2.hi + 0.5);
  dd r = ldexp(a - dd_ln2 * m, -8);
  dd sum = r, term = r;
  for (int i = 2; i <= 10; ++i) {
    term = term * r / static_cast<double>(i);
    sum += term;
    if (std::fabs(term.hi) < 1.0e-35) break;
  }
  // (1+s)^2 - 1 = 2s + s^2, applied 8 times, then add the final 1
  for (int i = 0; i < 8; ++i) sum = ldexp(sum, 1) + sum * sum;
  return ldexp(sum + 1.0, static_cast<int>(m));
}

inline dd dd_log(dd a) {
  double y = std::log(a.hi);
  // Newton: y <- y + a*exp(-y) - 1
  dd e = dd_exp(dd(-y));
  return dd(y) + a * e - 1.0;
}

inline dd dd_pow(dd a, dd b) { return dd_exp(b * dd_log(a)); }
inline dd dd_pow(dd a, double b) { return dd_exp(dd_log(a) * b); }

// sin(pi*x) via quadrant reduction; x is an exact double
inline dd dd_sin_taylor(dd t) {  // |t| <= pi/4
  dd t2 = t * t, sum = t, term = t;
  for (int i = 1; i <= 14; ++i) {
    term = term * t2 / static_cast<double>((2 * i) * (2 * i + 1));
    sum += (i & 1) ? -term : term;
    if (std::fabs(term.hi) < 1.0e-35) break;
  }
  return sum;
}

inline dd dd_cos_taylor(dd t) {
  dd t2 = t * t, sum = dd(1.0), term = dd(1.0);
  for (int i = 1; i <= 14; ++i) {
    term = term * t2 / static_cast<double>((2 * i - 1) * (2 * i));
    sum += (i & 1) ? -term : term;
    if (std::fabs(term.hi) < 1.0e-35) break;
  }
  return sum;
}

inline dd dd_sin_pi(double x) {
  double n = std::floor(x + 0.5);           // x - n in [-1/2, 1/2], exact
  double t = x - n;
  dd v;
  if (std::fabs(t) <= 0.25) v = dd_sin_taylor(dd_pi * t);
  else v = dd_cos_taylor(dd_pi * (std::fabs(t) - 0.5)) * (t < 0 ? -1.0 : 1.0);
  bool odd = std::fabs(std::fmod(n, 2.0)) > 0.5;
  return odd ? -v : v;
}

// Spouge's approximation with a = 41: ~1e-33 relative error.  Coefficients
// are computed once in dd at first use.
inline dd dd_gamma_positive(dd z) {  // requires z > 0
  constexpr int a = 41;
  static const auto coef = [] {
    struct C { dd c[a]; };
    C out;
    out.c[0] = dd_sqrt(dd_2pi);
    dd fact = dd(1.0);
    for (int k = 1; k < a; ++k) {
      if (k > 1) fact *= -static_cast<double>(k - 1);
      dd ak = dd(static_cast<double>(a - k));
      out.c[k] = dd_pow(ak, dd(k - 0.5)) * dd_exp(ak) / fact;
    }
    return out;
  }();
  dd zm1 = z - 1.0;
  dd acc = coef.c[0];
  for (int k = 1; k < a; ++k) acc += coef.c[k] / (zm1 + static_cast<double>(k));
  dd base = zm1 + static_cast<double>(a);
  return dd_pow(base, zm1 + 0.5) * dd_exp(-base) * acc;
}

inline dd dd_gamma(double x) {
  if (x >= 0.5) return dd_gamma_positive(dd(x));
  // reflection: Gamma(x) = pi / (sin(pi x) Gamma(1-x))
  return dd_pi / (dd_sin_pi(x) * dd_gamma_positive(dd(1.0) - x));
}

}  // namespace detail
}  // namespace kfading

#endif
