#ifndef KFADING_SPECFUN_HPP
#define KFADING_SPECFUN_HPP

// Special functions used by the fading statistics: gamma, upper incomplete
// gamma, modified Bessel I/K of real order, confluent hypergeometric M and U,
// Whittaker M and W, and one Meijer-G instance that shows up as the CDF of a
// gamma-mixed gamma sum.  Everything is real-argument, hand-rolled, and
// validated against independent oracles in the test suite.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "kfading/detail/dd.hpp"
#include "kfading/detail/quadrature.hpp"

namespace kfading {

// ----------------------------------------------------------------- gamma ---

// Lanczos, g = 7, 9 terms (~15 significant digits)
inline double gamma_fn(double x) {
  static const double c[9] = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,     -176.61502916214059,    12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    double s = std::sin(M_PI * x);
    if (s == 0.0) throw std::domain_error("gamma_fn: pole at non-positive integer");
    return M_PI / (s * gamma_fn(1.0 - x));
  }
  x -= 1.0;
  double a = c[0];
  double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += c[i] / (x + i);
  return std::sqrt(2.0 * M_PI) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

inline double lgamma_fn(double x) {  // log|Gamma(x)|
  return std::lgamma(x);
}

inline double pochhammer(double a, int n) {
  double p = 1.0;
  for (int i = 0; i < n; ++i) p *= a + i;
  return p;
}

// ------------------------------------------------- upper incomplete gamma ---

namespace detail {

// Legendre continued fraction for Gamma(a,x), good for x >~ a+1 (always fine
// for a <= 0).  Evaluated by modified Lentz.  Returns Gamma(a,x)*e^x*x^{-a}.
template <class Real>
Real gamma_upper_cf_scaled(double a, Real x) {
  const double tiny = 1e-300;
  Real b = x + (1.0 - a);
  Real c = Real(1.0 / tiny);
  Real d = Real(1.0) / b;
  Real h = d;
  for (int i = 1; i <= 400; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(static_cast<double>(d)) < tiny) d = Real(tiny);
    c = b + an / c;
    if (std::fabs(static_cast<double>(c)) < tiny) c = Real(tiny);
    d = Real(1.0) / d;
    Real del = d * c;
    h *= del;
    if (std::fabs(static_cast<double>(del) - 1.0) < 1e-33) break;
  }
  return h;
}

// Gamma(a,x) by series for the lower function, in dd:
// Gamma(a,x) = Gamma(a) - x^a e^{-x} sum_n x^n / (a (a+1)...(a+n))
inline dd gamma_upper_series_dd(double a, dd x) {
  dd ap = dd(a);
  dd sum = dd(1.0) / a;
  dd del = sum;
  for (int i = 0; i < 600; ++i) {
    ap += 1.0;
    del = del * x / ap;
    sum += del;
    if (std::fabs(del.hi) < std::fabs(sum.hi) * 1e-33) break;
  }
  dd lower = dd_pow(x, dd(a)) * dd_exp(-x) * sum;
  return dd_gamma(a) - lower;
}

inline dd gamma_upper_dd(double a, dd x) {
  if (x.hi <= 0.0) return dd_gamma(a);
  if (x.hi >= a + 1.0 && x.hi >= 1.5)
    return gamma_upper_cf_scaled<dd>(a, x) * dd_pow(x, dd(a)) * dd_exp(-x);
  return gamma_upper_series_dd(a, x);
}

}  // namespace detail

inline double gamma_upper(double a, double x) {
  if (x < 0.0) throw std::domain_error("gamma_upper: x < 0");
  return static_cast<double>(detail::gamma_upper_dd(a, detail::dd(x)));
}

// Gamma(a,x) * e^x * x^{-a}: stays representable for large x
inline double gamma_upper_scaled(double a, double x) {
  if (x <= 0.0) throw std::domain_error("gamma_upper_scaled: x <= 0");
  if (x >= a + 1.0 && x >= 1.5) return detail::gamma_upper_cf_scaled<double>(a, x);
  detail::dd g = detail::gamma_upper_series_dd(a, detail::dd(x));
  return static_cast<double>(g * detail::dd_exp(detail::dd(x)) * detail::dd_pow(detail::dd(x), detail::dd(-a)));
}

// -------------------------------------------------------- modified Bessel ---

// I_v by its ascending series; valid for v > -1, x >= 0.  log-scaled variant
// for large arguments.
inline double bessel_iv(double v, double x) {
  if (x < 0.0) throw std::domain_error("bessel_iv: x < 0");
  if (x == 0.0) return v == 0.0 ? 1.0 : 0.0;
  double lh = v * std::log(0.5 * x) - std::lgamma(v + 1.0);
  double q = 0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int j = 1; j <= 600; ++j) {
    term *= q / (j * (v + j));
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return std::exp(lh) * sum;
}

inline double bessel_iv_ln(double v, double x) {  // log I_v(x), x > 0, v > -1
  double lh = v * std::log(0.5 * x) - std::lgamma(v + 1.0);
  double q = 0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int j = 1; j <= 100000; ++j) {
    term *= q / (j * (v + j));
    sum += term;
    if (term < sum * 1e-17) break;
    if (sum > 1e290) {  // renormalize
      lh += std::log(sum);
      term /= sum;
      sum = 1.0;
    }
  }
  return lh + std::log(sum);
}

namespace detail {

// Temme's series for K_mu(x), K_{mu+1}(x), |mu| <= 1/2, x <= 2
inline void bessel_k_temme(double mu, double x, double& k0, double& k1) {
  // gam1(mu) = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu), smooth through mu=0
  auto chi1 = [](double m) {
    if (std::fabs(m) > 1e-4)
      return (1.0 / gamma_fn(1.0 - m) - 1.0 / gamma_fn(1.0 + m)) / (2.0 * m);
    // from the odd Taylor coefficients of 1/Gamma(1+m) around 0
    const double a1 = 0.57721566490153286061, a3 = -0.04200263503409523553,
                 a5 = -0.00962197152787697356, a7 = 0.00072189432466630995;
    double m2 = m * m;
    return -(a1 + m2 * (a3 + m2 * (a5 + m2 * a7)));
  };
  double gam1 = chi1(mu);
  double gam2 = 0.5 * (1.0 / gamma_fn(1.0 + mu) + 1.0 / gamma_fn(1.0 - mu));
  double xi = 1.0;
  if (std::fabs(mu) > 1e-8) {
    double pimu = M_PI * mu;
    xi = pimu / std::sin(pimu);
  }
  double lx = std::log(2.0 / x);
  double sigma = mu * lx;
  double sh = std::fabs(sigma) < 1e-8 ? 1.0 + sigma * sigma / 6.0 : std::sinh(sigma) / sigma;
  double f = xi * (gam1 * std::cosh(sigma) + gam2 * sh * lx);
  double e = std::exp(mu * lx);
  double p = 0.5 * e * gamma_fn(1.0 + mu);
  double q = 0.5 * gamma_fn(1.0 - mu) / e;
  double c = 1.0, d = 0.25 * x * x;
  double sum0 = f, sum1 = p;
  for (int i = 1; i <= 400; ++i) {
    f = (i * f + p + q) / (i * i - mu * mu);
    p /= (i - mu);
    q /= (i + mu);
    c *= d / i;
    sum0 += c * f;
    sum1 += c * (p - i * f);
    if (std::fabs(c * f) < std::fabs(sum0) * 1e-17) break;
  }
  k0 = sum0;
  k1 = sum1 * 2.0 / x;
}

// Steed/Thompson-Barnett CF2 for K_mu(x) e^x, x > 2, |mu| <= 1/2
inline void bessel_k_cf2_scaled(double mu, double x, double& k0s, double& k1s) {
  const double eps = 1e-16;
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  double a1 = 0.25 - mu * mu;
  double q = a1, c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i <= 40000; ++i) {
    a -= 2 * (i - 1);
    c = -a * c / i;
    double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    double dels = q * delh;
    s += dels;
    if (std::fabs(dels / s) < eps) break;
  }
  h = a1 * h;
  k0s = std::sqrt(M_PI / (2.0 * x)) / s;
  k1s = k0s * (mu + x + 0.5 - h) / x;
}

}  // namespace detail

// K_v(x) e^{x*scale_off}: scaled=true returns e^x K_v(x)
inline double bessel_kv_impl(double v, double x, bool scaled) {
  if (x <= 0.0) throw std::domain_error("bessel_kv: x <= 0");
  v = std::fabs(v);  // K_{-v} = K_v
  int nl = static_cast<int>(v + 0.5);
  double mu = v - nl;  // |mu| <= 1/2
  double km, kp;       // K_mu, K_{mu+1}
  if (x <= 2.0) {
    detail::bessel_k_temme(mu, x, km, kp);
    if (scaled) {
      double e = std::exp(x);
      km *= e;
      kp *= e;
    }
  } else {
    detail::bessel_k_cf2_scaled(mu, x, km, kp);
    if (!scaled) {
      double e = std::exp(-x);
      km *= e;
      kp *= e;
    }
  }
  for (int i = 1; i <= nl; ++i) {
    double kn = km + kp * 2.0 * (mu + i) / x;
    km = kp;
    kp = kn;
  }
  return km;
}

inline double bessel_kv(double v, double x) { return bessel_kv_impl(v, x, false); }
inline double bessel_kv_scaled(double v, double x) { return bessel_kv_impl(v, x, true); }

// --------------------------------------------- confluent hypergeometric ---

namespace detail {

inline dd kummer_m_dd(double a, double b, dd z, double* abs_sum = nullptr) {
  dd sum = dd(1.0), term = dd(1.0);
  double asum = 1.0;
  for (int n = 0; n < 2000; ++n) {
    term = term * z * ((dd(a) + n) / ((dd(b) + n) * (n + 1.0)));
    sum += term;
    asum += std::fabs(term.hi);
    if (std::fabs(term.hi) < std::fabs(sum.hi) * 1e-33 + 1e-320) break;
  }
  if (abs_sum) *abs_sum = asum;
  return sum;
}

}  // namespace detail

inline double kummer_m(double a, double b, double z) {
  if (b <= 0.0 && b == std::floor(b))
    throw std::domain_error("kummer_m: b is a non-positive integer");
  return static_cast<double>(detail::kummer_m_dd(a, b, detail::dd(z)));
}

namespace detail {

// Poincare asymptotic series: U(a,b,z) ~ z^{-a} sum_n (a)_n (a-b+1)_n / (n! (-z)^n).
// Returns true on acceptance (min term small enough before divergence).
inline bool kummer_u_asymptotic(double a, double b, double z, double& out) {
  double term = 1.0, sum = 1.0, prev = std::numeric_limits<double>::max();
  for (int n = 0; n < 300; ++n) {
    double t = term * (a + n) * (a - b + 1.0 + n) / (-(n + 1.0) * z);
    if (std::fabs(t) >= std::fabs(term) && n > 2) break;  // divergence onset
    term = t;
    sum += term;
    prev = std::fabs(term);
    if (prev < std::fabs(sum) * 1e-15) {
      out = std::pow(z, -a) * sum;
      return true;
    }
  }
  if (prev < std::fabs(sum) * 1e-13) {
    out = std::pow(z, -a) * sum;
    return true;
  }
  return false;
}

// U via the two-M decomposition, everything in dd:
// U = Gamma(1-b)/Gamma(a-b+1) M(a,b,z) + Gamma(b-1)/Gamma(a) z^{1-b} M(a-b+1,2-b,z)
inline bool kummer_u_decomposition(double a, double b, double z, double& out) {
  double as1 = 0.0, as2 = 0.0;
  dd m1 = kummer_m_dd(a, b, dd(z), &as1);
  dd m2 = kummer_m_dd(a - b + 1.0, 2.0 - b, dd(z), &as2);
  dd c1 = dd_gamma(1.0 - b) / dd_gamma(a - b + 1.0);
  dd c2 = dd_gamma(b - 1.0) / dd_gamma(a);
  dd zp = dd_pow(dd(z), dd(1.0 - b));
  dd t1 = c1 * m1;
  dd t2 = c2 * zp * m2;
  dd u = t1 + t2;
  double cancel = std::fabs(c1.hi) * as1 + std::fabs(c2.hi * zp.hi) * as2;
  out = static_cast<double>(u);
  // The cancellation between the two terms amplifies the *double rounding
  // of the parameters themselves* (a, b enter through Gamma and pole
  // distances), which extended-precision arithmetic cannot repair.  Worst
  // measured per-unit-cancellation error is ~2e-16, so a mild-cancellation
  // gate keeps the result at ~1e-10 or better; anything stronger goes to
  // the integral representation.
  return cancel < std::fabs(out) * 1e6;
}

// Laplace-integral fallback, a > 0:
// U(a,b,z) = 1/Gamma(a) int_0^inf e^{-zt} t^{a-1} (1+t)^{b-a-1} dt
inline double kummer_u_integral(double a, double b, double z) {
  if (a <= 0.0)
    throw std::domain_error("kummer_u: fallback integral needs a > 0");
  if (a >= 1.0) {
    // integrand is smooth on [0, inf); evaluate in the log domain
    auto f = [&](double t) {
      if (t <= 0.0) return a > 1.0 ? 0.0 : 1.0;
      double le = -z * t + (a - 1.0) * std::log(t) +
                  (b - a - 1.0) * std::log1p(t);
      return le < -745.0 ? 0.0 : std::exp(le);
    };
    auto r = integrate_half_line(f, 1e-300, 1e-13);
    return r.value / gamma_fn(a);
  }
  // a < 1: substitute t = v^{1/a} to absorb the t^{a-1} endpoint singularity
  double inva = 1.0 / a;
  auto f = [&](double v) {
    if (v <= 0.0) return inva * 1.0;
    double t = std::pow(v, inva);
    return inva * std::exp(-z * t) * std::pow(1.0 + t, b - a - 1.0);
  };
  auto r = integrate_half_line(f, 1e-300, 1e-13);
  return r.value / gamma_fn(a);
}

}  // namespace detail

// Tricomi U(a,b,z) for z > 0.  b within 1e-6 of an integer is nudged off the
// pole (the decomposition is singular there even though U itself is not).
inline double kummer_u(double a, double b, double z) {
  if (z <= 0.0) throw std::domain_error("kummer_u: z <= 0");
  double br = std::round(b);
  if (std::fabs(b - br) < 1e-6) b = br + (b >= br ? 1e-6 : -1e-6);
  double out;
  if (z >= 15.0 && detail::kummer_u_asymptotic(a, b, z, out)) return out;
  if (detail::kummer_u_decomposition(a, b, z, out)) return out;
  if (detail::kummer_u_asymptotic(a, b, z, out)) return out;
  return detail::kummer_u_integral(a, b, z);
}

// ------------------------------------------------------------- Whittaker ---

inline double whittaker_m(double lam, double mu, double z) {
  return std::exp(-0.5 * z) * std::pow(z, mu + 0.5) *
         kummer_m(mu - lam + 0.5, 1.0 + 2.0 * mu, z);
}

inline double whittaker_w(double lam, double mu, double z) {
  return std::exp(-0.5 * z) * std::pow(z, mu + 0.5) *
         kummer_u(mu - lam + 0.5, 1.0 + 2.0 * mu, z);
}

// ------------------------------------------------------- Meijer-G instance ---

// G^{2,1}_{1,3}( x | 1-(L+k)/2 ; (L-k)/2, (k-L)/2, -(L+k)/2 ) scaled so that
// meijer_g_sum_cdf(L,k,x) = x^{(L+k)/2} * G(...) / (Gamma(L) Gamma(k)) equals
// the CDF at x of a sum whose density is 2 x^{(L+k)/2-1} K_{L-k}(2 sqrt(x)) /
// (Gamma(L) Gamma(k)).  Evaluated by its two power series in dd for moderate
// x and by the complementary tail integral for large x.
inline double meijer_g_sum_cdf(double L, double k, double x) {
  if (x <= 0.0) return 0.0;
  double d = L - k;
  double dr = std::round(d);
  if (std::fabs(d - dr) < 1e-6) k = L - dr - 1e-6;  // off the integer-difference pole
  using detail::dd;
  using detail::dd_gamma;
  if (x <= 6.0) {  // the two power series cancel badly beyond x ~ 10
    // F(x) = G(d)/ (G(k) G(L)) sum_i x^{k+i} / (i! (k-L+1)_i (k+i))
    //      + G(-d)/(G(k) G(L)) sum_i x^{L+i} / (i! (L-k+1)_i (L+i))
    auto series = [&](double p, double q) {  // powers start at p, other exponent q
      dd term = dd(1.0), sum = dd(1.0) / p;
      for (int i = 1; i < 3000; ++i) {
        term = term * dd(x) / ((p - q + i) * i);
        dd add = term / (p + i);
        sum += add;
        if (std::fabs(add.hi) < std::fabs(sum.hi) * 1e-33 + 1e-320) break;
      }
      return dd_pow(dd(x), dd(p)) * sum;
    };
    dd gk = dd_gamma(k), gl = dd_gamma(L);
    dd f = (dd_gamma(d) * series(k, L) + dd_gamma(-d) * series(L, k)) / (gk * gl);
    return static_cast<double>(f);
  }
  // complement: 1 - 4/(G(L)G(k)) int_{sqrt(x)}^inf w^{L+k-1} K_{L-k}(2w) dw
  double lgn = lgamma_fn(L) + lgamma_fn(k);
  auto f = [&](double t) {  // t = w - sqrt(x)
    double w = std::sqrt(x) + t;
    double lk = std::log(bessel_kv_scaled(d, 2.0 * w)) - 2.0 * w;
    double le = (L + k - 1.0) * std::log(w) + lk - lgn;
    return le < -745.0 ? 0.0 : 4.0 * std::exp(le);
  };
  auto r = detail::integrate(f, 0.0, 40.0, 1e-18, 1e-12);
  return 1.0 - r.value;
}

}  // namespace kfading

#endif
