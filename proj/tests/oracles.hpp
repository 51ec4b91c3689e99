// Test-side numerical oracles, deliberately independent of the library's
// evaluation machinery: adaptive Simpson instead of Gauss-Kronrod, and
// direct mixture/defining-integral forms instead of series.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "kfading/ksum.hpp"

namespace oracles {

// Adaptive Simpson with Richardson acceptance.
inline double simpson_rec(const std::function<double(double)>& f, double a,
                          double b, double fa, double fm, double fb,
                          double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// depth beyond ~30 only burns time once the integrand's own noise floor is
// reached (the library's quadrature-fallback values carry ~1e-12 jitter)
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, double tol = 1e-11, int depth = 30) {
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

// int_0^inf f, mapped through t = x/(1-x).
inline double simpson_half_line(const std::function<double(double)>& f,
                                double tol = 1e-11) {
  auto g = [&](double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    double onemx = 1.0 - x;
    return f(x / onemx) / (onemx * onemx);
  };
  return simpson(g, 0.0, 1.0, tol, 32);
}

// Gamma density with shape k and scale th.
inline double gamma_density(double w, double k, double th) {
  if (w <= 0.0) return 0.0;
  double l = (k - 1.0) * std::log(w) - w / th - std::lgamma(k) -
             k * std::log(th);
  return l < -700.0 ? 0.0 : std::exp(l);
}

// Single squared-K density/distribution as the defining Gamma-exponential
// mixture, integrated numerically over the shadowing mean w.  The substitution
// v = w^k absorbs the w^{k-1} endpoint singularity of the gamma density, so
// the adaptive rule sees a smooth integrand even for k < 1.
inline double single_mixture(double k, double mean, double x,
                             const std::function<double(double, double)>& inner) {
  double th = mean / k;
  double norm = k * std::exp(std::lgamma(k) + k * std::log(th));
  return simpson_half_line(
      [&](double v) {
        if (v <= 0.0) return 0.0;
        double w = std::pow(v, 1.0 / k);
        double e = std::exp(-w / th);
        return e > 0.0 ? e * inner(w, x) / norm : 0.0;
      },
      1e-13);
}

inline double single_pdf_mixture(double k, double mean, double x) {
  return single_mixture(k, mean, x, [](double w, double x) {
    return std::exp(-x / w) / w;
  });
}

inline double single_cdf_mixture(double k, double mean, double x) {
  return single_mixture(k, mean, x, [](double w, double x) {
    return 1.0 - std::exp(-x / w);
  });
}

// SINR CDF by conditioning on the interference sum:
// P(gd / (c + y) < g) = E_y[1 - exp(-g (c + y) / gbar_d)], c = 1 or 0.
inline double sinr_cdf_conditioned(double gbar_d,
                                   const kfading::InterferenceProfile& ip,
                                   double g, bool with_noise) {
  double c = with_noise ? 1.0 : 0.0;
  return simpson_half_line(
      [&](double y) {
        if (y <= 0.0) return 0.0;
        double fy = kfading::pdf_sum(ip, y).value;
        return fy * (1.0 - std::exp(-g * (c + y) / gbar_d));
      },
      1e-9);
}

}  // namespace oracles
