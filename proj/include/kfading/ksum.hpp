#ifndef KFADING_KSUM_HPP
#define KFADING_KSUM_HPP

// Statistics of a sum of L independent (or fully correlated) squared-K
// power variates: each term is an exponential whose mean is itself gamma
// distributed (shape k_i, mean gbar_i).  The independent cases evaluate a
// series expansion of the Laplace transform
//   M(s) = e^{a/s} sum_g sum_h coef_{g,h} s^{-(nu0_g + h)},  a = sum k_i/gbar_i,
// which inverts termwise through L^{-1}{s^{-nu} e^{a/s}} =
// (t/a)^{(nu-1)/2} I_{nu-1}(2 sqrt(a t)).  The fully correlated case has
// closed Bessel-K / Tricomi-U forms.  Every evaluator reports terms used,
// an error estimate, and status flags; when per-term double rounding makes
// the series estimate unreliable the evaluators fall back to a numerically
// stable route (product of incomplete-gamma factors, inverted by
// Gaver-Stehfest where a density/CDF is needed).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <variant>
#include <vector>

#include <complex>

#include "kfading/detail/dd.hpp"
#include "kfading/specfun.hpp"

namespace kfading {

enum EvalFlags : std::uint32_t {
  kFlagGuardPerturbed = 1u << 0,  // a shape parameter was nudged off a pole
  kFlagMaxTerms = 1u << 1,        // series hit max_terms before meeting tol
  kFlagNumericFallback = 1u << 2, // stable fallback route used
  kFlagUnderflow = 1u << 3,       // argument below representable range
};

struct TruncationPolicy {
  double tol = 1e-10;    // absolute term-level stopping tolerance
  int max_terms = 500;   // cap on series terms per group
};

struct EvalResult {
  double value = 0.0;
  int terms_used = 0;
  double est_error = 0.0;
  std::uint32_t flags = 0;
};

struct MgfPair {
  double m = 0.0;        // M(s)
  double mprime = 0.0;   // dM/ds
  int terms_used = 0;
  double est_error = 0.0;
  std::uint32_t flags = 0;
};

struct Interferer {
  double shape;  // k_i > 0
  double mean;   // gbar_i > 0 (linear scale)
};

struct IndProfile {
  std::vector<Interferer> parts;
};

struct IidProfile {
  double shape;
  double mean;
  int count;
};

struct CorrProfile {  // one shared gamma mean across all branches
  double shape;
  double mean;
  int count;
};

using InterferenceProfile = std::variant<IndProfile, IidProfile, CorrProfile>;

inline int profile_count(const InterferenceProfile& p) {
  if (auto* q = std::get_if<IndProfile>(&p)) return static_cast<int>(q->parts.size());
  if (auto* q = std::get_if<IidProfile>(&p)) return q->count;
  return std::get<CorrProfile>(p).count;
}

namespace detail {

inline double guard_shape(double k, std::uint32_t& flags) {
  if (k <= 0.0) throw std::domain_error("shape parameter must be positive");
  double r = std::round(k);
  if (r > 0.0 && std::fabs(k - r) < 1e-6) {
    flags |= kFlagGuardPerturbed;
    return r + 1e-6;
  }
  return k;
}

// series data in the canonical MGF form above
struct MgfSeries {
  double a = 0.0;          // exp(a/s) factor
  std::uint32_t flags = 0;
  struct Group {
    double nu0;
    std::vector<double> coef;  // coef[h] multiplies s^{-(nu0+h)}
    // majorant |coef[h]| <= amp * u^h / h!
    double amp;
    double u;
  };
  std::vector<Group> groups;
  std::vector<Interferer> parts;  // guarded parameters, for the product route
};

// distance from k-1 to the nearest nonnegative integer (guarded away from 0)
inline double pole_distance(double k) {
  if (k <= 1.0) return 1.0 - k;
  double f = k - 1.0 - std::floor(k - 1.0);
  return std::min(f, 1.0 - f);
}

inline std::shared_ptr<const MgfSeries> build_ind_series(
    const std::vector<Interferer>& raw, int max_terms) {
  auto out = std::make_shared<MgfSeries>();
  const int L = static_cast<int>(raw.size());
  if (L < 1 || L > 10) throw std::domain_error("interferer count must be 1..10");
  std::vector<double> k(L), gb(L), u(L), gneg(L), alpha(L);
  double K = 0.0;
  for (int i = 0; i < L; ++i) {
    k[i] = guard_shape(raw[i].shape, out->flags);
    if (raw[i].mean <= 0.0) throw std::domain_error("mean power must be positive");
    gb[i] = raw[i].mean;
    u[i] = k[i] / gb[i];
    out->a += u[i];
    K += k[i];
    gneg[i] = gamma_fn(1.0 - k[i]);
    alpha[i] = 1.0 / pole_distance(k[i]);
    out->parts.push_back({k[i], gb[i]});
  }
  double g1 = 1.0;
  for (int i = 0; i < L; ++i) g1 *= std::pow(u[i], k[i]) * gneg[i];

  // per-interferer coefficient streams t_{h,i}; the convolutions below cancel
  // heavily (alternating signs), so the streams and products stay in dd
  const int H = max_terms;
  std::vector<std::vector<dd>> t(L, std::vector<dd>(H));
  for (int i = 0; i < L; ++i) {
    dd base = dd_pow(dd(u[i]), dd(1.0 - k[i])) / gneg[i];
    for (int h = 0; h < H; ++h) {
      if (h > 0) base *= -u[i] / h;
      t[i][h] = base / (1.0 - k[i] + h);
    }
  }

  // leading s^{-K} term
  out->groups.push_back({K, {g1}, std::fabs(g1), 0.0});

  // subsets in increasing popcount order, convolving incrementally
  std::vector<std::vector<dd>> conv(1u << L);
  std::vector<double> nu0(1u << L), amp(1u << L), usum(1u << L);
  conv[0] = {};  // delta at h=0 handled below
  for (unsigned s = 1; s < (1u << L); ++s) {
    int lam = std::countr_zero(s);
    unsigned rest = s & (s - 1);
    if (rest == 0) {
      conv[s] = t[lam];
      nu0[s] = K + 1.0 - k[lam];
      amp[s] = std::pow(u[lam], 1.0 - k[lam]) / std::fabs(gneg[lam]) * alpha[lam];
      usum[s] = u[lam];
    } else {
      conv[s].assign(H, dd(0.0));
      const auto& A = conv[rest];
      const auto& B = t[lam];
      for (int h = 0; h < H; ++h) {
        dd acc(0.0);
        for (int j = 0; j <= h; ++j) acc += A[j] * B[h - j];
        conv[s][h] = acc;
      }
      nu0[s] = nu0[rest] + 1.0 - k[lam];
      amp[s] = amp[rest] * std::pow(u[lam], 1.0 - k[lam]) / std::fabs(gneg[lam]) * alpha[lam];
      usum[s] = usum[rest] + u[lam];
    }
    double sign = (std::popcount(s) & 1) ? -1.0 : 1.0;
    MgfSeries::Group grp;
    grp.nu0 = nu0[s];
    grp.coef.resize(H);
    for (int h = 0; h < H; ++h)
      grp.coef[h] = static_cast<double>(conv[s][h] * (g1 * sign));
    grp.amp = std::fabs(g1) * amp[s];
    grp.u = usum[s];
    out->groups.push_back(std::move(grp));
  }
  return out;
}

inline std::shared_ptr<const MgfSeries> build_iid_series(double shape, double mean,
                                                         int L, int max_terms) {
  auto out = std::make_shared<MgfSeries>();
  if (L < 1 || L > 10) throw std::domain_error("interferer count must be 1..10");
  if (mean <= 0.0) throw std::domain_error("mean power must be positive");
  double k = guard_shape(shape, out->flags);
  double u = k / mean;
  out->a = L * u;
  for (int i = 0; i < L; ++i) out->parts.push_back({k, mean});
  double gneg = gamma_fn(1.0 - k);
  double alphak = 1.0 / pole_distance(k);

  const int H = max_terms;
  // u-scaled stream a_t u^t = (-u)^t / (t! (1-k+t)); its i-th convolution
  // power cancels heavily, so everything stays in dd until the final store
  std::vector<dd> av(H);
  {
    dd base(1.0);
    for (int t = 0; t < H; ++t) {
      if (t > 0) base *= -u / t;
      av[t] = base / (1.0 - k + t);
    }
  }
  std::vector<double> binom(L + 1);
  binom[0] = 1.0;
  for (int i = 1; i <= L; ++i) binom[i] = binom[i - 1] * (L - i + 1) / i;

  std::vector<dd> c(H, dd(0.0));  // running conv power, c[h] = c^{(i)}_h u^h
  c[0] = dd(1.0);
  for (int i = 0; i <= L; ++i) {
    if (i > 0) {
      std::vector<dd> nc(H, dd(0.0));
      for (int h = 0; h < H; ++h) {
        dd acc(0.0);
        for (int j = 0; j <= h; ++j) acc += c[j] * av[h - j];
        nc[h] = acc;
      }
      c = std::move(nc);
    }
    double w = binom[i] * std::pow(gneg, L - i) * ((i & 1) ? -1.0 : 1.0);
    double nu0 = L * k + (1.0 - k) * i;
    MgfSeries::Group grp;
    grp.nu0 = nu0;
    grp.coef.resize(H);
    double up = std::pow(u, nu0);
    for (int h = 0; h < H; ++h)
      grp.coef[h] = static_cast<double>(c[h] * (w * up));
    grp.amp = std::fabs(w) * up * std::pow(alphak, i);
    grp.u = i * u;
    out->groups.push_back(std::move(grp));
  }
  return out;
}

// memoized per (parameter set, max_terms)
inline std::shared_ptr<const MgfSeries> series_for(const InterferenceProfile& p,
                                                   const TruncationPolicy& pol) {
  thread_local std::map<std::vector<double>, std::shared_ptr<const MgfSeries>> cache;
  std::vector<double> key;
  key.push_back(static_cast<double>(pol.max_terms));
  if (auto* q = std::get_if<IndProfile>(&p)) {
    key.push_back(1.0);
    for (const auto& part : q->parts) {
      key.push_back(part.shape);
      key.push_back(part.mean);
    }
  } else if (auto* q = std::get_if<IidProfile>(&p)) {
    key.push_back(2.0);
    key.push_back(q->shape);
    key.push_back(q->mean);
    key.push_back(static_cast<double>(q->count));
  } else {
    throw std::logic_error("series_for: correlated profile has closed forms");
  }
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::shared_ptr<const MgfSeries> s;
  if (auto* q = std::get_if<IndProfile>(&p)) s = build_ind_series(q->parts, pol.max_terms);
  else s = build_iid_series(std::get<IidProfile>(p).shape, std::get<IidProfile>(p).mean,
                            std::get<IidProfile>(p).count, pol.max_terms);
  if (cache.size() > 256) cache.clear();
  cache.emplace(std::move(key), s);
  return s;
}

// ------------------------------------------------------- stable MGF route ---

// single factor M_i(s) = z^k e^z Gamma(1-k, z), z = k/(gbar s)
inline dd mgf_factor_dd(double k, dd z) {
  if (z.hi >= std::max(6.0, k + 2.0))
    return z * gamma_upper_cf_scaled<dd>(1.0 - k, z);  // z^k e^z * scaled form
  return dd_pow(z, dd(k)) * dd_exp(z) * gamma_upper_dd(1.0 - k, z);
}

inline dd mgf_product_dd(const std::vector<Interferer>& parts, dd s) {
  dd m(1.0);
  for (const auto& p : parts) m *= mgf_factor_dd(p.shape, dd(p.shape / p.mean) / s);
  return m;
}

// double-precision product MGF with derivative (for the MGF-domain fallback)
// Large-z asymptotics of the factor M(z) = z^k e^z Gamma(1-k, z):
// M ~ sum_j (-1)^j (k)_j z^{-j}, differentiated term-wise.  Needed because the
// identity dM/dz = (k/z + 1) M - 1 cancels to O(z^2) ulps of M as z grows,
// which the dz/ds = -z/s factor then amplifies without bound as s -> 0.
inline bool mgf_factor_asym(double k, double z, double& m, double& dmdz) {
  if (z < std::max(40.0, 2.0 * k + 10.0)) return false;
  double term = 1.0, sum = 1.0, dsum = 0.0;
  for (int j = 1; j < 200; ++j) {
    double next = -term * (k + j - 1.0) / z;
    if (std::fabs(next) >= std::fabs(term)) break;  // divergent tail reached
    term = next;
    sum += term;
    dsum -= j * term / z;
    if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
  }
  m = sum;
  dmdz = dsum;
  return true;
}

inline void mgf_product(const std::vector<Interferer>& parts, double s,
                        double& m, double& mprime) {
  m = 1.0;
  double dlog = 0.0;  // sum of M_i'/M_i
  for (const auto& p : parts) {
    double z = p.shape / (p.mean * s);
    double mi, dmdz;
    if (!mgf_factor_asym(p.shape, z, mi, dmdz)) {
      if (z >= std::max(6.0, p.shape + 2.0))
        mi = z * gamma_upper_cf_scaled<double>(1.0 - p.shape, z);
      else
        mi = static_cast<double>(mgf_factor_dd(p.shape, dd(z)));
      dmdz = (p.shape / z + 1.0) * mi - 1.0;
    }
    double dmi = dmdz * (-z / s);  // dz/ds = -z/s
    m *= mi;
    dlog += dmi / mi;
  }
  mprime = m * dlog;
}

// ------------------------------------------------------ series evaluation ---

// Sums one group of the inverted series at gamma.  mode 0: density, terms
// coef[h] (g/a)^{(nu-1)/2} I_{nu-1}(x); mode 1: CDF, coef[h] (g/a)^{nu/2} I_nu(x);
// x = 2 sqrt(a g).  Scaled Bessel values come from two series evaluations per
// chunk plus downward recurrence in the order.
struct GroupSum {
  double value = 0.0;
  double abs_sum = 0.0;
  double err = 0.0;  // accumulated roundoff through the exp/log term chain
  int terms = 0;
  bool converged = false;
};

inline GroupSum sum_group(const MgfSeries::Group& g, double a, double gamma,
                          int mode, const TruncationPolicy& pol) {
  GroupSum out;
  const double x = 2.0 * std::sqrt(a * gamma);
  const double lga = 0.5 * std::log(gamma / a);
  const double off = mode == 0 ? -1.0 : 0.0;
  const int H = static_cast<int>(g.coef.size());
  const int chunk = 24;
  detail::dd acc(0.0);
  int h = 0;
  int quiet = 0;  // consecutive negligible terms
  while (h < H) {
    int hi = std::min(h + chunk, H);
    // scaled I_nu e^{-x} at nu_top and nu_top+1, then recur down:
    // I_{nu-1} = I_{nu+1} + (2 nu / x) I_nu
    double nu_top = g.nu0 + off + (hi - 1);
    double i1, i0;  // orders nu_top+1, nu_top
    if (x < 1e-290) {
      i1 = i0 = 0.0;
    } else {
      i1 = std::exp(bessel_iv_ln(nu_top + 1.0, x) - x);
      i0 = std::exp(bessel_iv_ln(nu_top, x) - x);
    }
    std::vector<double> iv(hi - h);
    iv[hi - h - 1] = i0;
    double up = i1, cur = i0;
    for (int j = hi - h - 2; j >= 0; --j) {
      double nu = g.nu0 + off + (h + j + 1);
      double dn = up + (2.0 * nu / x) * cur;
      up = cur;
      cur = dn;
      iv[j] = cur;
    }
    const double hpeak = std::sqrt(g.u * gamma);  // term magnitudes crest here
    for (int j = 0; j < hi - h; ++j) {
      double nu = g.nu0 + off + (h + j);
      double c = g.coef[h + j];
      double term = 0.0;
      if (c != 0.0 && iv[j] > 0.0) {
        double le = nu * lga + x + std::log(iv[j]);
        if (le > 690.0) {  // term overflow: series numerically useless here
          out.converged = false;
          out.abs_sum = 1e300;
          out.err = 1e300;
          return out;
        }
        if (le > -745.0) {
          term = c * std::exp(le);
          out.err += (std::fabs(le) + 4.0) * 1e-16 * std::fabs(term);
        }
      }
      acc += term;
      out.abs_sum += std::fabs(term);
      ++out.terms;
      if (std::fabs(term) < pol.tol * (std::fabs(acc.hi) + 1e-300) &&
          std::fabs(term) < pol.tol && h + j > hpeak)
        ++quiet;
      else
        quiet = 0;
      if (quiet >= 3 && out.terms > 4) {
        out.value = acc.hi;
        out.converged = true;
        return out;
      }
    }
    h = hi;
  }
  out.value = acc.hi;
  out.converged = (H == 1);
  return out;
}

inline EvalResult eval_series(const MgfSeries& s, double gamma, int mode,
                              const TruncationPolicy& pol) {
  EvalResult r;
  r.flags = s.flags;
  if (gamma <= 0.0) {
    r.flags |= kFlagUnderflow;
    return r;
  }
  detail::dd total(0.0);
  double err = 0.0;
  bool all_conv = true;
  for (const auto& g : s.groups) {
    GroupSum gs = sum_group(g, s.a, gamma, mode, pol);
    total += gs.value;
    err += gs.err + 1e-16 * gs.abs_sum;
    r.terms_used = std::max(r.terms_used, gs.terms);
    all_conv = all_conv && gs.converged;
  }
  r.value = total.hi;
  r.est_error = err + (all_conv ? 0.0 : pol.tol);
  if (!all_conv) r.flags |= kFlagMaxTerms;
  return r;
}

// is the series result trustworthy for its magnitude?  mode 0: density,
// mode 1: CDF (bounded quantities: wildly out-of-range values mean the
// cancellation swamped the result even if the error ratio looks small)
inline bool series_reliable(const EvalResult& r, int mode,
                            const TruncationPolicy& pol) {
  if (r.flags & kFlagMaxTerms) return false;
  double cap = mode == 1 ? 1.0 + 1e-9 : 1e9;
  if (!(r.value >= -1e-12 && r.value <= cap)) return false;
  return r.est_error <= std::max(1e-9 * std::fabs(r.value), std::max(pol.tol, 1e-13));
}

}  // namespace detail

// ------------------------------------------------------------- public API ---

// density / CDF of the sum for the independent variants; closed forms for the
// fully correlated variant
inline EvalResult pdf_sum(const InterferenceProfile& p, double gamma,
                          const TruncationPolicy& pol = {});
inline EvalResult cdf_sum(const InterferenceProfile& p, double gamma,
                          const TruncationPolicy& pol = {});

namespace detail {

// One MGF factor continued to the upper side of the branch cut, s = -r + i0,
// so z = k/(gbar s) sits at x e^{-i pi} with x = k/(gbar r):
//   m = x^k e^{-x} Gamma(1-k) e^{-i pi k} + x e^{-x} S(x),
//   S(x) = sum_n x^n / (n! (1-k+n)),
// with x e^{-x} S(x) real and evaluated with running renormalization.
inline std::complex<double> mgf_factor_cut(double k, double x) {
  if (x > 740.0) {
    // phase-carrying part underflows; use the large-z expansion of
    // z^k e^z Gamma(1-k, z) ~ sum_j (k)_j / z^j at z = -x
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < 40; ++j) {
      double t = term * (k + j - 1.0) / (-x);
      if (std::fabs(t) >= std::fabs(term)) break;
      term = t;
      sum += term;
      if (std::fabs(term) < 1e-17 * std::fabs(sum)) break;
    }
    return {sum, 0.0};
  }
  double lscale = -x;  // running log-scale of the S accumulation
  double term = 1.0, sum = 1.0 / (1.0 - k);
  for (int n = 1; n < 4000; ++n) {
    term *= x / n;
    sum += term / (1.0 - k + n);
    if (term < 1e-17 * std::fabs(sum) && n > x) break;
    if (std::fabs(sum) > 1e280) {
      lscale += std::log(std::fabs(sum));
      term /= std::fabs(sum);
      sum = sum > 0 ? 1.0 : -1.0;
    }
  }
  double xes = x * sum * std::exp(lscale);  // x e^{-x} S(x)
  double amp = std::exp(k * std::log(x) - x) * gamma_fn(1.0 - k);
  return {amp * std::cos(M_PI * k) + xes, -amp * std::sin(M_PI * k)};
}

inline double im_mgf_cut(const std::vector<Interferer>& parts, double r) {
  std::complex<double> m(1.0, 0.0);
  for (const auto& p : parts) m *= mgf_factor_cut(p.shape, p.shape / (p.mean * r));
  return m.imag();
}

inline EvalResult eval_with_fallback(const InterferenceProfile& p, double gamma,
                                     int mode, const TruncationPolicy& pol) {
  auto s = series_for(p, pol);
  EvalResult r = eval_series(*s, gamma, mode, pol);
  if (series_reliable(r, mode, pol)) return r;
  // exact inversion along the branch cut of the product MGF:
  //   f(g)     = -(1/pi) int_0^inf e^{-r g} Im M(-r+i0) dr
  //   1 - F(g) = -(1/pi) int_0^inf e^{-r g} Im M(-r+i0) / r dr
  const auto& parts = s->parts;
  auto integrand = [&parts, mode, gamma](double rr) {
    if (rr <= 0.0) return 0.0;
    double im = im_mgf_cut(parts, rr);
    if (im == 0.0) return 0.0;
    double e = -rr * gamma;
    double v = e < -700.0 ? 0.0 : std::exp(e) * im;
    return mode == 0 ? v : v / rr;
  };
  auto q = integrate_half_line(integrand, 1e-300, 1e-12);
  EvalResult out;
  out.flags = s->flags | kFlagNumericFallback;
  out.terms_used = r.terms_used;
  double tail = -q.value / M_PI;  // density, or complementary CDF
  out.est_error = q.est_error / M_PI + 1e-14 * std::fabs(tail);
  if (mode == 0) {
    out.value = std::max(tail, 0.0);
  } else {
    out.value = std::min(std::max(1.0 - tail, 0.0), 1.0);
  }
  return out;
}

}  // namespace detail

inline EvalResult pdf_sum_corr(const CorrProfile& p, double gamma) {
  EvalResult r;
  double k = detail::guard_shape(p.shape, r.flags);
  double L = p.count;
  if (std::fabs(L - k - std::round(L - k)) < 1e-6) {  // K_{L-k} order guard
    k = L - std::round(L - k) + 1e-6;
    r.flags |= kFlagGuardPerturbed;
  }
  if (gamma <= 0.0) {
    r.flags |= kFlagUnderflow;
    return r;
  }
  double x = k * gamma / p.mean;
  double lf = std::log(2.0) + std::log(k / p.mean) +
              (0.5 * (L + k) - 1.0) * std::log(x) - lgamma_fn(L) - lgamma_fn(k);
  double xs = 2.0 * std::sqrt(x);
  r.value = std::exp(lf + std::log(bessel_kv_scaled(L - k, xs)) - xs);
  r.est_error = 1e-13 * r.value;
  return r;
}

inline EvalResult cdf_sum_corr(const CorrProfile& p, double gamma) {
  EvalResult r;
  double k = detail::guard_shape(p.shape, r.flags);
  if (gamma <= 0.0) {
    r.flags |= kFlagUnderflow;
    return r;
  }
  r.value = meijer_g_sum_cdf(static_cast<double>(p.count), k, k * gamma / p.mean);
  r.value = std::min(std::max(r.value, 0.0), 1.0);
  r.est_error = 1e-12;
  return r;
}

// Laplace transform of the fully correlated sum: (k/(gbar s))^L U(L, L+1-k', z)
// with k' = k, z = k/(gbar s); equals z^k U(k, k+1-L, z) by the Kummer
// transformation.
inline MgfPair mgf_sum_corr(const CorrProfile& p, double s) {
  MgfPair r;
  double k = detail::guard_shape(p.shape, r.flags);
  double L = p.count;
  double z = k / (p.mean * s);
  double b = 1.0 + L - k;
  double uL = kummer_u(L, b, z);
  double uL1 = kummer_u(L + 1.0, b + 1.0, z);
  double zL = std::pow(z, L);
  r.m = zL * uL;
  // d/dz [z^L U(L,b,z)] = L z^{L-1} U - L z^L U(L+1,b+1,z);  dz/ds = -z/s
  double dmdz = L * (zL / z) * uL - L * zL * uL1;
  r.mprime = dmdz * (-z / s);
  r.est_error = 1e-11 * std::fabs(r.m);
  return r;
}

inline EvalResult pdf_sum(const InterferenceProfile& p, double gamma,
                          const TruncationPolicy& pol) {
  if (auto* q = std::get_if<CorrProfile>(&p)) return pdf_sum_corr(*q, gamma);
  return detail::eval_with_fallback(p, gamma, 0, pol);
}

inline EvalResult cdf_sum(const InterferenceProfile& p, double gamma,
                          const TruncationPolicy& pol) {
  if (auto* q = std::get_if<CorrProfile>(&p)) return cdf_sum_corr(*q, gamma);
  return detail::eval_with_fallback(p, gamma, 1, pol);
}

// M(s), M'(s) of the interference sum; series route with a stable product
// fallback when cancellation dominates
inline MgfPair mgf_sum(const InterferenceProfile& p, double s,
                       const TruncationPolicy& pol = {}) {
  if (auto* q = std::get_if<CorrProfile>(&p)) return mgf_sum_corr(*q, s);
  auto ser = detail::series_for(p, pol);
  MgfPair r;
  r.flags = ser->flags;
  double ea = ser->a / s;
  bool conv_all = true;
  double abs_sum = 0.0;
  if (ea < 690.0) {
    detail::dd m(0.0), mp(0.0);
    double efac = std::exp(ea);
    double ls = std::log(s);
    for (const auto& g : ser->groups) {
      const int H = static_cast<int>(g.coef.size());
      const double hpeak = g.u / s;
      int quiet = 0;
      bool conv = (H == 1);
      for (int h = 0; h < H; ++h) {
        double nu = g.nu0 + h;
        double term = g.coef[h] * std::exp(-nu * ls) * efac;
        m += term;
        mp += term * (-(nu / s + ser->a / (s * s)));
        abs_sum += (std::fabs(nu * ls) + ea + 4.0) * std::fabs(term);
        ++r.terms_used;
        if (std::fabs(term) < pol.tol * (std::fabs(m.hi) + 1e-300) && h > hpeak)
          ++quiet;
        else
          quiet = 0;
        if (quiet >= 3 && h > 3) {
          conv = true;
          break;
        }
      }
      conv_all = conv_all && conv;
    }
    r.m = m.hi;
    r.mprime = mp.hi;
  } else {
    conv_all = false;  // exp(a/s) not representable: series unusable
  }
  r.est_error = 1e-16 * abs_sum + (conv_all ? 0.0 : pol.tol);
  if (!conv_all) r.flags |= kFlagMaxTerms;
  bool ok = conv_all && r.est_error <= std::max(1e-11 * std::fabs(r.m), 1e-14);
  if (!ok) {
    detail::mgf_product(ser->parts, s, r.m, r.mprime);
    r.flags &= ~kFlagMaxTerms;
    r.flags |= kFlagNumericFallback;
    r.est_error = 1e-14 * std::fabs(r.m);
  }
  return r;
}

// Upper bound on the density truncation error when every group keeps H terms.
// Uses |coef[h]| <= amp u^h/h! and I_nu(x) <= (x/2)^nu e^{(x/2)^2}/Gamma(nu+1):
// per term, amp e^{a g} g^{nu0+h-1} u^h / (h! Gamma(nu0+h)).
inline double truncation_bound(const InterferenceProfile& p, double gamma, int H,
                               const TruncationPolicy& pol = {}) {
  if (std::get_if<CorrProfile>(&p)) return 0.0;  // closed form, no series
  auto ser = detail::series_for(p, pol);
  double total = 0.0;
  for (const auto& g : ser->groups) {
    if (g.u == 0.0) continue;  // single-coefficient leading group
    double lt = std::log(g.amp) + ser->a * gamma + (g.nu0 - 1.0) * std::log(gamma);
    // term_h in logs: lt + h ln(u g) - ln h! - ln Gamma(nu0+h)
    double tail = 0.0;
    double lug = std::log(g.u * gamma);
    for (int h = H; h < H + 2000; ++h) {
      double le = lt + h * lug - lgamma_fn(h + 1.0) - lgamma_fn(g.nu0 + h);
      double term = le < -745.0 ? 0.0 : std::exp(le);
      double ratio = (g.u * gamma) / ((h + 1.0) * (g.nu0 + h));
      if (ratio < 0.5) {
        tail += term / (1.0 - ratio);
        break;
      }
      tail += term;
    }
    total += tail;
  }
  return total;
}

// Smallest uniform per-group term count H whose truncated density matches the
// converged density to the given relative accuracy.
inline int required_terms(const InterferenceProfile& p, double gamma,
                          double accuracy = 1e-5) {
  if (std::get_if<CorrProfile>(&p)) return 0;
  TruncationPolicy pol{1e-16, 600};
  auto ser = detail::series_for(p, pol);
  // per-h totals across groups
  std::vector<detail::dd> th(pol.max_terms, detail::dd(0.0));
  const double x = 2.0 * std::sqrt(ser->a * gamma);
  const double lga = 0.5 * std::log(gamma / ser->a);
  for (const auto& g : ser->groups) {
    const int H = static_cast<int>(g.coef.size());
    for (int h = 0; h < H; ++h) {
      double nu = g.nu0 + h - 1.0;
      double c = g.coef[h];
      if (c == 0.0) continue;
      double le = nu * lga + bessel_iv_ln(nu, x);
      if (le > -745.0) th[h] += c * std::exp(le);
    }
  }
  detail::dd full(0.0);
  for (const auto& v : th) full += v;
  detail::dd run(0.0);
  for (int H = 1; H <= pol.max_terms; ++H) {
    run += th[H - 1];
    if (std::fabs((run - full).hi) <= accuracy * std::fabs(full.hi)) return H;
  }
  return pol.max_terms;
}

}  // namespace kfading

#endif
