#ifndef KFADING_SIMO_HPP
#define KFADING_SIMO_HPP

// Selection diversity over N Rayleigh branches that share one squared-K
// interference environment.
//
// SNR-based selection (pick the branch with the largest instantaneous SNR,
// interference common to all branches): conditioning on the interference sum
// x and expanding the product of branch CDFs over subsets S of branches,
//   F(g) = sum_S (-1)^{|S|} e^{-R_S g} M(R_S g),   R_S = sum_{n in S} 1/gbar_n,
// with the e^{-R_S g} factor dropped for interference-only operation.
//
// SINR-based selection (pick the branch with the largest instantaneous
// SINR, branches see independent interference with identical statistics):
// the output CDF is the product of per-branch CDFs.

#include <cmath>
#include <vector>

#include "kfading/detail/quadrature.hpp"
#include "kfading/sinr.hpp"

namespace kfading {

enum class SelectionRule { SnrBased, SinrBased };

struct DesiredProfile {
  std::vector<double> branch_means;  // gbar_n per branch, linear
};

namespace detail {

template <class Fn>
void for_each_subset(int n, const Fn& fn) {  // fn(mask) over non-empty masks
  for (unsigned m = 1; m < (1u << n); ++m) fn(m);
}

inline double subset_rate(const std::vector<double>& means, unsigned mask) {
  double r = 0.0;
  for (size_t i = 0; i < means.size(); ++i)
    if (mask & (1u << i)) r += 1.0 / means[i];
  return r;
}

}  // namespace detail

inline EvalResult sd_cdf(const DesiredProfile& d, const InterferenceProfile& ip,
                         SelectionRule rule, NoiseModel noise, double gamma,
                         const TruncationPolicy& pol = {}) {
  EvalResult r;
  const int n = static_cast<int>(d.branch_means.size());
  if (n < 1 || n > 10) throw std::domain_error("branch count must be 1..10");
  if (gamma < 1e-8) {
    r.flags |= kFlagUnderflow;
    return r;
  }
  if (rule == SelectionRule::SinrBased) {
    double prod = 1.0, rel = 0.0;
    for (int i = 0; i < n; ++i) {
      EvalResult b = sinr_cdf({d.branch_means[i], ip}, gamma, noise, pol);
      prod *= b.value;
      rel += b.value > 0 ? b.est_error / b.value : 0.0;
      r.terms_used = std::max(r.terms_used, b.terms_used);
      r.flags |= b.flags;
    }
    r.value = prod;
    r.est_error = prod * rel;
    return r;
  }
  detail::dd acc(1.0);
  double err = 0.0;
  detail::for_each_subset(n, [&](unsigned mask) {
    double rs = detail::subset_rate(d.branch_means, mask);
    MgfPair m = mgf_sum(ip, rs * gamma, pol);
    double e = noise == NoiseModel::WithNoise ? std::exp(-rs * gamma) : 1.0;
    double sgn = (std::popcount(mask) & 1) ? -1.0 : 1.0;
    acc += sgn * e * m.m;
    err += e * m.est_error;
    r.terms_used = std::max(r.terms_used, m.terms_used);
    r.flags |= m.flags;
  });
  r.value = std::min(std::max(acc.hi, 0.0), 1.0);
  r.est_error = err + 1e-16 * (1u << n);
  return r;
}

inline EvalResult sd_pdf(const DesiredProfile& d, const InterferenceProfile& ip,
                         SelectionRule rule, NoiseModel noise, double gamma,
                         const TruncationPolicy& pol = {}) {
  EvalResult r;
  const int n = static_cast<int>(d.branch_means.size());
  if (n < 1 || n > 10) throw std::domain_error("branch count must be 1..10");
  if (gamma <= 0.0) {
    r.flags |= kFlagUnderflow;
    return r;
  }
  if (rule == SelectionRule::SinrBased) {
    // f = sum_n f_n prod_{m != n} F_m
    std::vector<double> F(n), f(n);
    for (int i = 0; i < n; ++i) {
      EvalResult ci = sinr_cdf({d.branch_means[i], ip}, gamma, noise, pol);
      EvalResult pi = sinr_pdf({d.branch_means[i], ip}, gamma, noise, pol);
      F[i] = ci.value;
      f[i] = pi.value;
      r.terms_used = std::max({r.terms_used, ci.terms_used, pi.terms_used});
      r.flags |= ci.flags | pi.flags;
      r.est_error += pi.est_error + ci.est_error;
    }
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      double prod = f[i];
      for (int j = 0; j < n; ++j)
        if (j != i) prod *= F[j];
      sum += prod;
    }
    r.value = std::max(sum, 0.0);
    return r;
  }
  // d/dg [e^{-R g} M(R g)] = R e^{-R g} (M'(R g) - M(R g))
  detail::dd acc(0.0);
  double err = 0.0;
  detail::for_each_subset(n, [&](unsigned mask) {
    double rs = detail::subset_rate(d.branch_means, mask);
    MgfPair m = mgf_sum(ip, rs * gamma, pol);
    double sgn = (std::popcount(mask) & 1) ? -1.0 : 1.0;
    if (noise == NoiseModel::WithNoise)
      acc += sgn * rs * std::exp(-rs * gamma) * (m.mprime - m.m);
    else
      acc += sgn * rs * m.mprime;
    err += rs * 2.0 * m.est_error;
    r.terms_used = std::max(r.terms_used, m.terms_used);
    r.flags |= m.flags;
  });
  r.value = std::max(acc.hi, 0.0);
  r.est_error = err;
  return r;
}

// Laplace transform of the selection output density, by quadrature
inline double sd_mgf(const DesiredProfile& d, const InterferenceProfile& ip,
                     SelectionRule rule, NoiseModel noise, double s,
                     const TruncationPolicy& pol = {}) {
  auto f = [&](double g) {
    return g > 0 ? std::exp(-s * g) * sd_pdf(d, ip, rule, noise, g, pol).value : 0.0;
  };
  auto r = detail::integrate_half_line(f, 1e-13, 1e-10);
  return r.value;
}

}  // namespace kfading

#endif
