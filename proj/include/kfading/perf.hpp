#ifndef KFADING_PERF_HPP
#define KFADING_PERF_HPP

// Link-level performance metrics: outage probability, average bit error
// probability, their large-SNR asymptotes, and the minimum branch count that
// meets an outage target.

#include <cmath>
#include <stdexcept>

#include "kfading/simo.hpp"

namespace kfading {

struct ReceiverModel {
  DesiredProfile desired;            // one entry = no diversity
  InterferenceProfile interference;
  SelectionRule rule = SelectionRule::SnrBased;
  NoiseModel noise = NoiseModel::WithNoise;
};

inline EvalResult receiver_cdf(const ReceiverModel& rx, double gamma,
                               const TruncationPolicy& pol = {}) {
  return sd_cdf(rx.desired, rx.interference, rx.rule, rx.noise, gamma, pol);
}

inline EvalResult receiver_pdf(const ReceiverModel& rx, double gamma,
                               const TruncationPolicy& pol = {}) {
  return sd_pdf(rx.desired, rx.interference, rx.rule, rx.noise, gamma, pol);
}

inline EvalResult outage_probability(const ReceiverModel& rx, double gamma_th,
                                     const TruncationPolicy& pol = {}) {
  return receiver_cdf(rx, gamma_th, pol);
}

// ------------------------------------------------------------- modulation ---

struct ModulationSpec {
  enum class Family { Dbpsk, Mpsk };
  Family family = Family::Dbpsk;
  int order = 2;        // M for MPSK
  double alpha = 0.5;   // conditional BEP alpha e^{-beta g} (exponential family)
  double beta = 1.0;

  static ModulationSpec dbpsk() { return {Family::Dbpsk, 2, 0.5, 1.0}; }
  static ModulationSpec mpsk(int m) {
    ModulationSpec s;
    s.family = Family::Mpsk;
    s.order = m;
    return s;
  }
};

// Laplace transform of the receiver output density
inline double receiver_mgf(const ReceiverModel& rx, double s,
                           const TruncationPolicy& pol = {}) {
  auto f = [&](double g) {
    return g > 0 ? std::exp(-s * g) * receiver_pdf(rx, g, pol).value : 0.0;
  };
  return detail::integrate_half_line(f, 1e-13, 1e-10).value;
}

namespace detail {

// Romberg on [a,b] to ~1e-9 relative
template <class F>
double romberg(const F& f, double a, double b, double rel_tol = 1e-9) {
  constexpr int kmax = 14;
  double R[kmax][kmax];
  double h = b - a;
  R[0][0] = 0.5 * h * (f(a) + f(b));
  for (int k = 1; k < kmax; ++k) {
    h *= 0.5;
    double sum = 0.0;
    long n = 1L << (k - 1);
    for (long i = 0; i < n; ++i) sum += f(a + (2 * i + 1) * h);
    R[k][0] = 0.5 * R[k - 1][0] + h * sum;
    double p4 = 4.0;
    for (int j = 1; j <= k; ++j) {
      R[k][j] = R[k][j - 1] + (R[k][j - 1] - R[k - 1][j - 1]) / (p4 - 1.0);
      p4 *= 4.0;
    }
    if (k > 3 && std::fabs(R[k][k] - R[k - 1][k - 1]) <=
                     rel_tol * std::fabs(R[k][k]) + 1e-300)
      return R[k][k];
  }
  return R[kmax - 1][kmax - 1];
}

}  // namespace detail

namespace detail {

// conditional bit error probability P_b(g) and its negated derivative
// q(g) = -dP_b/dg.  DBPSK: alpha e^{-beta g}.  MPSK:
// P_b(g) = (1/(pi log2 M)) int_0^{pi - pi/M} exp(-c g / sin^2 phi) dphi,
// c = log2(M) sin^2(pi/M); the phi integral done by Romberg.
inline double conditional_bep(const ModulationSpec& mod, double g, bool deriv) {
  if (mod.family == ModulationSpec::Family::Dbpsk)
    return (deriv ? mod.alpha * mod.beta : mod.alpha) * std::exp(-mod.beta * g);
  const double m = mod.order;
  const double c = std::log2(m) * std::pow(std::sin(M_PI / m), 2);
  auto f = [&](double phi) {
    double s2 = std::sin(phi) * std::sin(phi);
    if (s2 < 1e-14) return 0.0;
    double s = c / s2;
    double e = -s * g;
    if (e < -700.0) return 0.0;
    return (deriv ? s : 1.0) * std::exp(e);
  };
  double v = romberg(f, 0.0, M_PI - M_PI / m);
  return v / (M_PI * std::log2(m));
}

}  // namespace detail

// ABEP by averaging the conditional BEP over the output density (the MGF
// route: for DBPSK this is exactly alpha M_out(beta), for MPSK the standard
// finite-range MGF average with the integration order exchanged).
inline double abep_mgf(const ReceiverModel& rx, const ModulationSpec& mod,
                       const TruncationPolicy& pol = {}) {
  auto f = [&](double g) {
    if (g <= 0.0) return 0.0;
    double pb = detail::conditional_bep(mod, g, false);
    return pb > 0.0 ? pb * receiver_pdf(rx, g, pol).value : 0.0;
  };
  return detail::integrate_half_line(f, 1e-13, 1e-9).value;
}

// Same quantity through the output CDF via integration by parts:
// int P_b f = int (-P_b'(g)) F(g) dg.
inline double abep_cdf(const ReceiverModel& rx, const ModulationSpec& mod,
                       const TruncationPolicy& pol = {}) {
  auto f = [&](double g) {
    if (g <= 0.0) return 0.0;
    double q = detail::conditional_bep(mod, g, true);
    return q > 0.0 ? q * receiver_cdf(rx, g, pol).value : 0.0;
  };
  return detail::integrate_half_line(f, 1e-13, 1e-9).value;
}

// -------------------------------------------------------- high-SNR regime ---

// Asymptotes for selection diversity over fully correlated interference with
// equal branch means: metric ~ D / gbar_d^N.
struct HighSnrResult {
  double diversity_order = 0.0;
  double constant = 0.0;  // D
  double value = 0.0;     // D / gbar_d^N at the model's gbar_d
};

namespace detail {

inline void require_corr_equal(const ReceiverModel& rx, double& k, double& gbar_i,
                               int& L, int& N, double& gbar_d) {
  auto* c = std::get_if<CorrProfile>(&rx.interference);
  if (!c)
    throw std::domain_error("high-SNR forms require the fully correlated variant");
  k = c->shape;
  gbar_i = c->mean;
  L = c->count;
  N = static_cast<int>(rx.desired.branch_means.size());
  gbar_d = rx.desired.branch_means.front();
  for (double g : rx.desired.branch_means)
    if (g != gbar_d)
      throw std::domain_error("high-SNR forms require equal branch means");
}

inline double binom_coef(int n, int r) {
  double b = 1.0;
  for (int i = 1; i <= r; ++i) b = b * (n - r + i) / i;
  return b;
}

// sum_{n=0}^{N} C(N,n) Gamma(L+n) Gamma(k+n) / ((k/gbar_i)^n Gamma(L) Gamma(k))
inline double moment_sum(int N, double L, double k, double gbar_i) {
  double s = 0.0;
  for (int n = 0; n <= N; ++n)
    s += binom_coef(N, n) * std::pow(gbar_i / k, n) *
         std::exp(lgamma_fn(L + n) - lgamma_fn(L) + lgamma_fn(k + n) - lgamma_fn(k));
  return s;
}

}  // namespace detail

inline HighSnrResult op_high_snr(const ReceiverModel& rx, double gamma_th) {
  double k, gi, gd;
  int L, N;
  detail::require_corr_equal(rx, k, gi, L, N, gd);
  HighSnrResult r;
  r.diversity_order = N;
  if (rx.rule == SelectionRule::SnrBased)
    r.constant = detail::moment_sum(N, L, k, gi) * std::pow(gamma_th, N);
  else
    r.constant = std::pow((1.0 + L * gi) * gamma_th, N);
  r.value = r.constant / std::pow(gd, N);
  return r;
}

inline HighSnrResult abep_high_snr(const ReceiverModel& rx, const ModulationSpec& mod) {
  if (mod.family != ModulationSpec::Family::Dbpsk)
    throw std::domain_error("ABEP asymptote implemented for the exponential BEP family");
  double k, gi, gd;
  int L, N;
  detail::require_corr_equal(rx, k, gi, L, N, gd);
  HighSnrResult r;
  r.diversity_order = N;
  double fact = std::tgamma(N + 1.0);
  if (rx.rule == SelectionRule::SnrBased)
    r.constant = mod.alpha * fact / std::pow(mod.beta, N) *
                 detail::moment_sum(N, L, k, gi);
  else
    r.constant = mod.alpha * fact * std::pow((1.0 + L * gi) / mod.beta, N);
  r.value = r.constant / std::pow(gd, N);
  return r;
}

// Smallest branch count (up to 10) whose outage probability meets the target;
// returns 0 when even 10 branches fail.
inline int min_branches(double target_op, double gamma_th, double gbar_d,
                        const InterferenceProfile& ip, SelectionRule rule,
                        NoiseModel noise = NoiseModel::WithNoise,
                        const TruncationPolicy& pol = {}) {
  if (target_op <= 0.0 || target_op >= 1.0)
    throw std::domain_error("target outage must be in (0,1)");
  for (int n = 1; n <= 10; ++n) {
    ReceiverModel rx{DesiredProfile{std::vector<double>(n, gbar_d)}, ip, rule, noise};
    if (outage_probability(rx, gamma_th, pol).value <= target_op) return n;
  }
  return 0;
}

}  // namespace kfading

#endif
