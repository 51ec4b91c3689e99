#ifndef KFADING_SINR_HPP
#define KFADING_SINR_HPP

// Output statistics of a single Rayleigh-faded link disturbed by a squared-K
// interference sum.  With desired power exponential of mean gbar_d and
// interference sum x, the ratio gamma_out = gamma_d / (1 + x) (or gamma_d / x
// without noise) has
//   F(g) = 1 - e^{-g/gbar_d} M(g/gbar_d),    f(g) = e^{-g/gbar_d} (M - M') / gbar_d
// and the interference-only versions drop the exponential factor.  M is the
// Laplace transform of the interference sum from ksum.

#include <cmath>

#include "kfading/ksum.hpp"

namespace kfading {

enum class NoiseModel { WithNoise, InterferenceOnly };  // SINR vs SIR

struct LinkModel {
  double desired_mean;  // gbar_d, linear
  InterferenceProfile interference;
};

inline EvalResult sinr_cdf(const LinkModel& link, double gamma, NoiseModel noise,
                           const TruncationPolicy& pol = {}) {
  EvalResult r;
  if (gamma < 1e-8) {
    r.flags |= kFlagUnderflow;
    return r;
  }
  double s = gamma / link.desired_mean;
  MgfPair m = mgf_sum(link.interference, s, pol);
  double e = noise == NoiseModel::WithNoise ? std::exp(-s) : 1.0;
  r.value = 1.0 - e * m.m;
  r.value = std::min(std::max(r.value, 0.0), 1.0);
  r.terms_used = m.terms_used;
  r.est_error = m.est_error * e;
  r.flags |= m.flags;
  return r;
}

inline EvalResult sinr_pdf(const LinkModel& link, double gamma, NoiseModel noise,
                           const TruncationPolicy& pol = {}) {
  EvalResult r;
  if (gamma <= 0.0) {
    r.flags |= kFlagUnderflow;
    return r;
  }
  double s = gamma / link.desired_mean;
  MgfPair m = mgf_sum(link.interference, s, pol);
  if (noise == NoiseModel::WithNoise)
    r.value = std::exp(-s) * (m.m - m.mprime) / link.desired_mean;
  else
    r.value = -m.mprime / link.desired_mean;
  r.value = std::max(r.value, 0.0);
  r.terms_used = m.terms_used;
  r.est_error = 2.0 * m.est_error / link.desired_mean;
  r.flags |= m.flags;
  return r;
}

}  // namespace kfading

#endif
