#ifndef KFADING_MC_HPP
#define KFADING_MC_HPP

// Monte-Carlo counterpart of the analytic statistics.  All randomness is
// hand-rolled on top of mt19937_64 (Box-Muller normals, inverse-CDF
// exponentials, Marsaglia-Tsang gamma variates) so that seeded runs are
// bit-reproducible regardless of the standard library.  Independent streams
// are derived from a base seed with splitmix64.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "kfading/perf.hpp"

namespace kfading {

struct MonteCarloConfig {
  std::uint64_t seed = 1;
  std::size_t samples = 100000;
  std::uint64_t stream = 0;  // sub-stream id, mixed into the seed
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

class Sampler {
 public:
  Sampler(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t x = seed;
    detail::splitmix64(x);  // decorrelate trivially related seeds
    x ^= 0xd1b54a32d192ed03ull * (stream + 1);
    eng_.seed(detail::splitmix64(x));
  }

  double uniform() {  // (0,1)
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double th = 2.0 * M_PI * u2;
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
  }

  double exponential(double mean) { return -mean * std::log(uniform()); }

  // Marsaglia-Tsang; shape boost for a < 1
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      double u = uniform();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// one draw of the interference sum
inline double sample_interference(const InterferenceProfile& p, Sampler& rng) {
  if (auto* q = std::get_if<IndProfile>(&p)) {
    double sum = 0.0;
    for (const auto& part : q->parts) {
      double mean = rng.gamma(part.shape, part.mean / part.shape);
      sum += rng.exponential(mean);
    }
    return sum;
  }
  if (auto* q = std::get_if<IidProfile>(&p)) {
    double sum = 0.0;
    for (int i = 0; i < q->count; ++i) {
      double mean = rng.gamma(q->shape, q->mean / q->shape);
      sum += rng.exponential(mean);
    }
    return sum;
  }
  const auto& q = std::get<CorrProfile>(p);
  double mean = rng.gamma(q.shape, q.mean / q.shape);  // one shared draw
  double sum = 0.0;
  for (int i = 0; i < q.count; ++i) sum += rng.exponential(mean);
  return sum;
}

// one draw of the receiver output ratio
inline double sample_output(const ReceiverModel& rx, Sampler& rng) {
  const auto& means = rx.desired.branch_means;
  bool with_noise = rx.noise == NoiseModel::WithNoise;
  if (rx.rule == SelectionRule::SnrBased) {
    double x = sample_interference(rx.interference, rng);
    double best = 0.0;
    for (double m : means) best = std::max(best, rng.exponential(m));
    return best / (with_noise ? 1.0 + x : x);
  }
  double best = -1.0;
  for (double m : means) {
    double x = sample_interference(rx.interference, rng);
    double g = rng.exponential(m) / (with_noise ? 1.0 + x : x);
    best = std::max(best, g);
  }
  return best;
}

inline std::vector<double> simulate_output(const ReceiverModel& rx,
                                           const MonteCarloConfig& cfg) {
  Sampler rng(cfg.seed, cfg.stream);
  std::vector<double> out(cfg.samples);
  for (auto& v : out) v = sample_output(rx, rng);
  return out;
}

struct McEstimate {
  double value = 0.0;
  double half_width = 0.0;  // ~95% normal-approximation interval
  std::size_t samples = 0;
};

inline McEstimate empirical_op(const ReceiverModel& rx, double gamma_th,
                               const MonteCarloConfig& cfg) {
  Sampler rng(cfg.seed, cfg.stream);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < cfg.samples; ++i)
    if (sample_output(rx, rng) <= gamma_th) ++hits;
  double p = static_cast<double>(hits) / cfg.samples;
  double hw = 1.96 * std::sqrt(std::max(p * (1.0 - p), 1e-300) / cfg.samples);
  return {p, hw, cfg.samples};
}

// Conditional-BEP averaging (Rao-Blackwellized): estimate E[P_b(gamma)] from
// the exact conditional error probability, which has far lower variance than
// counting simulated bit errors.
inline McEstimate empirical_abep(const ReceiverModel& rx, const ModulationSpec& mod,
                                 const MonteCarloConfig& cfg) {
  Sampler rng(cfg.seed, cfg.stream);
  // phi-nodes for the MPSK conditional integral (composite Simpson)
  const int nphi = 128;
  std::vector<double> snodes;
  double gpsk = 0.0, wphi = 0.0;
  if (mod.family == ModulationSpec::Family::Mpsk) {
    double m = mod.order;
    gpsk = std::log2(m) * std::pow(std::sin(M_PI / m), 2.0);
    wphi = (M_PI - M_PI / m) / nphi;
    snodes.resize(nphi + 1);
    for (int i = 0; i <= nphi; ++i) {
      double phi = i * wphi;
      double s2 = std::sin(phi) * std::sin(phi);
      snodes[i] = s2 < 1e-14 ? -1.0 : gpsk / s2;  // -1 marks a zero integrand
    }
  }
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    double g = sample_output(rx, rng);
    double pb;
    if (mod.family == ModulationSpec::Family::Dbpsk) {
      pb = mod.alpha * std::exp(-mod.beta * g);
    } else {
      double acc = 0.0;
      for (int j = 0; j <= nphi; ++j) {
        if (snodes[j] < 0.0) continue;
        double w = (j == 0 || j == nphi) ? 1.0 : (j & 1 ? 4.0 : 2.0);
        acc += w * std::exp(-snodes[j] * g);
      }
      pb = acc * wphi / 3.0 / (M_PI * std::log2(static_cast<double>(mod.order)));
    }
    sum += pb;
    sumsq += pb * pb;
  }
  double mean = sum / cfg.samples;
  double var = std::max(sumsq / cfg.samples - mean * mean, 0.0);
  double hw = 1.96 * std::sqrt(var / cfg.samples);
  return {mean, hw, cfg.samples};
}

// Kolmogorov-Smirnov distance between a sample and an analytic CDF.  The CDF
// is tabulated on a log grid spanning the sample and interpolated linearly;
// direct evaluation at every sample point would dominate the runtime without
// changing the statistic at the tolerances of interest.
inline double ks_statistic(std::vector<double> sample,
                           const std::function<double(double)>& cdf,
                           int table_size = 512) {
  std::sort(sample.begin(), sample.end());
  const std::size_t n = sample.size();
  double lo = std::max(sample.front(), 1e-300), hi = sample.back();
  double llo = std::log(lo), lhi = std::log(hi * (1.0 + 1e-12));
  std::vector<double> tab(table_size);
  for (int i = 0; i < table_size; ++i)
    tab[i] = cdf(std::exp(llo + (lhi - llo) * i / (table_size - 1)));
  auto interp = [&](double x) {
    double t = (std::log(std::max(x, lo)) - llo) / (lhi - llo) * (table_size - 1);
    int i = std::min(std::max(static_cast<int>(t), 0), table_size - 2);
    double w = std::min(std::max(t - i, 0.0), 1.0);
    return tab[i] * (1.0 - w) + tab[i + 1] * w;
  };
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double f = interp(sample[i]);
    ks = std::max(ks, std::fabs((i + 1.0) / n - f));
    ks = std::max(ks, std::fabs(static_cast<double>(i) / n - f));
  }
  return ks;
}

}  // namespace kfading

#endif
