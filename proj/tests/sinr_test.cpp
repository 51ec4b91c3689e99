#include <cmath>

#include <gtest/gtest.h>

#include "kfading/sinr.hpp"
#include "oracles.hpp"

using namespace kfading;

namespace {

std::vector<InterferenceProfile> test_profiles() {
  return {
      InterferenceProfile{IidProfile{1.5, 3.16, 3}},
      InterferenceProfile{IndProfile{{{1.2, 3.16}, {0.9, 2.86}, {0.6, 2.59}}}},
      InterferenceProfile{CorrProfile{2.0, 3.16, 3}},
  };
}

}  // namespace

TEST(OutputCdf, MatchesConditionedOracle) {
  for (const auto& ip : test_profiles()) {
    LinkModel link{10.0, ip};
    for (bool with_noise : {true, false}) {
      auto noise = with_noise ? NoiseModel::WithNoise : NoiseModel::InterferenceOnly;
      for (double g : {0.1, 1.0, 5.0, 30.0}) {
        double want = oracles::sinr_cdf_conditioned(10.0, ip, g, with_noise);
        EXPECT_NEAR(sinr_cdf(link, g, noise).value, want, 1e-7)
            << "noise=" << with_noise << " g=" << g;
      }
    }
  }
}

TEST(OutputPdf, IsDerivativeOfCdf) {
  for (const auto& ip : test_profiles()) {
    LinkModel link{10.0, ip};
    for (auto noise : {NoiseModel::WithNoise, NoiseModel::InterferenceOnly}) {
      for (double g : {0.2, 2.0, 12.0}) {
        double h = 1e-4 * g;
        double dF = (sinr_cdf(link, g + h, noise).value -
                     sinr_cdf(link, g - h, noise).value) /
                    (2.0 * h);
        EXPECT_NEAR(sinr_pdf(link, g, noise).value, dF, 1e-6 * (1.0 + dF))
            << "g=" << g;
      }
    }
  }
}

TEST(OutputPdf, Normalizes) {
  for (const auto& ip : test_profiles()) {
    LinkModel link{5.0, ip};
    for (auto noise : {NoiseModel::WithNoise, NoiseModel::InterferenceOnly}) {
      double n = oracles::simpson_half_line(
          [&](double g) { return g > 0 ? sinr_pdf(link, g, noise).value : 0.0; },
          1e-9);
      EXPECT_NEAR(n, 1.0, 1e-7);
    }
  }
}

TEST(OutputCdf, NoisePenaltyOrdering) {
  // gamma_d/(1+x) <= gamma_d/x, so the with-noise CDF dominates
  LinkModel link{10.0, InterferenceProfile{IidProfile{1.5, 3.16, 3}}};
  for (double g : {0.5, 2.0, 10.0}) {
    EXPECT_GE(sinr_cdf(link, g, NoiseModel::WithNoise).value,
              sinr_cdf(link, g, NoiseModel::InterferenceOnly).value);
  }
}

TEST(OutputCdf, FlagsTinyArgument) {
  LinkModel link{10.0, InterferenceProfile{IidProfile{1.5, 3.16, 3}}};
  auto r = sinr_cdf(link, 1e-12, NoiseModel::WithNoise);
  EXPECT_TRUE(r.flags & kFlagUnderflow);
  EXPECT_EQ(r.value, 0.0);
  auto p = sinr_pdf(link, 0.0, NoiseModel::WithNoise);
  EXPECT_TRUE(p.flags & kFlagUnderflow);
}

TEST(OutputCdf, DiagnosticsPopulated) {
  LinkModel link{10.0, InterferenceProfile{IidProfile{1.5, 3.16, 3}}};
  auto r = sinr_cdf(link, 2.0, NoiseModel::WithNoise);
  EXPECT_GT(r.terms_used, 0);
  EXPECT_GT(r.est_error, 0.0);
  EXPECT_LT(r.est_error, 1e-6);
}
