#include <cmath>

#include <gtest/gtest.h>

#include "kfading/perf.hpp"
#include "oracles.hpp"

using namespace kfading;

namespace {

ReceiverModel make_rx(int n, double gbar_d, SelectionRule rule,
                      const InterferenceProfile& ip) {
  return {DesiredProfile{std::vector<double>(n, gbar_d)}, ip, rule,
          NoiseModel::WithNoise};
}

const InterferenceProfile kIid{IidProfile{2.0, 3.16, 4}};
const InterferenceProfile kCorr{CorrProfile{2.0, 3.16, 4}};

}  // namespace

TEST(ConditionalBep, DbpskClosedForm) {
  auto mod = ModulationSpec::dbpsk();
  for (double g : {0.0, 0.5, 3.0, 10.0}) {
    EXPECT_DOUBLE_EQ(detail::conditional_bep(mod, g, false),
                     0.5 * std::exp(-g));
    EXPECT_DOUBLE_EQ(detail::conditional_bep(mod, g, true),
                     0.5 * std::exp(-g));
  }
}

TEST(ConditionalBep, MpskDerivativeConsistent) {
  auto mod = ModulationSpec::mpsk(4);
  for (double g : {0.5, 2.0, 8.0}) {
    double h = 1e-5 * (1.0 + g);
    double num = -(detail::conditional_bep(mod, g + h, false) -
                   detail::conditional_bep(mod, g - h, false)) /
                 (2.0 * h);
    EXPECT_NEAR(detail::conditional_bep(mod, g, true), num, 1e-7 * (1.0 + num));
  }
}

TEST(Abep, MgfAndCdfRoutesAgree) {
  for (const auto& ip : {kIid, kCorr}) {
    for (auto rule : {SelectionRule::SnrBased, SelectionRule::SinrBased}) {
      for (int n : {1, 2}) {
        auto rx = make_rx(n, 10.0, rule, ip);
        for (auto mod : {ModulationSpec::dbpsk(), ModulationSpec::mpsk(4)}) {
          double a = abep_mgf(rx, mod);
          double b = abep_cdf(rx, mod);
          EXPECT_NEAR(a, b, 1e-6) << "n=" << n;
          EXPECT_GT(a, 0.0);
          EXPECT_LT(a, 0.5);
        }
      }
    }
  }
}

TEST(Abep, MatchesDirectAverageOracle) {
  auto rx = make_rx(2, 10.0, SelectionRule::SnrBased, kIid);
  auto mod = ModulationSpec::dbpsk();
  double want = oracles::simpson_half_line(
      [&](double g) {
        return g > 0 ? 0.5 * std::exp(-g) * receiver_pdf(rx, g).value : 0.0;
      },
      1e-10);
  EXPECT_NEAR(abep_mgf(rx, mod), want, 1e-7);
}

TEST(Outage, EqualsReceiverCdf) {
  auto rx = make_rx(2, 10.0, SelectionRule::SnrBased, kIid);
  for (double g : {0.5, 2.0})
    EXPECT_DOUBLE_EQ(outage_probability(rx, g).value,
                     receiver_cdf(rx, g).value);
}

TEST(HighSnr, OutageAsymptoteConverges) {
  double gth = 2.0;
  for (auto rule : {SelectionRule::SnrBased, SelectionRule::SinrBased}) {
    for (int n : {1, 2, 3}) {
      auto rx = make_rx(n, 1e4, rule, kCorr);  // 40 dB
      double exact = outage_probability(rx, gth).value;
      auto hs = op_high_snr(rx, gth);
      EXPECT_EQ(hs.diversity_order, n);
      EXPECT_NEAR(hs.value / exact, 1.0, 0.1) << "n=" << n;
    }
  }
}

TEST(HighSnr, AbepAsymptoteConverges) {
  auto mod = ModulationSpec::dbpsk();
  for (auto rule : {SelectionRule::SnrBased, SelectionRule::SinrBased}) {
    for (int n : {1, 2}) {
      auto rx = make_rx(n, 1e4, rule, kCorr);
      double exact = abep_mgf(rx, mod);
      auto hs = abep_high_snr(rx, mod);
      EXPECT_NEAR(hs.value / exact, 1.0, 0.1) << "n=" << n;
    }
  }
}

TEST(HighSnr, RequiresSupportedInputs) {
  auto rx = make_rx(2, 1e4, SelectionRule::SnrBased, kCorr);
  EXPECT_THROW(abep_high_snr(rx, ModulationSpec::mpsk(4)), std::domain_error);
  auto bad = make_rx(2, 1e4, SelectionRule::SnrBased, kIid);
  EXPECT_THROW(op_high_snr(bad, 1.0), std::domain_error);
}

TEST(MinBranches, MonotoneInTarget) {
  double gth = 1.0, gd = 100.0;
  int loose = min_branches(1e-1, gth, gd, kIid, SelectionRule::SnrBased);
  int tight = min_branches(1e-3, gth, gd, kIid, SelectionRule::SnrBased);
  ASSERT_GT(loose, 0);
  ASSERT_GT(tight, 0);
  EXPECT_LE(loose, tight);
  // the returned count meets the target and one fewer does not
  auto op_at = [&](int n) {
    return outage_probability(make_rx(n, gd, SelectionRule::SnrBased, kIid), gth)
        .value;
  };
  EXPECT_LE(op_at(tight), 1e-3);
  if (tight > 1) EXPECT_GT(op_at(tight - 1), 1e-3);
}

TEST(MinBranches, RejectsBadTarget) {
  EXPECT_THROW(min_branches(0.0, 1.0, 10.0, kIid, SelectionRule::SnrBased),
               std::domain_error);
  EXPECT_THROW(min_branches(1.0, 1.0, 10.0, kIid, SelectionRule::SnrBased),
               std::domain_error);
}
