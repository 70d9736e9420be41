#include "fdaisac/theory.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <gtest/gtest.h>

#include <cmath>

using namespace fdaisac;

namespace {

ArrayConfig fodc() { return ArrayConfig::with_offsets({"0", "1", "2", "3.17", "4.2", "5.2"}, 6); }

const Target kTarget{89.6, 10.55, 20.42, {0.8, -0.3}};

// Noise-free mean of one CPI, vec(xi a(R, theta) psi(f)^T), built from the public steering API.
CVector mean_signal(double re, double im, double range, double angle_deg, double doppler_hz, const ArrayConfig& c,
                    int k) {
  const CVector a = joint_steering(range, deg2rad(angle_deg), c);
  CVector out(a.size() * k);
  for (int p = 0; p < k; ++p)
    out.segment(p * a.size(), a.size()) = cdouble(re, im) * std::polar(1.0, kTwoPi * doppler_hz * p * c.pri_s) * a;
  return out;
}

// Finite-difference Fisher information 2 Re(d mu^H d mu) / sigma^2.
FisherMatrix numeric_fisher(const Target& t, const ArrayConfig& c, double s2, int k) {
  const std::array<double, 5> x0{t.reflection.real(), t.reflection.imag(), t.range_m, t.angle_deg,
                                 t.doppler_hz(c)};
  const std::array<double, 5> h{1e-6, 1e-6, 1e-6, 1e-7, 1e-6};
  std::array<CVector, 5> d;
  for (int i = 0; i < 5; ++i) {
    auto plus = x0, minus = x0;
    plus[i] += h[i];
    minus[i] -= h[i];
    d[i] = (mean_signal(plus[0], plus[1], plus[2], plus[3], plus[4], c, k) -
            mean_signal(minus[0], minus[1], minus[2], minus[3], minus[4], c, k)) /
           (2 * h[i]);
  }
  d[3] *= 180.0 / kPi;  // per radian
  FisherMatrix f;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) f(i, j) = 2.0 * d[i].dot(d[j]).real() / s2;
  return f;
}

double q_func(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// E[Q(sqrt(2 alpha g))], g ~ Gamma(U, 1): the U-branch MRC Rayleigh average.
double quad_pep(double alpha, int u) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([&](double x) {
    if (!(x < 1e300)) return 0.0;
    return q_func(std::sqrt(2 * alpha * x)) * std::exp((u - 1) * std::log(x) - x - std::lgamma(u));
  });
}

} // namespace

TEST(Fisher, TwoRoutesAgree) {
  const ArrayConfig c = fodc();
  const FisherMatrix a = fisher_matrix(kTarget, c, 0.3, 50);
  const FisherMatrix b = fisher_matrix_assembled(kTarget, c, 0.3, 50);
  EXPECT_LT((a - b).norm(), 1e-9 * a.norm());
  EXPECT_LT((a - a.transpose()).norm(), 1e-9 * a.norm());
}

TEST(Fisher, MatchesFiniteDifferenceOracle) {
  const ArrayConfig c = fodc();
  const FisherMatrix f = fisher_matrix_assembled(kTarget, c, 0.5, 20);
  const FisherMatrix num = numeric_fisher(kTarget, c, 0.5, 20);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      EXPECT_NEAR(f(i, j), num(i, j), 1e-4 * std::sqrt(f(i, i) * f(j, j))) << i << "," << j;
}

TEST(Fisher, ScalesInverselyWithNoise) {
  const ArrayConfig c = fodc();
  const FisherMatrix a = fisher_matrix_assembled(kTarget, c, 0.2, 30);
  const FisherMatrix b = fisher_matrix_assembled(kTarget, c, 0.4, 30);
  EXPECT_LT((a - 2.0 * b).norm(), 1e-12 * a.norm());
}

TEST(Fisher, DopplerGeneratorIsImaginaryRamp) {
  const ArrayConfig c = fodc();
  const auto g = derivative_generators(0.3, c, 8);
  for (int k = 0; k < 8; ++k) {
    EXPECT_EQ(g.doppler(k).real(), 0.0);
    EXPECT_NEAR(g.doppler(k).imag(), kTwoPi * c.pri_s * k, 1e-15);
  }
  EXPECT_EQ(g.tx_range(0), cdouble(0.0));
  EXPECT_NEAR(g.tx_range(3).imag(), -4 * kPi * c.delta_f_hz * 3.17 / kSpeedOfLight, 1e-15);
}

TEST(Crb, CofactorsMatchDirectInverse) {
  const ArrayConfig c = fodc();
  const FisherMatrix f = fisher_matrix_assembled(kTarget, c, 0.3, 200);
  const CrbReport r = crb_from_fisher(f, c);
  const FisherMatrix inv = f.inverse();
  EXPECT_NEAR(r.range_m2, inv(kRange, kRange), 1e-8 * inv(kRange, kRange));
  EXPECT_NEAR(r.angle_rad2, inv(kAngle, kAngle), 1e-8 * inv(kAngle, kAngle));
  EXPECT_NEAR(r.doppler_hz2, inv(kDoppler, kDoppler), 1e-8 * inv(kDoppler, kDoppler));
  const double scale = kSpeedOfLight / (2 * c.carrier_hz);
  EXPECT_NEAR(r.velocity_mps2, scale * scale * r.doppler_hz2, 1e-12 * r.velocity_mps2);
  const Eigen::Matrix3d d = crb_schur_block(f);
  const Eigen::Matrix3d block = inv.bottomRightCorner(3, 3);
  EXPECT_LT((d.inverse() / 2.0 - block).norm(), 1e-8 * block.norm());
}

TEST(Crb, PropertyLinearInNoise) {
  const ArrayConfig c = fodc();
  for (double s2 : {0.01, 0.1, 1.0, 3.0}) {
    const CrbReport a = crb(kTarget, c, s2, 200);
    const CrbReport b = crb(kTarget, c, 2 * s2, 200);
    EXPECT_NEAR(b.range_m2 / a.range_m2, 2.0, 1e-9);
    EXPECT_NEAR(b.angle_rad2 / a.angle_rad2, 2.0, 1e-9);
    EXPECT_NEAR(b.doppler_hz2 / a.doppler_hz2, 2.0, 1e-9);
  }
}

TEST(Crb, DopplerBoundFallsWithMorePulses) {
  const ArrayConfig c = fodc();
  double prev = INFINITY;
  for (int k : {10, 20, 50, 100, 200}) {
    const double v = crb(kTarget, c, 1.0, k).doppler_hz2;
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Crb, RejectsUnidentifiable) {
  const ArrayConfig c = fodc();
  Target t = kTarget;
  t.reflection = 0.0;
  EXPECT_THROW(crb(t, c, 1.0, 200), ConfigError);
  EXPECT_THROW(fisher_matrix(kTarget, c, 0.0, 200), ConfigError);
  EXPECT_THROW(fisher_matrix(kTarget, c, 1.0, 1), ConfigError);
}

TEST(PairwiseError, ScaleCases) {
  const cdouble c(0.6, 0.8), c2(1, 0), x(1, 1), x2(1, -1);
  EXPECT_NEAR(pep_scale(c, x, c2, x2, 2.0, false), std::norm(c2 * x2 - c * x), 1e-15);
  EXPECT_NEAR(pep_scale(c, x, c, x2, 2.0, true), std::norm(x2 - x) * std::norm(c), 1e-15);
  EXPECT_EQ(pep_scale(c, x, c, x, 1.0, true), 0.0);
}

TEST(PairwiseError, KnownValues) {
  EXPECT_DOUBLE_EQ(pep(0.0, 1.0, 1), 0.5);
  EXPECT_DOUBLE_EQ(rayleigh_p(0.0), 0.5);
  // U = 2, alpha = 1: P = (1 - sqrt(1/2)) / 2, P^2 (1 + 2 (1 - P))
  const double p = 0.5 * (1 - std::sqrt(0.5));
  EXPECT_NEAR(rayleigh_p(1.0), 0.1464466094, 1e-10);
  EXPECT_NEAR(diversity_average(1.0, 2), p * p * (1 + 2 * (1 - p)), 1e-14);
  EXPECT_NEAR(diversity_average(1.0, 2), 0.0580582617, 1e-9);
  EXPECT_NEAR(pep(2.0, 1.0, 2), diversity_average(1.0, 2), 1e-15);
  EXPECT_EQ(pep(1.0, 0.0, 2), 0.0);
}

TEST(PairwiseError, PropertyMatchesQuadrature) {
  for (int u : {1, 2, 3, 4})
    for (double alpha : {0.05, 0.5, 1.0, 7.0, 60.0}) {
      const double ref = quad_pep(alpha, u);
      EXPECT_NEAR(diversity_average(alpha, u), ref, 1e-9 + 1e-7 * ref) << u << " " << alpha;
    }
}

TEST(IndexBound, Limits) {
  const CcieConfig one = CcieConfig::make(1, 4, 7);
  EXPECT_EQ(p_im_bound(one, 2, 1.0, 0.1), 0.0);
  const CcieConfig four = CcieConfig::make(4, 4, 7);
  EXPECT_EQ(p_im_bound(four, 2, 1.0, 0.0), 0.0);
  EXPECT_LT(p_im_bound(four, 2, 1.0, 1e-6), 1e-5);
}

TEST(IndexBound, TwoCoefficientsExhaustiveSum) {
  const CcieConfig cfg = CcieConfig::make(2, 4, 3);
  const QamConstellation q(4);
  const double s2 = 0.1, sc2 = 1.0;  // 10 dB
  double sum = 0;
  for (int j = 0; j < 2; ++j)
    for (int l = 0; l < 4; ++l)
      for (int l2 = 0; l2 < 4; ++l2) {
        const double d2 = std::norm(cfg.coeffs(1 - j) * q.point(l2) - cfg.coeffs(j) * q.point(l));
        sum += quad_pep(d2 * sc2 / 2 / (2 * s2), 2);
      }
  EXPECT_NEAR(p_im_bound(cfg, 2, sc2, s2), sum / 8, 1e-8);
}

TEST(QamBound, Limits) {
  const CcieConfig cfg = CcieConfig::make(4, 16, 7);
  EXPECT_EQ(p_qam_bound(cfg, 2, 1.0, 0.0), 0.0);
  EXPECT_NEAR(QamConstellation(4).scale(), 1 / std::sqrt(2.0), 1e-15);
}

TEST(QamBound, QpskRayleighTextbook) {
  const CcieConfig cfg = CcieConfig::make(1, 4, 7);
  ASSERT_NEAR(std::abs(cfg.coeffs(0)), 1.0, 1e-12);
  for (double snr_db : {0.0, 10.0, 20.0}) {
    const double g = std::pow(10.0, snr_db / 10);
    const double closed = 0.5 * (1 - std::sqrt(g / (2 + g)));
    boost::math::quadrature::exp_sinh<double> integrator;
    const double quad = integrator.integrate([&](double x) { return x < 1e300 ? q_func(std::sqrt(g * x)) * std::exp(-x) : 0.0; });
    EXPECT_NEAR(closed, quad, 1e-9);
    EXPECT_NEAR(p_qam_bound(cfg, 1, 1.0, 1 / g), closed, 1e-12);
  }
}

TEST(BerBound, Composition) {
  const CcieConfig cfg = CcieConfig::make(4, 4, 7);
  const BerBound b = ccie_ber_bound(cfg, 4, 2, 1.0, 0.01);
  EXPECT_NEAR(b.p_index, 4 * b.p_im / 6, 1e-15);
  EXPECT_NEAR(b.p_const, 0.75 * b.p_im + (1 - b.p_im) * b.p_qam, 1e-15);
  EXPECT_NEAR(b.p_total, (2 * b.p_index + 2 * b.p_const) / 4, 1e-15);
  EXPECT_NEAR(b.p_total_half, (2 * b.p_index + 2 * (0.5 * b.p_im + (1 - b.p_im) * b.p_qam)) / 4, 1e-15);
  EXPECT_LE(b.p_total_half, b.p_total);
  const BerBound single = ccie_ber_bound(CcieConfig::make(1, 4, 7), 4, 2, 1.0, 0.01);
  EXPECT_EQ(single.p_im, 0.0);
  EXPECT_NEAR(single.p_total, single.p_qam, 1e-15);
}

TEST(BerBound, PropertyMonotoneInSnr) {
  for (int j : {2, 4, 8}) {
    const CcieConfig cfg = CcieConfig::make(j, 4, 7);
    double prev = 1.0;
    for (double snr = 0; snr <= 40; snr += 2) {
      const double v = ccie_ber_bound(cfg, 4, 2, 1.0, std::pow(10.0, -snr / 10)).p_total;
      EXPECT_LE(v, prev + 1e-15);
      EXPECT_GE(v, 0.0);
      prev = v;
    }
  }
}

TEST(IndexBound, SimulatedIndexErrorsStayBelow) {
  const CcieConfig cfg = CcieConfig::make(4, 4, 7);
  const QamConstellation q(4);
  Rng rng(21);
  for (double snr_db : {10.0, 20.0}) {
    const double s2 = std::pow(10.0, -snr_db / 10);
    const int trials = 40000;
    int errors = 0;
    for (int t = 0; t < trials; ++t) {
      const int j = static_cast<int>(rng() % 4), l = static_cast<int>(rng() % 4);
      const CVector h = complex_gaussian(2, 1.0, rng);
      const CVector y = cfg.coeffs(j) * q.point(l) * h + complex_gaussian(2, s2, rng);
      errors += ml_detect(y, h, cfg).index != j;
    }
    const double rate = static_cast<double>(errors) / trials;
    const double bound = p_im_bound(cfg, 2, 1.0, s2);
    EXPECT_LE(rate, bound + 3 * std::sqrt(bound / trials)) << snr_db;
  }
}

TEST(Rate, Examples) {
  EXPECT_EQ(bits_per_pulse(RateScheme::Ccie, 4, 4, 4), 16);
  EXPECT_EQ(bits_per_pulse(RateScheme::Fopim, 4, 4, 4), 12);
  EXPECT_EQ(bits_per_pulse(RateScheme::Ccie, 2, 2, 4), 6);
  EXPECT_EQ(bits_per_pulse(RateScheme::Fopim, 2, 2, 4), 5);
  EXPECT_EQ(bits_per_pulse(RateScheme::Ccie, 4, 5, 4), 16);  // only 2^floor(log2 J) coefficients carry bits
}

TEST(Rate, PropertyCcieAtLeastFopim) {
  for (int n = 2; n <= 16; ++n) {
    // floor(log2 n!) by summation as an independent check
    double lg = 0;
    for (int i = 2; i <= n; ++i) lg += std::log2(static_cast<double>(i));
    EXPECT_EQ(bits_per_pulse(RateScheme::Fopim, n, n, 4), 2 * n + static_cast<std::int64_t>(std::floor(lg + 1e-9)));
    EXPECT_GE(bits_per_pulse(RateScheme::Ccie, n, n, 4), bits_per_pulse(RateScheme::Fopim, n, n, 4)) << n;
  }
}
