#include "fdaisac/scene_synth.hpp"
#include "fdaisac/sensing.hpp"

#include <gtest/gtest.h>

using namespace fdaisac;

namespace {

ArrayConfig fodc() { return ArrayConfig::with_offsets({"0", "1", "2", "3.17", "4.2", "5.2"}, 6); }

Scene three_targets() {
  Scene s;
  s.targets = {{40.9, 10.55, 8.62, {1.0, 0.0}}, {89.6, 10.55, 20.42, {0.8, 0.3}}, {115.9, 32.01, 36.5, {1.0, 0.0}}};
  return s;
}

PduFrame unit_frame(int n) {
  PduFrame f;
  f.index.assign(n, 0);
  f.label.assign(n, 0);
  f.symbol = CVector::Ones(n);
  f.ccie = CVector::Ones(n);
  return f;
}

// Triple loop over (g, m, n) written from the phase definitions.
CVector elementwise_snapshot(const Scene& s, const ArrayConfig& c, const PduFrame& f, int k) {
  const std::vector<double> eps{0, 1, 2, 3.17, 4.2, 5.2};
  CVector y = CVector::Zero(c.n_rx * c.n_tx);
  for (const auto& t : s.targets) {
    const double th = t.angle_deg * kPi / 180.0;
    const double doppler = 2 * t.velocity_mps * c.carrier_hz / 3e8;
    for (int m = 0; m < c.n_rx; ++m)
      for (int n = 0; n < c.n_tx; ++n) {
        const double ph = -2 * kPi * eps[n] * c.delta_f_hz * 2 * t.range_m / 3e8 +
                          2 * kPi * c.carrier_hz * n * c.d1_m * std::sin(th) / 3e8 +
                          2 * kPi * c.carrier_hz * m * c.d2_m * std::sin(th) / 3e8 + 2 * kPi * doppler * (k - 1) * c.pri_s;
        y(m * c.n_tx + n) += t.reflection * f.ccie(n) * std::polar(1.0, ph);
      }
  }
  return y;
}

} // namespace

TEST(DopplerPhase, Examples) {
  const ArrayConfig c = fodc();
  const Target t{40.9, 10.55, 8.62, {1, 0}};
  EXPECT_EQ(doppler_phase(t, 1, c), 0.0);
  EXPECT_NEAR(t.doppler_hz(c), 574.6666666667, 1e-6);
  EXPECT_NEAR(doppler_phase(t, 2, c), 0.034480, 1e-6);
  const Target still{10, 0, 0, {1, 0}};
  for (int k = 1; k < 10; ++k) EXPECT_EQ(doppler_phase(still, k, c), 0.0);
}

TEST(Scene, VelocityLimit) {
  const ArrayConfig c = fodc();
  EXPECT_NEAR(Scene::max_unambiguous_velocity(c), 125.0, 1e-9);
  Scene s;
  s.targets = {{10, 0, 130, {1, 0}}};
  EXPECT_THROW(s.validate(c), ConfigError);
  s.targets = {{10, 95, 0, {1, 0}}};
  EXPECT_THROW(s.validate(c), ConfigError);
  EXPECT_NO_THROW(three_targets().validate(c));
}

TEST(SynthSnapshot, SingleTargetCollapsesToSteering) {
  const ArrayConfig c = fodc();
  Scene s;
  s.sensing_noise_power = 0.0;
  s.targets = {{57.3, 21.0, 12.0, {1, 0}}};
  Rng rng(1);
  const CVector y = synth_snapshot(s, c, unit_frame(6), 1, rng);
  EXPECT_LT((y - joint_steering(57.3, deg2rad(21.0), c)).norm(), 1e-12);
}

TEST(SynthSnapshot, NoiseOnlyPower) {
  const ArrayConfig c = fodc();
  Scene s;
  s.sensing_noise_power = 0.5;
  Rng rng(2);
  double p = 0;
  const int draws = 4000;
  for (int i = 0; i < draws; ++i) p += synth_snapshot(s, c, unit_frame(6), 1, rng).squaredNorm();
  EXPECT_NEAR(p / (draws * 36.0), 0.5, 0.01);
}

TEST(SynthSnapshot, MatchesElementwiseOracle) {
  const ArrayConfig c = fodc();
  Scene s = three_targets();
  s.sensing_noise_power = 0.0;
  const CcieConfig cc = CcieConfig::make(4, 4, 7);
  Rng rng(4);
  for (int k : {1, 2, 57, 200}) {
    const PduFrame f = encode_frame(random_bits(24, rng), 6, cc);
    const CVector y = synth_snapshot(s, c, f, k, rng);
    EXPECT_LT((y - elementwise_snapshot(s, c, f, k)).norm(), 1e-9) << k;
  }
}

TEST(Compensate, RemovesFrameDependence) {
  const ArrayConfig c = fodc();
  Scene s;
  s.sensing_noise_power = 0.0;
  s.targets = {{40.9, 10.55, 8.62, {0.6, -0.2}}};
  const CcieConfig cc = CcieConfig::make(4, 16, 5);
  Rng rng(9);
  const cdouble expected_amp = s.targets[0].reflection * std::polar(1.0, kTwoPi * doppler_phase(s.targets[0], 3, c));
  const CVector expected = expected_amp * joint_steering(40.9, deg2rad(10.55), c);
  for (int trial = 0; trial < 50; ++trial) {
    const PduFrame f = encode_frame(random_bits(36, rng), 6, cc);
    const CVector out = compensate(synth_snapshot(s, c, f, 3, rng), f);
    EXPECT_LT((out - expected).norm(), 1e-10);
  }
  const CVector v = complex_gaussian(36, 1.0, rng);
  EXPECT_EQ(compensate(v, unit_frame(6)), v);
  PduFrame z = unit_frame(6);
  z.ccie(2) = 0.0;
  EXPECT_THROW(compensate(v, z), ConfigError);
}

TEST(SynthCpi, NoiselessEqualsManifoldTimesDoppler) {
  const ArrayConfig c = fodc();
  Scene s = three_targets();
  s.sensing_noise_power = 0.0;
  Rng rng(10);
  const SnapshotSet set = synth_cpi(s, c, CcieConfig::make(4, 4, 7), rng);
  ASSERT_EQ(set.data.rows(), 36);
  ASSERT_EQ(set.snapshots(), 200);
  EXPECT_LT((set.data - set.steering * set.doppler).norm() / set.data.norm(), 1e-12);
  // single-target Vandermonde structure
  Scene one;
  one.sensing_noise_power = 0.0;
  one.targets = {{40.9, 10.55, 8.62, {1, 0}}};
  const SnapshotSet single = synth_cpi(one, c, CcieConfig::make(4, 4, 7), rng);
  const cdouble step = std::polar(1.0, kTwoPi * doppler_phase(one.targets[0], 2, c));
  for (int k = 1; k < 200; ++k) EXPECT_LT((single.data.col(k) - step * single.data.col(k - 1)).norm(), 1e-9);
}

TEST(SynthCpi, NoiseCovarianceConverges) {
  // E||Q - s I||_F^2 = (MN)^2 s^2 / K, so the relative error is sqrt(MN / K)
  for (int n : {4, 6}) {
    ArrayConfig c = ArrayConfig::linear(n, n);
    c.pulses_per_cpi = 10000;
    Scene s;
    s.sensing_noise_power = 0.7;
    Rng rng(13);
    const SnapshotSet set = synth_cpi(s, c, CcieConfig::make(4, 4, 7), rng);
    // compensation rescales the noise per antenna, so use the raw data
    const CMatrix q = sample_covariance(set.raw).q;
    const CMatrix ref = 0.7 * CMatrix::Identity(n * n, n * n);
    const double rel = (q - ref).norm() / ref.norm();
    EXPECT_NEAR(rel, std::sqrt(n * n / 10000.0), 0.1 * std::sqrt(n * n / 10000.0)) << n;
    if (n == 4) EXPECT_LT(rel, 0.05);
  }
}

TEST(SynthCpi, SameSeedSameData) {
  const ArrayConfig c = fodc();
  Scene s = three_targets();
  s.sensing_noise_power = 0.3;
  Rng a(77), b(77);
  EXPECT_EQ(synth_cpi(s, c, CcieConfig::make(4, 4, 7), a).data, synth_cpi(s, c, CcieConfig::make(4, 4, 7), b).data);
}

TEST(SynthCommRx, Examples) {
  const CcieConfig cc = CcieConfig::make(4, 4, 7);
  Rng rng(14);
  const PduFrame f = encode_frame(random_bits(16, rng), 4, cc);
  const CMatrix h = draw_comm_channel(3, 4, 1.0, rng);
  const CMatrix y = synth_comm_rx(f, h, 0.0, rng);
  for (int n = 0; n < 4; ++n) EXPECT_LT((y.col(n) / f.ccie(n) - h.col(n)).norm(), 1e-12);
  const CMatrix ones = CMatrix::Ones(1, 4);
  const CMatrix y1 = synth_comm_rx(f, ones, 0.0, rng);
  for (int n = 0; n < 4; ++n) EXPECT_EQ(y1(0, n), f.ccie(n));
}

TEST(SynthCommRx, SecondMoment) {
  const CcieConfig cc = CcieConfig::make(4, 4, 7);
  Rng rng(15);
  const Bits bits(16, 0);
  const PduFrame f = encode_frame(bits, 4, cc);
  const int u = 2;
  const double sc2 = 1.0, s2 = 0.25;
  double acc = 0;
  const int draws = 40000;
  for (int i = 0; i < draws; ++i) {
    const CMatrix h = draw_comm_channel(u, 4, sc2, rng);
    acc += synth_comm_rx(f, h, s2, rng).col(0).squaredNorm();
  }
  const double expected = std::norm(f.ccie(0)) * u * sc2 + u * s2;
  EXPECT_NEAR(acc / draws, expected, 0.03 * expected);
}
