#include "fdaisac/scene_synth.hpp"

namespace fdaisac {

void Scene::validate(const ArrayConfig& cfg) const {
  if (!(sensing_noise_power > 0)) throw ConfigError("sensing_noise_power must be positive");
  if (!(comm_noise_power > 0)) throw ConfigError("comm_noise_power must be positive");
  if (!(comm_channel_power > 0)) throw ConfigError("comm_channel_power must be positive");
  const double vmax = max_unambiguous_velocity(cfg);
  for (const auto& t : targets) {
    if (t.range_m < 0) throw ConfigError("target range must be >= 0");
    if (std::abs(t.angle_deg) > 90) throw ConfigError("target angle must lie in [-90, 90] degrees");
    if (std::abs(t.velocity_mps) >= vmax)
      throw ConfigError("target velocity " + std::to_string(t.velocity_mps) + " m/s exceeds the unambiguous limit " +
                        std::to_string(vmax) + " m/s");
  }
}

CVector complex_gaussian(Eigen::Index size, double power, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(power / 2.0));
  CVector v(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v(i) = cdouble(re, im);
  }
  return v;
}

CMatrix complex_gaussian(Eigen::Index rows, Eigen::Index cols, double power, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(power / 2.0));
  CMatrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      m(r, c) = cdouble(re, im);
    }
  return m;
}

double doppler_phase(const Target& target, int k, const ArrayConfig& cfg) {
  return target.doppler_hz(cfg) * static_cast<double>(k - 1) * cfg.pri_s;
}

namespace {

cdouble doppler_phasor(const Target& t, int k, const ArrayConfig& cfg) {
  double cycles = doppler_phase(t, k, cfg);
  cycles -= std::round(cycles);
  return std::polar(1.0, kTwoPi * cycles);
}

} // namespace

CVector synth_snapshot(const Scene& scene, const ArrayConfig& cfg, const PduFrame& frame, int k, Rng& rng) {
  if (frame.antennas() != cfg.n_tx) throw ConfigError("frame antenna count does not match n_tx");
  const int n = cfg.n_tx;
  CVector y = CVector::Zero(cfg.channels());
  for (const auto& t : scene.targets) {
    const double theta = deg2rad(t.angle_deg);
    const CVector tx = frame.ccie.cwiseProduct(tx_range_steering(t.range_m, cfg)).cwiseProduct(tx_angle_steering(theta, cfg));
    const CVector rx = rx_angle_steering(theta, cfg);
    const cdouble amp = t.reflection * doppler_phasor(t, k, cfg);
    for (int m = 0; m < cfg.n_rx; ++m) y.segment(m * n, n) += (amp * rx(m)) * tx;
  }
  if (scene.sensing_noise_power > 0) y += complex_gaussian(y.size(), scene.sensing_noise_power, rng);
  return y;
}

CVector compensate(const CVector& raw, const PduFrame& frame) {
  const int n = frame.antennas();
  if (n == 0 || raw.size() % n != 0) throw ConfigError("snapshot length is not a multiple of the frame size");
  for (int i = 0; i < n; ++i)
    if (frame.ccie(i) == cdouble(0.0, 0.0)) throw ConfigError("zero CCIE symbol cannot be compensated");
  CVector out(raw.size());
  for (Eigen::Index m = 0; m < raw.size() / n; ++m) out.segment(m * n, n) = raw.segment(m * n, n).cwiseQuotient(frame.ccie);
  return out;
}

Bits random_bits(std::size_t count, Rng& rng) {
  Bits b(count);
  for (auto& v : b) v = static_cast<std::uint8_t>(rng() >> 63);
  return b;
}

SnapshotSet synth_cpi(const Scene& scene, const ArrayConfig& cfg, const CcieConfig& ccie, Rng& rng) {
  const int k_total = cfg.pulses_per_cpi;
  const auto g_total = static_cast<Eigen::Index>(scene.targets.size());
  SnapshotSet s;
  s.data.resize(cfg.channels(), k_total);
  s.raw.resize(cfg.channels(), k_total);
  s.frames.reserve(k_total);
  s.steering.resize(cfg.channels(), g_total);
  s.doppler.resize(g_total, k_total);
  for (Eigen::Index g = 0; g < g_total; ++g) {
    const auto& t = scene.targets[g];
    s.steering.col(g) = joint_steering(t.range_m, deg2rad(t.angle_deg), cfg);
    for (int k = 1; k <= k_total; ++k) s.doppler(g, k - 1) = t.reflection * doppler_phasor(t, k, cfg);
  }
  const auto bits_per_frame = static_cast<std::size_t>(cfg.n_tx * ccie.bits_per_antenna());
  for (int k = 1; k <= k_total; ++k) {
    const Bits bits = random_bits(bits_per_frame, rng);
    s.frames.push_back(encode_frame(bits, cfg.n_tx, ccie));
    s.raw.col(k - 1) = synth_snapshot(scene, cfg, s.frames.back(), k, rng);
    s.data.col(k - 1) = compensate(s.raw.col(k - 1), s.frames.back());
  }
  return s;
}

CMatrix draw_comm_channel(int n_rx_user, int n_tx, double sigma_c2, Rng& rng) {
  return complex_gaussian(n_rx_user, n_tx, sigma_c2, rng);
}

CMatrix synth_comm_rx(const PduFrame& frame, const CMatrix& channel, double noise_power, Rng& rng) {
  if (channel.cols() != frame.antennas()) throw ConfigError("channel columns must match the frame antennas");
  CMatrix y = channel * frame.ccie.asDiagonal();
  if (noise_power > 0) y += complex_gaussian(channel.rows(), channel.cols(), noise_power, rng);
  return y;
}

} // namespace fdaisac
