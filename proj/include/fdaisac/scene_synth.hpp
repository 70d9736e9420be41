#ifndef FDAISAC_SCENE_SYNTH_HPP
#define FDAISAC_SCENE_SYNTH_HPP

#include "fdaisac/array_model.hpp"
#include "fdaisac/ccie_modem.hpp"

#include <random>
#include <vector>

namespace fdaisac {

using Rng = std::mt19937_64;

/// Point target. Angles are degrees at this boundary.
struct Target {
  double range_m = 0.0;
  double angle_deg = 0.0;
  double velocity_mps = 0.0;
  cdouble reflection{1.0, 0.0};

  /// Doppler shift F = 2 v f_c / c in Hz.
  double doppler_hz(const ArrayConfig& cfg) const { return 2.0 * velocity_mps * cfg.carrier_hz / kSpeedOfLight; }
};

struct Scene {
  std::vector<Target> targets;
  double sensing_noise_power = 1.0;  ///< sigma_1^2
  double comm_noise_power = 1.0;     ///< sigma_2^2
  double comm_channel_power = 1.0;   ///< sigma_C^2
  double comm_user_range_m = 0.0;
  double comm_user_angle_deg = 0.0;

  /// Velocity bound c / (4 f_c T) keeping the per-pulse Doppler phase inside (-pi, pi).
  static double max_unambiguous_velocity(const ArrayConfig& cfg) {
    return kSpeedOfLight / (4.0 * cfg.carrier_hz * cfg.pri_s);
  }
  void validate(const ArrayConfig& cfg) const;
};

/// One CPI of sensing data plus the ground truth that produced it.
struct SnapshotSet {
  CMatrix data;                 ///< compensated snapshots, MN x K
  CMatrix raw;                  ///< received snapshots before compensation
  std::vector<PduFrame> frames; ///< transmitted frame per PRI
  CMatrix steering;             ///< true manifold A, MN x G
  CMatrix doppler;              ///< true Doppler matrix D, G x K

  int snapshots() const { return static_cast<int>(data.cols()); }
};

/// CN(0, power) vector: real and imaginary parts each N(0, power / 2).
CVector complex_gaussian(Eigen::Index size, double power, Rng& rng);
CMatrix complex_gaussian(Eigen::Index rows, Eigen::Index cols, double power, Rng& rng);

/// Doppler phase psi_g^k = F_g (k - 1) T in cycles, pulse index k is 1-based.
double doppler_phase(const Target& target, int k, const ArrayConfig& cfg);

/// Raw received vector y^k for pulse k (1-based). Noise is skipped when the
/// scene's sensing noise power is zero.
CVector synth_snapshot(const Scene& scene, const ArrayConfig& cfg, const PduFrame& frame, int k, Rng& rng);

/// Removes the CCIE symbols: elementwise division by 1_M kron x~.
CVector compensate(const CVector& raw, const PduFrame& frame);

/// Draws K random frames and the corresponding snapshots for one CPI.
SnapshotSet synth_cpi(const Scene& scene, const ArrayConfig& cfg, const CcieConfig& ccie, Rng& rng);

/// U x N Rayleigh channel, entries CN(0, sigma_c2).
CMatrix draw_comm_channel(int n_rx_user, int n_tx, double sigma_c2, Rng& rng);

/// Received U x N matrix, column n = x~_n h_n + CN(0, sigma2 I_U).
CMatrix synth_comm_rx(const PduFrame& frame, const CMatrix& channel, double noise_power, Rng& rng);

/// Uniform random bit string.
Bits random_bits(std::size_t count, Rng& rng);

} // namespace fdaisac

#endif // FDAISAC_SCENE_SYNTH_HPP
