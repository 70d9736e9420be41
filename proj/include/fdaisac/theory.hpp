#ifndef FDAISAC_THEORY_HPP
#define FDAISAC_THEORY_HPP

#include "fdaisac/array_model.hpp"
#include "fdaisac/ccie_modem.hpp"
#include "fdaisac/scene_synth.hpp"

#include <cstdint>

namespace fdaisac {

/// Parameter order of the single-target Fisher information.
enum FisherParam : int { kReXi = 0, kImXi = 1, kRange = 2, kAngle = 3, kDoppler = 4 };

using FisherMatrix = Eigen::Matrix<double, 5, 5>;

/// Diagonal derivative generators of the steering and Doppler vectors.
struct DerivativeGenerators {
  CVector tx_range;  ///< -j 4 pi delta_f eps_n / c
  CVector rx_angle;  ///< j 2 pi f_c d2 cos(theta) (m-1) / c
  CVector tx_angle;  ///< j 2 pi f_c d1 cos(theta) (n-1) / c
  CVector doppler;   ///< j 2 pi T (k-1)
};

DerivativeGenerators derivative_generators(double theta_rad, const ArrayConfig& cfg, int pulses);

/// Fisher information from the trace formula 2 Re Tr[dPi^H Lambda^-1 dPi]
/// over explicit MN x K derivative matrices, Lambda = sigma1^2 I.
FisherMatrix fisher_matrix(const Target& target, const ArrayConfig& cfg, double noise_power, int pulses);

/// Same information assembled block-wise from the whitened factors
/// zeta = Lambda^-1/2 W and its derivatives, using Tr[(u a^T)^H (v b^T)] = (u^H v)(a^H b).
FisherMatrix fisher_matrix_assembled(const Target& target, const ArrayConfig& cfg, double noise_power, int pulses);

struct CrbReport {
  double range_m2 = 0.0;
  double angle_rad2 = 0.0;
  double doppler_hz2 = 0.0;
  double velocity_mps2 = 0.0;

  double angle_deg2() const { return angle_rad2 * (180.0 / kPi) * (180.0 / kPi); }
};

/// Schur complement D = F22 - F21 F11^-1 F12 of the half-Fisher bracket F / 2.
Eigen::Matrix3d crb_schur_block(const FisherMatrix& f);

/// CRBs from the cofactors of D: det(minor) / (2 det D).
CrbReport crb_from_fisher(const FisherMatrix& f, const ArrayConfig& cfg);

CrbReport crb(const Target& target, const ArrayConfig& cfg, double noise_power, int pulses);

/// Variance scale of the pairwise decision statistic:
/// |c' x' - c x|^2 sigma_c2 / 2 for different indices, |x' - x|^2 |c|^2 sigma_c2 / 2 otherwise.
double pep_scale(cdouble c, cdouble x, cdouble c_alt, cdouble x_alt, double sigma_c2, bool same_index);

/// P(alpha) = (1 - sqrt(alpha / (1 + alpha))) / 2.
double rayleigh_p(double alpha);

/// [P]^U sum_{u<U} C(U-1+u, u) (1-P)^u with P = rayleigh_p(alpha).
double diversity_average(double alpha, int n_rx);

/// Rayleigh-averaged pairwise error probability, alpha = sigma_k^2 / (2 sigma2^2).
double pep(double sigma_kappa2, double noise_power, int n_rx);

/// Union bound on the coefficient-index detection error, unclipped.
double p_im_bound(const CcieConfig& cfg, int n_rx, double sigma_c2, double noise_power);

/// Average Gray-coded rectangular QAM bit error with per-(j, l) Rayleigh averaging.
double p_qam_bound(const CcieConfig& cfg, int n_rx, double sigma_c2, double noise_power);

struct BerBound {
  double p_im = 0.0;       ///< clipped to [0, 1]
  double p_im_raw = 0.0;
  double p_index = 0.0;    ///< per-antenna index-bit error
  double p_qam = 0.0;
  double p_const = 0.0;    ///< (J-1)/J P_IM + (1 - P_IM) P_QAM
  double p_total = 0.0;    ///< default composition, clipped
  double p_total_raw = 0.0;
  double p_total_half = 0.0;  ///< variant with 1/2 P_IM in the constellation term
};

BerBound ccie_ber_bound(const CcieConfig& cfg, int n_tx, int n_rx, double sigma_c2, double noise_power);

enum class RateScheme { Ccie, Fopim };

const char* to_string(RateScheme s);

/// Bits per pulse: CCIE N (floor(log2 J) + log2 L); FOPIM with an N-offset
/// pool N log2 L + floor(log2 N!) + floor(log2 C(N, N)).
std::int64_t bits_per_pulse(RateScheme scheme, int n_tx, int count, int qam_order);

} // namespace fdaisac

#endif // FDAISAC_THEORY_HPP
