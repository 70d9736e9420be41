#ifndef FDAISAC_SENSING_HPP
#define FDAISAC_SENSING_HPP

#include "fdaisac/array_model.hpp"
#include "fdaisac/scene_synth.hpp"

#include <cstdint>
#include <vector>

namespace fdaisac {

/// Sample covariance Q = (1/K) sum_k y_k y_k^H with optional diagonal loading.
struct CovarianceEstimate {
  CMatrix q;             ///< unloaded sample covariance
  double loading = 0.0;  ///< added to the diagonal before inversion

  CMatrix loaded() const;
  /// (Q + loading I)^{-1}, Hermitian.
  CMatrix inverse() const;
};

/// Loads by 1e-10 * tr(Q) / MN when the condition number exceeds 1e12.
CovarianceEstimate sample_covariance(const CMatrix& snapshots);

/// Coarse range cell: window [index * dr, (index + 1) * dr] centred on center_m.
struct RangeBin {
  int index = 0;
  double center_m = 0.0;
  double lo_m = 0.0;
  double hi_m = 0.0;
  int count = 0;  ///< number of targets inside the bin
};

/// Idealized pulse-compression detector: bin = floor(R / dr), duplicate bins
/// merged (counts summed), sorted by bin index.
std::vector<RangeBin> coarse_range_bins(const Scene& scene, const ArrayConfig& cfg);

struct SearchGrid {
  int angle_steps = 1000;
  int range_steps = 1000;  ///< per range bin
  double angle_min_deg = -90.0;
  double angle_max_deg = 90.0;
  /// Number of local zoom passes applied to each picked peak (0 = plain grid search).
  int refine_passes = 0;

  RVector angle_axis_deg() const;
  RVector range_axis(const RangeBin& bin) const;
  double angle_step_deg() const { return (angle_max_deg - angle_min_deg) / (angle_steps - 1); }
  double range_step_m(const ArrayConfig& cfg) const { return cfg.range_bin_m() / (range_steps - 1); }
};

/// Capon-type joint spectrum 1 / |a_TR^H Q^-1 a_TR|; values(i_theta, i_range).
struct SpectrumGrid {
  RVector theta_deg;
  RVector range_m;
  RMatrix values;
};

/// Z(theta) = B^H Q^-1 B with B = a_R(theta) kron diag(a_T(theta)); N x N.
CMatrix angle_kernel(const CMatrix& q_inv, double theta_rad, const ArrayConfig& cfg);

/// a_TR^H Q^-1 a_TR evaluated through the angle kernel.
double capon_denominator(const CMatrix& q_inv, double range_m, double theta_rad, const ArrayConfig& cfg);

SpectrumGrid ssmte_spectrum(const CMatrix& q_inv, const RVector& range_axis_m, const RVector& theta_axis_deg,
                            const ArrayConfig& cfg);

struct Peak {
  double range_m = 0.0;
  double angle_deg = 0.0;
  double value = 0.0;
  Eigen::Index i_theta = 0;
  Eigen::Index i_range = 0;
};

struct PeakPick {
  std::vector<Peak> peaks;
  bool shortfall = false;
};

/// Strict 8-neighbour local maxima sorted by value (ties: smaller range, then
/// smaller angle); the first `count` are returned.
PeakPick pick_peaks(const SpectrumGrid& grid, int count);

/// 1 / |z1 - z2 z4^-1 z2^H| for each angle; requires N >= 2.
RVector lcsse_angle_spectrum(const CMatrix& q_inv, const ArrayConfig& cfg, const RVector& theta_axis_deg);

/// Schur complement z1 - z2 z4^-1 z2^H of one angle kernel (real part).
double schur_complement(const CMatrix& z);

/// Strict 1-D local maxima of a sampled curve, sorted by value descending.
std::vector<Eigen::Index> local_maxima_1d(const RVector& values);

struct EstimatedTarget {
  double range_m = 0.0;
  double angle_deg = 0.0;
  double velocity_mps = 0.0;
  int bin_index = 0;
  double spectrum_value = 0.0;
};

enum class SensingMethod { Ssmte, Lcsse };

const char* to_string(SensingMethod m);

enum class DopplerTranspose {
  Plain,     ///< (D_F D_F^T)^-1 D_F D_B^T
  Conjugate  ///< (D_F^* D_F^T)^-1 D_F^* D_B^T, the least-squares solution
};

struct VelocityEstimate {
  std::vector<double> velocities_mps;
  CMatrix rotation;  ///< E, G x G
  bool rank_deficient = false;
};

/// LS Doppler matrix and rotational-invariance velocity step on Y (MN x K).
VelocityEstimate estimate_velocities(const CMatrix& snapshots, const std::vector<EstimatedTarget>& estimates,
                                     const ArrayConfig& cfg, DopplerTranspose mode = DopplerTranspose::Conjugate);

struct SensingOptions {
  SearchGrid grid;
  DopplerTranspose transpose = DopplerTranspose::Conjugate;
};

struct SensingResult {
  std::vector<EstimatedTarget> targets;
  bool shortfall = false;
  bool rank_deficient = false;
};

/// SSMTE: per-bin 2-D search, `bin.count` peaks per bin.
std::vector<EstimatedTarget> ssmte_estimate(const CMatrix& q_inv, const std::vector<RangeBin>& bins,
                                            const ArrayConfig& cfg, const SearchGrid& grid, bool* shortfall = nullptr);

/// LCSSE: Schur-complement angle search, then 1-D range search over the union
/// of bin windows for every angle peak. Candidates are kept per bin by
/// spectrum value, so several targets sharing one angle are all recovered.
std::vector<EstimatedTarget> lcsse_estimate(const CMatrix& q_inv, const std::vector<RangeBin>& bins,
                                            const ArrayConfig& cfg, const SearchGrid& grid, bool* shortfall = nullptr);

/// Full chain: covariance, angle/range search, velocity LS.
SensingResult sense(SensingMethod method, const SnapshotSet& snapshots, const std::vector<RangeBin>& bins,
                    const ArrayConfig& cfg, const SensingOptions& options);

/// Closed-form multiplication counts of the two estimators.
std::uint64_t complexity_count(SensingMethod method, std::uint64_t n_tx, std::uint64_t n_rx, std::uint64_t k,
                               std::uint64_t g, std::uint64_t g_bins, std::uint64_t s_r, std::uint64_t s_theta);

} // namespace fdaisac

#endif // FDAISAC_SENSING_HPP
