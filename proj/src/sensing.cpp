#include "fdaisac/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace fdaisac {

CMatrix CovarianceEstimate::loaded() const {
  CMatrix out = q;
  out.diagonal().array() += loading;
  return out;
}

CMatrix CovarianceEstimate::inverse() const {
  const CMatrix a = loaded();
  Eigen::LDLT<CMatrix> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw RuntimeFailure("covariance factorization failed");
  CMatrix inv = ldlt.solve(CMatrix::Identity(a.rows(), a.cols()));
  // symmetrize away round-off
  return (inv + inv.adjoint()) / 2.0;
}

CovarianceEstimate sample_covariance(const CMatrix& snapshots) {
  if (snapshots.cols() < 1) throw ConfigError("covariance needs at least one snapshot");
  CovarianceEstimate est;
  est.q = snapshots * snapshots.adjoint() / static_cast<double>(snapshots.cols());
  est.q = (est.q + est.q.adjoint()).eval() / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(est.q, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (lmax > 0 && (lmin <= 0 || lmax / lmin > 1e12)) {
    const double mean_diag = est.q.trace().real() / static_cast<double>(est.q.rows());
    est.loading = 1e-10 * mean_diag;
    // a rank-one covariance at the 1e-10 level can stay near-singular; keep the
    // loaded matrix strictly positive
    if (lmin + est.loading <= 0) est.loading = -lmin + 1e-10 * mean_diag;
  }
  return est;
}

std::vector<RangeBin> coarse_range_bins(const Scene& scene, const ArrayConfig& cfg) {
  const double dr = cfg.range_bin_m();
  std::map<int, int> counts;
  for (const auto& t : scene.targets) ++counts[static_cast<int>(std::floor(t.range_m / dr))];
  std::vector<RangeBin> bins;
  for (const auto& [idx, count] : counts) {
    RangeBin b;
    b.index = idx;
    b.lo_m = idx * dr;
    b.hi_m = (idx + 1) * dr;
    b.center_m = b.lo_m + dr / 2.0;
    b.count = count;
    bins.push_back(b);
  }
  return bins;
}

RVector SearchGrid::angle_axis_deg() const {
  return RVector::LinSpaced(angle_steps, angle_min_deg, angle_max_deg);
}

RVector SearchGrid::range_axis(const RangeBin& bin) const {
  return RVector::LinSpaced(range_steps, bin.lo_m, bin.hi_m);
}

CMatrix angle_kernel(const CMatrix& q_inv, double theta_rad, const ArrayConfig& cfg) {
  const int n = cfg.n_tx;
  const int m_count = cfg.n_rx;
  const CVector at = tx_angle_steering(theta_rad, cfg);
  const CVector ar = rx_angle_steering(theta_rad, cfg);
  // S = (a_R kron I_N)^H Q^-1 (a_R kron I_N)
  CMatrix right = CMatrix::Zero(q_inv.rows(), n);
  for (int m = 0; m < m_count; ++m) right.noalias() += ar(m) * q_inv.middleCols(m * n, n);
  CMatrix s = CMatrix::Zero(n, n);
  for (int m = 0; m < m_count; ++m) s.noalias() += std::conj(ar(m)) * right.middleRows(m * n, n);
  return at.conjugate().asDiagonal() * s * at.asDiagonal();
}

double capon_denominator(const CMatrix& q_inv, double range_m, double theta_rad, const ArrayConfig& cfg) {
  const CVector a = joint_steering(range_m, theta_rad, cfg);
  return std::abs(a.dot(q_inv * a));
}

namespace {

/// |a_T(R)^H Z a_T(R)| for every column of the range steering matrix.
RVector quadratic_forms(const CMatrix& z, const CMatrix& range_steering) {
  const CMatrix za = z * range_steering;
  return range_steering.conjugate().cwiseProduct(za).colwise().sum().cwiseAbs().transpose();
}

/// Successive local zoom around a 2-D peak. Steps shrink 5x per pass.
void refine_2d(const CMatrix& q_inv, const ArrayConfig& cfg, const SearchGrid& grid, double lo_r, double hi_r, Peak& p) {
  double dtheta = grid.angle_step_deg();
  double drange = grid.range_step_m(cfg);
  constexpr int half = 5;
  for (int pass = 0; pass < grid.refine_passes; ++pass) {
    dtheta /= half;
    drange /= half;
    Peak best = p;
    for (int i = -half; i <= half; ++i) {
      const double th = std::clamp(p.angle_deg + i * dtheta, grid.angle_min_deg, grid.angle_max_deg);
      const CMatrix z = angle_kernel(q_inv, deg2rad(th), cfg);
      for (int r = -half; r <= half; ++r) {
        const double rr = std::clamp(p.range_m + r * drange, lo_r, hi_r);
        const CVector at = tx_range_steering(rr, cfg);
        const double v = 1.0 / std::abs(at.dot(z * at));
        if (v > best.value) {
          best.value = v;
          best.angle_deg = th;
          best.range_m = rr;
        }
      }
    }
    p = best;
  }
}

} // namespace

SpectrumGrid ssmte_spectrum(const CMatrix& q_inv, const RVector& range_axis_m, const RVector& theta_axis_deg,
                            const ArrayConfig& cfg) {
  SpectrumGrid g;
  g.theta_deg = theta_axis_deg;
  g.range_m = range_axis_m;
  g.values.resize(theta_axis_deg.size(), range_axis_m.size());
  const CMatrix range_steering = tx_range_steering_matrix(range_axis_m, cfg);
  for (Eigen::Index i = 0; i < theta_axis_deg.size(); ++i) {
    const CMatrix z = angle_kernel(q_inv, deg2rad(theta_axis_deg(i)), cfg);
    g.values.row(i) = quadratic_forms(z, range_steering).cwiseInverse().transpose();
  }
  return g;
}

PeakPick pick_peaks(const SpectrumGrid& grid, int count) {
  if (count < 1) throw ConfigError("peak count must be >= 1");
  const auto& v = grid.values;
  std::vector<Peak> found;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index r = 0; r < v.cols(); ++r) {
      const double x = v(i, r);
      bool is_max = true;
      bool has_neighbor = false;
      for (int di = -1; di <= 1 && is_max; ++di)
        for (int dr = -1; dr <= 1; ++dr) {
          if (di == 0 && dr == 0) continue;
          const Eigen::Index ii = i + di;
          const Eigen::Index rr = r + dr;
          if (ii < 0 || rr < 0 || ii >= v.rows() || rr >= v.cols()) continue;
          has_neighbor = true;
          if (!(x > v(ii, rr))) {
            is_max = false;
            break;
          }
        }
      if (is_max && has_neighbor) found.push_back({grid.range_m(r), grid.theta_deg(i), x, i, r});
    }
  }
  std::sort(found.begin(), found.end(), [](const Peak& a, const Peak& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.range_m != b.range_m) return a.range_m < b.range_m;
    return a.angle_deg < b.angle_deg;
  });
  PeakPick out;
  out.shortfall = static_cast<int>(found.size()) < count;
  found.resize(std::min<std::size_t>(found.size(), static_cast<std::size_t>(count)));
  out.peaks = std::move(found);
  return out;
}

double schur_complement(const CMatrix& z) {
  const Eigen::Index n = z.rows();
  if (n < 2) throw ConfigError("Schur complement needs N >= 2");
  const cdouble z1 = z(0, 0);
  const CMatrix z2 = z.block(0, 1, 1, n - 1);
  CMatrix z4 = z.block(1, 1, n - 1, n - 1);
  Eigen::LLT<CMatrix> llt(z4);
  if (llt.info() != Eigen::Success) {
    z4.diagonal().array() += 1e-10 * z4.trace().real() / static_cast<double>(n - 1);
    llt.compute(z4);
  }
  const CMatrix x = llt.solve(z2.adjoint());
  return std::abs(z1 - (z2 * x)(0, 0));
}

RVector lcsse_angle_spectrum(const CMatrix& q_inv, const ArrayConfig& cfg, const RVector& theta_axis_deg) {
  if (cfg.n_tx < 2) throw ConfigError("LCSSE needs at least two transmit antennas");
  RVector out(theta_axis_deg.size());
  for (Eigen::Index i = 0; i < theta_axis_deg.size(); ++i)
    out(i) = 1.0 / schur_complement(angle_kernel(q_inv, deg2rad(theta_axis_deg(i)), cfg));
  return out;
}

std::vector<Eigen::Index> local_maxima_1d(const RVector& values) {
  std::vector<Eigen::Index> idx;
  const Eigen::Index n = values.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool left = i == 0 || values(i) > values(i - 1);
    const bool right = i == n - 1 || values(i) > values(i + 1);
    if (left && right && n > 1) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });
  return idx;
}

const char* to_string(SensingMethod m) { return m == SensingMethod::Ssmte ? "ssmte" : "lcsse"; }

std::vector<EstimatedTarget> ssmte_estimate(const CMatrix& q_inv, const std::vector<RangeBin>& bins,
                                            const ArrayConfig& cfg, const SearchGrid& grid, bool* shortfall) {
  std::vector<EstimatedTarget> out;
  const RVector theta = grid.angle_axis_deg();
  for (const auto& bin : bins) {
    const SpectrumGrid spectrum = ssmte_spectrum(q_inv, grid.range_axis(bin), theta, cfg);
    // all maxima, strongest first; a noisy ridge can hold a secondary maximum
    // that refines onto an accepted peak, so such duplicates are skipped
    const PeakPick pick = pick_peaks(spectrum, static_cast<int>(spectrum.values.size()));
    std::vector<Peak> accepted;
    for (Peak p : pick.peaks) {
      if (static_cast<int>(accepted.size()) == bin.count) break;
      if (grid.refine_passes > 0)
        refine_2d(q_inv, cfg, grid, bin.lo_m, bin.hi_m, p);
      const bool duplicate = std::any_of(accepted.begin(), accepted.end(), [&](const Peak& a) {
        return std::abs(a.angle_deg - p.angle_deg) < grid.angle_step_deg() &&
               std::abs(a.range_m - p.range_m) < grid.range_step_m(cfg);
      });
      if (!duplicate) accepted.push_back(p);
    }
    if (static_cast<int>(accepted.size()) < bin.count && shortfall) *shortfall = true;
    for (const auto& p : accepted) out.push_back({p.range_m, p.angle_deg, 0.0, bin.index, p.value});
  }
  return out;
}

std::vector<EstimatedTarget> lcsse_estimate(const CMatrix& q_inv, const std::vector<RangeBin>& bins,
                                            const ArrayConfig& cfg, const SearchGrid& grid, bool* shortfall) {
  int total = 0;
  for (const auto& b : bins) total += b.count;
  const RVector theta = grid.angle_axis_deg();
  const RVector angle_spectrum_values = lcsse_angle_spectrum(q_inv, cfg, theta);
  std::vector<Eigen::Index> angle_peaks = local_maxima_1d(angle_spectrum_values);
  if (static_cast<int>(angle_peaks.size()) < total && shortfall) *shortfall = true;
  angle_peaks.resize(std::min<std::size_t>(angle_peaks.size(), static_cast<std::size_t>(total)));

  std::vector<double> angles;
  for (auto i : angle_peaks) {
    double th = theta(i);
    if (grid.refine_passes > 0) {
      double step = grid.angle_step_deg();
      double best = angle_spectrum_values(i);
      for (int pass = 0; pass < grid.refine_passes; ++pass) {
        step /= 5.0;
        const double centre = th;
        for (int k = -5; k <= 5; ++k) {
          const double t = std::clamp(centre + k * step, grid.angle_min_deg, grid.angle_max_deg);
          const double v = 1.0 / schur_complement(angle_kernel(q_inv, deg2rad(t), cfg));
          if (v > best) {
            best = v;
            th = t;
          }
        }
      }
    }
    angles.push_back(th);
  }

  // per bin: range-search candidates from every angle peak
  std::vector<EstimatedTarget> out;
  for (const auto& bin : bins) {
    const RVector ranges = grid.range_axis(bin);
    const CMatrix range_steering = tx_range_steering_matrix(ranges, cfg);
    std::vector<EstimatedTarget> cands;
    for (double th : angles) {
      const CMatrix z = angle_kernel(q_inv, deg2rad(th), cfg);
      const RVector inv_forms = quadratic_forms(z, range_steering).cwiseInverse();
      for (auto r : local_maxima_1d(inv_forms)) cands.push_back({ranges(r), th, 0.0, bin.index, inv_forms(r)});
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const EstimatedTarget& a, const EstimatedTarget& b) { return a.spectrum_value > b.spectrum_value; });
    if (static_cast<int>(cands.size()) < bin.count && shortfall) *shortfall = true;
    for (int c = 0; c < std::min<int>(bin.count, static_cast<int>(cands.size())); ++c) {
      EstimatedTarget t = cands[c];
      if (grid.refine_passes > 0) {
        const CMatrix z = angle_kernel(q_inv, deg2rad(t.angle_deg), cfg);
        double step = grid.range_step_m(cfg);
        for (int pass = 0; pass < grid.refine_passes; ++pass) {
          step /= 5.0;
          const double centre = t.range_m;
          for (int k = -5; k <= 5; ++k) {
            const double rr = std::clamp(centre + k * step, bin.lo_m, bin.hi_m);
            const CVector at = tx_range_steering(rr, cfg);
            const double v = 1.0 / std::abs(at.dot(z * at));
            if (v > t.spectrum_value) {
              t.spectrum_value = v;
              t.range_m = rr;
            }
          }
        }
      }
      out.push_back(t);
    }
  }
  return out;
}

VelocityEstimate estimate_velocities(const CMatrix& snapshots, const std::vector<EstimatedTarget>& estimates,
                                     const ArrayConfig& cfg, DopplerTranspose mode) {
  const auto g = static_cast<Eigen::Index>(estimates.size());
  const Eigen::Index k = snapshots.cols();
  if (g < 1) throw ConfigError("velocity estimation needs at least one target");
  if (k < 2) throw ConfigError("velocity estimation needs K >= 2");
  VelocityEstimate out;

  CMatrix a_hat(snapshots.rows(), g);
  for (Eigen::Index i = 0; i < g; ++i)
    a_hat.col(i) = joint_steering(estimates[i].range_m, deg2rad(estimates[i].angle_deg), cfg);

  auto regularized_solve = [&out](CMatrix gram, const CMatrix& rhs) {
    Eigen::JacobiSVD<CMatrix> svd(gram);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-10 * sv(0)) {
      out.rank_deficient = true;
      gram.diagonal().array() += 1e-10 * std::max(sv(0), 1e-300);
    }
    return CMatrix(gram.fullPivLu().solve(rhs));
  };

  const CMatrix d_hat = regularized_solve(a_hat.adjoint() * a_hat, a_hat.adjoint() * snapshots);
  const CMatrix d_f = d_hat.leftCols(k - 1);
  const CMatrix d_b = d_hat.rightCols(k - 1);
  const CMatrix lhs = mode == DopplerTranspose::Plain ? CMatrix(d_f) : CMatrix(d_f.conjugate());
  out.rotation = regularized_solve(lhs * d_f.transpose(), lhs * d_b.transpose());

  for (Eigen::Index i = 0; i < g; ++i)
    out.velocities_mps.push_back(kSpeedOfLight * std::arg(out.rotation(i, i)) / (4.0 * cfg.carrier_hz * kPi * cfg.pri_s));
  return out;
}

SensingResult sense(SensingMethod method, const SnapshotSet& snapshots, const std::vector<RangeBin>& bins,
                    const ArrayConfig& cfg, const SensingOptions& options) {
  SensingResult res;
  const CMatrix q_inv = sample_covariance(snapshots.data).inverse();
  res.targets = method == SensingMethod::Ssmte ? ssmte_estimate(q_inv, bins, cfg, options.grid, &res.shortfall)
                                               : lcsse_estimate(q_inv, bins, cfg, options.grid, &res.shortfall);
  if (!res.targets.empty()) {
    const auto vel = estimate_velocities(snapshots.data, res.targets, cfg, options.transpose);
    res.rank_deficient = vel.rank_deficient;
    for (std::size_t i = 0; i < res.targets.size(); ++i) res.targets[i].velocity_mps = vel.velocities_mps[i];
  }
  return res;
}

std::uint64_t complexity_count(SensingMethod method, std::uint64_t n, std::uint64_t m, std::uint64_t k, std::uint64_t g,
                               std::uint64_t g_bins, std::uint64_t s_r, std::uint64_t s_theta) {
  const std::uint64_t nm = n * m;
  const std::uint64_t per_point = nm * nm + nm + 1;
  const std::uint64_t common = k * nm * nm + nm * nm * nm + 3 * g * g * g + 2 * g * g * (k + nm - 1) + g * nm * k + 4 * g;
  if (method == SensingMethod::Ssmte) return common + s_r * s_theta * g_bins * per_point;
  const std::uint64_t n1 = n - 1;
  return common + s_theta * (n1 * n1 * n1 + n1 * n1 + n) + s_r * g * g_bins * per_point;
}

} // namespace fdaisac
