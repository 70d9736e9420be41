#include "fdaisac/theory.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>

namespace fdaisac {

namespace {

constexpr cdouble kJ{0.0, 1.0};

CVector doppler_vector(double doppler_hz, const ArrayConfig& cfg, int pulses) {
  CVector psi(pulses);
  for (int k = 0; k < pulses; ++k) {
    double cycles = doppler_hz * k * cfg.pri_s;
    cycles -= std::round(cycles);
    psi(k) = std::polar(1.0, kTwoPi * cycles);
  }
  return psi;
}

CVector kron_rx_tx(const CVector& rx, const CVector& tx) {
  CVector out(rx.size() * tx.size());
  for (Eigen::Index m = 0; m < rx.size(); ++m) out.segment(m * tx.size(), tx.size()) = rx(m) * tx;
  return out;
}

/// Spatial factors a_TR, d a_TR / dR, d a_TR / dtheta.
struct SpatialFactors {
  CVector a;
  CVector a_range;
  CVector a_angle;
};

SpatialFactors spatial_factors(const Target& t, const ArrayConfig& cfg, const DerivativeGenerators& gen) {
  const double theta = deg2rad(t.angle_deg);
  const CVector at_r = tx_range_steering(t.range_m, cfg);
  const CVector at_t = tx_angle_steering(theta, cfg);
  const CVector ar = rx_angle_steering(theta, cfg);
  const CVector tx = at_r.cwiseProduct(at_t);
  SpatialFactors s;
  s.a = kron_rx_tx(ar, tx);
  s.a_range = kron_rx_tx(ar, gen.tx_range.cwiseProduct(tx));
  s.a_angle = kron_rx_tx(gen.rx_angle.cwiseProduct(ar), tx) + kron_rx_tx(ar, gen.tx_angle.cwiseProduct(tx));
  return s;
}

} // namespace

DerivativeGenerators derivative_generators(double theta_rad, const ArrayConfig& cfg, int pulses) {
  DerivativeGenerators g;
  g.tx_range.resize(cfg.n_tx);
  g.tx_angle.resize(cfg.n_tx);
  g.rx_angle.resize(cfg.n_rx);
  g.doppler.resize(pulses);
  const double c = kSpeedOfLight;
  for (int n = 0; n < cfg.n_tx; ++n) {
    g.tx_range(n) = -kJ * (4.0 * kPi / c) * cfg.delta_f_hz * cfg.offsets[n].value();
    g.tx_angle(n) = kJ * (kTwoPi * cfg.carrier_hz * cfg.d1_m / c) * std::cos(theta_rad) * static_cast<double>(n);
  }
  for (int m = 0; m < cfg.n_rx; ++m)
    g.rx_angle(m) = kJ * (kTwoPi * cfg.carrier_hz * cfg.d2_m / c) * std::cos(theta_rad) * static_cast<double>(m);
  for (int k = 0; k < pulses; ++k) g.doppler(k) = kJ * kTwoPi * cfg.pri_s * static_cast<double>(k);
  return g;
}

FisherMatrix fisher_matrix(const Target& target, const ArrayConfig& cfg, double noise_power, int pulses) {
  if (pulses < 2) throw ConfigError("Fisher information needs K >= 2");
  if (!(noise_power > 0)) throw ConfigError("noise power must be positive");
  const auto gen = derivative_generators(deg2rad(target.angle_deg), cfg, pulses);
  const auto sp = spatial_factors(target, cfg, gen);
  const CVector psi = doppler_vector(target.doppler_hz(cfg), cfg, pulses);
  const CVector psi_dot = gen.doppler.cwiseProduct(psi);
  const cdouble xi = target.reflection;

  const CMatrix w = sp.a * psi.transpose();
  std::array<CMatrix, 5> d;
  d[kReXi] = w;
  d[kImXi] = kJ * w;
  d[kRange] = xi * sp.a_range * psi.transpose();
  d[kAngle] = xi * sp.a_angle * psi.transpose();
  d[kDoppler] = xi * sp.a * psi_dot.transpose();

  FisherMatrix f;
  for (int x = 0; x < 5; ++x)
    for (int y = 0; y < 5; ++y) f(x, y) = 2.0 * (d[x].adjoint() * d[y]).trace().real() / noise_power;
  return f;
}

FisherMatrix fisher_matrix_assembled(const Target& target, const ArrayConfig& cfg, double noise_power, int pulses) {
  if (pulses < 2) throw ConfigError("Fisher information needs K >= 2");
  if (!(noise_power > 0)) throw ConfigError("noise power must be positive");
  const auto gen = derivative_generators(deg2rad(target.angle_deg), cfg, pulses);
  const auto sp = spatial_factors(target, cfg, gen);
  const CVector psi = doppler_vector(target.doppler_hz(cfg), cfg, pulses);
  const CVector psi_dot = gen.doppler.cwiseProduct(psi);

  // zeta_0 = W, zeta_R, zeta_theta, zeta_F as (spatial, temporal) factor pairs
  const std::array<const CVector*, 4> u{&sp.a, &sp.a_range, &sp.a_angle, &sp.a};
  const std::array<const CVector*, 4> v{&psi, &psi, &psi, &psi_dot};
  Eigen::Matrix<cdouble, 4, 4> t;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) t(a, b) = u[a]->dot(*u[b]) * v[a]->dot(*v[b]) / noise_power;

  const cdouble xi = target.reflection;
  FisherMatrix f = FisherMatrix::Zero();
  f(kReXi, kReXi) = 2.0 * t(0, 0).real();
  f(kImXi, kImXi) = 2.0 * t(0, 0).real();
  f(kReXi, kImXi) = f(kImXi, kReXi) = 2.0 * (kJ * t(0, 0)).real();
  for (int p = 1; p < 4; ++p) {
    const int col = kRange + p - 1;
    f(kReXi, col) = f(col, kReXi) = 2.0 * (xi * t(0, p)).real();
    f(kImXi, col) = f(col, kImXi) = 2.0 * (-kJ * xi * t(0, p)).real();
    for (int q = 1; q < 4; ++q) f(col, kRange + q - 1) = 2.0 * (std::norm(xi) * t(p, q)).real();
  }
  return f;
}

Eigen::Matrix3d crb_schur_block(const FisherMatrix& f) {
  const FisherMatrix half = f / 2.0;
  const Eigen::Matrix2d f11 = half.topLeftCorner<2, 2>();
  const Eigen::Matrix<double, 2, 3> f12 = half.topRightCorner<2, 3>();
  const Eigen::Matrix<double, 3, 2> f21 = half.bottomLeftCorner<3, 2>();
  const Eigen::Matrix3d f22 = half.bottomRightCorner<3, 3>();
  if (std::abs(f11.determinant()) <= 0) throw RuntimeFailure("reflection block of the Fisher matrix is singular");
  return f22 - f21 * f11.inverse() * f12;
}

CrbReport crb_from_fisher(const FisherMatrix& f, const ArrayConfig& cfg) {
  const Eigen::Matrix3d d = crb_schur_block(f);
  const double det = d.determinant();
  if (!(std::abs(det) > 0) || !std::isfinite(det)) throw RuntimeFailure("parameters are not identifiable (det D = 0)");
  auto minor = [&](int i, int j) { return d(i, i) * d(j, j) - d(i, j) * d(j, i); };
  CrbReport r;
  r.range_m2 = minor(1, 2) / (2.0 * det);
  r.angle_rad2 = minor(0, 2) / (2.0 * det);
  r.doppler_hz2 = minor(0, 1) / (2.0 * det);
  const double scale = kSpeedOfLight / (2.0 * cfg.carrier_hz);
  r.velocity_mps2 = scale * scale * r.doppler_hz2;
  return r;
}

CrbReport crb(const Target& target, const ArrayConfig& cfg, double noise_power, int pulses) {
  if (std::abs(target.reflection) == 0.0) throw ConfigError("CRB needs a nonzero reflection coefficient");
  return crb_from_fisher(fisher_matrix_assembled(target, cfg, noise_power, pulses), cfg);
}

double pep_scale(cdouble c, cdouble x, cdouble c_alt, cdouble x_alt, double sigma_c2, bool same_index) {
  if (same_index) return std::norm(x_alt - x) * std::norm(c) * sigma_c2 / 2.0;
  return std::norm(c_alt * x_alt - c * x) * sigma_c2 / 2.0;
}

double rayleigh_p(double alpha) {
  if (std::isinf(alpha)) return 0.0;
  return 0.5 * (1.0 - std::sqrt(alpha / (1.0 + alpha)));
}

double diversity_average(double alpha, int n_rx) {
  if (n_rx < 1) throw ConfigError("U must be >= 1");
  const double p = rayleigh_p(alpha);
  if (p <= 0.0) return 0.0;
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  double sum = 0.0;
  for (int u = 0; u < n_rx; ++u) {
    const double log_binom = std::lgamma(n_rx + u) - std::lgamma(u + 1.0) - std::lgamma(static_cast<double>(n_rx));
    sum += std::exp(log_binom + n_rx * log_p + u * log_q);
  }
  return sum;
}

double pep(double sigma_kappa2, double noise_power, int n_rx) {
  if (sigma_kappa2 < 0) throw ConfigError("sigma_kappa^2 must be >= 0");
  if (noise_power <= 0) return sigma_kappa2 > 0 ? 0.0 : diversity_average(0.0, n_rx);
  return diversity_average(sigma_kappa2 / (2.0 * noise_power), n_rx);
}

double p_im_bound(const CcieConfig& cfg, int n_rx, double sigma_c2, double noise_power) {
  const int used = 1 << cfg.bits_index();
  const QamConstellation qam(cfg.qam_order);
  const int l_count = qam.order();
  double sum = 0.0;
  for (int j = 0; j < used; ++j)
    for (int j2 = 0; j2 < used; ++j2) {
      if (j2 == j) continue;
      for (int l = 0; l < l_count; ++l)
        for (int l2 = 0; l2 < l_count; ++l2)
          sum += pep(pep_scale(cfg.coeffs(j), qam.point(l), cfg.coeffs(j2), qam.point(l2), sigma_c2, false), noise_power,
                     n_rx);
    }
  return sum / (static_cast<double>(used) * l_count);
}

namespace {

/// Per-bit Gray PAM error series for `levels` levels, bit q (1-based),
/// Rayleigh-averaged with per-branch SNR `snr` and scale eps.
double pam_bit_error(int levels, int q, double eps, double snr, int n_rx) {
  const int p2 = 1 << (q - 1);
  const int upper = static_cast<int>((1.0 - std::ldexp(1.0, -q)) * levels) - 1;
  double sum = 0.0;
  for (int i = 0; i <= upper; ++i) {
    const int sign_exp = (i * p2) / levels;
    const double sign = (sign_exp % 2 == 0) ? 1.0 : -1.0;
    const double weight = p2 - std::floor(static_cast<double>(i * p2) / levels + 0.5);
    const double a = (2.0 * i + 1.0) * eps;
    sum += sign * weight * diversity_average(a * a * snr, n_rx);
  }
  return 2.0 / levels * sum;
}

} // namespace

double p_qam_bound(const CcieConfig& cfg, int n_rx, double sigma_c2, double noise_power) {
  const int used = 1 << cfg.bits_index();
  const QamConstellation qam(cfg.qam_order);
  const int vi = qam.levels_i();
  const int wq = qam.levels_q();
  const double eps = qam.scale();
  const int bits_i = std::countr_zero(static_cast<unsigned>(vi));
  const int bits_q = std::countr_zero(static_cast<unsigned>(wq));
  if (noise_power <= 0) return 0.0;
  double sum = 0.0;
  for (int j = 0; j < used; ++j)
    for (int l = 0; l < qam.order(); ++l) {
      const double snr = std::norm(cfg.coeffs(j) * qam.point(l)) * sigma_c2 / noise_power;
      double bits = 0.0;
      for (int q = 1; q <= bits_i; ++q) bits += pam_bit_error(vi, q, eps, snr, n_rx);
      for (int q = 1; q <= bits_q; ++q) bits += pam_bit_error(wq, q, eps, snr, n_rx);
      sum += bits / qam.bits_per_symbol();
    }
  return sum / (static_cast<double>(used) * qam.order());
}

BerBound ccie_ber_bound(const CcieConfig& cfg, int n_tx, int n_rx, double sigma_c2, double noise_power) {
  if (n_tx < 1) throw ConfigError("N must be >= 1");
  const int mu_i = cfg.bits_index();
  const int mu_c = cfg.bits_symbol();
  const double used = static_cast<double>(1 << mu_i);
  BerBound b;
  b.p_im_raw = p_im_bound(cfg, n_rx, sigma_c2, noise_power);
  b.p_im = std::clamp(b.p_im_raw, 0.0, 1.0);
  b.p_qam = std::clamp(p_qam_bound(cfg, n_rx, sigma_c2, noise_power), 0.0, 1.0);
  b.p_index = mu_i > 0 ? used * b.p_im / (2.0 * (used - 1.0)) : 0.0;
  b.p_const = (used - 1.0) / used * b.p_im + (1.0 - b.p_im) * b.p_qam;
  // every antenna carries the same bit split, so the sum over N cancels
  b.p_total_raw = (b.p_index * mu_i + b.p_const * mu_c) / (mu_i + mu_c);
  b.p_total = std::clamp(b.p_total_raw, 0.0, 1.0);
  const double p_const_half = 0.5 * b.p_im + (1.0 - b.p_im) * b.p_qam;
  b.p_total_half = std::clamp((b.p_index * mu_i + p_const_half * mu_c) / (mu_i + mu_c), 0.0, 1.0);
  return b;
}

const char* to_string(RateScheme s) { return s == RateScheme::Ccie ? "ccie" : "fopim"; }

std::int64_t bits_per_pulse(RateScheme scheme, int n_tx, int count, int qam_order) {
  if (n_tx < 1 || count < 1) throw ConfigError("N and J must be positive");
  const int mu_c = QamConstellation(qam_order).bits_per_symbol();
  if (scheme == RateScheme::Ccie) {
    const int mu_i = std::bit_width(static_cast<unsigned>(count)) - 1;
    return static_cast<std::int64_t>(n_tx) * (mu_i + mu_c);
  }
  // floor(log2 N!) exactly while N! fits in 128 bits, otherwise via lgamma
  std::int64_t perm_bits = 0;
  if (n_tx <= 33) {
    unsigned __int128 fact = 1;
    for (int i = 2; i <= n_tx; ++i) fact *= static_cast<unsigned>(i);
    while (fact > 1) {
      fact >>= 1;
      ++perm_bits;
    }
  } else {
    perm_bits = static_cast<std::int64_t>(std::floor(std::lgamma(n_tx + 1.0) / std::log(2.0)));
  }
  // C(N, N) = 1 with an N-offset pool: no combination bits
  return static_cast<std::int64_t>(n_tx) * mu_c + perm_bits;
}

} // namespace fdaisac
