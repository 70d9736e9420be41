#ifndef FDAISAC_ARRAY_MODEL_HPP
#define FDAISAC_ARRAY_MODEL_HPP

#include "fdaisac/core.hpp"
#include "fdaisac/rational.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace fdaisac {

/// FDA-MIMO array geometry, frequency plan and pulse timing.
///
/// Transmit antenna n radiates at f_c + offsets[n] * delta_f_hz. Offsets are
/// exact rationals so the range period of the transmit steering vector can be
/// computed without floating-point guesswork.
struct ArrayConfig {
  int n_tx = 6;
  int n_rx = 6;
  double carrier_hz = 10e9;
  double delta_f_hz = 2e6;
  double d1_m = kSpeedOfLight / 10e9;
  double d2_m = kSpeedOfLight / 10e9;
  std::vector<Rational> offsets;
  double pri_s = 60e-6;
  int pulses_per_cpi = 200;
  double pulse_width_s = 20e-6;

  /// Offsets 0, 1, ..., n_tx - 1.
  static ArrayConfig linear(int n_tx, int n_rx);
  /// Builds a config from offset strings such as "3.17" or "3+17/100".
  static ArrayConfig with_offsets(const std::vector<std::string>& offsets, int n_rx);

  /// Throws ConfigError when any invariant is violated.
  void validate() const;

  double wavelength() const { return kSpeedOfLight / carrier_hz; }
  /// Coarse range-bin size c / (2 delta_f).
  double range_bin_m() const { return kSpeedOfLight / (2.0 * delta_f_hz); }
  /// Default maximum sensing range c T / 2.
  double max_unambiguous_range_m() const { return kSpeedOfLight * pri_s / 2.0; }
  int channels() const { return n_tx * n_rx; }
};

namespace detail {

/// exp(-j 2 pi * eps * x) with the integer and fractional parts of eps
/// reduced separately so exact periods give exactly-unit results.
template <typename Scalar>
std::complex<Scalar> range_phasor(const Rational& eps, Scalar x) {
  using std::floor;
  Scalar cycles = static_cast<Scalar>(eps.whole) * x;
  cycles -= floor(cycles);
  if (eps.num != 0) {
    Scalar frac = static_cast<Scalar>(eps.num) * x / static_cast<Scalar>(eps.den);
    cycles += frac - floor(frac);
  }
  cycles -= std::round(cycles);
  return std::polar(Scalar(1), -Scalar(kTwoPi) * cycles);
}

} // namespace detail

/// Transmit range steering vector, entry n = exp(-j 2 pi eps_n delta_f 2R / c).
template <typename Scalar = double>
CVectorT<Scalar> tx_range_steering(Scalar range_m, const ArrayConfig& cfg) {
  const Scalar x = Scalar(2) * range_m * static_cast<Scalar>(cfg.delta_f_hz) / Scalar(kSpeedOfLight);
  CVectorT<Scalar> a(cfg.n_tx);
  for (int n = 0; n < cfg.n_tx; ++n) a(n) = detail::range_phasor(cfg.offsets[n], x);
  return a;
}

/// Uniform linear array angle response exp(j 2 pi f_c (i-1) d sin(theta) / c).
template <typename Scalar = double>
CVectorT<Scalar> ula_steering(int count, Scalar spacing_m, Scalar theta_rad, double carrier_hz) {
  using std::sin;
  const Scalar cycles_per_elem = static_cast<Scalar>(carrier_hz) * spacing_m * sin(theta_rad) / Scalar(kSpeedOfLight);
  CVectorT<Scalar> a(count);
  for (int i = 0; i < count; ++i) {
    Scalar c = cycles_per_elem * Scalar(i);
    c -= std::round(c);
    a(i) = std::polar(Scalar(1), Scalar(kTwoPi) * c);
  }
  return a;
}

template <typename Scalar = double>
CVectorT<Scalar> tx_angle_steering(Scalar theta_rad, const ArrayConfig& cfg) {
  return ula_steering<Scalar>(cfg.n_tx, static_cast<Scalar>(cfg.d1_m), theta_rad, cfg.carrier_hz);
}

template <typename Scalar = double>
CVectorT<Scalar> rx_angle_steering(Scalar theta_rad, const ArrayConfig& cfg) {
  return ula_steering<Scalar>(cfg.n_rx, static_cast<Scalar>(cfg.d2_m), theta_rad, cfg.carrier_hz);
}

/// a_R(theta) kron [a_T(R) .* a_T(theta)], length M*N, receive index major.
template <typename Scalar = double>
CVectorT<Scalar> joint_steering(Scalar range_m, Scalar theta_rad, const ArrayConfig& cfg) {
  const CVectorT<Scalar> tx = tx_range_steering(range_m, cfg).cwiseProduct(tx_angle_steering(theta_rad, cfg));
  const CVectorT<Scalar> rx = rx_angle_steering(theta_rad, cfg);
  CVectorT<Scalar> a(cfg.n_rx * cfg.n_tx);
  for (int m = 0; m < cfg.n_rx; ++m) a.segment(m * cfg.n_tx, cfg.n_tx) = rx(m) * tx;
  return a;
}

/// Matrix whose columns are tx_range_steering over a list of ranges.
CMatrix tx_range_steering_matrix(const RVector& ranges_m, const ArrayConfig& cfg);

/// Range period from the integer/fractional offset design rule:
/// (c / 2 delta_f) * LCM of the fractional-part denominators. Infinite for a
/// single-antenna array, whose range steering vector is constant.
double steering_range_period(const ArrayConfig& cfg);

/// Smallest R > 0 with a_T(R) == a_T(0) exactly: (c / 2 delta_f) * lcm(b_n) / gcd(a_n)
/// over the nonzero offsets a_n / b_n. Divides steering_range_period().
double fundamental_range_period(const ArrayConfig& cfg);

struct FodcReport {
  bool pass = false;
  double period_m = 0.0;             ///< design-rule period
  double fundamental_period_m = 0.0; ///< true smallest period
  double max_range_m = 0.0;
  double default_bound_m = 0.0;      ///< c T / 2
  std::vector<std::int64_t> denominators;
};

/// Checks that no range ambiguity occurs inside [0, max_range_m].
FodcReport validate_fodc(const ArrayConfig& cfg, double max_range_m);

} // namespace fdaisac

#endif // FDAISAC_ARRAY_MODEL_HPP
