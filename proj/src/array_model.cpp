#include "fdaisac/array_model.hpp"

#include <numeric>

namespace fdaisac {

ArrayConfig ArrayConfig::linear(int n_tx, int n_rx) {
  ArrayConfig cfg;
  cfg.n_tx = n_tx;
  cfg.n_rx = n_rx;
  cfg.offsets.clear();
  for (int n = 0; n < n_tx; ++n) cfg.offsets.push_back(Rational::from_integer(n));
  return cfg;
}

ArrayConfig ArrayConfig::with_offsets(const std::vector<std::string>& offsets, int n_rx) {
  ArrayConfig cfg;
  cfg.n_tx = static_cast<int>(offsets.size());
  cfg.n_rx = n_rx;
  cfg.offsets.clear();
  for (const auto& s : offsets) cfg.offsets.push_back(Rational::parse(s));
  return cfg;
}

void ArrayConfig::validate() const {
  if (n_tx < 1) throw ConfigError("n_tx must be >= 1");
  if (n_rx < 1) throw ConfigError("n_rx must be >= 1");
  if (pulses_per_cpi < 2) throw ConfigError("pulses_per_cpi must be >= 2");
  if (!(carrier_hz > 0)) throw ConfigError("carrier_hz must be positive");
  if (!(delta_f_hz > 0)) throw ConfigError("delta_f_hz must be positive");
  if (!(d1_m > 0) || !(d2_m > 0)) throw ConfigError("element spacings must be positive");
  if (!(pulse_width_s > 0) || pulse_width_s > pri_s) throw ConfigError("need 0 < pulse_width_s <= pri_s");
  if (static_cast<int>(offsets.size()) != n_tx)
    throw ConfigError("expected " + std::to_string(n_tx) + " offsets, got " + std::to_string(offsets.size()));
  if (!offsets.front().is_zero()) throw ConfigError("first frequency offset must be 0");
  for (std::size_t n = 1; n < offsets.size(); ++n) {
    if (!(offsets[n - 1] < offsets[n]))
      throw ConfigError("frequency offsets must be strictly increasing");
    if (difference(offsets[n], offsets[n - 1]) < Rational::from_integer(1))
      throw ConfigError("adjacent frequency offsets must differ by at least delta_f (offset " +
                        offsets[n].str() + ")");
  }
}

CMatrix tx_range_steering_matrix(const RVector& ranges_m, const ArrayConfig& cfg) {
  CMatrix a(cfg.n_tx, ranges_m.size());
  for (Eigen::Index i = 0; i < ranges_m.size(); ++i) a.col(i) = tx_range_steering(ranges_m(i), cfg);
  return a;
}

double steering_range_period(const ArrayConfig& cfg) {
  if (cfg.n_tx == 1) return std::numeric_limits<double>::infinity();
  std::int64_t l = 1;
  for (const auto& eps : cfg.offsets) l = std::lcm(l, eps.den);
  return cfg.range_bin_m() * static_cast<double>(l);
}

double fundamental_range_period(const ArrayConfig& cfg) {
  std::int64_t l = 1;
  std::int64_t g = 0;
  for (const auto& eps : cfg.offsets) {
    if (eps.is_zero()) continue;
    l = std::lcm(l, eps.den);
    g = std::gcd(g, eps.whole * eps.den + eps.num);
  }
  if (g == 0) return std::numeric_limits<double>::infinity();
  return cfg.range_bin_m() * static_cast<double>(l) / static_cast<double>(g);
}

FodcReport validate_fodc(const ArrayConfig& cfg, double max_range_m) {
  if (!(max_range_m > 0)) throw ConfigError("max_range_m must be positive");
  FodcReport r;
  r.period_m = steering_range_period(cfg);
  r.fundamental_period_m = fundamental_range_period(cfg);
  r.max_range_m = max_range_m;
  r.default_bound_m = cfg.max_unambiguous_range_m();
  for (const auto& eps : cfg.offsets) r.denominators.push_back(eps.den);
  r.pass = r.fundamental_period_m >= max_range_m;
  return r;
}

} // namespace fdaisac
