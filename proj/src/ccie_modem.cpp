#include "fdaisac/ccie_modem.hpp"

#include <bit>
#include <random>

namespace fdaisac {

namespace {

int log2_exact(int v) {
  if (v < 1 || !std::has_single_bit(static_cast<unsigned>(v))) return -1;
  return std::countr_zero(static_cast<unsigned>(v));
}

int bits_to_int(std::span<const std::uint8_t> bits) {
  int v = 0;
  for (auto b : bits) v = (v << 1) | (b ? 1 : 0);
  return v;
}

int gray_to_binary(int g) {
  int b = g;
  for (int shift = 1; (g >> shift) != 0; ++shift) b ^= g >> shift;
  return b;
}

double min_product_distance(const CVector& c, const CVector& alphabet) {
  std::vector<cdouble> prods;
  for (Eigen::Index j = 0; j < c.size(); ++j)
    for (Eigen::Index l = 0; l < alphabet.size(); ++l) prods.push_back(c(j) * alphabet(l));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < prods.size(); ++a)
    for (std::size_t b = a + 1; b < prods.size(); ++b) best = std::min(best, std::abs(prods[a] - prods[b]));
  return best;
}

} // namespace

QamConstellation::QamConstellation(int order) : order_(order) {
  bits_ = log2_exact(order);
  if (bits_ < 1 || bits_ > 10) throw ConfigError("QAM order must be a power of two in [2, 1024], got " + std::to_string(order));
  const int bits_i = (bits_ + 1) / 2;
  const int bits_q = bits_ / 2;
  levels_i_ = 1 << bits_i;
  levels_q_ = 1 << bits_q;
  scale_ = std::sqrt(3.0 / (levels_i_ * levels_i_ + levels_q_ * levels_q_ - 2));
  points_.resize(order);
  for (int label = 0; label < order; ++label) {
    const int gi = label >> bits_q;
    const int gq = label & ((1 << bits_q) - 1);
    const double re = (levels_i_ - 1) - 2.0 * gray_to_binary(gi);
    const double im = levels_q_ > 1 ? (levels_q_ - 1) - 2.0 * gray_to_binary(gq) : 0.0;
    points_(label) = scale_ * cdouble(re, im);
  }
}

cdouble QamConstellation::modulate(std::span<const std::uint8_t> bits) const {
  if (static_cast<int>(bits.size()) != bits_)
    throw ConfigError("QAM symbol needs " + std::to_string(bits_) + " bits");
  return points_(bits_to_int(bits));
}

void QamConstellation::label_bits(int label, std::span<std::uint8_t> out) const {
  for (int b = 0; b < bits_; ++b) out[b] = static_cast<std::uint8_t>((label >> (bits_ - 1 - b)) & 1);
}

cdouble qam_modulate(std::span<const std::uint8_t> bits, int order) {
  return QamConstellation(order).modulate(bits);
}

CVector generate_coeff_vector(int count, std::uint64_t seed, int qam_order) {
  if (count < 1) throw ConfigError("coefficient count J must be >= 1");
  if (count == 1) return CVector::Ones(1);
  const QamConstellation qam(qam_order);
  for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
    std::mt19937_64 rng(seed + attempt);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    CVector c(count);
    for (int j = 0; j < count; ++j) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      c(j) = cdouble(re, im);
    }
    const double norm2 = c.squaredNorm();
    if (norm2 <= 0) continue;
    c *= std::sqrt(count / norm2);
    if (min_product_distance(c, qam.points()) > 1e-6) return c;
  }
  throw RuntimeFailure("could not draw a coefficient vector with distinct products for J=" +
                       std::to_string(count) + ", L=" + std::to_string(qam_order));
}

CcieConfig CcieConfig::make(int count, int qam_order, std::uint64_t seed) {
  CcieConfig cfg;
  cfg.coeffs = generate_coeff_vector(count, seed, qam_order);
  cfg.qam_order = qam_order;
  cfg.seed = seed;
  return cfg;
}

int CcieConfig::bits_index() const { return std::bit_width(static_cast<unsigned>(count())) - 1; }

int CcieConfig::bits_symbol() const { return QamConstellation(qam_order).bits_per_symbol(); }

void CcieConfig::validate() const {
  if (coeffs.size() < 1) throw ConfigError("empty coefficient vector");
  const double norm = coeffs.squaredNorm() / static_cast<double>(coeffs.size());
  if (std::abs(norm - 1.0) > 1e-12 * std::max(1.0, static_cast<double>(coeffs.size())))
    throw ConfigError("coefficient vector must satisfy c^H c / J = 1");
  const QamConstellation qam(qam_order);
  if (min_product_distance(coeffs, qam.points()) <= 1e-6)
    throw ConfigError("coefficient/QAM products are not pairwise distinct");
}

PduFrame encode_frame(std::span<const std::uint8_t> bits, int n_tx, const CcieConfig& cfg) {
  const int mu_i = cfg.bits_index();
  const int mu_c = cfg.bits_symbol();
  const int per = mu_i + mu_c;
  if (static_cast<int>(bits.size()) != n_tx * per)
    throw ConfigError("frame needs " + std::to_string(n_tx * per) + " bits, got " + std::to_string(bits.size()));
  const QamConstellation qam(cfg.qam_order);
  PduFrame f;
  f.index.resize(n_tx);
  f.label.resize(n_tx);
  f.symbol.resize(n_tx);
  f.ccie.resize(n_tx);
  f.bits.assign(bits.begin(), bits.end());
  for (int n = 0; n < n_tx; ++n) {
    const auto block = bits.subspan(static_cast<std::size_t>(n * per), per);
    f.index[n] = bits_to_int(block.first(mu_i));
    f.label[n] = bits_to_int(block.subspan(mu_i));
    f.symbol(n) = qam.point(f.label[n]);
    f.ccie(n) = cfg.coeffs(f.index[n]) * f.symbol(n);
  }
  return f;
}

Detection ml_detect(const CVector& y, const CVector& h, const CcieConfig& cfg) {
  const QamConstellation qam(cfg.qam_order);
  const int used = 1 << cfg.bits_index();
  const cdouble z = h.dot(y); // h^H y
  const double e = h.squaredNorm();
  Detection best;
  best.degenerate_channel = e == 0.0;
  double best_metric = std::numeric_limits<double>::infinity();
  // ||y - s h||^2 = ||y||^2 - 2 Re(conj(s) z) + |s|^2 ||h||^2
  for (int j = 0; j < used; ++j) {
    for (int l = 0; l < qam.order(); ++l) {
      const cdouble s = cfg.coeffs(j) * qam.point(l);
      const double metric = std::norm(s) * e - 2.0 * (std::conj(s) * z).real();
      if (metric < best_metric) {
        best_metric = metric;
        best.index = j;
        best.label = l;
      }
    }
  }
  return best;
}

std::vector<Detection> detect_frame(const CMatrix& received, const CMatrix& channel, const CcieConfig& cfg) {
  if (received.rows() != channel.rows() || received.cols() != channel.cols())
    throw ConfigError("received and channel shapes differ");
  std::vector<Detection> out;
  out.reserve(received.cols());
  for (Eigen::Index n = 0; n < received.cols(); ++n)
    out.push_back(ml_detect(received.col(n), channel.col(n), cfg));
  return out;
}

void detection_bits(const Detection& d, const CcieConfig& cfg, std::span<std::uint8_t> out) {
  const int mu_i = cfg.bits_index();
  for (int b = 0; b < mu_i; ++b) out[b] = static_cast<std::uint8_t>((d.index >> (mu_i - 1 - b)) & 1);
  QamConstellation(cfg.qam_order).label_bits(d.label, out.subspan(mu_i));
}

Bits decode_frame(const CMatrix& received, const CMatrix& channel, const CcieConfig& cfg) {
  const auto dets = detect_frame(received, channel, cfg);
  const int per = cfg.bits_per_antenna();
  Bits bits(dets.size() * per);
  for (std::size_t n = 0; n < dets.size(); ++n)
    detection_bits(dets[n], cfg, std::span<std::uint8_t>(bits).subspan(n * per, per));
  return bits;
}

} // namespace fdaisac
