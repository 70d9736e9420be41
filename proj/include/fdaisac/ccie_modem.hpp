#ifndef FDAISAC_CCIE_MODEM_HPP
#define FDAISAC_CCIE_MODEM_HPP

#include "fdaisac/core.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace fdaisac {

/// Bit string, one 0/1 value per element.
using Bits = std::vector<std::uint8_t>;

/// Gray-mapped rectangular QAM with unit average energy.
///
/// log2(L) bits are split into ceil(k/2) in-phase and floor(k/2) quadrature
/// bits; each half is Gray-decoded to a PAM level (v-1) - 2i, so bit 0 maps to
/// the positive level. The whole alphabet is scaled by sqrt(3 / (v^2 + w^2 - 2)).
class QamConstellation {
public:
  explicit QamConstellation(int order);

  int order() const { return order_; }
  int bits_per_symbol() const { return bits_; }
  /// Number of in-phase (v) and quadrature (w) PAM levels, v * w = L.
  int levels_i() const { return levels_i_; }
  int levels_q() const { return levels_q_; }
  /// Minimum half-distance scale sqrt(3 / (v^2 + w^2 - 2)).
  double scale() const { return scale_; }

  /// Symbol l (0-based) is the point whose label is the big-endian value l.
  const CVector& points() const { return points_; }
  cdouble point(int label) const { return points_(label); }

  cdouble modulate(std::span<const std::uint8_t> bits) const;
  void label_bits(int label, std::span<std::uint8_t> out) const;

private:
  int order_;
  int bits_;
  int levels_i_;
  int levels_q_;
  double scale_;
  CVector points_;
};

/// Convenience wrapper around QamConstellation for a single symbol.
cdouble qam_modulate(std::span<const std::uint8_t> bits, int order);

/// Seeded circular-Gaussian coefficient vector with c^H c / J = 1 whose J*L
/// products with the QAM alphabet are pairwise distinct (min distance > 1e-6).
/// J = 1 yields [1]. Throws RuntimeFailure after 1000 rejected draws.
CVector generate_coeff_vector(int count, std::uint64_t seed, int qam_order = 4);

/// Shared coefficient vector plus the QAM alphabet.
struct CcieConfig {
  CVector coeffs;
  int qam_order = 4;
  std::uint64_t seed = 0;

  static CcieConfig make(int count, int qam_order, std::uint64_t seed);

  int count() const { return static_cast<int>(coeffs.size()); }
  /// floor(log2 J): only the first 2^bits_index coefficients are ever selected.
  int bits_index() const;
  int bits_symbol() const;
  int bits_per_antenna() const { return bits_index() + bits_symbol(); }
  QamConstellation constellation() const { return QamConstellation(qam_order); }

  void validate() const;
};

/// One PRI worth of per-antenna CCIE symbols.
struct PduFrame {
  std::vector<int> index;   ///< selected coefficient, 0-based
  std::vector<int> label;   ///< QAM label, 0-based
  CVector symbol;           ///< unit-energy QAM symbol x_n
  CVector ccie;             ///< c_{i_n} * x_n
  Bits bits;

  int antennas() const { return static_cast<int>(ccie.size()); }
};

PduFrame encode_frame(std::span<const std::uint8_t> bits, int n_tx, const CcieConfig& cfg);

struct Detection {
  int index = 0;   ///< 0-based coefficient index
  int label = 0;   ///< 0-based QAM label
  bool degenerate_channel = false;
};

/// Joint ML search over coefficient and QAM symbol, argmin ||y - c_j x_l h||^2.
/// Ties resolve to the lexicographically smallest (j, l).
Detection ml_detect(const CVector& y, const CVector& h, const CcieConfig& cfg);

/// Decodes U x N received/channel matrices (column n belongs to antenna n).
Bits decode_frame(const CMatrix& received, const CMatrix& channel, const CcieConfig& cfg);

/// Detections for every antenna, same layout as decode_frame.
std::vector<Detection> detect_frame(const CMatrix& received, const CMatrix& channel, const CcieConfig& cfg);

/// Maps a (index, label) pair back to the per-antenna bit block.
void detection_bits(const Detection& d, const CcieConfig& cfg, std::span<std::uint8_t> out);

} // namespace fdaisac

#endif // FDAISAC_CCIE_MODEM_HPP
