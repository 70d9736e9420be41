#ifndef FDAISAC_CORE_HPP
#define FDAISAC_CORE_HPP

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fdaisac {

template <typename Scalar>
using CVectorT = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using CMatrixT = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

using cdouble = std::complex<double>;
using CVector = CVectorT<double>;
using CMatrix = CMatrixT<double>;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kSpeedOfLight = 3.0e8;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

inline double db2pow(double db) { return std::pow(10.0, db / 10.0); }

/// Invalid configuration or input (maps to CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure during a run (maps to CLI exit code 3).
class RuntimeFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace fdaisac

#endif // FDAISAC_CORE_HPP
