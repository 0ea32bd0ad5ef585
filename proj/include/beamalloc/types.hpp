#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstddef>

namespace beamalloc {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

constexpr double kSpeedOfLight = 299792458.0;      // m/s
constexpr double kBoltzmann = 1.380649e-23;        // J/K
constexpr double kPi = 3.14159265358979323846;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace beamalloc
