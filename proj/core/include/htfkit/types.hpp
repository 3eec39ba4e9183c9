#pragma once

#include <complex>
#include <Eigen/Dense>

namespace htfkit {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CMatrix2 = Eigen::Matrix2cd;
using CVector2 = Eigen::Vector2cd;

inline constexpr Complex jj{0.0, 1.0};
inline constexpr double pi = 3.14159265358979323846;

} // namespace htfkit
