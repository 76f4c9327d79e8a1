#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinbath {

// Operators are capped at kMaxLevels so hot loops never touch the heap.
inline constexpr int kMaxLevels = 8;

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Matrix3 = Eigen::Matrix3d;

using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxLevels, kMaxLevels>;
using CVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxLevels, 1>;
using RVector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxLevels, 1>;
using RMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxLevels, kMaxLevels>;

// One 3-vector per bath spin: gradients, drifts, effective fields.
using SpinField = std::vector<Vec3>;

enum class Axis : int { X = 0, Y = 1, Z = 2 };

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

struct DegeneracyError : Error {
    DegeneracyError(const std::string& what, double gap) : Error(what), gap(gap) {}
    double gap;
};

struct ConvergenceError : Error {
    using Error::Error;
};

}  // namespace spinbath
