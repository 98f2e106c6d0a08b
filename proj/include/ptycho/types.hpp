#pragma once

#include <Eigen/Core>
#include <complex>

namespace ptycho {

/// Dense row-major 2D field; row-major matches the on-disk layout of all
/// image formats used by the toolkit.
template <typename Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Complex = std::complex<double>;
using ComplexImage = Image<Complex>;
using RealImage = Image<double>;
using BoolImage = Image<bool>;
using Index = Eigen::Index;

}  // namespace ptycho
