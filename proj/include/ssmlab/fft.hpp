#pragma once

#include <Eigen/Dense>

#include "ssmlab/field.hpp"

namespace ssmlab {

/// Centered, unitary 2D DFT.
///
/// DC sits at sample (nx/2, ny/2) on both sides, and the transform is scaled
/// by 1/sqrt(nx*ny) in each direction so that sum |out|^2 == sum |in|^2
/// (Parseval, no pitch factors). The output grid reuses Grid2D with the pitch
/// holding the Fourier sample spacing dk = 2*pi/(n*pitch) in rad/um.
ComplexField fft2_centered(const ComplexField& in);

/// Inverse of fft2_centered; fft2 then ifft2 returns the input to machine
/// precision (and the original grid pitches).
ComplexField ifft2_centered(const ComplexField& in);

/// 1D flavor of the same convention, used where the physics is separable.
/// `pitch` is the sample spacing of `in`; the returned vector is the centered
/// unitary spectrum with spacing 2*pi/(n*pitch).
Eigen::ArrayXcd fft1_centered(const Eigen::ArrayXcd& in);

/// Zero-pad a field symmetrically to (factor*nx, factor*ny), keeping the
/// center sample at the center. factor == 1 returns a copy.
ComplexField pad_centered(const ComplexField& in, int factor);

} // namespace ssmlab
