#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

// Thin wrapper over FFTW's real-to-complex transforms. Plans are cached per
// length and executed through the new-array interface, so calls are safe from
// concurrent threads.
namespace kdvlab::fourier {

using Complex = std::complex<double>;

/// Unnormalized forward transform; returns n/2+1 coefficients.
std::vector<Complex> forward(std::span<const double> values);

/// Inverse of forward(), including the 1/n normalization.
std::vector<double> inverse(std::span<const Complex> spectrum, std::size_t n);

}  // namespace kdvlab::fourier
