#pragma once

#include <complex>
#include <span>

namespace fbsq::detail {

/// In-place 3-D complex transform on an n^3 row-major array.
/// backward: out(x) = sum_k in(k) exp(+2 pi i k.x / n), unnormalized.
/// forward:  out(k) = sum_x in(x) exp(-2 pi i k.x / n), unnormalized.
/// Plans are created once per n and shared; execution is reentrant.
void fft3d_backward(int n, std::span<std::complex<double>> data);
void fft3d_forward(int n, std::span<std::complex<double>> data);

}  // namespace fbsq::detail
