// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <span>

namespace vislab::detail {

/// Unnormalized 2D complex FFTs of size n x n (row-major), backed by FFTW.
/// Plans are created once per size with FFTW_ESTIMATE; execution is
/// thread-safe and the result does not depend on the calling thread.
void fft_forward(int n, std::span<std::complex<double>> data);
void fft_inverse(int n, std::span<std::complex<double>> data);

}  // namespace vislab::detail
