#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace pigflow::detail {

/// In-place iterative radix-2 FFT; data.size() must be a power of two.
/// inverse=true applies the conjugate transform and 1/N scaling.
void fft_radix2(std::vector<std::complex<double>>& data, bool inverse);

std::size_t next_pow2(std::size_t n);

/// Linear cross-correlation sums num[o] = sum_i a[i] * b[i + o] for
/// o = 0..b.size()-a.size(), computed in the frequency domain.
std::vector<double> correlate_sums(const std::vector<double>& a,
                                   const std::vector<double>& b);

} // namespace pigflow::detail
