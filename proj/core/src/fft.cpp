#include "pigflow/fft.hpp"

#include <cmath>

#include "pigflow/error.hpp"

namespace pigflow::detail {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft_radix2(std::vector<std::complex<double>>& data, bool inverse) {
    const std::size_t n = data.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw Error("fft: size must be a power of two");

    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang =
            2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const auto u = data[i + j];
                const auto v = data[i + j + len / 2] * w;
                data[i + j] = u + v;
                data[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& x : data) x *= inv;
    }
}

std::vector<double> correlate_sums(const std::vector<double>& a,
                                   const std::vector<double>& b) {
    if (a.empty() || b.size() < a.size())
        throw Error("correlate_sums: b must be at least as long as a");
    const std::size_t n_out = b.size() - a.size() + 1;
    const std::size_t m = next_pow2(a.size() + b.size());

    std::vector<std::complex<double>> fa(m), fb(m);
    for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
    for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
    fft_radix2(fa, false);
    fft_radix2(fb, false);
    for (std::size_t i = 0; i < m; ++i) fa[i] = std::conj(fa[i]) * fb[i];
    fft_radix2(fa, true);

    std::vector<double> out(n_out);
    for (std::size_t o = 0; o < n_out; ++o) out[o] = fa[o].real();
    return out;
}

} // namespace pigflow::detail
