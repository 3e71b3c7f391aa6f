#include "ringid/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ringid {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_size(int n) {
    if (!is_pow2(n) || n < 2)
        throw std::runtime_error("spectral: size must be a power of two >= 2");
}

// Iterative radix-2 FFT. Forward applies e^{-2*pi*i*k/n} with no scaling;
// inverse applies the conjugate twiddles and also no scaling (callers divide).
void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j |= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang =
            (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

void transform2d(std::vector<std::complex<double>>& m, int n, bool inverse) {
    std::vector<std::complex<double>> line(static_cast<size_t>(n));
    for (int r = 0; r < n; ++r) {
        auto* row = m.data() + static_cast<size_t>(r) * n;
        line.assign(row, row + n);
        fft_radix2(line, inverse);
        std::copy(line.begin(), line.end(), row);
    }
    for (int c = 0; c < n; ++c) {
        for (int r = 0; r < n; ++r) line[r] = m[static_cast<size_t>(r) * n + c];
        fft_radix2(line, inverse);
        for (int r = 0; r < n; ++r) m[static_cast<size_t>(r) * n + c] = line[r];
    }
}

// centered[u][v] = standard[(u + n/2) % n][(v + n/2) % n]; its own inverse for
// even n, so the same routine recenters and un-centers.
std::vector<std::complex<double>> shift_half(
    const std::vector<std::complex<double>>& m, int n) {
    std::vector<std::complex<double>> out(m.size());
    const int h = n / 2;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            out[static_cast<size_t>(r) * n + c] =
                m[static_cast<size_t>((r + h) % n) * n + (c + h) % n];
    return out;
}

void check_finite(const std::vector<std::complex<double>>& m) {
    for (const auto& z : m)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw std::runtime_error("spectral: non-finite value");
}

} // namespace

PixelMask::PixelMask(int n, std::vector<std::pair<int, int>> pixels)
    : size_(n), pixels_(std::move(pixels)) {
    if (n <= 0) throw std::runtime_error("mask: bad size");
    for (auto [r, c] : pixels_)
        if (r < 0 || r >= n || c < 0 || c >= n)
            throw std::runtime_error("mask: pixel out of range");
    std::sort(pixels_.begin(), pixels_.end());
    pixels_.erase(std::unique(pixels_.begin(), pixels_.end()), pixels_.end());
}

bool PixelMask::contains(int r, int c) const {
    return std::binary_search(pixels_.begin(), pixels_.end(), std::make_pair(r, c));
}

PixelMask PixelMask::symmetrized() const {
    std::vector<std::pair<int, int>> px = pixels_;
    px.reserve(px.size() * 2);
    for (auto [r, c] : pixels_) px.push_back(reflect_index(r, c, size_));
    return PixelMask(size_, std::move(px));
}

PixelMask PixelMask::full(int n) {
    std::vector<std::pair<int, int>> px;
    px.reserve(static_cast<size_t>(n) * n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) px.emplace_back(r, c);
    return PixelMask(n, std::move(px));
}

Spectrum dft2(const Plane& plane) {
    check_size(plane.size);
    const int n = plane.size;
    std::vector<std::complex<double>> m(plane.data.begin(), plane.data.end());
    check_finite(m);
    transform2d(m, n, false);
    Spectrum out(n);
    out.data = shift_half(m, n);
    return out;
}

Plane idft2_real(const Spectrum& spec) {
    check_size(spec.size);
    check_finite(spec.data);
    const int n = spec.size;
    auto m = shift_half(spec.data, n);
    transform2d(m, n, true);
    const double scale = 1.0 / (static_cast<double>(n) * n);
    Plane out(n);
    for (size_t i = 0; i < m.size(); ++i) out.data[i] = m[i].real() * scale;
    return out;
}

Spectrum conjugate_symmetric_part(const Spectrum& spec) {
    check_size(spec.size);
    const int n = spec.size;
    Spectrum out(n);
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) {
            auto [ru, rv] = reflect_index(u, v, n);
            out.at(u, v) = 0.5 * (spec.at(u, v) + std::conj(spec.at(ru, rv)));
        }
    return out;
}

Spectrum chessboard_modulate(const Spectrum& spec) {
    check_size(spec.size);
    const int n = spec.size;
    Spectrum out(n);
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            out.at(u, v) = ((u + v) & 1) ? -spec.at(u, v) : spec.at(u, v);
    return out;
}

double energy(const Spectrum& spec, const PixelMask& mask) {
    if (mask.size() != spec.size)
        throw std::runtime_error("spectral: mask size mismatch");
    double sum = 0.0;
    for (auto [r, c] : mask.pixels()) sum += std::norm(spec.at(r, c));
    return sum;
}

} // namespace ringid
