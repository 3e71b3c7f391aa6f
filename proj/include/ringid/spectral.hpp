#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "ringid/latent.hpp"

namespace ringid {

// 2-D spectra use centered indexing throughout: the DC coefficient sits at
// (N/2, N/2) and index (u, v) corresponds to standard FFT bin
// ((u + N/2) mod N, (v + N/2) mod N). The forward transform is unnormalized,
// the inverse carries the full 1/N^2. Under this convention a unit-variance
// white real plane has per-coefficient complex variance N^2, and the point
// reflection partner of (u, v) is ((N - u) mod N, (N - v) mod N) applied to
// the standard indices, which in centered indices is the same formula.

struct Spectrum {
    int size = 0;
    std::vector<std::complex<double>> data;

    Spectrum() = default;
    explicit Spectrum(int n) : size(n), data(static_cast<size_t>(n) * n) {}

    std::complex<double>& at(int u, int v) {
        return data[static_cast<size_t>(u) * size + v];
    }
    std::complex<double> at(int u, int v) const {
        return data[static_cast<size_t>(u) * size + v];
    }
};

// Point reflection partner of a centered index.
inline std::pair<int, int> reflect_index(int u, int v, int n) {
    return {(n - u) % n, (n - v) % n};
}

// Sorted, deduplicated set of (row, col) spectrum positions.
class PixelMask {
public:
    PixelMask() = default;
    PixelMask(int n, std::vector<std::pair<int, int>> pixels);

    int size() const { return size_; }
    const std::vector<std::pair<int, int>>& pixels() const { return pixels_; }
    size_t count() const { return pixels_.size(); }
    bool contains(int r, int c) const;

    // Union with the point reflection of every member.
    PixelMask symmetrized() const;

    static PixelMask full(int n);

private:
    int size_ = 0;
    std::vector<std::pair<int, int>> pixels_;
};

// Forward 2-D DFT of a real plane, centered spectrum. N must be a power of two.
Spectrum dft2(const Plane& plane);

// Inverse 2-D DFT keeping only the real part of each output sample.
// Equivalent to inverting the conjugate-symmetric projection of the spectrum.
Plane idft2_real(const Spectrum& spec);

// X_cs[u,v] = (X[u,v] + conj(X[reflect(u,v)])) / 2. Inverting X and keeping
// real parts equals inverting X_cs exactly.
Spectrum conjugate_symmetric_part(const Spectrum& spec);

// Multiply each coefficient by (-1)^(u+v) in centered indices. Involution;
// equals a circular spatial shift by (N/2, N/2). DC has even index parity for
// even N, so it is never negated.
Spectrum chessboard_modulate(const Spectrum& spec);

// Sum of |X|^2 over the mask.
double energy(const Spectrum& spec, const PixelMask& mask);

} // namespace ringid
