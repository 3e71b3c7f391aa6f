#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "ringid/spectral.hpp"

namespace ringid {

enum class MaskStyle { Naive, Rounder };

MaskStyle mask_style_from_string(const std::string& s);
std::string to_string(MaskStyle style);

// One-pixel-wide annulus of integer radius r. Naive style keeps pixels whose
// Euclidean distance from the center lies in [r, r+1). Rounder style walks the
// circle trajectory in sub-degree steps and marks the nearest pixel, which
// keeps the set closed under small rotations. The center defaults to the
// centered-spectrum DC at (n/2, n/2); symmetrize unions in point reflections.
PixelMask ring_annulus(int r, int n, MaskStyle style, double center_r,
                       double center_c, bool symmetrize);

PixelMask naive_ring_annulus(int r, int n);
PixelMask rounder_ring_annulus(int r, int n);

// Concentric annuli for radii r_min .. r_max-1, deduplicated inner-first so
// every pixel belongs to exactly one ring. Pixel order within a ring is
// (row, col) ascending; flattened order is ring-major. That order is the
// canonical layout shared by patterns, extracted evidence, and references.
struct RingMask {
    int size = 0;
    int r_min = 0;
    int r_max = 0;
    std::vector<PixelMask> annuli;
    std::vector<std::pair<int, int>> flat;  // all pixels, ring-major
    std::vector<int> ring_of;               // ring index per flat pixel

    int ring_count() const { return r_max - r_min; }
    PixelMask combined() const;
};

RingMask build_ring_mask(int r_min, int r_max, int n, MaskStyle style);
RingMask build_ring_mask_at(int r_min, int r_max, int n, MaskStyle style,
                            double center_r, double center_c, bool symmetrize);

// Per-pixel values laid out in a RingMask's flattened order.
struct Pattern {
    std::vector<double> values;
};

// Heterogeneous key material. The ring key is a bit per ring; the noise key
// seeds dense Gaussian payload fields for the designated channels.
struct RingKey {
    std::vector<uint8_t> bits;  // one per ring, outermost-last
    double alpha = 0.0;
    uint64_t key_index = 0;
};

struct NoiseKey {
    uint64_t seed = 0;
    std::vector<int> channels;
};

struct KeyPair {
    RingKey ring;
    NoiseKey noise;
};

// Big-endian bit packing: bits[0] is the most significant bit of key_index.
std::vector<uint8_t> key_index_to_bits(uint64_t index, int n_rings);
uint64_t bits_to_key_index(const std::vector<uint8_t>& bits);

// Constant per ring, +alpha for bit 1 and -alpha for bit 0.
Pattern encode_ring_key(const RingKey& key, const RingMask& mask);

// Constant per ring, drawn i.i.d. from N(0, sigma^2). Continuous counterpart
// of encode_ring_key used when discretization is disabled.
Pattern sample_treering_pattern(uint64_t seed, const RingMask& mask, double sigma);

// One complex value per ring, components i.i.d. N(0, sigma_component^2).
std::vector<std::complex<double>> sample_complex_ring_values(uint64_t seed,
                                                             int n_rings,
                                                             double sigma_component);

// Dense n x n standard normal field scaled by sigma.
Plane sample_noise_field(uint64_t seed, int n, double sigma = 1.0);

// Seed derivations for per-key payload material. The RID1 key record stores
// one seed; everything a key writes is derived from it.
uint64_t noise_field_seed(uint64_t key_seed, int channel);
uint64_t ring_pattern_seed(uint64_t key_seed);
uint64_t baseline_pattern_seed(uint64_t key_seed);

} // namespace ringid
