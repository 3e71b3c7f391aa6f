#include "ringid/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "ringid/rng.hpp"

namespace ringid {

namespace {

constexpr uint64_t kNoiseFieldTag = 0x4E000000ULL;
constexpr uint64_t kRingPatternTag = 0x52494E47ULL;
constexpr uint64_t kBaselinePatternTag = 0x54524545ULL;

std::vector<std::pair<int, int>> naive_annulus_pixels(int r, int n, double cr,
                                                      double cc) {
    std::vector<std::pair<int, int>> px;
    for (int row = 0; row < n; ++row)
        for (int col = 0; col < n; ++col) {
            const double d = std::hypot(row - cr, col - cc);
            if (d >= r && d < r + 1) px.emplace_back(row, col);
        }
    return px;
}

std::vector<std::pair<int, int>> rounder_annulus_pixels(int r, int n, double cr,
                                                        double cc) {
    if (r == 0)
        return {{static_cast<int>(std::lround(cr)), static_cast<int>(std::lround(cc))}};
    // 0.25 degree steps keep consecutive trajectory samples under a pixel
    // apart for any radius below n/2, so the walk leaves no gaps.
    const int steps = 1440;
    std::set<std::pair<int, int>> px;
    for (int i = 0; i < steps; ++i) {
        const double th = 2.0 * std::numbers::pi * i / steps;
        const long row = std::lround(cr + r * std::sin(th));
        const long col = std::lround(cc + r * std::cos(th));
        if (row >= 0 && row < n && col >= 0 && col < n)
            px.emplace(static_cast<int>(row), static_cast<int>(col));
    }
    return {px.begin(), px.end()};
}

} // namespace

MaskStyle mask_style_from_string(const std::string& s) {
    if (s == "naive") return MaskStyle::Naive;
    if (s == "rounder") return MaskStyle::Rounder;
    throw std::runtime_error("patterns: unknown mask style: " + s);
}

std::string to_string(MaskStyle style) {
    return style == MaskStyle::Naive ? "naive" : "rounder";
}

PixelMask ring_annulus(int r, int n, MaskStyle style, double center_r,
                       double center_c, bool symmetrize) {
    if (r < 0 || r > n / 2 - 1)
        throw std::runtime_error("patterns: ring radius out of range");
    auto px = style == MaskStyle::Naive ? naive_annulus_pixels(r, n, center_r, center_c)
                                        : rounder_annulus_pixels(r, n, center_r, center_c);
    PixelMask mask(n, std::move(px));
    return symmetrize ? mask.symmetrized() : mask;
}

PixelMask naive_ring_annulus(int r, int n) {
    return ring_annulus(r, n, MaskStyle::Naive, n / 2, n / 2, true);
}

PixelMask rounder_ring_annulus(int r, int n) {
    return ring_annulus(r, n, MaskStyle::Rounder, n / 2, n / 2, true);
}

PixelMask RingMask::combined() const {
    std::vector<std::pair<int, int>> px = flat;
    return PixelMask(size, std::move(px));
}

RingMask build_ring_mask_at(int r_min, int r_max, int n, MaskStyle style,
                            double center_r, double center_c, bool symmetrize) {
    if (r_min < 0 || r_max <= r_min || r_max > n / 2 - 1)
        throw std::runtime_error("patterns: bad ring radius range");
    RingMask mask;
    mask.size = n;
    mask.r_min = r_min;
    mask.r_max = r_max;
    std::set<std::pair<int, int>> taken;
    for (int r = r_min; r < r_max; ++r) {
        PixelMask ring = ring_annulus(r, n, style, center_r, center_c, symmetrize);
        std::vector<std::pair<int, int>> kept;
        for (auto p : ring.pixels())
            if (taken.insert(p).second) kept.push_back(p);
        if (kept.empty())
            throw std::runtime_error("patterns: annulus fully shadowed by inner rings");
        mask.annuli.emplace_back(n, kept);
        for (auto p : kept) {
            mask.flat.push_back(p);
            mask.ring_of.push_back(r - r_min);
        }
    }
    return mask;
}

RingMask build_ring_mask(int r_min, int r_max, int n, MaskStyle style) {
    return build_ring_mask_at(r_min, r_max, n, style, n / 2, n / 2, true);
}

std::vector<uint8_t> key_index_to_bits(uint64_t index, int n_rings) {
    if (n_rings <= 0 || n_rings > 63)
        throw std::runtime_error("patterns: ring count out of range");
    if (index >> n_rings)
        throw std::runtime_error("patterns: key index exceeds capacity");
    std::vector<uint8_t> bits(static_cast<size_t>(n_rings));
    for (int i = 0; i < n_rings; ++i)
        bits[i] = static_cast<uint8_t>((index >> (n_rings - 1 - i)) & 1);
    return bits;
}

uint64_t bits_to_key_index(const std::vector<uint8_t>& bits) {
    if (bits.empty() || bits.size() > 63)
        throw std::runtime_error("patterns: bad bit vector length");
    uint64_t index = 0;
    for (uint8_t b : bits) {
        if (b > 1) throw std::runtime_error("patterns: bit out of range");
        index = (index << 1) | b;
    }
    return index;
}

Pattern encode_ring_key(const RingKey& key, const RingMask& mask) {
    if (static_cast<int>(key.bits.size()) != mask.ring_count())
        throw std::runtime_error("patterns: key length does not match ring count");
    Pattern pat;
    pat.values.reserve(mask.flat.size());
    for (int ring : mask.ring_of)
        pat.values.push_back(key.bits[ring] ? key.alpha : -key.alpha);
    return pat;
}

Pattern sample_treering_pattern(uint64_t seed, const RingMask& mask, double sigma) {
    GaussianSampler g(seed);
    std::vector<double> ring_values(static_cast<size_t>(mask.ring_count()));
    for (auto& v : ring_values) v = sigma * g.next();
    Pattern pat;
    pat.values.reserve(mask.flat.size());
    for (int ring : mask.ring_of) pat.values.push_back(ring_values[ring]);
    return pat;
}

std::vector<std::complex<double>> sample_complex_ring_values(uint64_t seed,
                                                             int n_rings,
                                                             double sigma_component) {
    GaussianSampler g(seed);
    std::vector<std::complex<double>> values(static_cast<size_t>(n_rings));
    for (auto& z : values) {
        const double re = sigma_component * g.next();
        const double im = sigma_component * g.next();
        z = {re, im};
    }
    return values;
}

Plane sample_noise_field(uint64_t seed, int n, double sigma) {
    Plane p(n);
    GaussianSampler g(seed);
    for (auto& v : p.data) v = sigma * g.next();
    return p;
}

uint64_t noise_field_seed(uint64_t key_seed, int channel) {
    return mix64(key_seed, kNoiseFieldTag + static_cast<uint64_t>(channel));
}

uint64_t ring_pattern_seed(uint64_t key_seed) {
    return mix64(key_seed, kRingPatternTag);
}

uint64_t baseline_pattern_seed(uint64_t key_seed) {
    return mix64(key_seed, kBaselinePatternTag);
}

} // namespace ringid
