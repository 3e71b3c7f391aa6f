#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ringid/patterns.hpp"

namespace ringid {

// Full description of how a watermark is laid into a latent. Defaults match
// the reference construction: an 11-ring discretized key in channel 3 plus a
// dense Gaussian payload in channel 0, written losslessly into the chessboard
// shifted spectrum.
struct WatermarkConfig {
    int size = 64;
    int ring_channel = 3;
    std::vector<int> noise_channels = {0};
    int r_min = 3;
    int r_max = 14;
    double alpha = 64.0;
    double eta = 0.85;
    MaskStyle mask_style = MaskStyle::Rounder;
    bool enable_shift = true;
    bool enable_lossless = true;
    bool enable_discretize = true;

    int ring_count() const { return r_max - r_min; }

    // Number of distinct ring keys, saturating at 2^62 to stay in range.
    uint64_t capacity() const;

    // Without the lossless write the rings take their original form: complex
    // per-ring values imprinted on both parts and detected through complex
    // evidence. Discretization only shapes the lossless real alphabet.
    bool complex_ring_mode() const { return !enable_lossless; }

    void validate() const;
};

// Preset reproducing the original single-channel scheme this construction
// improves on: off-center naive rings, complex per-ring values, no shift, no
// symmetrization, eta 1, no noise payload.
WatermarkConfig treering_baseline_config();

// Ring mask implied by a config. Rounder rings written losslessly use the
// point-symmetric mask about the spectrum center; naive rings and lossy
// writes keep the original off-center unsymmetrized placement at
// (N/2 - 1, N/2).
RingMask ring_mask_for(const WatermarkConfig& config);

// Values a key writes into the ring channel, laid out in the mask's flat
// order and not yet scaled by eta. Exactly one of the two value vectors is
// populated, selected by complex_mode.
struct RingReference {
    bool complex_mode = false;
    std::vector<double> real_values;
    std::vector<std::complex<double>> complex_values;
};

RingReference ring_reference_for(const WatermarkConfig& config, const KeyPair& key,
                                 const RingMask& mask);

struct KeySet {
    WatermarkConfig config;
    std::vector<KeyPair> keys;
    // Per-channel score normalization: lambda[c] is the reciprocal of the mean
    // channel distance of pure-noise latents, so null scores sit near 1.
    std::map<int, double> lambda;
    uint64_t build_seed = 0;
};

// Draws n_keys distinct ring-key indices, assigns per-key payload seeds, and
// calibrates lambda from 256 noise latents. Deterministic in seed.
KeySet build_keyset(uint64_t n_keys, const WatermarkConfig& config, uint64_t seed);

// Text container, format tag RID1. Round-trips a KeySet exactly: doubles are
// printed with shortest round-trip precision. Unknown versions and unknown
// header fields are rejected.
void save_keyset(const KeySet& keyset, std::ostream& out);
KeySet load_keyset(std::istream& in);
void save_keyset_file(const KeySet& keyset, const std::string& path);
KeySet load_keyset_file(const std::string& path);

} // namespace ringid
