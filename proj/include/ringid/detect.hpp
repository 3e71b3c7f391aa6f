#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "ringid/keyset.hpp"
#include "ringid/latent.hpp"

namespace ringid {

// Real parts of the ring channel spectrum at the mask pixels, in canonical
// flat order, after undoing the chessboard shift when the config uses it.
std::vector<double> extract_ring_evidence(const Latent& latent,
                                          const WatermarkConfig& config);
std::vector<double> extract_ring_evidence(const Plane& plane,
                                          const WatermarkConfig& config);

// Full complex coefficients at the mask pixels; the baseline matching rule
// and the distribution-shift experiments need both parts.
std::vector<std::complex<double>> extract_ring_evidence_complex(
    const Plane& plane, const WatermarkConfig& config);

// Sum of |evidence[i] - eta * reference[i]|. Lengths must match.
double l1_distance(std::span<const double> evidence,
                   std::span<const double> reference, double eta);
double l1_distance(std::span<const std::complex<double>> evidence,
                   std::span<const std::complex<double>> reference, double eta);

struct KeyScore {
    uint64_t key_index = 0;
    std::map<int, double> channel_distance;  // raw L1 per channel
    double combined = 0.0;                   // min over channels of lambda_c * d_c
};

struct MatchResult {
    std::vector<KeyScore> scores;  // one per enrolled key, keyset order
    uint64_t best_key_index = 0;
    double best_score = 0.0;
};

// Precomputes per-key references (ring values and dense payload fields) so
// repeated identifications amortize the setup. n_keys limits enrollment to
// the first n_keys entries of the keyset; 0 means all.
class Matcher {
public:
    explicit Matcher(const KeySet& keyset, size_t n_keys = 0);

    MatchResult identify(const Latent& latent) const;
    double verify_score(const Latent& latent, uint64_t key_index) const;
    size_t enrolled() const { return enrolled_; }

private:
    const KeySet& keyset_;
    size_t enrolled_;
    RingMask mask_;
    std::vector<RingReference> ring_refs_;
    std::vector<std::vector<Plane>> noise_fields_;  // [key][noise channel]
};

// One-shot conveniences over a temporary Matcher.
MatchResult identify(const Latent& latent, const KeySet& keyset);
double verify_score(const Latent& latent, const KeyPair& key, const KeySet& keyset);

} // namespace ringid
