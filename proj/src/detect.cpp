#include "ringid/detect.hpp"

#include <cmath>
#include <stdexcept>

#include "ringid/spectral.hpp"

namespace ringid {

namespace {

Spectrum ring_spectrum(const Plane& plane, const WatermarkConfig& config) {
    if (plane.size != config.size)
        throw std::runtime_error("detect: plane size does not match config");
    Spectrum spec = dft2(plane);
    if (config.enable_shift) spec = chessboard_modulate(spec);
    return spec;
}

Plane ring_plane(const Latent& latent, const WatermarkConfig& config) {
    if (config.ring_channel >= latent.channels)
        throw std::runtime_error("detect: ring channel beyond latent");
    return latent.channel_plane(config.ring_channel);
}

} // namespace

std::vector<double> extract_ring_evidence(const Plane& plane,
                                          const WatermarkConfig& config) {
    const Spectrum spec = ring_spectrum(plane, config);
    const RingMask mask = ring_mask_for(config);
    std::vector<double> evidence;
    evidence.reserve(mask.flat.size());
    for (auto [u, v] : mask.flat) evidence.push_back(spec.at(u, v).real());
    return evidence;
}

std::vector<double> extract_ring_evidence(const Latent& latent,
                                          const WatermarkConfig& config) {
    return extract_ring_evidence(ring_plane(latent, config), config);
}

std::vector<std::complex<double>> extract_ring_evidence_complex(
    const Plane& plane, const WatermarkConfig& config) {
    const Spectrum spec = ring_spectrum(plane, config);
    const RingMask mask = ring_mask_for(config);
    std::vector<std::complex<double>> evidence;
    evidence.reserve(mask.flat.size());
    for (auto [u, v] : mask.flat) evidence.push_back(spec.at(u, v));
    return evidence;
}

double l1_distance(std::span<const double> evidence,
                   std::span<const double> reference, double eta) {
    if (evidence.size() != reference.size())
        throw std::runtime_error("detect: evidence and reference length differ");
    double sum = 0.0;
    for (size_t i = 0; i < evidence.size(); ++i)
        sum += std::abs(evidence[i] - eta * reference[i]);
    return sum;
}

double l1_distance(std::span<const std::complex<double>> evidence,
                   std::span<const std::complex<double>> reference, double eta) {
    if (evidence.size() != reference.size())
        throw std::runtime_error("detect: evidence and reference length differ");
    double sum = 0.0;
    for (size_t i = 0; i < evidence.size(); ++i)
        sum += std::abs(evidence[i] - eta * reference[i]);
    return sum;
}

Matcher::Matcher(const KeySet& keyset, size_t n_keys)
    : keyset_(keyset),
      enrolled_(n_keys == 0 ? keyset.keys.size() : n_keys),
      mask_(ring_mask_for(keyset.config)) {
    if (enrolled_ > keyset.keys.size())
        throw std::runtime_error("detect: enrollment exceeds keyset");
    if (enrolled_ == 0) throw std::runtime_error("detect: empty enrollment");
    ring_refs_.reserve(enrolled_);
    noise_fields_.reserve(enrolled_);
    const WatermarkConfig& cfg = keyset.config;
    for (size_t k = 0; k < enrolled_; ++k) {
        const KeyPair& key = keyset.keys[k];
        ring_refs_.push_back(ring_reference_for(cfg, key, mask_));
        std::vector<Plane> fields;
        fields.reserve(cfg.noise_channels.size());
        for (int c : cfg.noise_channels)
            fields.push_back(
                sample_noise_field(noise_field_seed(key.noise.seed, c), cfg.size));
        noise_fields_.push_back(std::move(fields));
    }
}

MatchResult Matcher::identify(const Latent& latent) const {
    const WatermarkConfig& cfg = keyset_.config;
    if (latent.size != cfg.size)
        throw std::runtime_error("detect: latent size does not match keyset");
    const Plane rp = ring_plane(latent, cfg);

    std::vector<double> real_ev;
    std::vector<std::complex<double>> complex_ev;
    if (cfg.complex_ring_mode())
        complex_ev = extract_ring_evidence_complex(rp, cfg);
    else
        real_ev = extract_ring_evidence(rp, cfg);

    std::vector<Plane> noise_planes;
    noise_planes.reserve(cfg.noise_channels.size());
    for (int c : cfg.noise_channels) {
        if (c >= latent.channels)
            throw std::runtime_error("detect: noise channel beyond latent");
        noise_planes.push_back(latent.channel_plane(c));
    }

    MatchResult result;
    result.scores.reserve(enrolled_);
    for (size_t k = 0; k < enrolled_; ++k) {
        KeyScore score;
        score.key_index = keyset_.keys[k].ring.key_index;
        const RingReference& ref = ring_refs_[k];
        const double d_ring =
            ref.complex_mode
                ? l1_distance(complex_ev, ref.complex_values, cfg.eta)
                : l1_distance(real_ev, ref.real_values, cfg.eta);
        score.channel_distance[cfg.ring_channel] = d_ring;
        score.combined = keyset_.lambda.at(cfg.ring_channel) * d_ring;
        for (size_t ci = 0; ci < cfg.noise_channels.size(); ++ci) {
            const int c = cfg.noise_channels[ci];
            const Plane& field = noise_fields_[k][ci];
            const Plane& plane = noise_planes[ci];
            double d = 0.0;
            for (size_t i = 0; i < plane.data.size(); ++i)
                d += std::abs(plane.data[i] - field.data[i]);
            score.channel_distance[c] = d;
            score.combined = std::min(score.combined, keyset_.lambda.at(c) * d);
        }
        result.scores.push_back(std::move(score));
    }

    size_t best = 0;
    for (size_t k = 1; k < result.scores.size(); ++k)
        if (result.scores[k].combined < result.scores[best].combined) best = k;
    result.best_key_index = result.scores[best].key_index;
    result.best_score = result.scores[best].combined;
    return result;
}

namespace {

// Combined score of one key without any precomputed state.
double score_single_key(const Latent& latent, const KeyPair& key,
                        const KeySet& keyset, const RingMask& mask) {
    const WatermarkConfig& cfg = keyset.config;
    const Plane rp = ring_plane(latent, cfg);
    const RingReference ref = ring_reference_for(cfg, key, mask);
    double combined;
    if (ref.complex_mode) {
        auto ev = extract_ring_evidence_complex(rp, cfg);
        combined = keyset.lambda.at(cfg.ring_channel) *
                   l1_distance(ev, ref.complex_values, cfg.eta);
    } else {
        auto ev = extract_ring_evidence(rp, cfg);
        combined = keyset.lambda.at(cfg.ring_channel) *
                   l1_distance(ev, ref.real_values, cfg.eta);
    }
    for (int c : cfg.noise_channels) {
        if (c >= latent.channels)
            throw std::runtime_error("detect: noise channel beyond latent");
        const Plane plane = latent.channel_plane(c);
        const Plane field =
            sample_noise_field(noise_field_seed(key.noise.seed, c), cfg.size);
        double d = 0.0;
        for (size_t i = 0; i < plane.data.size(); ++i)
            d += std::abs(plane.data[i] - field.data[i]);
        combined = std::min(combined, keyset.lambda.at(c) * d);
    }
    return combined;
}

} // namespace

double Matcher::verify_score(const Latent& latent, uint64_t key_index) const {
    for (size_t k = 0; k < enrolled_; ++k)
        if (keyset_.keys[k].ring.key_index == key_index)
            return score_single_key(latent, keyset_.keys[k], keyset_, mask_);
    throw std::runtime_error("detect: key index not enrolled");
}

MatchResult identify(const Latent& latent, const KeySet& keyset) {
    return Matcher(keyset).identify(latent);
}

double verify_score(const Latent& latent, const KeyPair& key, const KeySet& keyset) {
    const RingMask mask = ring_mask_for(keyset.config);
    return score_single_key(latent, key, keyset, mask);
}

} // namespace ringid
