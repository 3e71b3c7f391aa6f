#include <doctest.h>

#include <cmath>
#include <complex>

#include "ringid/detect.hpp"
#include "ringid/imprint.hpp"
#include "ringid/rng.hpp"

using namespace ringid;

namespace {

KeyPair make_key(const WatermarkConfig& cfg, uint64_t index, uint64_t seed) {
    KeyPair key;
    key.ring.bits = key_index_to_bits(index, cfg.ring_count());
    key.ring.alpha = cfg.alpha;
    key.ring.key_index = index;
    key.noise.seed = seed;
    key.noise.channels = cfg.noise_channels;
    return key;
}

} // namespace

TEST_CASE("aligned lossless writes survive the spatial round-trip exactly") {
    for (bool shift : {true, false}) {
        WatermarkConfig cfg;
        cfg.enable_shift = shift;
        const RingMask mask = ring_mask_for(cfg);
        for (uint64_t trial = 0; trial < 8; ++trial) {
            const Latent latent = sample_latent(4, 64, 900 + trial);
            const KeyPair key = make_key(cfg, 37 * trial % 2048, 40 + trial);
            const Latent marked = imprint(latent, key, cfg);
            const RingReference ref = ring_reference_for(cfg, key, mask);
            const auto evidence = extract_ring_evidence(marked, cfg);
            REQUIRE(evidence.size() == ref.real_values.size());
            for (size_t i = 0; i < evidence.size(); ++i)
                CHECK(std::abs(evidence[i] - cfg.eta * ref.real_values[i]) <
                      1e-6 * cfg.alpha);
        }
    }
}

TEST_CASE("off-center writes land on the conjugate-symmetric projection") {
    // Naive rings keep the original off-center mask even with the lossless
    // write; dropping the lossless flag reverts to complex ring values on
    // both parts. Either way the roundtrip projects the written spectrum.
    WatermarkConfig naive_rings;
    naive_rings.mask_style = MaskStyle::Naive;
    WatermarkConfig lossy_rings;
    lossy_rings.enable_lossless = false;
    for (const WatermarkConfig& cfg : {naive_rings, lossy_rings}) {
        const RingMask mask = ring_mask_for(cfg);
        const Latent latent = sample_latent(4, 64, 1101);
        const KeyPair key = make_key(cfg, 321, 58);
        const Latent marked = imprint(latent, key, cfg);
        const RingReference ref = ring_reference_for(cfg, key, mask);
        CHECK(ref.complex_mode == !cfg.enable_lossless);

        Spectrum written = dft2(latent.channel_plane(cfg.ring_channel));
        for (size_t i = 0; i < mask.flat.size(); ++i) {
            const auto [u, v] = mask.flat[i];
            const double sign = cfg.enable_shift && (u + v) % 2 ? -1.0 : 1.0;
            written.at(u, v) =
                ref.complex_mode
                    ? sign * cfg.eta * ref.complex_values[i]
                    : std::complex<double>(sign * cfg.eta * ref.real_values[i], 0.0);
        }
        const Spectrum oracle = conjugate_symmetric_part(written);
        const Spectrum actual = dft2(marked.channel_plane(cfg.ring_channel));
        for (size_t i = 0; i < oracle.data.size(); ++i)
            CHECK(std::abs(actual.data[i] - oracle.data[i]) < 1e-8);
    }

    // the projection averages each off-center coefficient with an untouched
    // partner, so the exact lossless recovery must genuinely fail here
    const RingMask mask = ring_mask_for(naive_rings);
    const Latent latent = sample_latent(4, 64, 1101);
    const KeyPair key = make_key(naive_rings, 321, 58);
    const Latent marked = imprint(latent, key, naive_rings);
    const RingReference ref = ring_reference_for(naive_rings, key, mask);
    const auto evidence = extract_ring_evidence(marked, naive_rings);
    double worst = 0.0;
    for (size_t i = 0; i < evidence.size(); ++i)
        worst = std::max(
            worst, std::abs(evidence[i] - naive_rings.eta * ref.real_values[i]));
    CHECK(worst > 1.0);
}

TEST_CASE("masked coefficients carry the signed scaled pattern, others persist") {
    WatermarkConfig cfg;  // shift + lossless + discretize
    const RingMask mask = ring_mask_for(cfg);
    const PixelMask combined = mask.combined();
    const Latent latent = sample_latent(4, 64, 1001);
    const KeyPair key = make_key(cfg, 1234, 55);
    const Latent marked = imprint(latent, key, cfg);
    const RingReference ref = ring_reference_for(cfg, key, mask);

    const Spectrum before = dft2(latent.channel_plane(cfg.ring_channel));
    const Spectrum after = dft2(marked.channel_plane(cfg.ring_channel));
    for (size_t i = 0; i < mask.flat.size(); ++i) {
        const auto [u, v] = mask.flat[i];
        const double sign = (u + v) % 2 ? -1.0 : 1.0;
        const std::complex<double> expect(sign * cfg.eta * ref.real_values[i], 0.0);
        CHECK(std::abs(after.at(u, v) - expect) < 1e-9 * cfg.alpha);
    }
    for (int u = 0; u < 64; ++u)
        for (int v = 0; v < 64; ++v)
            if (!combined.contains(u, v))
                CHECK(std::abs(after.at(u, v) - before.at(u, v)) < 1e-9);
}

TEST_CASE("lossy writes land on the conjugate-symmetric projection") {
    WatermarkConfig cfg = treering_baseline_config();
    const RingMask mask = ring_mask_for(cfg);
    const Latent latent = sample_latent(4, 64, 2002);
    const KeyPair key = make_key(cfg, 77, 66);
    const Latent marked = imprint(latent, key, cfg);
    const RingReference ref = ring_reference_for(cfg, key, mask);
    REQUIRE(ref.complex_mode);

    Spectrum written = dft2(latent.channel_plane(cfg.ring_channel));
    for (size_t i = 0; i < mask.flat.size(); ++i) {
        const auto [u, v] = mask.flat[i];
        written.at(u, v) = cfg.eta * ref.complex_values[i];
    }
    const Spectrum oracle = conjugate_symmetric_part(written);
    const Spectrum actual = dft2(marked.channel_plane(cfg.ring_channel));
    for (size_t i = 0; i < oracle.data.size(); ++i)
        CHECK(std::abs(actual.data[i] - oracle.data[i]) < 1e-8);
}

TEST_CASE("noise channels are replaced by the key's exact payload fields") {
    WatermarkConfig cfg;
    cfg.noise_channels = {0, 1};
    const Latent latent = sample_latent(4, 64, 3003);
    const KeyPair key = make_key(cfg, 9, 77);
    const Latent marked = imprint(latent, key, cfg);
    for (int c : cfg.noise_channels) {
        const Plane expect = sample_noise_field(noise_field_seed(77, c), 64);
        CHECK(marked.channel_plane(c).data == expect.data);
    }
    // channel 2 carries neither rings nor payload: bitwise untouched
    CHECK(marked.channel_plane(2).data == latent.channel_plane(2).data);
}

TEST_CASE("imprint validates latent shape and key length") {
    WatermarkConfig cfg;
    const KeyPair key = make_key(cfg, 3, 1);
    CHECK_THROWS(imprint(sample_latent(4, 32, 1), key, cfg));  // wrong size
    CHECK_THROWS(imprint(sample_latent(2, 64, 1), key, cfg));  // no channel 3
    KeyPair short_key = key;
    short_key.ring.bits.pop_back();
    CHECK_THROWS(imprint(sample_latent(4, 64, 1), short_key, cfg));
}

TEST_CASE("standalone spectral noise writes are deterministic and contained") {
    const PixelMask mask = build_ring_mask(3, 14, 64, MaskStyle::Rounder).combined();
    const Latent latent = sample_latent(1, 64, 4004);
    const Latent a = imprint_iid_noise(latent, mask, 12, 0);
    const Latent b = imprint_iid_noise(latent, mask, 12, 0);
    CHECK(a.data == b.data);
    const Latent c = imprint_iid_noise(latent, mask, 13, 0);
    CHECK(a.data != c.data);

    // multi-channel: only the chosen channel changes
    const Latent wide = sample_latent(3, 64, 4005);
    const Latent marked = imprint_iid_noise(wide, mask, 12, 1);
    CHECK(marked.channel_plane(0).data == wide.channel_plane(0).data);
    CHECK(marked.channel_plane(2).data == wide.channel_plane(2).data);
    CHECK(marked.channel_plane(1).data != wide.channel_plane(1).data);

    CHECK_THROWS(imprint_iid_noise(wide, mask, 12, 3));
    CHECK_THROWS(imprint_iid_noise(wide, PixelMask::full(32), 12, 0));
}

TEST_CASE("standalone writes shrink masked energy by the projection half") {
    // The lossy round-trip halves masked energy relative to the injected
    // values; the surviving coefficients are the projection of the writes.
    const PixelMask mask = build_ring_mask(3, 14, 64, MaskStyle::Rounder).combined();
    double injected = 0.0, survived = 0.0;
    for (uint64_t t = 0; t < 60; ++t) {
        const Latent latent = sample_latent(1, 64, 7000 + t);
        const uint64_t seed = 9000 + t;
        const Latent marked = imprint_iid_noise(latent, mask, seed, 0);
        // replay the generator to know exactly what was written
        Spectrum spec = dft2(latent.channel_plane(0));
        GaussianSampler g(seed);
        const double sigma = 64.0 / std::sqrt(2.0);
        for (auto [u, v] : mask.pixels()) {
            const double re = sigma * g.next();
            const double im = sigma * g.next();
            spec.at(u, v) = {re, im};
            injected += re * re + im * im;
        }
        const Spectrum after = dft2(marked.channel_plane(0));
        survived += energy(after, mask);
    }
    CHECK(survived / injected == doctest::Approx(0.5).epsilon(0.05));
}
