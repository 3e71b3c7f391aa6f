#include "ringid/imprint.hpp"

#include <cmath>
#include <stdexcept>

#include "ringid/rng.hpp"

namespace ringid {

namespace {

void check_latent(const Latent& latent, const WatermarkConfig& config) {
    if (latent.size != config.size)
        throw std::runtime_error("imprint: latent size does not match config");
    if (config.ring_channel >= latent.channels)
        throw std::runtime_error("imprint: ring channel beyond latent");
    for (int c : config.noise_channels)
        if (c >= latent.channels)
            throw std::runtime_error("imprint: noise channel beyond latent");
}

} // namespace

Latent imprint(const Latent& latent, const KeyPair& key,
               const WatermarkConfig& config) {
    config.validate();
    check_latent(latent, config);
    if (config.enable_discretize &&
        static_cast<int>(key.ring.bits.size()) != config.ring_count())
        throw std::runtime_error("imprint: key bit count does not match rings");

    const RingMask mask = ring_mask_for(config);
    const RingReference ref = ring_reference_for(config, key, mask);

    Latent out = latent;
    Spectrum spec = dft2(out.channel_plane(config.ring_channel));
    for (size_t i = 0; i < mask.flat.size(); ++i) {
        const auto [u, v] = mask.flat[i];
        // Writing sign * value here equals writing value into the chessboard
        // modulated spectrum and modulating back: untouched coefficients pick
        // up the sign twice.
        const double sign =
            config.enable_shift && ((u + v) & 1) ? -1.0 : 1.0;
        const std::complex<double> value =
            ref.complex_mode ? config.eta * ref.complex_values[i]
                             : std::complex<double>(config.eta * ref.real_values[i], 0.0);
        spec.at(u, v) = sign * value;
    }
    out.set_channel(config.ring_channel, idft2_real(spec));

    for (int c : config.noise_channels)
        out.set_channel(c, sample_noise_field(noise_field_seed(key.noise.seed, c),
                                              config.size));
    return out;
}

Latent imprint_iid_noise(const Latent& latent, const PixelMask& mask,
                         uint64_t seed, int channel) {
    if (channel < 0 || channel >= latent.channels)
        throw std::runtime_error("imprint: channel out of range");
    if (mask.size() != latent.size)
        throw std::runtime_error("imprint: mask size does not match latent");

    Spectrum spec = dft2(latent.channel_plane(channel));
    GaussianSampler g(seed);
    const double sigma_component = latent.size / std::sqrt(2.0);
    for (auto [u, v] : mask.pixels()) {
        const double re = sigma_component * g.next();
        const double im = sigma_component * g.next();
        spec.at(u, v) = {re, im};
    }
    Latent out = latent;
    out.set_channel(channel, idft2_real(spec));
    return out;
}

} // namespace ringid
