#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ringid/latent.hpp"

namespace ringid {

// Latent-space stand-ins for the image-space distortions a detector faces.
// Each op has an identity parameter under which it returns its input exactly:
// rotate 0, crop_scale 1.0, blur 1, add_noise 0, brightness 1, and quantize
// with 2^24 or more levels.

// Rotate every channel about the plane center ((N-1)/2, (N-1)/2) by degrees,
// bilinear resampling, zero fill outside the source frame. 90 degree
// multiples are exact permutations.
Latent rotate(const Latent& latent, double degrees);

// Crop a random axis-aligned square window covering area_fraction of the
// plane (side = round(N * sqrt(area_fraction))), then rescale it back to
// N x N with align-corners bilinear interpolation. The window position is
// drawn from seed and shared by all channels.
Latent crop_scale(const Latent& latent, double area_fraction, uint64_t seed);

// Box blur with a k x k kernel, zero-padded at the borders, normalized by
// k^2. Even k uses window offsets -(k-1)/2 .. +k/2.
Latent blur(const Latent& latent, int kernel);

// Adds i.i.d. N(0, std^2) to every sample.
Latent add_noise(const Latent& latent, double std, uint64_t seed);

// Multiplies every sample by factor.
Latent brightness(const Latent& latent, double factor);

// Mid-rise uniform quantizer over [-4, 4] with the given number of levels;
// values outside the range clamp to the extreme cells.
Latent quantize(const Latent& latent, long long levels);

enum class AttackKind { Rotate, CropScale, Blur, Noise, Brightness, Quantize };

struct AttackSpec {
    AttackKind kind = AttackKind::Rotate;
    double value = 0.0;
    std::string label;  // canonical token, e.g. "rotate=75"
};

// Token grammar: rotate=<deg> | cs=<fraction> | blur=<k> | noise=<std> |
// bright=<factor> | quant=<levels>. A comma-separated list applies in order;
// the single token "clean" denotes the empty list.
AttackSpec parse_attack(const std::string& token);
std::vector<AttackSpec> parse_attack_list(const std::string& list);

// The full observation channel between embedding and detection: the attack
// sequence followed by additive inversion noise. Per-op seeds derive from the
// channel seed, so one seed pins the whole channel.
struct ChannelModel {
    std::vector<AttackSpec> attacks;
    double inversion_noise_std = 0.0;
    uint64_t seed = 0;
};

Latent apply_channel(const Latent& latent, const ChannelModel& model);

} // namespace ringid
