#include "ringid/attacks.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ringid/numfmt.hpp"
#include "ringid/rng.hpp"

namespace ringid {

namespace {

constexpr uint64_t kInversionNoiseTag = 0x494E56ULL;
constexpr long long kQuantizeIdentityLevels = 1LL << 24;

double bilinear_zero(const Plane& p, double r, double c) {
    const int r0 = static_cast<int>(std::floor(r));
    const int c0 = static_cast<int>(std::floor(c));
    const double fr = r - r0;
    const double fc = c - c0;
    double acc = 0.0;
    for (int dr = 0; dr <= 1; ++dr)
        for (int dc = 0; dc <= 1; ++dc) {
            const int rr = r0 + dr;
            const int cc = c0 + dc;
            if (rr < 0 || rr >= p.size || cc < 0 || cc >= p.size) continue;
            const double w = (dr ? fr : 1.0 - fr) * (dc ? fc : 1.0 - fc);
            acc += w * p.at(rr, cc);
        }
    return acc;
}

} // namespace

Latent rotate(const Latent& latent, double degrees) {
    if (degrees == 0.0) return latent;
    const int n = latent.size;
    const double rad = degrees * std::numbers::pi / 180.0;
    const double cs = std::cos(rad);
    const double sn = std::sin(rad);
    const double ctr = (n - 1) / 2.0;
    Latent out(latent.channels, n);
    for (int ch = 0; ch < latent.channels; ++ch) {
        const Plane src = latent.channel_plane(ch);
        Plane dst(n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                const double y = r - ctr;
                const double x = c - ctr;
                const double sx = cs * x + sn * y;
                const double sy = -sn * x + cs * y;
                dst.at(r, c) = bilinear_zero(src, sy + ctr, sx + ctr);
            }
        out.set_channel(ch, dst);
    }
    return out;
}

Latent crop_scale(const Latent& latent, double area_fraction, uint64_t seed) {
    if (!(area_fraction > 0.0) || area_fraction > 1.0)
        throw std::runtime_error("attacks: crop fraction must be in (0, 1]");
    if (area_fraction == 1.0) return latent;
    const int n = latent.size;
    int side = static_cast<int>(std::lround(n * std::sqrt(area_fraction)));
    side = std::max(1, std::min(side, n));
    Xoshiro256pp rng(seed);
    const int r0 = static_cast<int>(rng.next_below(n - side + 1));
    const int c0 = static_cast<int>(rng.next_below(n - side + 1));
    const double step = n > 1 ? static_cast<double>(side - 1) / (n - 1) : 0.0;
    Latent out(latent.channels, n);
    for (int ch = 0; ch < latent.channels; ++ch) {
        const Plane src = latent.channel_plane(ch);
        Plane dst(n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                dst.at(r, c) = bilinear_zero(src, r0 + r * step, c0 + c * step);
        out.set_channel(ch, dst);
    }
    return out;
}

Latent blur(const Latent& latent, int kernel) {
    if (kernel < 1) throw std::runtime_error("attacks: blur kernel must be >= 1");
    if (kernel == 1) return latent;
    const int n = latent.size;
    const int lo = -(kernel - 1) / 2;
    const int hi = lo + kernel - 1;
    const double norm = 1.0 / (static_cast<double>(kernel) * kernel);
    Latent out(latent.channels, n);
    for (int ch = 0; ch < latent.channels; ++ch) {
        const Plane src = latent.channel_plane(ch);
        Plane dst(n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                double acc = 0.0;
                for (int dr = lo; dr <= hi; ++dr) {
                    const int rr = r + dr;
                    if (rr < 0 || rr >= n) continue;
                    for (int dc = lo; dc <= hi; ++dc) {
                        const int cc = c + dc;
                        if (cc < 0 || cc >= n) continue;
                        acc += src.at(rr, cc);
                    }
                }
                dst.at(r, c) = acc * norm;
            }
        out.set_channel(ch, dst);
    }
    return out;
}

Latent add_noise(const Latent& latent, double std, uint64_t seed) {
    if (std < 0.0) throw std::runtime_error("attacks: noise std must be >= 0");
    if (std == 0.0) return latent;
    Latent out = latent;
    GaussianSampler g(seed);
    for (auto& v : out.data) v += std * g.next();
    return out;
}

Latent brightness(const Latent& latent, double factor) {
    if (!(factor > 0.0)) throw std::runtime_error("attacks: brightness must be > 0");
    if (factor == 1.0) return latent;
    Latent out = latent;
    for (auto& v : out.data) v *= factor;
    return out;
}

Latent quantize(const Latent& latent, long long levels) {
    if (levels < 2) throw std::runtime_error("attacks: need at least 2 levels");
    // Steps below roughly 5e-7 are beyond any precision this pipeline carries.
    if (levels >= kQuantizeIdentityLevels) return latent;
    const double lo = -4.0, hi = 4.0;
    const double step = (hi - lo) / static_cast<double>(levels);
    Latent out = latent;
    for (auto& v : out.data) {
        double idx = std::floor((std::min(std::max(v, lo), hi) - lo) / step);
        idx = std::min(idx, static_cast<double>(levels - 1));
        v = lo + (idx + 0.5) * step;
    }
    return out;
}

AttackSpec parse_attack(const std::string& token) {
    const size_t eq = token.find('=');
    if (eq == std::string::npos)
        throw std::runtime_error("attacks: expected name=value, got: " + token);
    const std::string name = token.substr(0, eq);
    const std::string value_str = token.substr(eq + 1);
    const double value = parse_double(value_str);

    AttackSpec spec;
    spec.value = value;
    if (name == "rotate") {
        spec.kind = AttackKind::Rotate;
    } else if (name == "cs") {
        spec.kind = AttackKind::CropScale;
        if (!(value > 0.0) || value > 1.0)
            throw std::runtime_error("attacks: cs fraction must be in (0, 1]");
    } else if (name == "blur") {
        spec.kind = AttackKind::Blur;
        if (value < 1.0 || value != std::floor(value))
            throw std::runtime_error("attacks: blur kernel must be an integer >= 1");
    } else if (name == "noise") {
        spec.kind = AttackKind::Noise;
        if (value < 0.0) throw std::runtime_error("attacks: noise std must be >= 0");
    } else if (name == "bright") {
        spec.kind = AttackKind::Brightness;
        if (!(value > 0.0))
            throw std::runtime_error("attacks: brightness must be > 0");
    } else if (name == "quant") {
        spec.kind = AttackKind::Quantize;
        if (value < 2.0 || value != std::floor(value))
            throw std::runtime_error("attacks: quant levels must be an integer >= 2");
    } else {
        throw std::runtime_error("attacks: unknown attack: " + name);
    }
    spec.label = name + "=" + format_double(value);
    return spec;
}

std::vector<AttackSpec> parse_attack_list(const std::string& list) {
    std::vector<AttackSpec> specs;
    size_t start = 0;
    while (start <= list.size()) {
        size_t pos = list.find(',', start);
        const std::string token = list.substr(
            start, pos == std::string::npos ? std::string::npos : pos - start);
        if (token.empty())
            throw std::runtime_error("attacks: empty token in attack list");
        if (token != "clean") specs.push_back(parse_attack(token));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return specs;
}

Latent apply_channel(const Latent& latent, const ChannelModel& model) {
    Latent out = latent;
    for (size_t i = 0; i < model.attacks.size(); ++i) {
        const AttackSpec& spec = model.attacks[i];
        const uint64_t op_seed = mix64(model.seed, i);
        switch (spec.kind) {
            case AttackKind::Rotate:
                out = rotate(out, spec.value);
                break;
            case AttackKind::CropScale:
                out = crop_scale(out, spec.value, op_seed);
                break;
            case AttackKind::Blur:
                out = blur(out, static_cast<int>(spec.value));
                break;
            case AttackKind::Noise:
                out = add_noise(out, spec.value, op_seed);
                break;
            case AttackKind::Brightness:
                out = brightness(out, spec.value);
                break;
            case AttackKind::Quantize:
                out = quantize(out, static_cast<long long>(spec.value));
                break;
        }
    }
    return add_noise(out, model.inversion_noise_std,
                     mix64(model.seed, kInversionNoiseTag));
}

} // namespace ringid
