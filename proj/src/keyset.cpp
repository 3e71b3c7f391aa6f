#include "ringid/keyset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ringid/detect.hpp"
#include "ringid/numfmt.hpp"
#include "ringid/rng.hpp"

namespace ringid {

namespace {

constexpr uint64_t kKeySelectTag = 0x4B53454CULL;
constexpr uint64_t kKeySeedTag = 0x4B534544ULL;
constexpr uint64_t kLambdaTag = 0x4C414D42ULL;
constexpr int kLambdaTrials = 256;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Canonical key used only for lambda calibration: all-ones bits and a payload
// seed derived from the build seed. Null distances to any concrete key have
// the same distribution, so the choice only fixes the normalization.
KeyPair lambda_reference_key(const WatermarkConfig& config, uint64_t build_seed) {
    KeyPair key;
    key.ring.bits.assign(static_cast<size_t>(config.ring_count()), 1);
    key.ring.alpha = config.alpha;
    key.ring.key_index = 0;
    key.noise.seed = mix64(build_seed, kLambdaTag);
    key.noise.channels = config.noise_channels;
    return key;
}

std::map<int, double> calibrate_lambda(const WatermarkConfig& config,
                                       uint64_t build_seed) {
    const uint64_t base = mix64(build_seed, kLambdaTag + 1);
    const RingMask mask = ring_mask_for(config);
    const KeyPair ref_key = lambda_reference_key(config, build_seed);
    const RingReference ref = ring_reference_for(config, ref_key, mask);

    double ring_total = 0.0;
    for (int t = 0; t < kLambdaTrials; ++t) {
        Plane noise = sample_noise_field(mix64(base, 2 * t), config.size);
        if (ref.complex_mode) {
            auto ev = extract_ring_evidence_complex(noise, config);
            ring_total += l1_distance(ev, ref.complex_values, config.eta);
        } else {
            auto ev = extract_ring_evidence(noise, config);
            ring_total += l1_distance(ev, ref.real_values, config.eta);
        }
    }

    std::map<int, double> lambda;
    lambda[config.ring_channel] = kLambdaTrials / ring_total;

    for (int c : config.noise_channels) {
        Plane field = sample_noise_field(noise_field_seed(ref_key.noise.seed, c),
                                         config.size);
        double total = 0.0;
        for (int t = 0; t < kLambdaTrials; ++t) {
            Plane noise = sample_noise_field(
                mix64(base, 1000003ULL * (c + 1) + t), config.size);
            double d = 0.0;
            for (size_t i = 0; i < noise.data.size(); ++i)
                d += std::abs(noise.data[i] - field.data[i]);
            total += d;
        }
        lambda[c] = kLambdaTrials / total;
    }
    return lambda;
}

// Floyd's sampling: n distinct values in [0, capacity) using exactly n draws.
std::vector<uint64_t> sample_distinct_indices(uint64_t n, uint64_t capacity,
                                              uint64_t seed) {
    Xoshiro256pp rng(seed);
    std::set<uint64_t> chosen;
    for (uint64_t j = capacity - n; j < capacity; ++j) {
        uint64_t t = rng.next_below(j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    return {chosen.begin(), chosen.end()};
}

} // namespace

uint64_t WatermarkConfig::capacity() const {
    const int rings = ring_count();
    if (rings >= 62) return 1ULL << 62;
    return 1ULL << rings;
}

void WatermarkConfig::validate() const {
    if (!is_pow2(size) || size < 8)
        throw std::runtime_error("config: size must be a power of two >= 8");
    if (ring_channel < 0) throw std::runtime_error("config: bad ring channel");
    for (int c : noise_channels) {
        if (c < 0) throw std::runtime_error("config: bad noise channel");
        if (c == ring_channel)
            throw std::runtime_error("config: ring channel cannot carry noise payload");
    }
    std::set<int> uniq(noise_channels.begin(), noise_channels.end());
    if (uniq.size() != noise_channels.size())
        throw std::runtime_error("config: duplicate noise channel");
    if (r_min < 0 || r_max <= r_min || r_max > size / 2 - 1)
        throw std::runtime_error("config: bad ring radius range");
    if (!(alpha > 0.0)) throw std::runtime_error("config: alpha must be positive");
    if (!(eta > 0.0) || eta > 1.0)
        throw std::runtime_error("config: eta must be in (0, 1]");
}

WatermarkConfig treering_baseline_config() {
    WatermarkConfig cfg;
    cfg.noise_channels.clear();
    cfg.eta = 1.0;
    cfg.mask_style = MaskStyle::Naive;
    cfg.enable_shift = false;
    cfg.enable_lossless = false;
    cfg.enable_discretize = false;
    return cfg;
}

RingMask ring_mask_for(const WatermarkConfig& config) {
    // Alignment with the spectrum center is part of the exact-write
    // construction: rounder annuli are drawn around the rotation center and
    // symmetrized so the real-only write survives the spatial roundtrip.
    // Naive bands keep their original off-center placement, and dropping the
    // lossless write also drops the alignment, so either choice falls back to
    // the off-center unsymmetrized mask.
    const int n = config.size;
    if (config.enable_lossless && config.mask_style == MaskStyle::Rounder)
        return build_ring_mask(config.r_min, config.r_max, n, config.mask_style);
    return build_ring_mask_at(config.r_min, config.r_max, n, config.mask_style,
                              n / 2 - 1, n / 2, false);
}

RingReference ring_reference_for(const WatermarkConfig& config, const KeyPair& key,
                                 const RingMask& mask) {
    RingReference ref;
    if (config.complex_ring_mode()) {
        ref.complex_mode = true;
        const double sigma_component = config.size / std::sqrt(2.0);
        auto ring_values = sample_complex_ring_values(
            baseline_pattern_seed(key.noise.seed), mask.ring_count(), sigma_component);
        ref.complex_values.reserve(mask.flat.size());
        for (int ring : mask.ring_of) ref.complex_values.push_back(ring_values[ring]);
        return ref;
    }
    if (config.enable_discretize) {
        RingKey ring_key = key.ring;
        ring_key.alpha = config.alpha;
        ref.real_values = encode_ring_key(ring_key, mask).values;
        return ref;
    }
    ref.real_values =
        sample_treering_pattern(ring_pattern_seed(key.noise.seed), mask, config.alpha)
            .values;
    return ref;
}

KeySet build_keyset(uint64_t n_keys, const WatermarkConfig& config, uint64_t seed) {
    config.validate();
    if (n_keys == 0) throw std::runtime_error("keyset: need at least one key");
    const uint64_t cap = config.capacity();
    if (n_keys > cap)
        throw std::runtime_error("keyset: requested keys exceed ring capacity");

    std::vector<uint64_t> indices;
    if (n_keys == cap) {
        indices.resize(n_keys);
        for (uint64_t i = 0; i < n_keys; ++i) indices[i] = i;
    } else {
        indices = sample_distinct_indices(n_keys, cap, mix64(seed, kKeySelectTag));
    }

    KeySet ks;
    ks.config = config;
    ks.build_seed = seed;
    ks.keys.reserve(indices.size());
    const uint64_t key_seed_base = mix64(seed, kKeySeedTag);
    for (uint64_t index : indices) {
        KeyPair key;
        key.ring.bits = key_index_to_bits(index, config.ring_count());
        key.ring.alpha = config.alpha;
        key.ring.key_index = index;
        key.noise.seed = mix64(key_seed_base, index);
        key.noise.channels = config.noise_channels;
        ks.keys.push_back(std::move(key));
    }
    ks.lambda = calibrate_lambda(config, seed);
    return ks;
}

namespace {

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    if (s.empty()) return parts;
    size_t start = 0;
    for (;;) {
        size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

} // namespace

void save_keyset(const KeySet& keyset, std::ostream& out) {
    const WatermarkConfig& cfg = keyset.config;
    out << "RID1\n";
    out << "version=1\n";
    out << "N=" << cfg.size << '\n';
    out << "rings=" << cfg.r_min << ".." << cfg.r_max << '\n';
    out << "alpha=" << format_double(cfg.alpha) << '\n';
    out << "eta=" << format_double(cfg.eta) << '\n';
    out << "ring_channel=" << cfg.ring_channel << '\n';
    out << "noise_channels=" << join_ints(cfg.noise_channels) << '\n';
    out << "style=" << to_string(cfg.mask_style) << '\n';
    std::string flags;
    if (cfg.enable_shift) flags += "shift";
    if (cfg.enable_lossless) flags += flags.empty() ? "lossless" : ",lossless";
    if (cfg.enable_discretize) flags += flags.empty() ? "discretize" : ",discretize";
    out << "flags=" << flags << '\n';
    std::string lambda;
    for (const auto& [c, v] : keyset.lambda) {
        if (!lambda.empty()) lambda += ',';
        lambda += std::to_string(c) + ':' + format_double(v);
    }
    out << "lambda=" << lambda << '\n';
    out << "seed=" << keyset.build_seed << '\n';
    out << "keys=" << keyset.keys.size() << '\n';
    for (const auto& key : keyset.keys) {
        out << "key " << key.ring.key_index << " bits=";
        for (uint8_t b : key.ring.bits) out << (b ? '1' : '0');
        out << " noise_seed=" << key.noise.seed << '\n';
    }
    if (!out) throw std::runtime_error("keyset: write failed");
}

KeySet load_keyset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "RID1")
        throw std::runtime_error("keyset: bad magic");
    if (!std::getline(in, line) || line.rfind("version=", 0) != 0)
        throw std::runtime_error("keyset: missing version");
    if (line.substr(8) != "1")
        throw std::runtime_error("keyset: unsupported version: " + line.substr(8));

    KeySet ks;
    WatermarkConfig cfg;
    cfg.noise_channels.clear();
    uint64_t declared_keys = 0;
    bool have_keys_line = false;
    ks.lambda.clear();

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("key ", 0) == 0) {
            // key <index> bits=<binary> noise_seed=<u64>
            std::istringstream ls(line.substr(4));
            std::string index_str, bits_field, seed_field;
            if (!(ls >> index_str >> bits_field >> seed_field))
                throw std::runtime_error("keyset: malformed key record");
            if (bits_field.rfind("bits=", 0) != 0 ||
                seed_field.rfind("noise_seed=", 0) != 0)
                throw std::runtime_error("keyset: malformed key record");
            KeyPair key;
            key.ring.key_index = parse_u64(index_str);
            const std::string bits = bits_field.substr(5);
            for (char b : bits) {
                if (b != '0' && b != '1')
                    throw std::runtime_error("keyset: bad bit character");
                key.ring.bits.push_back(b == '1' ? 1 : 0);
            }
            key.noise.seed = parse_u64(seed_field.substr(11));
            ks.keys.push_back(std::move(key));
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("keyset: malformed line: " + line);
        const std::string field = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (field == "N") {
            cfg.size = static_cast<int>(parse_u64(value));
        } else if (field == "rings") {
            const size_t dots = value.find("..");
            if (dots == std::string::npos)
                throw std::runtime_error("keyset: bad ring range");
            cfg.r_min = static_cast<int>(parse_u64(value.substr(0, dots)));
            cfg.r_max = static_cast<int>(parse_u64(value.substr(dots + 2)));
        } else if (field == "alpha") {
            cfg.alpha = parse_double(value);
        } else if (field == "eta") {
            cfg.eta = parse_double(value);
        } else if (field == "ring_channel") {
            cfg.ring_channel = static_cast<int>(parse_u64(value));
        } else if (field == "noise_channels") {
            for (const auto& part : split(value, ','))
                cfg.noise_channels.push_back(static_cast<int>(parse_u64(part)));
        } else if (field == "style") {
            cfg.mask_style = mask_style_from_string(value);
        } else if (field == "flags") {
            cfg.enable_shift = cfg.enable_lossless = cfg.enable_discretize = false;
            for (const auto& flag : split(value, ',')) {
                if (flag == "shift") cfg.enable_shift = true;
                else if (flag == "lossless") cfg.enable_lossless = true;
                else if (flag == "discretize") cfg.enable_discretize = true;
                else throw std::runtime_error("keyset: unknown flag: " + flag);
            }
        } else if (field == "lambda") {
            for (const auto& part : split(value, ',')) {
                const size_t colon = part.find(':');
                if (colon == std::string::npos)
                    throw std::runtime_error("keyset: bad lambda entry");
                ks.lambda[static_cast<int>(parse_u64(part.substr(0, colon)))] =
                    parse_double(part.substr(colon + 1));
            }
        } else if (field == "seed") {
            ks.build_seed = parse_u64(value);
        } else if (field == "keys") {
            declared_keys = parse_u64(value);
            have_keys_line = true;
        } else {
            throw std::runtime_error("keyset: unknown field: " + field);
        }
    }

    cfg.validate();
    ks.config = cfg;
    if (!have_keys_line || declared_keys != ks.keys.size())
        throw std::runtime_error("keyset: key count mismatch");
    if (ks.lambda.find(cfg.ring_channel) == ks.lambda.end())
        throw std::runtime_error("keyset: missing ring channel lambda");
    for (int c : cfg.noise_channels)
        if (ks.lambda.find(c) == ks.lambda.end())
            throw std::runtime_error("keyset: missing noise channel lambda");
    for (auto& key : ks.keys) {
        if (static_cast<int>(key.ring.bits.size()) != cfg.ring_count())
            throw std::runtime_error("keyset: key bit length mismatch");
        if (key.ring.key_index != bits_to_key_index(key.ring.bits))
            throw std::runtime_error("keyset: key index does not match bits");
        key.ring.alpha = cfg.alpha;
        key.noise.channels = cfg.noise_channels;
    }
    return ks;
}

void save_keyset_file(const KeySet& keyset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("keyset: cannot open for write: " + path);
    save_keyset(keyset, out);
}

KeySet load_keyset_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("keyset: cannot open for read: " + path);
    return load_keyset(in);
}

} // namespace ringid
