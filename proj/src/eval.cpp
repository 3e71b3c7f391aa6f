#include "ringid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "ringid/imprint.hpp"
#include "ringid/numfmt.hpp"
#include "ringid/parallel.hpp"
#include "ringid/rng.hpp"

namespace ringid {

namespace {

int latent_channels_for(const WatermarkConfig& config) {
    int needed = config.ring_channel;
    for (int c : config.noise_channels) needed = std::max(needed, c);
    return std::max(4, needed + 1);
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

} // namespace

double auc(const std::vector<double>& watermarked, const std::vector<double>& nulls) {
    if (watermarked.empty() || nulls.empty())
        throw std::runtime_error("eval: auc needs both score sets");
    std::vector<double> sorted_nulls = nulls;
    std::sort(sorted_nulls.begin(), sorted_nulls.end());
    double wins = 0.0;
    for (double w : watermarked) {
        const auto lo =
            std::lower_bound(sorted_nulls.begin(), sorted_nulls.end(), w);
        const auto hi = std::upper_bound(lo, sorted_nulls.end(), w);
        const double greater = static_cast<double>(sorted_nulls.end() - hi);
        const double ties = static_cast<double>(hi - lo);
        wins += greater + 0.5 * ties;
    }
    return wins /
           (static_cast<double>(watermarked.size()) * static_cast<double>(nulls.size()));
}

double tpr_at_fpr(const std::vector<double>& watermarked,
                  const std::vector<double>& nulls, double target_fpr) {
    if (watermarked.empty() || nulls.empty())
        throw std::runtime_error("eval: tpr_at_fpr needs both score sets");
    if (target_fpr < 0.0) throw std::runtime_error("eval: negative fpr target");
    const size_t k = static_cast<size_t>(
        std::floor(target_fpr * static_cast<double>(nulls.size())));
    if (k >= nulls.size()) return 1.0;
    std::vector<double> sorted_nulls = nulls;
    std::sort(sorted_nulls.begin(), sorted_nulls.end());
    const double threshold = sorted_nulls[k];
    size_t hits = 0;
    for (double w : watermarked)
        if (w < threshold) ++hits;
    return static_cast<double>(hits) / static_cast<double>(watermarked.size());
}

RocCurve roc_curve(const std::vector<double>& watermarked,
                   const std::vector<double>& nulls) {
    if (watermarked.empty() || nulls.empty())
        throw std::runtime_error("eval: roc needs both score sets");
    std::vector<double> w = watermarked, n = nulls;
    std::sort(w.begin(), w.end());
    std::sort(n.begin(), n.end());

    std::vector<double> thresholds;
    thresholds.reserve(w.size() + n.size());
    std::merge(w.begin(), w.end(), n.begin(), n.end(),
               std::back_inserter(thresholds));
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                     thresholds.end());

    RocCurve curve;
    curve.points.reserve(thresholds.size() + 2);
    const double wn = static_cast<double>(w.size());
    const double nn = static_cast<double>(n.size());
    // Classify "watermarked" when score < t; sweep t through every distinct
    // score and beyond the maximum so the curve ends at (1, 1).
    for (double t : thresholds) {
        const double tpr =
            static_cast<double>(std::lower_bound(w.begin(), w.end(), t) - w.begin()) /
            wn;
        const double fpr =
            static_cast<double>(std::lower_bound(n.begin(), n.end(), t) - n.begin()) /
            nn;
        curve.points.emplace_back(fpr, tpr);
    }
    curve.points.emplace_back(1.0, 1.0);
    if (curve.points.front() != std::make_pair(0.0, 0.0))
        curve.points.insert(curve.points.begin(), {0.0, 0.0});

    double area = 0.0;
    for (size_t i = 1; i < curve.points.size(); ++i) {
        const auto& [x0, y0] = curve.points[i - 1];
        const auto& [x1, y1] = curve.points[i];
        area += (x1 - x0) * (y0 + y1) * 0.5;
    }
    curve.auc = area;
    curve.tpr_at_1pct_fpr = tpr_at_fpr(watermarked, nulls, 0.01);
    return curve;
}

NamedAttack make_named_attack(const std::string& list) {
    return NamedAttack{list, parse_attack_list(list)};
}

std::vector<NamedAttack> default_attack_grid() {
    return {make_named_attack("clean"),     make_named_attack("rotate=75"),
            make_named_attack("cs=0.75"),   make_named_attack("blur=8"),
            make_named_attack("noise=0.1"), make_named_attack("quant=16"),
            make_named_attack("bright=2")};
}

BenchRow identification_bench(const Matcher& matcher, const KeySet& keyset,
                              const NamedAttack& attack,
                              double inversion_noise_std, int trials,
                              uint64_t seed) {
    if (trials <= 0) throw std::runtime_error("eval: trials must be positive");
    const WatermarkConfig& cfg = keyset.config;
    const size_t enrolled = matcher.enrolled();
    const int channels = latent_channels_for(cfg);

    struct Trial {
        bool correct = false;
        double match_dist = 0.0;
        double null_dist = 0.0;
    };
    std::vector<Trial> results(static_cast<size_t>(trials));

    parallel_for(trials, [&](int t) {
        const uint64_t ts = mix64(seed, static_cast<uint64_t>(t));
        const Latent latent = sample_latent(channels, cfg.size, mix64(ts, 1));
        Xoshiro256pp pick(mix64(ts, 2));
        const size_t key_pos = pick.next_below(enrolled);
        const KeyPair& key = keyset.keys[key_pos];
        const Latent marked = imprint(latent, key, cfg);
        ChannelModel channel{attack.attacks, inversion_noise_std, mix64(ts, 3)};
        const Latent observed = apply_channel(marked, channel);
        const MatchResult match = matcher.identify(observed);

        Trial& out = results[static_cast<size_t>(t)];
        out.correct = match.best_key_index == key.ring.key_index;
        double null_sum = 0.0;
        for (const KeyScore& s : match.scores) {
            if (s.key_index == key.ring.key_index)
                out.match_dist = s.combined;
            else
                null_sum += s.combined;
        }
        out.null_dist =
            enrolled > 1 ? null_sum / static_cast<double>(enrolled - 1) : 0.0;
    });

    BenchRow row;
    row.attack = attack.name;
    row.n_keys = enrolled;
    row.trials = trials;
    row.seed = seed;
    long correct = 0;
    double match_sum = 0.0, null_sum = 0.0;
    for (const Trial& t : results) {
        correct += t.correct ? 1 : 0;
        match_sum += t.match_dist;
        null_sum += t.null_dist;
    }
    row.accuracy = static_cast<double>(correct) / trials;
    row.mean_match_dist = match_sum / trials;
    row.mean_null_dist = null_sum / trials;
    return row;
}

std::vector<BenchRow> run_bench_grid(const WatermarkConfig& config,
                                     const std::vector<uint64_t>& key_counts,
                                     const std::vector<NamedAttack>& attacks,
                                     int trials, double inversion_noise_std,
                                     uint64_t master_seed) {
    if (key_counts.empty()) throw std::runtime_error("eval: empty key grid");
    if (attacks.empty()) throw std::runtime_error("eval: empty attack grid");
    const uint64_t max_keys =
        *std::max_element(key_counts.begin(), key_counts.end());
    const KeySet keyset =
        build_keyset(max_keys, config, mix64(master_seed, 0x4B5345ULL));

    std::vector<BenchRow> rows;
    rows.reserve(key_counts.size() * attacks.size());
    for (uint64_t n_keys : key_counts) {
        const Matcher matcher(keyset, static_cast<size_t>(n_keys));
        for (size_t ai = 0; ai < attacks.size(); ++ai) {
            const uint64_t row_seed = mix64(mix64(master_seed, n_keys), ai);
            BenchRow row = identification_bench(matcher, keyset, attacks[ai],
                                                inversion_noise_std, trials,
                                                row_seed);
            row.seed = master_seed;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
    out << "attack,n_keys,trials,accuracy,mean_match_dist,mean_null_dist,seed\n";
    for (const BenchRow& r : rows) {
        out << r.attack << ',' << r.n_keys << ',' << r.trials << ','
            << format_double(r.accuracy) << ',' << format_double(r.mean_match_dist)
            << ',' << format_double(r.mean_null_dist) << ',' << r.seed << '\n';
    }
    if (!out) throw std::runtime_error("eval: csv write failed");
}

ShiftFactorResult shift_factor_experiment(int n, const PixelMask& mask,
                                          int trials, uint64_t seed) {
    if (trials <= 0) throw std::runtime_error("eval: trials must be positive");
    if (mask.count() == 0) throw std::runtime_error("eval: empty mask");

    struct Sums {
        double sh = 0.0, sh2 = 0.0, un = 0.0, un2 = 0.0;
    };
    std::vector<Sums> per_trial(static_cast<size_t>(trials));
    const double sigma = n / std::sqrt(2.0);  // per component, variance n^2/2

    parallel_for(trials, [&](int t) {
        GaussianSampler g(mix64(seed, static_cast<uint64_t>(t)));
        Sums& s = per_trial[static_cast<size_t>(t)];
        for (size_t i = 0; i < mask.count(); ++i) {
            const std::complex<double> z(sigma * g.next(), sigma * g.next());
            const std::complex<double> x(sigma * g.next(), sigma * g.next());
            const std::complex<double> partner(sigma * g.next(), sigma * g.next());
            // The projected coefficient blends the write with its reflection
            // partner, halving the complex variance.
            const std::complex<double> projected = 0.5 * (x + std::conj(partner));
            const double d_un = std::abs(x - z);
            const double d_sh = std::abs(projected - z);
            s.un += d_un;
            s.un2 += d_un * d_un;
            s.sh += d_sh;
            s.sh2 += d_sh * d_sh;
        }
    });

    double sh = 0.0, sh2 = 0.0, un = 0.0, un2 = 0.0;
    for (const Sums& s : per_trial) {
        sh += s.sh;
        sh2 += s.sh2;
        un += s.un;
        un2 += s.un2;
    }
    const double k = static_cast<double>(trials) * static_cast<double>(mask.count());
    const double m_sh = sh / k;
    const double m_un = un / k;
    const double v_sh = sh2 / k - m_sh * m_sh;
    const double v_un = un2 / k - m_un * m_un;

    ShiftFactorResult res;
    res.samples = static_cast<long>(k);
    res.shifted_mean = m_sh;
    res.unshifted_mean = m_un;
    res.ratio = m_sh / m_un;
    res.ci_halfwidth = 1.96 * res.ratio *
                       std::sqrt(v_sh / (m_sh * m_sh * k) + v_un / (m_un * m_un * k));
    return res;
}

std::vector<ControlRow> pipeline_shift_experiment(
    const WatermarkConfig& config, int trials, uint64_t seed,
    const std::vector<NamedAttack>& attacks, double inversion_noise_std) {
    config.validate();
    if (trials <= 0) throw std::runtime_error("eval: trials must be positive");

    const RingMask mask = ring_mask_for(config);
    KeyPair key;
    Xoshiro256pp pick(mix64(seed, 0xC1));
    const uint64_t index = pick.next_below(config.capacity());
    key.ring.bits = key_index_to_bits(index, config.ring_count());
    key.ring.alpha = config.alpha;
    key.ring.key_index = index;
    key.noise.seed = mix64(seed, 0xC2);
    key.noise.channels = config.noise_channels;

    const RingReference ref = ring_reference_for(config, key, mask);
    std::vector<std::complex<double>> complex_ref;
    if (ref.complex_mode) {
        complex_ref = ref.complex_values;
    } else {
        complex_ref.reserve(ref.real_values.size());
        for (double v : ref.real_values) complex_ref.emplace_back(v, 0.0);
    }

    const int channels = latent_channels_for(config);
    const double pixels = static_cast<double>(mask.flat.size());
    const double shift = std::sqrt(3.0) / 2.0;

    std::vector<ControlRow> rows;
    rows.reserve(attacks.size());
    for (size_t ai = 0; ai < attacks.size(); ++ai) {
        const uint64_t attack_seed = mix64(seed, 1000 + ai);
        std::vector<double> d_w(static_cast<size_t>(trials));
        std::vector<double> d_n(static_cast<size_t>(trials));
        parallel_for(trials, [&](int t) {
            const uint64_t ts = mix64(attack_seed, static_cast<uint64_t>(t));
            const Latent latent = sample_latent(channels, config.size, mix64(ts, 1));
            const Latent marked = imprint(latent, key, config);
            ChannelModel channel{attacks[ai].attacks, inversion_noise_std,
                                 mix64(ts, 2)};
            const Latent observed = apply_channel(marked, channel);
            auto ev = extract_ring_evidence_complex(
                observed.channel_plane(config.ring_channel), config);
            d_w[static_cast<size_t>(t)] =
                l1_distance(ev, complex_ref, config.eta) / pixels;

            const Latent null_latent =
                sample_latent(channels, config.size, mix64(ts, 3));
            ChannelModel null_channel{attacks[ai].attacks, inversion_noise_std,
                                      mix64(ts, 4)};
            const Latent null_observed = apply_channel(null_latent, null_channel);
            auto null_ev = extract_ring_evidence_complex(
                null_observed.channel_plane(config.ring_channel), config);
            d_n[static_cast<size_t>(t)] =
                l1_distance(null_ev, complex_ref, config.eta) / pixels;
        });

        std::vector<double> d_n_shifted = d_n;
        for (double& v : d_n_shifted) v *= shift;

        ControlRow row;
        row.attack = attacks[ai].name;
        row.auc_unshifted_null = auc(d_w, d_n);
        row.auc_shifted_null = auc(d_w, d_n_shifted);
        row.mean_watermarked_dist = mean(d_w);
        row.mean_null_dist = mean(d_n);
        rows.push_back(std::move(row));
    }
    return rows;
}

RocCurve standalone_watermark_experiment(ReferenceMode mode, int trials,
                                         const std::vector<AttackSpec>& attacks,
                                         double inversion_noise_std,
                                         uint64_t seed) {
    if (trials <= 0) throw std::runtime_error("eval: trials must be positive");
    const int n = 64;
    const PixelMask mask = build_ring_mask(3, 14, n, MaskStyle::Rounder).combined();
    const double sigma = n / std::sqrt(2.0);

    auto score = [&](const Plane& plane, uint64_t ref_seed) {
        const Spectrum spec = dft2(plane);
        GaussianSampler g(ref_seed);
        double total = 0.0;
        for (auto [u, v] : mask.pixels()) {
            const std::complex<double> coeff = spec.at(u, v);
            switch (mode) {
                case ReferenceMode::Gaussian: {
                    const std::complex<double> z(sigma * g.next(), sigma * g.next());
                    total += std::abs(coeff - z);
                    break;
                }
                case ReferenceMode::ZeroL1:
                    total += std::abs(coeff);
                    break;
                case ReferenceMode::ZeroL2:
                    total += std::norm(coeff);
                    break;
            }
        }
        return total;
    };

    std::vector<double> wm(static_cast<size_t>(trials));
    std::vector<double> nulls(static_cast<size_t>(trials));
    parallel_for(trials, [&](int t) {
        const uint64_t ts = mix64(seed, static_cast<uint64_t>(t));
        Latent latent = sample_latent(1, n, mix64(ts, 1));
        latent = imprint_iid_noise(latent, mask, mix64(ts, 2), 0);
        ChannelModel channel{attacks, inversion_noise_std, mix64(ts, 3)};
        const Latent observed = apply_channel(latent, channel);
        wm[static_cast<size_t>(t)] = score(observed.channel_plane(0), mix64(ts, 4));

        const Latent null_latent = sample_latent(1, n, mix64(ts, 5));
        ChannelModel null_channel{attacks, inversion_noise_std, mix64(ts, 6)};
        const Latent null_observed = apply_channel(null_latent, null_channel);
        nulls[static_cast<size_t>(t)] =
            score(null_observed.channel_plane(0), mix64(ts, 7));
    });
    return roc_curve(wm, nulls);
}

EnergyRatioResult baseline_energy_halving_experiment(int trials, uint64_t seed) {
    if (trials <= 0) throw std::runtime_error("eval: trials must be positive");
    const WatermarkConfig config = treering_baseline_config();
    const RingMask mask = ring_mask_for(config);
    const int channels = latent_channels_for(config);

    std::vector<double> num(static_cast<size_t>(trials));
    std::vector<double> den(static_cast<size_t>(trials));
    parallel_for(trials, [&](int t) {
        const uint64_t ts = mix64(seed, static_cast<uint64_t>(t));
        KeyPair key;
        key.ring.bits.assign(static_cast<size_t>(config.ring_count()), 0);
        key.ring.alpha = config.alpha;
        key.noise.seed = mix64(ts, 7);
        const RingReference ref = ring_reference_for(config, key, mask);

        const Latent latent = sample_latent(channels, config.size, mix64(ts, 1));
        const Latent marked = imprint(latent, key, config);
        const Spectrum spec = dft2(marked.channel_plane(config.ring_channel));

        double written_energy = 0.0;
        for (const auto& z : ref.complex_values) written_energy += std::norm(z);
        double surviving = 0.0;
        for (auto [u, v] : mask.flat) surviving += std::norm(spec.at(u, v));
        num[static_cast<size_t>(t)] = surviving;
        den[static_cast<size_t>(t)] = written_energy;
    });

    double n_sum = 0.0, d_sum = 0.0;
    for (int t = 0; t < trials; ++t) {
        n_sum += num[static_cast<size_t>(t)];
        d_sum += den[static_cast<size_t>(t)];
    }
    EnergyRatioResult res;
    res.ratio = n_sum / d_sum;
    res.samples = static_cast<long>(trials) * static_cast<long>(mask.flat.size());
    return res;
}

VarianceSplitResult projection_variance_experiment(int n, int trials,
                                                   uint64_t seed) {
    if (trials <= 0) throw std::runtime_error("eval: trials must be positive");
    const PixelMask mask = build_ring_mask(3, 14, n, MaskStyle::Rounder).combined();

    struct Sums {
        double masked = 0.0, unmasked = 0.0;
    };
    std::vector<Sums> per_trial(static_cast<size_t>(trials));
    parallel_for(trials, [&](int t) {
        const uint64_t ts = mix64(seed, static_cast<uint64_t>(t));
        Latent latent = sample_latent(1, n, mix64(ts, 1));
        latent = imprint_iid_noise(latent, mask, mix64(ts, 2), 0);
        const Spectrum spec = dft2(latent.channel_plane(0));
        Sums& s = per_trial[static_cast<size_t>(t)];
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v) {
                const double e = std::norm(spec.at(u, v));
                if (mask.contains(u, v))
                    s.masked += e;
                else
                    s.unmasked += e;
            }
    });

    double masked = 0.0, unmasked = 0.0;
    for (const Sums& s : per_trial) {
        masked += s.masked;
        unmasked += s.unmasked;
    }
    VarianceSplitResult res;
    res.masked_samples = static_cast<long>(mask.count()) * trials;
    res.unmasked_samples =
        (static_cast<long>(n) * n - static_cast<long>(mask.count())) * trials;
    res.masked_variance = masked / static_cast<double>(res.masked_samples);
    res.unmasked_variance = unmasked / static_cast<double>(res.unmasked_samples);
    return res;
}

} // namespace ringid
