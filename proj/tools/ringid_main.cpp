#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ringid/attacks.hpp"
#include "ringid/detect.hpp"
#include "ringid/eval.hpp"
#include "ringid/imprint.hpp"
#include "ringid/keyset.hpp"
#include "ringid/latent.hpp"
#include "ringid/numfmt.hpp"
#include "ringid/patterns.hpp"
#include "ringid/rng.hpp"

namespace {

using nlohmann::json;

// Exit code contract: 0 success, 2 usage or configuration problems, 3 file
// I/O and format problems.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename F>
auto io_guard(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const std::exception& e) {
        throw IoError(e.what());
    }
}

json config_json(const ringid::WatermarkConfig& cfg) {
    return json{{"size", cfg.size},
                {"ring_channel", cfg.ring_channel},
                {"noise_channels", cfg.noise_channels},
                {"r_min", cfg.r_min},
                {"r_max", cfg.r_max},
                {"alpha", cfg.alpha},
                {"eta", cfg.eta},
                {"style", ringid::to_string(cfg.mask_style)},
                {"shift", cfg.enable_shift},
                {"lossless", cfg.enable_lossless},
                {"discretize", cfg.enable_discretize}};
}

void write_manifest(const std::string& path, const json& j) {
    io_guard([&] {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open manifest: " + path);
        out << j.dump(2) << '\n';
        if (!out) throw std::runtime_error("manifest write failed: " + path);
    });
}

// Shared config surface for keygen and bench.
struct ConfigOpts {
    int size = 64;
    int ring_channel = 3;
    std::vector<int> noise_channels = {0};
    bool no_noise = false;
    int r_min = 3;
    int r_max = 14;
    double alpha = 64.0;
    double eta = 0.85;
    std::string style = "rounder";
    bool no_shift = false;
    bool no_lossless = false;
    bool no_discretize = false;
    bool baseline = false;
};

void add_config_options(CLI::App* cmd, ConfigOpts& opts) {
    cmd->add_option("--size", opts.size, "latent side length (power of two)");
    cmd->add_option("--ring-channel", opts.ring_channel, "channel carrying the rings");
    cmd->add_option("--noise-channels", opts.noise_channels,
                    "channels carrying dense payload fields")
        ->delimiter(',');
    cmd->add_flag("--no-noise-channels", opts.no_noise, "disable payload channels");
    cmd->add_option("--r-min", opts.r_min, "innermost ring radius");
    cmd->add_option("--r-max", opts.r_max, "one past the outermost ring radius");
    cmd->add_option("--alpha", opts.alpha, "ring write amplitude");
    cmd->add_option("--eta", opts.eta, "write strength in (0, 1]");
    cmd->add_option("--style", opts.style, "ring rasterization: rounder or naive")
        ->check(CLI::IsMember({"rounder", "naive"}));
    cmd->add_flag("--no-shift", opts.no_shift, "skip the chessboard shift");
    cmd->add_flag("--no-lossless", opts.no_lossless,
                  "lossy off-center write, as the original scheme did");
    cmd->add_flag("--no-discretize", opts.no_discretize,
                  "continuous per-ring Gaussian values instead of bits");
    cmd->add_flag("--baseline", opts.baseline,
                  "start from the original single-channel scheme preset");
}

ringid::WatermarkConfig build_config(const ConfigOpts& opts) {
    ringid::WatermarkConfig cfg;
    if (opts.baseline) cfg = ringid::treering_baseline_config();
    cfg.size = opts.size;
    cfg.ring_channel = opts.ring_channel;
    if (!opts.baseline) cfg.noise_channels = opts.noise_channels;
    if (opts.no_noise) cfg.noise_channels.clear();
    cfg.r_min = opts.r_min;
    cfg.r_max = opts.r_max;
    cfg.alpha = opts.alpha;
    if (!opts.baseline) cfg.eta = opts.eta;
    if (!opts.baseline || opts.style != "rounder")
        cfg.mask_style = ringid::mask_style_from_string(opts.style);
    if (opts.no_shift) cfg.enable_shift = false;
    if (opts.no_lossless) cfg.enable_lossless = false;
    if (opts.no_discretize) cfg.enable_discretize = false;
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

std::vector<ringid::NamedAttack> parse_bench_attacks(const std::string& list) {
    // Comma separates grid entries; '+' chains ops inside one entry.
    std::vector<ringid::NamedAttack> grid;
    size_t start = 0;
    while (start <= list.size()) {
        size_t pos = list.find(',', start);
        std::string token = list.substr(
            start, pos == std::string::npos ? std::string::npos : pos - start);
        if (token.empty()) throw UsageError("empty attack grid entry");
        std::string expanded = token;
        std::replace(expanded.begin(), expanded.end(), '+', ',');
        try {
            grid.push_back({token, ringid::parse_attack_list(expanded)});
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return grid;
}

int run_keygen(const ConfigOpts& copts, uint64_t n_keys, uint64_t seed,
               const std::string& out_path, const std::string& manifest_path) {
    const ringid::WatermarkConfig cfg = build_config(copts);
    ringid::KeySet keyset;
    try {
        keyset = ringid::build_keyset(n_keys, cfg, seed);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    io_guard([&] { ringid::save_keyset_file(keyset, out_path); });
    std::cout << "wrote " << out_path << " keys=" << keyset.keys.size()
              << " rings=" << cfg.ring_count()
              << " lambda_ring=" << ringid::format_double(keyset.lambda.at(cfg.ring_channel))
              << '\n';
    if (!manifest_path.empty()) {
        json m{{"command", "keygen"},
               {"config", config_json(cfg)},
               {"keys", keyset.keys.size()},
               {"seed", seed},
               {"output", out_path}};
        write_manifest(manifest_path, m);
    }
    return 0;
}

int run_embed(const std::string& keyset_path, uint64_t key_index,
              const std::string& in_path, bool have_sample_seed,
              uint64_t sample_seed, int channels, const std::string& out_path,
              const std::string& manifest_path) {
    if (in_path.empty() == !have_sample_seed)
        throw UsageError("embed needs exactly one of -i/--input or --sample-seed");
    const ringid::KeySet keyset =
        io_guard([&] { return ringid::load_keyset_file(keyset_path); });

    const ringid::KeyPair* key = nullptr;
    for (const auto& k : keyset.keys)
        if (k.ring.key_index == key_index) {
            key = &k;
            break;
        }
    if (!key) throw UsageError("key index not present in keyset");

    ringid::Latent latent;
    if (!in_path.empty()) {
        latent = io_guard([&] { return ringid::load_latent_file(in_path); });
    } else {
        if (channels < 1) throw UsageError("channels must be >= 1");
        latent = ringid::sample_latent(channels, keyset.config.size, sample_seed);
    }

    ringid::Latent marked;
    try {
        marked = ringid::imprint(latent, *key, keyset.config);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    io_guard([&] { ringid::save_latent_file(marked, out_path); });
    std::cout << "wrote " << out_path << " key=" << key_index << '\n';
    if (!manifest_path.empty()) {
        json m{{"command", "embed"},
               {"keyset", keyset_path},
               {"key_index", key_index},
               {"output", out_path}};
        if (!in_path.empty())
            m["input"] = in_path;
        else
            m["sample_seed"] = sample_seed;
        write_manifest(manifest_path, m);
    }
    return 0;
}

int run_identify(const std::string& keyset_path, const std::string& in_path,
                 const std::string& attacks, double sigma_inv,
                 uint64_t attack_seed, int top, const std::string& json_path) {
    const ringid::KeySet keyset =
        io_guard([&] { return ringid::load_keyset_file(keyset_path); });
    ringid::Latent latent = io_guard([&] { return ringid::load_latent_file(in_path); });

    std::vector<ringid::AttackSpec> specs;
    try {
        specs = ringid::parse_attack_list(attacks);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    if (sigma_inv < 0) throw UsageError("sigma-inv must be >= 0");
    if (!specs.empty() || sigma_inv > 0)
        latent = ringid::apply_channel(latent, {specs, sigma_inv, attack_seed});

    ringid::MatchResult result;
    try {
        result = ringid::identify(latent, keyset);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }

    std::cout << "best_key " << result.best_key_index << '\n';
    std::cout << "best_score " << ringid::format_double(result.best_score) << '\n';
    if (top > 1) {
        std::vector<const ringid::KeyScore*> order;
        order.reserve(result.scores.size());
        for (const auto& s : result.scores) order.push_back(&s);
        std::sort(order.begin(), order.end(),
                  [](const auto* a, const auto* b) { return a->combined < b->combined; });
        const size_t limit = std::min<size_t>(top, order.size());
        for (size_t i = 0; i < limit; ++i) {
            std::cout << "rank " << i + 1 << " key " << order[i]->key_index
                      << " score " << ringid::format_double(order[i]->combined);
            for (const auto& [c, d] : order[i]->channel_distance)
                std::cout << " ch" << c << ' ' << ringid::format_double(d);
            std::cout << '\n';
        }
    }
    if (!json_path.empty()) {
        json scores = json::array();
        for (const auto& s : result.scores) {
            json channels;
            for (const auto& [c, d] : s.channel_distance)
                channels[std::to_string(c)] = d;
            scores.push_back({{"key", s.key_index},
                              {"combined", s.combined},
                              {"channels", channels}});
        }
        write_manifest(json_path, json{{"command", "identify"},
                                       {"best_key", result.best_key_index},
                                       {"best_score", result.best_score},
                                       {"scores", scores}});
    }
    return 0;
}

int run_bench(const ConfigOpts& copts, const std::vector<uint64_t>& key_counts,
              const std::string& attacks, int trials, double sigma_inv,
              uint64_t seed, const std::string& out_path,
              const std::string& manifest_path) {
    const ringid::WatermarkConfig cfg = build_config(copts);
    if (key_counts.empty()) throw UsageError("need at least one population size");
    if (trials <= 0) throw UsageError("trials must be positive");
    if (sigma_inv < 0) throw UsageError("sigma-inv must be >= 0");
    const auto grid = parse_bench_attacks(attacks);

    std::vector<ringid::BenchRow> rows;
    try {
        rows = ringid::run_bench_grid(cfg, key_counts, grid, trials, sigma_inv, seed);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }

    if (out_path.empty()) {
        ringid::write_bench_csv(std::cout, rows);
    } else {
        io_guard([&] {
            std::ofstream out(out_path, std::ios::binary);
            if (!out) throw std::runtime_error("cannot open csv: " + out_path);
            ringid::write_bench_csv(out, rows);
        });
        std::cout << "wrote " << out_path << " rows=" << rows.size() << '\n';
    }
    if (!manifest_path.empty()) {
        json names = json::array();
        for (const auto& a : grid) names.push_back(a.name);
        write_manifest(manifest_path, json{{"command", "bench"},
                                           {"config", config_json(cfg)},
                                           {"keys", key_counts},
                                           {"attacks", names},
                                           {"trials", trials},
                                           {"sigma_inv", sigma_inv},
                                           {"seed", seed},
                                           {"rows", rows.size()},
                                           {"output", out_path}});
    }
    return 0;
}

int run_prove_shift(int n, int trials, uint64_t seed, const std::string& csv_path,
                    const std::string& json_path) {
    if (trials <= 0) throw UsageError("trials must be positive");
    if (n < 8 || (n & (n - 1)) != 0) throw UsageError("n must be a power of two >= 8");
    const int r_max = std::min(14, n / 2 - 1);

    const ringid::PixelMask mask =
        ringid::build_ring_mask(3, r_max, n, ringid::MaskStyle::Rounder).combined();
    const int factor_trials =
        static_cast<int>((120000 + mask.count() - 1) / mask.count());
    const auto factor =
        ringid::shift_factor_experiment(n, mask, factor_trials, ringid::mix64(seed, 1));
    const double expected = std::sqrt(3.0) / 2.0;
    std::cout << "shift_factor ratio=" << ringid::format_double(factor.ratio)
              << " expected=" << ringid::format_double(expected)
              << " ci=" << ringid::format_double(factor.ci_halfwidth)
              << " samples=" << factor.samples
              << " per_pixel_unshifted=" << ringid::format_double(factor.unshifted_mean)
              << " per_pixel_shifted=" << ringid::format_double(factor.shifted_mean)
              << '\n';

    ringid::WatermarkConfig cfg = ringid::treering_baseline_config();
    cfg.size = n;
    cfg.r_max = r_max;
    const auto controls = ringid::pipeline_shift_experiment(
        cfg, trials, ringid::mix64(seed, 2), ringid::default_attack_grid(), 0.1);
    for (const auto& row : controls) {
        std::cout << "control attack=" << row.attack << " auc_null_unshifted="
                  << ringid::format_double(row.auc_unshifted_null)
                  << " auc_null_shifted=" << ringid::format_double(row.auc_shifted_null)
                  << " mean_w=" << ringid::format_double(row.mean_watermarked_dist)
                  << " mean_null=" << ringid::format_double(row.mean_null_dist) << '\n';
    }

    const int standalone_trials = std::min(trials, 500);
    json standalone = json::array();
    for (double noise : {1.0, 2.0, 3.0}) {
        const auto attack =
            ringid::parse_attack_list("noise=" + ringid::format_double(noise));
        const auto zero = ringid::standalone_watermark_experiment(
            ringid::ReferenceMode::ZeroL1, standalone_trials, attack, 0.1,
            ringid::mix64(seed, 3));
        const auto gauss = ringid::standalone_watermark_experiment(
            ringid::ReferenceMode::Gaussian, standalone_trials, attack, 0.1,
            ringid::mix64(seed, 3));
        std::cout << "standalone noise=" << ringid::format_double(noise)
                  << " auc_zero=" << ringid::format_double(zero.auc)
                  << " auc_gauss=" << ringid::format_double(gauss.auc)
                  << " tpr1_zero=" << ringid::format_double(zero.tpr_at_1pct_fpr)
                  << " tpr1_gauss=" << ringid::format_double(gauss.tpr_at_1pct_fpr)
                  << '\n';
        standalone.push_back({{"noise", noise},
                              {"auc_zero", zero.auc},
                              {"auc_gauss", gauss.auc}});
    }

    if (!csv_path.empty()) {
        io_guard([&] {
            std::ofstream out(csv_path, std::ios::binary);
            if (!out) throw std::runtime_error("cannot open csv: " + csv_path);
            out << "attack,auc_null_unshifted,auc_null_shifted,mean_watermarked,"
                   "mean_null\n";
            for (const auto& row : controls)
                out << row.attack << ',' << ringid::format_double(row.auc_unshifted_null)
                    << ',' << ringid::format_double(row.auc_shifted_null) << ','
                    << ringid::format_double(row.mean_watermarked_dist) << ','
                    << ringid::format_double(row.mean_null_dist) << '\n';
            if (!out) throw std::runtime_error("csv write failed: " + csv_path);
        });
    }
    if (!json_path.empty()) {
        json controls_json = json::array();
        for (const auto& row : controls)
            controls_json.push_back({{"attack", row.attack},
                                     {"auc_null_unshifted", row.auc_unshifted_null},
                                     {"auc_null_shifted", row.auc_shifted_null},
                                     {"mean_watermarked", row.mean_watermarked_dist},
                                     {"mean_null", row.mean_null_dist}});
        write_manifest(json_path,
                       json{{"command", "prove-shift"},
                            {"n", n},
                            {"trials", trials},
                            {"seed", seed},
                            {"shift_factor",
                             {{"ratio", factor.ratio},
                              {"expected", expected},
                              {"ci", factor.ci_halfwidth},
                              {"samples", factor.samples}}},
                            {"controls", controls_json},
                            {"standalone", standalone}});
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"frequency-domain ring watermarks for latent tensors"};
    app.require_subcommand(1);

    // keygen
    auto* keygen = app.add_subcommand("keygen", "build and save a keyset");
    ConfigOpts kg_cfg;
    add_config_options(keygen, kg_cfg);
    uint64_t kg_keys = 0;
    uint64_t kg_seed = 0;
    std::string kg_out, kg_manifest;
    keygen->add_option("--keys", kg_keys, "number of keys")->required();
    keygen->add_option("--seed", kg_seed, "build seed");
    keygen->add_option("-o,--out", kg_out, "output keyset path")->required();
    keygen->add_option("--manifest", kg_manifest, "write a JSON run manifest");

    // embed
    auto* embed = app.add_subcommand("embed", "imprint a key into a latent");
    std::string em_keyset, em_in, em_out, em_manifest;
    uint64_t em_key_index = 0, em_sample_seed = 0;
    int em_channels = 4;
    bool em_have_seed = false;
    embed->add_option("--keyset", em_keyset, "keyset path")->required();
    embed->add_option("--key-index", em_key_index, "ring key index")->required();
    embed->add_option("-i,--input", em_in, "input latent (RLT1)");
    embed->add_option("--sample-seed", em_sample_seed, "sample a fresh latent")
        ->each([&](const std::string&) { em_have_seed = true; });
    embed->add_option("--channels", em_channels, "channels when sampling");
    embed->add_option("-o,--out", em_out, "output latent path")->required();
    embed->add_option("--manifest", em_manifest, "write a JSON run manifest");

    // identify
    auto* identify = app.add_subcommand("identify", "match a latent against a keyset");
    std::string id_keyset, id_in, id_attacks = "clean", id_json;
    double id_sigma = 0.0;
    uint64_t id_attack_seed = 0;
    int id_top = 1;
    identify->add_option("--keyset", id_keyset, "keyset path")->required();
    identify->add_option("-i,--input", id_in, "latent to identify")->required();
    identify->add_option("--attacks", id_attacks,
                         "attack sequence applied before matching");
    identify->add_option("--sigma-inv", id_sigma, "inversion noise std");
    identify->add_option("--attack-seed", id_attack_seed, "channel seed");
    identify->add_option("--top", id_top, "print the k best keys");
    identify->add_option("--json", id_json, "write results as JSON");

    // bench
    auto* bench = app.add_subcommand("bench", "identification accuracy grid");
    ConfigOpts be_cfg;
    add_config_options(bench, be_cfg);
    std::vector<uint64_t> be_keys{32, 128, 2048};
    std::string be_attacks =
        "clean,rotate=75,cs=0.75,blur=8,noise=0.1,quant=16,bright=2";
    int be_trials = 100;
    double be_sigma = 0.0;
    uint64_t be_seed = 0;
    std::string be_out, be_manifest;
    bench->add_option("--keys", be_keys, "population sizes")->delimiter(',');
    bench->add_option("--attacks", be_attacks,
                      "comma-separated grid entries; use + to chain ops");
    bench->add_option("--trials", be_trials, "trials per row");
    bench->add_option("--sigma-inv", be_sigma, "inversion noise std");
    bench->add_option("--seed", be_seed, "master seed");
    bench->add_option("-o,--out", be_out, "CSV output path (default stdout)");
    bench->add_option("--manifest", be_manifest, "write a JSON run manifest");

    // prove-shift
    auto* prove = app.add_subcommand("prove-shift",
                                     "verify the projection distribution shift");
    int ps_n = 64, ps_trials = 2000;
    uint64_t ps_seed = 0;
    std::string ps_csv, ps_json;
    prove->add_option("--n", ps_n, "plane size");
    prove->add_option("--trials", ps_trials, "trials per control row");
    prove->add_option("--seed", ps_seed, "seed");
    prove->add_option("--csv", ps_csv, "write control rows as CSV");
    prove->add_option("--json", ps_json, "write the full report as JSON");

    try {
        app.parse(argc, argv);
        if (keygen->parsed())
            return run_keygen(kg_cfg, kg_keys, kg_seed, kg_out, kg_manifest);
        if (embed->parsed())
            return run_embed(em_keyset, em_key_index, em_in, em_have_seed,
                             em_sample_seed, em_channels, em_out, em_manifest);
        if (identify->parsed())
            return run_identify(id_keyset, id_in, id_attacks, id_sigma,
                                id_attack_seed, id_top, id_json);
        if (bench->parsed())
            return run_bench(be_cfg, be_keys, be_attacks, be_trials, be_sigma,
                             be_seed, be_out, be_manifest);
        if (prove->parsed())
            return run_prove_shift(ps_n, ps_trials, ps_seed, ps_csv, ps_json);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
