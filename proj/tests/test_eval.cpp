#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <vector>

#include "ringid/eval.hpp"
#include "ringid/rng.hpp"

using namespace ringid;

TEST_CASE("auc computes the exact pairwise statistic") {
    CHECK(auc({1.0, 2.0, 3.0}, {2.0, 3.0, 4.0}) == 7.0 / 9.0);
    CHECK(auc({1.0, 2.0}, {3.0, 4.0}) == 1.0);     // lower = watermarked
    CHECK(auc({3.0, 4.0}, {1.0, 2.0}) == 0.0);
    CHECK(auc({5.0, 5.0}, {5.0, 5.0}) == 0.5);     // all ties
    CHECK(auc({1.0, 2.0, 2.0, 3.0, 5.0}, {2.0, 3.0, 3.0, 4.0}) == 13.0 / 20.0);
    CHECK_THROWS(auc({}, {1.0}));
    CHECK_THROWS(auc({1.0}, {}));
}

TEST_CASE("tpr_at_fpr uses the order-statistic threshold with strict wins") {
    std::vector<double> scores(100);
    for (int i = 0; i < 100; ++i) scores[i] = i + 1;  // 1..100, distinct
    // identical distributions: threshold is the 2nd smallest null (2),
    // exactly one watermarked score sits strictly below it
    CHECK(tpr_at_fpr(scores, scores, 0.01) == 0.01);
    CHECK(tpr_at_fpr(scores, scores, 1.0) == 1.0);  // k >= |nulls| degenerates

    std::vector<double> low(50), high(200);
    for (int i = 0; i < 50; ++i) low[i] = i * 0.001;
    for (int i = 0; i < 200; ++i) high[i] = 10.0 + i;
    CHECK(tpr_at_fpr(low, high, 0.01) == 1.0);  // fully separated
    CHECK(tpr_at_fpr(high, low, 0.01) == 0.0);
    CHECK_THROWS(tpr_at_fpr(low, high, -0.5));
}

TEST_CASE("roc curve endpoints, monotonicity, and trapezoid-MW agreement") {
    const std::vector<double> w{1.0, 2.0, 2.0, 3.0, 5.0};
    const std::vector<double> n{2.0, 3.0, 3.0, 4.0};
    const RocCurve curve = roc_curve(w, n);
    CHECK(curve.points.front() == std::make_pair(0.0, 0.0));
    CHECK(curve.points.back() == std::make_pair(1.0, 1.0));
    for (size_t i = 1; i < curve.points.size(); ++i) {
        CHECK(curve.points[i].first >= curve.points[i - 1].first);
        CHECK(curve.points[i].second >= curve.points[i - 1].second);
    }
    CHECK(curve.auc == doctest::Approx(auc(w, n)).epsilon(1e-12));

    // larger randomized cross-check, ties included
    GaussianSampler g(808);
    std::vector<double> rw(73), rn(61);
    for (auto& v : rw) v = std::round(g.next() * 4.0);
    for (auto& v : rn) v = std::round(g.next() * 4.0 + 1.0);
    const RocCurve rc = roc_curve(rw, rn);
    CHECK(rc.auc == doctest::Approx(auc(rw, rn)).epsilon(1e-12));
    CHECK(rc.tpr_at_1pct_fpr == tpr_at_fpr(rw, rn, 0.01));
}

TEST_CASE("named attack grids parse and keep their order") {
    const auto grid = default_attack_grid();
    REQUIRE(grid.size() == 7);
    CHECK(grid[0].name == "clean");
    CHECK(grid[0].attacks.empty());
    CHECK(grid[1].name == "rotate=75");
    CHECK(grid[2].name == "cs=0.75");
    CHECK(grid[3].name == "blur=8");
    CHECK(grid[4].name == "noise=0.1");
    CHECK(grid[5].name == "quant=16");
    CHECK(grid[6].name == "bright=2");
}

TEST_CASE("a tiny clean identification bench is perfect and calibrated") {
    WatermarkConfig cfg;
    const KeySet ks = build_keyset(8, cfg, 91);
    const Matcher matcher(ks);
    const BenchRow row =
        identification_bench(matcher, ks, make_named_attack("clean"), 0.0, 12, 17);
    CHECK(row.attack == "clean");
    CHECK(row.n_keys == 8);
    CHECK(row.trials == 12);
    CHECK(row.accuracy == 1.0);
    CHECK(row.mean_match_dist < 1e-3);
    // wrong keys see a watermarked latent: their ring distance runs a little
    // under the pure-noise calibration, and the min over channels pulls lower
    CHECK(row.mean_null_dist > 0.6);
    CHECK(row.mean_null_dist < 1.05);
    CHECK_THROWS(identification_bench(matcher, ks, make_named_attack("clean"),
                                      0.0, 0, 17));
}

TEST_CASE("bench results do not depend on the worker count") {
    WatermarkConfig cfg;
    const KeySet ks = build_keyset(4, cfg, 92);
    const Matcher matcher(ks);
    const NamedAttack attack = make_named_attack("noise=0.3");

    const char* saved = std::getenv("RINGID_THREADS");
    const std::string saved_value = saved ? saved : "";

    setenv("RINGID_THREADS", "1", 1);
    const BenchRow serial = identification_bench(matcher, ks, attack, 0.05, 10, 5);
    setenv("RINGID_THREADS", "3", 1);
    const BenchRow threaded = identification_bench(matcher, ks, attack, 0.05, 10, 5);
    if (saved)
        setenv("RINGID_THREADS", saved_value.c_str(), 1);
    else
        unsetenv("RINGID_THREADS");

    CHECK(serial.accuracy == threaded.accuracy);
    CHECK(serial.mean_match_dist == threaded.mean_match_dist);
    CHECK(serial.mean_null_dist == threaded.mean_null_dist);
}

TEST_CASE("the bench grid is population-major with one shared keyset") {
    WatermarkConfig cfg;
    const std::vector<NamedAttack> attacks{make_named_attack("clean"),
                                           make_named_attack("noise=0.2")};
    const auto rows = run_bench_grid(cfg, {4, 8}, attacks, 4, 0.0, 1234);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].n_keys == 4);
    CHECK(rows[0].attack == "clean");
    CHECK(rows[1].n_keys == 4);
    CHECK(rows[1].attack == "noise=0.2");
    CHECK(rows[2].n_keys == 8);
    CHECK(rows[2].attack == "clean");
    CHECK(rows[3].n_keys == 8);
    for (const auto& r : rows) {
        CHECK(r.seed == 1234);
        CHECK(r.trials == 4);
    }
    CHECK_THROWS(run_bench_grid(cfg, {}, attacks, 4, 0.0, 1));
    CHECK_THROWS(run_bench_grid(cfg, {4}, {}, 4, 0.0, 1));
}

TEST_CASE("bench csv serialization is exact and stable") {
    BenchRow a;
    a.attack = "clean";
    a.n_keys = 32;
    a.trials = 100;
    a.accuracy = 1.0;
    a.mean_match_dist = 0.5;
    a.mean_null_dist = 1.25;
    a.seed = 7;
    BenchRow b;
    b.attack = "rotate=75";
    b.n_keys = 2048;
    b.trials = 100;
    b.accuracy = 0.975;
    b.mean_match_dist = 0.1875;
    b.mean_null_dist = 1.0009765625;
    b.seed = 7;
    std::ostringstream out;
    write_bench_csv(out, {a, b});
    CHECK(out.str() ==
          "attack,n_keys,trials,accuracy,mean_match_dist,mean_null_dist,seed\n"
          "clean,32,100,1,0.5,1.25,7\n"
          "rotate=75,2048,100,0.975,0.1875,1.0009765625,7\n");
}

TEST_CASE("the projection shift ratio lands on sqrt(3)/2") {
    const PixelMask mask = build_ring_mask(3, 14, 64, MaskStyle::Rounder).combined();
    const ShiftFactorResult res = shift_factor_experiment(64, mask, 300, 2718);
    CHECK(res.samples == static_cast<long>(mask.count()) * 300);
    CHECK(std::abs(res.ratio - std::sqrt(3.0) / 2.0) < 0.01);
    CHECK(res.ci_halfwidth > 0.0);
    CHECK(res.ci_halfwidth < 0.01);
    // per-pixel means: N*sqrt(pi/2) unshifted, scaled by the factor shifted
    const double base = 64.0 * std::sqrt(std::numbers::pi / 2.0);
    CHECK(res.unshifted_mean == doctest::Approx(base).epsilon(0.01));
    CHECK(res.shifted_mean ==
          doctest::Approx(base * std::sqrt(3.0) / 2.0).epsilon(0.01));
    CHECK_THROWS(shift_factor_experiment(64, mask, 0, 1));
    CHECK_THROWS(shift_factor_experiment(64, PixelMask(), 10, 1));
}

TEST_CASE("scaling null distances down never raises the pipeline auc") {
    WatermarkConfig cfg;
    const std::vector<NamedAttack> attacks{make_named_attack("clean"),
                                           make_named_attack("noise=3")};
    const auto rows = pipeline_shift_experiment(cfg, 60, 99, attacks, 0.0);
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        CHECK(row.auc_unshifted_null >= row.auc_shifted_null);
        CHECK(row.auc_unshifted_null >= 0.0);
        CHECK(row.auc_unshifted_null <= 1.0);
        CHECK(row.mean_watermarked_dist > 0.0);
        CHECK(row.mean_null_dist > row.mean_watermarked_dist);
    }
    CHECK(rows[0].attack == "clean");
    CHECK(rows[0].auc_unshifted_null == 1.0);
    // under heavy noise the distributions overlap, so the shift must bite
    CHECK(rows[1].auc_unshifted_null > rows[1].auc_shifted_null);
}

TEST_CASE("standalone detection: zero-reference beats fresh Gaussian references") {
    const auto noise1 = parse_attack_list("noise=1");
    const RocCurve zero =
        standalone_watermark_experiment(ReferenceMode::ZeroL1, 200, noise1, 0.0, 31);
    const RocCurve gauss = standalone_watermark_experiment(ReferenceMode::Gaussian,
                                                           200, noise1, 0.0, 31);
    const RocCurve sq =
        standalone_watermark_experiment(ReferenceMode::ZeroL2, 200, noise1, 0.0, 31);
    CHECK(zero.auc > 0.9);
    CHECK(gauss.auc > 0.8);
    CHECK(zero.auc >= gauss.auc - 0.02);
    CHECK(sq.auc > 0.85);
    CHECK(zero.points.back() == std::make_pair(1.0, 1.0));
}

TEST_CASE("standalone detection degrades with noise severity") {
    const RocCurve a = standalone_watermark_experiment(
        ReferenceMode::ZeroL1, 200, parse_attack_list("noise=1"), 0.0, 77);
    const RocCurve b = standalone_watermark_experiment(
        ReferenceMode::ZeroL1, 200, parse_attack_list("noise=2"), 0.0, 77);
    const RocCurve c = standalone_watermark_experiment(
        ReferenceMode::ZeroL1, 200, parse_attack_list("noise=3"), 0.0, 77);
    CHECK(a.auc >= b.auc - 0.02);
    CHECK(b.auc >= c.auc - 0.02);
    CHECK(a.auc > c.auc);
}

TEST_CASE("the lossy baseline write keeps half the injected ring energy") {
    const EnergyRatioResult res = baseline_energy_halving_experiment(200, 555);
    CHECK(res.ratio == doctest::Approx(0.5).epsilon(0.06));
    CHECK(res.samples > 0);
}

TEST_CASE("masked coefficients settle at half the unmasked variance") {
    const VarianceSplitResult res = projection_variance_experiment(64, 30, 666);
    CHECK(res.masked_variance ==
          doctest::Approx(64.0 * 64.0 / 2.0).epsilon(0.05));
    CHECK(res.unmasked_variance == doctest::Approx(64.0 * 64.0).epsilon(0.04));
    CHECK(res.masked_samples == 30l * static_cast<long>(
        build_ring_mask(3, 14, 64, MaskStyle::Rounder).combined().count()));
}
