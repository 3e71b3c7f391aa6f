#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ringid/attacks.hpp"
#include "ringid/detect.hpp"
#include "ringid/keyset.hpp"

namespace ringid {

// Scores are distances: lower means "more watermarked". AUC is the exact
// Mann-Whitney statistic P(w < n) + P(w = n)/2 over all pairs.
double auc(const std::vector<double>& watermarked, const std::vector<double>& nulls);

// TPR at the largest threshold whose empirical FPR stays at or below target:
// with k = floor(target * |nulls|), the threshold is the (k+1)-th smallest
// null score and TPR counts watermarked scores strictly below it. k >= |nulls|
// degenerates to 1.
double tpr_at_fpr(const std::vector<double>& watermarked,
                  const std::vector<double>& nulls, double target_fpr = 0.01);

struct RocCurve {
    std::vector<std::pair<double, double>> points;  // (fpr, tpr), ascending
    double auc = 0.0;                                // trapezoid over points
    double tpr_at_1pct_fpr = 0.0;
};

RocCurve roc_curve(const std::vector<double>& watermarked,
                   const std::vector<double>& nulls);

// One row of the identification benchmark grid.
struct BenchRow {
    std::string attack;
    uint64_t n_keys = 0;
    int trials = 0;
    double accuracy = 0.0;
    double mean_match_dist = 0.0;
    double mean_null_dist = 0.0;
    uint64_t seed = 0;
};

// Named attack sequence for grid experiments.
struct NamedAttack {
    std::string name;
    std::vector<AttackSpec> attacks;
};

NamedAttack make_named_attack(const std::string& list);

// The standard seven-channel surrogate grid used by the benchmark default.
std::vector<NamedAttack> default_attack_grid();

// Runs trials of: sample latent, pick an enrolled key uniformly, imprint,
// push through the channel, identify against the enrolled population.
// mean_match_dist averages the true key's combined score, mean_null_dist the
// mean combined score of the other enrolled keys. Deterministic in seed and
// independent of RINGID_THREADS.
BenchRow identification_bench(const Matcher& matcher, const KeySet& keyset,
                              const NamedAttack& attack,
                              double inversion_noise_std, int trials,
                              uint64_t seed);

// Full grid: one keyset sized to the largest population, nested enrollments,
// rows ordered population-major then attack. All rows carry master_seed.
std::vector<BenchRow> run_bench_grid(const WatermarkConfig& config,
                                     const std::vector<uint64_t>& key_counts,
                                     const std::vector<NamedAttack>& attacks,
                                     int trials, double inversion_noise_std,
                                     uint64_t master_seed);

// Header: attack,n_keys,trials,accuracy,mean_match_dist,mean_null_dist,seed
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

// Direct Monte Carlo of the projection shift: per masked pixel, the L1
// distance of a complex Gaussian coefficient to an independent reference is
// compared before (variance N^2) and after (variance N^2/2) the real-part
// discard. The ratio of means converges to sqrt(3)/2.
struct ShiftFactorResult {
    double ratio = 0.0;
    double ci_halfwidth = 0.0;        // 95% normal-approximation interval
    double shifted_mean = 0.0;        // per-pixel mean L1, projected
    double unshifted_mean = 0.0;      // per-pixel mean L1, unprojected
    long samples = 0;
};

ShiftFactorResult shift_factor_experiment(int n, const PixelMask& mask,
                                          int trials, uint64_t seed);

// End-to-end control comparison per channel: watermarked-vs-null AUC with the
// null distances as measured (control 1) and with the null distances scaled
// by sqrt(3)/2 to model the projection shift (control 2).
struct ControlRow {
    std::string attack;
    double auc_unshifted_null = 0.0;  // control 1
    double auc_shifted_null = 0.0;    // control 2
    double mean_watermarked_dist = 0.0;  // L1 per masked pixel
    double mean_null_dist = 0.0;         // L1 per masked pixel
};

std::vector<ControlRow> pipeline_shift_experiment(
    const WatermarkConfig& config, int trials, uint64_t seed,
    const std::vector<NamedAttack>& attacks, double inversion_noise_std);

// Standalone i.i.d. spectral watermark detection with different references.
enum class ReferenceMode { Gaussian, ZeroL1, ZeroL2 };

RocCurve standalone_watermark_experiment(ReferenceMode mode, int trials,
                                         const std::vector<AttackSpec>& attacks,
                                         double inversion_noise_std,
                                         uint64_t seed);

// Energy of the masked coefficients after a lossy baseline imprint relative
// to the energy of the values written; the projection halves it.
struct EnergyRatioResult {
    double ratio = 0.0;
    long samples = 0;
};

EnergyRatioResult baseline_energy_halving_experiment(int trials, uint64_t seed);

// Complex sample variance of masked and unmasked coefficients after the
// standalone i.i.d. imprint; masked should sit near N^2/2, unmasked near N^2.
struct VarianceSplitResult {
    double masked_variance = 0.0;
    double unmasked_variance = 0.0;
    long masked_samples = 0;
    long unmasked_samples = 0;
};

VarianceSplitResult projection_variance_experiment(int n, int trials,
                                                   uint64_t seed);

} // namespace ringid
