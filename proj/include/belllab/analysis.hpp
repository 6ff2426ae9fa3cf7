// analysis.hpp
// CHSH estimation with uncertainty, exact deterministic-strategy enumeration,
// angle optimization over analytic correlations, and the no-signaling test.

#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "belllab/errors.hpp"
#include "belllab/models.hpp"
#include "belllab/protocol.hpp"

namespace belllab::bellsim {

// Smallest separation between two planar angles, in radians within [0, pi].
inline double angle_delta_rad(double x_deg, double y_deg) {
    double d = std::fmod(std::abs(x_deg - y_deg), 360.0);
    if (d > 180.0) d = 360.0 - d;
    return spin::deg_to_rad(d);
}

// Analytic E(AB) for one setting pair.
inline double model_pair_correlation(Model model, const SettingsQuad& settings, Choice alice,
                                     Choice bob, const StrategyEnsemble* ensemble = nullptr) {
    switch (model) {
        case Model::qm:
            return -std::cos(angle_delta_rad(settings.alice_deg(alice), settings.bob_deg(bob)));
        case Model::lhv_cos:
            return models::lhv_cos_correlation(
                angle_delta_rad(settings.alice_deg(alice), settings.bob_deg(bob)));
        case Model::lhv_table:
            if (ensemble == nullptr)
                throw invalid_config("model_pair_correlation: lhv-table needs an ensemble");
            return ensemble->correlation(alice, bob);
    }
    return 0.0;
}

inline double chsh_from_correlations(double e_ab, double e_apb, double e_abp, double e_apbp) {
    return e_ab + e_apb + e_abp - e_apbp;
}

// S computed from four exact pmfs (infinite-sample path; no sampling).
inline double chsh_from_pmfs(const JointPMF& ab, const JointPMF& abp, const JointPMF& apb,
                             const JointPMF& apbp) {
    return chsh_from_correlations(ab.correlation(), apb.correlation(), abp.correlation(),
                                  apbp.correlation());
}

inline double analytic_chsh(Model model, const SettingsQuad& settings,
                            const StrategyEnsemble* ensemble = nullptr) {
    using enum Choice;
    return chsh_from_correlations(
        model_pair_correlation(model, settings, primary, primary, ensemble),
        model_pair_correlation(model, settings, alternate, primary, ensemble),
        model_pair_correlation(model, settings, primary, alternate, ensemble),
        model_pair_correlation(model, settings, alternate, alternate, ensemble));
}

struct ChshEstimate {
    double e_ab = 0.0, e_apb = 0.0, e_abp = 0.0, e_apbp = 0.0;
    long n_ab = 0, n_apb = 0, n_abp = 0, n_apbp = 0;
    double s = 0.0;
    double se = 0.0;
    double sigma_above_2 = 0.0;  // (|S| - 2) / SE
};

// Conditional-mean estimator: each E is the mean of outcome products given
// that setting pair; SE combines per-cell variances of the mean.
inline ChshEstimate estimate_chsh(std::span<const TrialRecord> logs) {
    std::array<long, 4> n{};
    std::array<double, 4> sum{};
    for (const TrialRecord& r : logs) {
        const std::size_t cell = (r.a_choice == Choice::alternate ? 2u : 0u) +
                                 (r.b_choice == Choice::alternate ? 1u : 0u);
        n[cell] += 1;
        sum[cell] += static_cast<double>(r.outcome_a * r.outcome_b);
    }
    static constexpr std::array<const char*, 4> kCellNames = {"(a,b)", "(a,b')", "(a',b)",
                                                              "(a',b')"};
    std::array<double, 4> mean{};
    double var_sum = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
        if (n[c] == 0)
            throw insufficient_data(std::string("estimate_chsh: no rounds in cell ") +
                                    kCellNames[c]);
        mean[c] = sum[c] / static_cast<double>(n[c]);
        if (n[c] > 1) {
            // products are +/-1, so the sample variance has a closed form
            const double nc = static_cast<double>(n[c]);
            const double sample_var = (nc / (nc - 1.0)) * (1.0 - mean[c] * mean[c]);
            var_sum += sample_var / nc;
        }
    }

    ChshEstimate est;
    est.e_ab = mean[0];
    est.e_abp = mean[1];
    est.e_apb = mean[2];
    est.e_apbp = mean[3];
    est.n_ab = n[0];
    est.n_abp = n[1];
    est.n_apb = n[2];
    est.n_apbp = n[3];
    est.s = chsh_from_correlations(est.e_ab, est.e_apb, est.e_abp, est.e_apbp);
    est.se = std::sqrt(var_sum);
    est.sigma_above_2 = est.se > 0.0 ? (std::abs(est.s) - 2.0) / est.se : 0.0;
    return est;
}

// --- deterministic strategies --------------------------------------------

struct EnumerationResult {
    double max_abs_s = 0.0;
    std::vector<StrategyTable> argmax_positive;  // tables with S = +max
    std::vector<StrategyTable> argmax_negative;  // tables with S = -max
};

inline std::vector<StrategyTable> all_strategy_tables() {
    std::vector<StrategyTable> out;
    out.reserve(16);
    for (int a : {+1, -1})
        for (int ap : {+1, -1})
            for (int b : {+1, -1})
                for (int bp : {+1, -1}) out.emplace_back(a, ap, b, bp);
    return out;
}

inline EnumerationResult enumerate_deterministic_strategies() {
    EnumerationResult res;
    const std::vector<StrategyTable> tables = all_strategy_tables();
    for (const StrategyTable& t : tables) res.max_abs_s = std::max(res.max_abs_s, std::abs(t.chsh()));
    for (const StrategyTable& t : tables) {
        if (t.chsh() == res.max_abs_s) res.argmax_positive.push_back(t);
        if (t.chsh() == -res.max_abs_s) res.argmax_negative.push_back(t);
    }
    return res;
}

// --- angle optimization ----------------------------------------------------

struct OptimizeResult {
    SettingsQuad settings{0, 0, 0, 0};
    double s = 0.0;
    double abs_s = 0.0;
    int cycles = 0;
};

namespace detail {

inline double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                 double xtol) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > xtol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

// Maximizes |S(settings)| over the four planar angles using the analytic
// correlations: cyclic coordinate search; each line search scans coarsely,
// then refines the bracket by golden section. Stops when one full cycle
// improves |S| by less than tol in every coordinate.
inline OptimizeResult optimize_angles(Model model, const SettingsQuad& start, double tol) {
    if (!(tol > 0.0)) throw invalid_config("optimize_angles: tol must be positive");
    if (model == Model::lhv_table)
        throw invalid_config("optimize_angles: supported models are qm and lhv-cos");

    std::array<double, 4> angles = {start.a_deg, start.a_prime_deg, start.b_deg,
                                    start.b_prime_deg};
    auto objective = [&](const std::array<double, 4>& x) {
        return std::abs(
            analytic_chsh(model, SettingsQuad(x[0], x[1], x[2], x[3])));
    };

    constexpr int kScanPoints = 96;
    constexpr int kMaxCycles = 200;
    constexpr double kAngleTol = 1e-7;  // degrees

    double best = objective(angles);
    int cycle = 0;
    for (; cycle < kMaxCycles; ++cycle) {
        double cycle_gain = 0.0;
        for (std::size_t coord = 0; coord < 4; ++coord) {
            auto line = [&](double v) {
                std::array<double, 4> x = angles;
                x[coord] = v;
                return objective(x);
            };
            // coarse scan over the full circle to bracket the best basin
            const double step = 360.0 / kScanPoints;
            double best_v = angles[coord];
            double best_f = line(best_v);
            for (int k = 0; k < kScanPoints; ++k) {
                const double v = k * step;
                const double fv = line(v);
                if (fv > best_f) {
                    best_f = fv;
                    best_v = v;
                }
            }
            const double refined =
                detail::golden_section_max(line, best_v - step, best_v + step, kAngleTol);
            const double f_refined = line(refined);
            if (f_refined > best) {
                cycle_gain = std::max(cycle_gain, f_refined - best);
                best = f_refined;
                angles[coord] = refined;
            }
        }
        if (cycle_gain < tol) break;
    }

    OptimizeResult res;
    res.settings = SettingsQuad(angles[0], angles[1], angles[2], angles[3]);
    res.s = analytic_chsh(model, res.settings);
    res.abs_s = std::abs(res.s);
    res.cycles = cycle + 1;
    return res;
}

// --- no-signaling -----------------------------------------------------------

struct NoSignalingResult {
    double z_alice = 0.0;  // Alice's outcome rate split by Bob's setting
    double p_alice = 1.0;
    double z_bob = 0.0;
    double p_bob = 1.0;
};

namespace detail {

// two-proportion z-test, two-sided p-value
inline std::pair<double, double> two_proportion_z(long hits1, long n1, long hits2, long n2) {
    if (n1 == 0 || n2 == 0) throw insufficient_data("no_signaling_test: empty setting cell");
    const double p1 = static_cast<double>(hits1) / static_cast<double>(n1);
    const double p2 = static_cast<double>(hits2) / static_cast<double>(n2);
    const double pooled = static_cast<double>(hits1 + hits2) / static_cast<double>(n1 + n2);
    const double denom =
        std::sqrt(pooled * (1.0 - pooled) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
    if (denom == 0.0) return {0.0, 1.0};
    const double z = (p1 - p2) / denom;
    const double p = std::erfc(std::abs(z) / std::numbers::sqrt2);
    return {z, p};
}

}  // namespace detail

// Tests that each actor's outcome distribution is independent of the other
// actor's setting label. Requires every setting cell populated.
inline NoSignalingResult no_signaling_test(std::span<const TrialRecord> logs) {
    long a_plus_by_b[2] = {0, 0}, a_n_by_b[2] = {0, 0};
    long b_plus_by_a[2] = {0, 0}, b_n_by_a[2] = {0, 0};
    long cells[4] = {0, 0, 0, 0};
    for (const TrialRecord& r : logs) {
        const int bi = r.b_choice == Choice::alternate ? 1 : 0;
        const int ai = r.a_choice == Choice::alternate ? 1 : 0;
        cells[2 * ai + bi] += 1;
        a_n_by_b[bi] += 1;
        if (r.outcome_a == +1) a_plus_by_b[bi] += 1;
        b_n_by_a[ai] += 1;
        if (r.outcome_b == +1) b_plus_by_a[ai] += 1;
    }
    for (long n : cells)
        if (n == 0) throw insufficient_data("no_signaling_test: empty setting cell");
    NoSignalingResult res;
    std::tie(res.z_alice, res.p_alice) =
        detail::two_proportion_z(a_plus_by_b[0], a_n_by_b[0], a_plus_by_b[1], a_n_by_b[1]);
    std::tie(res.z_bob, res.p_bob) =
        detail::two_proportion_z(b_plus_by_a[0], b_n_by_a[0], b_plus_by_a[1], b_n_by_a[1]);
    return res;
}

}  // namespace belllab::bellsim
