// feasibility.hpp
// Joint-distribution feasibility: does a single pmf on {-1,+1}^4 exist whose
// four pairwise marginals match the observed (A,B), (A,B'), (A',B), (A',B')
// distributions? Decided by exact phase-1 simplex over rationals, with the
// CHSH inequality family evaluated on the same rationalized data as a
// cross-check. Rational arithmetic avoids wrong verdicts near the |S| = 2
// boundary.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "belllab/analysis.hpp"
#include "belllab/errors.hpp"
#include "belllab/models.hpp"

namespace belllab::bellsim {

using rational = boost::multiprecision::cpp_rational;

struct FourPMFs {
    JointPMF ab, abp, apb, apbp;  // (A,B), (A,B'), (A',B), (A',B')
};

// Exact pmfs of a model at the four setting pairs.
inline FourPMFs model_joint_pmfs(Model model, const SettingsQuad& settings,
                                 const StrategyEnsemble* ensemble = nullptr) {
    using enum Choice;
    auto one = [&](Choice alice, Choice bob) -> JointPMF {
        switch (model) {
            case Model::qm:
                return models::qm_joint_pmf(settings.alice_direction(alice),
                                            settings.bob_direction(bob));
            case Model::lhv_cos:
                return models::lhv_cos_joint_pmf(
                    angle_delta_rad(settings.alice_deg(alice), settings.bob_deg(bob)));
            case Model::lhv_table:
                if (ensemble == nullptr)
                    throw invalid_config("model_joint_pmfs: lhv-table needs an ensemble");
                return ensemble->pmf(alice, bob);
        }
        return JointPMF{};
    };
    return FourPMFs{one(primary, primary), one(primary, alternate), one(alternate, primary),
                    one(alternate, alternate)};
}

struct ChshViolation {
    std::string minus_term;  // which term carries the minus sign: ab, a'b, ab', a'b'
    double value = 0.0;      // signed value of that CHSH expression
};

struct FeasibilityResult {
    bool feasible = false;
    std::optional<std::array<double, 16>> joint;  // atoms over {-1,+1}^4, bit3=A .. bit0=B'
    std::optional<ChshViolation> violated;
};

// The four CHSH expressions (minus sign on each term in turn); together with
// both overall signs these are the eight inequalities |T| <= 2. Double
// version, for diagnostics.
inline std::array<std::pair<std::string, double>, 4> chsh_variant_values(const FourPMFs& pmfs) {
    const double e_ab = pmfs.ab.correlation();
    const double e_abp = pmfs.abp.correlation();
    const double e_apb = pmfs.apb.correlation();
    const double e_apbp = pmfs.apbp.correlation();
    const double total = e_ab + e_abp + e_apb + e_apbp;
    return {{{"ab", total - 2.0 * e_ab},
             {"a'b", total - 2.0 * e_apb},
             {"ab'", total - 2.0 * e_abp},
             {"a'b'", total - 2.0 * e_apbp}}};
}

namespace detail {

inline constexpr std::int64_t kRationalizeDenom = 1000000000000LL;  // 12 decimal digits

inline rational rationalize(double x) {
    const double scaled = x * static_cast<double>(kRationalizeDenom);
    return rational(static_cast<std::int64_t>(std::llround(scaled)), kRationalizeDenom);
}

inline rational clamp(const rational& x, const rational& lo, const rational& hi) {
    if (x < lo) return lo;
    if (x > hi) return hi;
    return x;
}

// Exactly consistent rational reconstruction of the four pmfs from the moment
// parameterization (two marginals, four correlations). Marginals are averaged
// over the two cells that report them; correlations are clamped into the
// positivity region so each reconstructed cell is a valid probability.
struct RationalMoments {
    rational m_a, m_ap, m_b, m_bp;          // <A>, <A'>, <B>, <B'>
    rational c_ab, c_abp, c_apb, c_apbp;    // <AB>, <AB'>, <A'B>, <A'B'>

    rational cell(int which_pair, int alpha, int beta) const {
        const rational& mx = which_pair < 2 ? m_a : m_ap;
        const rational& my = (which_pair % 2) == 0 ? m_b : m_bp;
        const rational& c = which_pair == 0 ? c_ab
                           : which_pair == 1 ? c_abp
                           : which_pair == 2 ? c_apb
                                             : c_apbp;
        return (rational(1) + alpha * mx + beta * my + alpha * beta * c) / 4;
    }
};

inline rational abs_rational(const rational& x) { return x < 0 ? rational(-x) : x; }

// Rounding the four correlations independently can push a point that sits
// exactly on a |T| = 2 facet (the sign-cos model does, over whole regions of
// angle space) just outside it. Any overshoot within the quantization radius
// is a rounding artifact: land that variant exactly on its facet. The
// correction (-e/4 on the plus terms, +e/4 on the minus term, times sign)
// changes the corrected variant by -e and leaves the other three variants
// unchanged, since their totals shift by -e/2 and their minus terms by +e/2.
inline constexpr double kBoundarySnapTol = 1e-11;

inline void snap_chsh_boundary(RationalMoments& m) {
    rational* cs[4] = {&m.c_ab, &m.c_abp, &m.c_apb, &m.c_apbp};
    const rational snap_tol = rationalize(kBoundarySnapTol);
    for (int which = 0; which < 4; ++which) {
        const rational total = *cs[0] + *cs[1] + *cs[2] + *cs[3];
        const rational t = total - 2 * (*cs[which]);
        const rational excess = abs_rational(t) - 2;
        if (excess <= 0 || excess > snap_tol) continue;
        const int sign = t > 0 ? +1 : -1;
        const rational shift = sign * excess / 4;
        for (int k = 0; k < 4; ++k) {
            if (k == which)
                *cs[k] += shift;
            else
                *cs[k] -= shift;
        }
    }
}

inline RationalMoments rationalize_moments(const FourPMFs& pmfs) {
    auto marginal_a = [](const JointPMF& p) { return 2.0 * p.alice_marginal_plus() - 1.0; };
    auto marginal_b = [](const JointPMF& p) { return 2.0 * p.bob_marginal_plus() - 1.0; };

    RationalMoments m;
    const rational one(1);
    m.m_a = clamp(rationalize(0.5 * (marginal_a(pmfs.ab) + marginal_a(pmfs.abp))), -one, one);
    m.m_ap = clamp(rationalize(0.5 * (marginal_a(pmfs.apb) + marginal_a(pmfs.apbp))), -one, one);
    m.m_b = clamp(rationalize(0.5 * (marginal_b(pmfs.ab) + marginal_b(pmfs.apb))), -one, one);
    m.m_bp = clamp(rationalize(0.5 * (marginal_b(pmfs.abp) + marginal_b(pmfs.apbp))), -one, one);

    auto clamp_corr = [&one](const rational& c, const rational& mx, const rational& my) {
        const rational lo = -one + abs_rational(mx + my);
        const rational hi = one - abs_rational(mx - my);
        return clamp(c, lo, hi);
    };
    auto clamp_all = [&] {
        m.c_ab = clamp_corr(m.c_ab, m.m_a, m.m_b);
        m.c_abp = clamp_corr(m.c_abp, m.m_a, m.m_bp);
        m.c_apb = clamp_corr(m.c_apb, m.m_ap, m.m_b);
        m.c_apbp = clamp_corr(m.c_apbp, m.m_ap, m.m_bp);
    };
    m.c_ab = rationalize(pmfs.ab.correlation());
    m.c_abp = rationalize(pmfs.abp.correlation());
    m.c_apb = rationalize(pmfs.apb.correlation());
    m.c_apbp = rationalize(pmfs.apbp.correlation());

    // positivity and boundary conditioning; the second snap pass absorbs the
    // (at most quantization-sized) drift a positivity clamp can introduce
    clamp_all();
    snap_chsh_boundary(m);
    clamp_all();
    snap_chsh_boundary(m);
    clamp_all();
    return m;
}

inline int sign_of_bit(std::size_t point, int bit) { return (point >> bit) & 1u ? +1 : -1; }

// Exact CHSH variants on the rationalized moments. The sign-cos model sits on
// the |T| = 2 boundary over whole regions of angle space, so the verdict has
// to come from the same exact data the LP sees.
inline std::array<std::pair<std::string, rational>, 4> chsh_variants_exact(
    const RationalMoments& m) {
    const rational total = m.c_ab + m.c_abp + m.c_apb + m.c_apbp;
    return {{{"ab", total - 2 * m.c_ab},
             {"a'b", total - 2 * m.c_apb},
             {"ab'", total - 2 * m.c_abp},
             {"a'b'", total - 2 * m.c_apbp}}};
}

// Phase-1 simplex with Bland's rule on exact rationals. Feasible iff the
// artificial objective reaches zero; returns the witness atoms if so.
inline std::optional<std::array<rational, 16>> solve_lp(const RationalMoments& m) {
    constexpr int kVars = 16;
    constexpr int kRows = 17;  // 4 pairs x 4 cells + normalization
    const int cols = kVars + kRows;  // artificials, one per row

    // tableau[r] = [vars | artificials | rhs]
    std::vector<std::vector<rational>> t(kRows, std::vector<rational>(cols + 1, rational(0)));
    int row = 0;
    for (int pair = 0; pair < 4; ++pair) {
        const int bit_x = pair < 2 ? 3 : 2;        // A or A'
        const int bit_y = (pair % 2) == 0 ? 1 : 0; // B or B'
        for (int alpha : {+1, -1}) {
            for (int beta : {+1, -1}) {
                for (std::size_t n = 0; n < kVars; ++n)
                    if (sign_of_bit(n, bit_x) == alpha && sign_of_bit(n, bit_y) == beta)
                        t[row][n] = 1;
                t[row][cols] = m.cell(pair, alpha, beta);
                ++row;
            }
        }
    }
    for (std::size_t n = 0; n < kVars; ++n) t[16][n] = 1;
    t[16][cols] = 1;

    std::vector<int> basis(kRows);
    for (int r = 0; r < kRows; ++r) {
        t[r][kVars + r] = 1;
        basis[r] = kVars + r;
    }

    // objective row: minimize sum of artificials, expressed in nonbasic vars
    std::vector<rational> obj(cols + 1, rational(0));
    for (int r = 0; r < kRows; ++r)
        for (int c = 0; c <= cols; ++c)
            if (c < kVars || c == cols) obj[c] -= t[r][c];

    while (true) {
        int pivot_col = -1;
        for (int c = 0; c < cols; ++c) {
            if (obj[c] < 0) {  // Bland: first improving column
                pivot_col = c;
                break;
            }
        }
        if (pivot_col < 0) break;

        int pivot_row = -1;
        rational best_ratio;
        for (int r = 0; r < kRows; ++r) {
            if (t[r][pivot_col] <= 0) continue;
            const rational ratio = t[r][cols] / t[r][pivot_col];
            if (pivot_row < 0 || ratio < best_ratio ||
                (ratio == best_ratio && basis[r] < basis[pivot_row])) {
                pivot_row = r;
                best_ratio = ratio;
            }
        }
        if (pivot_row < 0) break;  // unbounded: cannot happen with bounded atoms

        const rational pivot = t[pivot_row][pivot_col];
        for (int c = 0; c <= cols; ++c) t[pivot_row][c] /= pivot;
        for (int r = 0; r < kRows; ++r) {
            if (r == pivot_row) continue;
            const rational factor = t[r][pivot_col];
            if (factor == 0) continue;
            for (int c = 0; c <= cols; ++c) t[r][c] -= factor * t[pivot_row][c];
        }
        const rational obj_factor = obj[pivot_col];
        if (obj_factor != 0)
            for (int c = 0; c <= cols; ++c) obj[c] -= obj_factor * t[pivot_row][c];
        basis[pivot_row] = pivot_col;
    }

    rational artificial_total(0);
    for (int r = 0; r < kRows; ++r)
        if (basis[r] >= kVars) artificial_total += t[r][cols];
    if (artificial_total != 0) return std::nullopt;

    std::array<rational, 16> q{};
    for (int r = 0; r < kRows; ++r)
        if (basis[r] < kVars) q[static_cast<std::size_t>(basis[r])] = t[r][cols];
    return q;
}

}  // namespace detail

// Eight-inequality criterion on the rationalized inputs, evaluated exactly.
inline bool feasible_by_inequalities(const FourPMFs& pmfs) {
    const detail::RationalMoments m = detail::rationalize_moments(pmfs);
    for (const auto& [name, value] : detail::chsh_variants_exact(m))
        if (detail::abs_rational(value) > 2) return false;
    return true;
}

// Consistency of the one-party marginals across the two cells reporting them.
inline void require_consistent_marginals(const FourPMFs& pmfs, double tol = 1e-9) {
    struct Check {
        const char* who;
        double lhs, rhs;
    };
    const Check checks[] = {
        {"A", pmfs.ab.alice_marginal_plus(), pmfs.abp.alice_marginal_plus()},
        {"A'", pmfs.apb.alice_marginal_plus(), pmfs.apbp.alice_marginal_plus()},
        {"B", pmfs.ab.bob_marginal_plus(), pmfs.apb.bob_marginal_plus()},
        {"B'", pmfs.abp.bob_marginal_plus(), pmfs.apbp.bob_marginal_plus()},
    };
    for (const Check& c : checks) {
        if (std::abs(c.lhs - c.rhs) > tol)
            throw inconsistent_marginals(std::string("joint_feasibility: marginal of ") + c.who +
                                         " differs between setting cells");
    }
}

// Argument order matches the pairwise distributions (A,B), (A,B'), (A',B), (A',B').
inline FeasibilityResult joint_feasibility(const JointPMF& pmf_ab, const JointPMF& pmf_abp,
                                           const JointPMF& pmf_apb, const JointPMF& pmf_apbp) {
    const FourPMFs pmfs{pmf_ab, pmf_abp, pmf_apb, pmf_apbp};
    pmf_ab.validate(1e-9);
    pmf_abp.validate(1e-9);
    pmf_apb.validate(1e-9);
    pmf_apbp.validate(1e-9);
    require_consistent_marginals(pmfs);

    const detail::RationalMoments moments = detail::rationalize_moments(pmfs);
    const std::optional<std::array<rational, 16>> witness = detail::solve_lp(moments);

    FeasibilityResult res;
    res.feasible = witness.has_value();
    if (witness) {
        std::array<double, 16> q{};
        for (std::size_t n = 0; n < 16; ++n)
            q[n] = (*witness)[n].convert_to<double>();
        res.joint = q;
    } else {
        const auto variants = detail::chsh_variants_exact(moments);
        std::size_t worst = 0;
        for (std::size_t i = 1; i < variants.size(); ++i)
            if (detail::abs_rational(variants[i].second) >
                detail::abs_rational(variants[worst].second))
                worst = i;
        if (detail::abs_rational(variants[worst].second) > 2)
            res.violated = ChshViolation{variants[worst].first,
                                         variants[worst].second.convert_to<double>()};
    }
    return res;
}

}  // namespace belllab::bellsim
