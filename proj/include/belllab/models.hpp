// models.hpp
// Outcome statistics for the Bell experiment: the quantum singlet model and
// local-hidden-variable models (the sign-cos model and finite strategy-table
// mixtures). Exact pmfs plus seeded samplers, and the trial-log CSV format.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "belllab/errors.hpp"
#include "belllab/qmath.hpp"
#include "belllab/rng.hpp"
#include "belllab/spin.hpp"

namespace belllab::models {

using spin::Direction;
using qmath::ComplexMatrix;
using qmath::ComplexVector;
using qmath::cplx;

enum class Model { qm, lhv_cos, lhv_table };

inline std::string model_name(Model m) {
    switch (m) {
        case Model::qm: return "qm";
        case Model::lhv_cos: return "lhv-cos";
        case Model::lhv_table: return "lhv-table";
    }
    return "?";
}

inline Model model_from_name(const std::string& s) {
    if (s == "qm") return Model::qm;
    if (s == "lhv-cos") return Model::lhv_cos;
    if (s == "lhv-table") return Model::lhv_table;
    throw std::invalid_argument("unknown model: " + s);
}

// Which of the two available settings an actor chose this round.
enum class Choice { primary, alternate };

inline std::string alice_label(Choice c) { return c == Choice::primary ? "a" : "a'"; }
inline std::string bob_label(Choice c) { return c == Choice::primary ? "b" : "b'"; }

// The four CHSH settings as planar angles in degrees, normalized to [0, 360).
struct SettingsQuad {
    double a_deg, a_prime_deg, b_deg, b_prime_deg;

    SettingsQuad(double a, double ap, double b, double bp)
        : a_deg(normalize_deg(a)),
          a_prime_deg(normalize_deg(ap)),
          b_deg(normalize_deg(b)),
          b_prime_deg(normalize_deg(bp)) {}

    static double normalize_deg(double d) {
        double r = std::fmod(d, 360.0);
        if (r < 0.0) r += 360.0;
        return r;
    }

    double alice_deg(Choice c) const { return c == Choice::primary ? a_deg : a_prime_deg; }
    double bob_deg(Choice c) const { return c == Choice::primary ? b_deg : b_prime_deg; }

    Direction alice_direction(Choice c) const { return Direction::from_degrees(alice_deg(c)); }
    Direction bob_direction(Choice c) const { return Direction::from_degrees(bob_deg(c)); }
};

// pmf over the outcome pairs, indexed (+,+), (+,-), (-,+), (-,-).
struct JointPMF {
    std::array<double, 4> p{};

    static std::size_t index(int alpha, int beta) {
        return (alpha < 0 ? 2u : 0u) + (beta < 0 ? 1u : 0u);
    }

    double& operator()(int alpha, int beta) { return p[index(alpha, beta)]; }
    double operator()(int alpha, int beta) const { return p[index(alpha, beta)]; }

    double sum() const { return p[0] + p[1] + p[2] + p[3]; }

    // E[alpha * beta]
    double correlation() const { return p[0] - p[1] - p[2] + p[3]; }

    double alice_marginal_plus() const { return p[0] + p[1]; }
    double bob_marginal_plus() const { return p[0] + p[2]; }

    void validate(double tol = 1e-12) const {
        for (double v : p)
            if (!(v >= -tol)) throw std::invalid_argument("JointPMF: negative probability");
        if (std::abs(sum() - 1.0) > tol)
            throw std::invalid_argument("JointPMF: probabilities do not sum to 1");
    }
};

// Shared hidden state of one entangled pair: Alice's particle carries phi,
// Bob's carries -phi.
struct HiddenState {
    Direction phi;

    HiddenState negated() const { return HiddenState{phi.opposite()}; }
};

// --- quantum model -----------------------------------------------------

inline void require_unit(const Direction&) {
    // Direction enforces unit length on construction; kept for call-site clarity.
}

// p(alpha, beta) = <psi| P_alpha(a) (x) P_beta(b) |psi> via explicit 4x4 algebra.
inline JointPMF qm_joint_pmf(const Direction& a, const Direction& b) {
    const ComplexMatrix id = ComplexMatrix::identity(2);
    const ComplexMatrix sa = spin::spin_component_operator(a);
    const ComplexMatrix sb = spin::spin_component_operator(b);
    const ComplexVector psi = spin::singlet_state();

    JointPMF pmf;
    for (int alpha : {+1, -1}) {
        const ComplexMatrix pa = (id + sa * cplx{static_cast<double>(alpha), 0.0}) * cplx{0.5, 0.0};
        for (int beta : {+1, -1}) {
            const ComplexMatrix pb =
                (id + sb * cplx{static_cast<double>(beta), 0.0}) * cplx{0.5, 0.0};
            const ComplexVector w = qmath::tensor_product(pa, pb) * psi;
            pmf(alpha, beta) = psi.inner(w).real();
        }
    }
    pmf.validate();
    return pmf;
}

// Closed form p(alpha, beta) = (1 - alpha beta a.b) / 4; must agree with the
// matrix-element route within 1e-12.
inline JointPMF qm_joint_pmf_closed_form(const Direction& a, const Direction& b) {
    const double d = a.dot(b);
    JointPMF pmf;
    for (int alpha : {+1, -1})
        for (int beta : {+1, -1}) pmf(alpha, beta) = (1.0 - alpha * beta * d) / 4.0;
    return pmf;
}

// E(AB) for the singlet; equals -(a.b).
inline double qm_correlation(const Direction& a, const Direction& b) {
    return qm_joint_pmf(a, b).correlation();
}

// --- sign-cos hidden-variable model ------------------------------------

// sign(cos(a, phi)) with sign(0) := +1.
inline int lhv_cos_response(const Direction& a, const HiddenState& h) {
    return a.dot(h.phi) >= 0.0 ? +1 : -1;
}

// phi uniform on the unit sphere, from two uniforms (no rejection).
inline HiddenState sample_hidden(rng::Stream& stream) {
    const double z = 2.0 * stream.next_double() - 1.0;
    const double az = 2.0 * spin::kPi * stream.next_double();
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return HiddenState{Direction(r * std::cos(az), r * std::sin(az), z)};
}

// Analytic E(AB) of the sign-cos model with phi_B = -phi_A, as a function of
// the angle between the settings.
inline double lhv_cos_correlation(double theta_rad) {
    if (!(theta_rad >= 0.0 && theta_rad <= spin::kPi))
        throw angle_out_of_range("lhv_cos_correlation: angle outside [0, pi]");
    return -1.0 + 2.0 * theta_rad / spin::kPi;
}

inline JointPMF lhv_cos_joint_pmf(double theta_rad) {
    const double e = lhv_cos_correlation(theta_rad);
    JointPMF pmf;
    for (int alpha : {+1, -1})
        for (int beta : {+1, -1}) pmf(alpha, beta) = (1.0 + alpha * beta * e) / 4.0;
    return pmf;
}

// --- deterministic strategy tables -------------------------------------

// One local deterministic strategy: fixed responses for every setting.
struct StrategyTable {
    int a = +1, a_prime = +1, b = +1, b_prime = +1;

    StrategyTable() = default;
    StrategyTable(int a_, int ap_, int b_, int bp_) : a(a_), a_prime(ap_), b(b_), b_prime(bp_) {
        for (int v : {a, a_prime, b, b_prime})
            if (v != 1 && v != -1)
                throw std::invalid_argument("StrategyTable: values must be +/-1");
    }

    int alice_value(Choice c) const { return c == Choice::primary ? a : a_prime; }
    int bob_value(Choice c) const { return c == Choice::primary ? b : b_prime; }

    // AB + A'B + AB' - A'B'
    double chsh() const {
        return static_cast<double>(a * b + a_prime * b + a * b_prime - a_prime * b_prime);
    }

    bool operator==(const StrategyTable& o) const = default;
};

// Finite mixture of strategy tables; weights normalized on construction.
struct StrategyEnsemble {
    std::vector<StrategyTable> tables;
    std::vector<double> weights;

    StrategyEnsemble() = default;
    StrategyEnsemble(std::vector<StrategyTable> t, std::vector<double> w)
        : tables(std::move(t)), weights(std::move(w)) {
        if (tables.empty() || tables.size() != weights.size())
            throw std::invalid_argument("StrategyEnsemble: tables/weights mismatch");
        double total = 0.0;
        for (double v : weights) {
            if (!(v >= 0.0)) throw std::invalid_argument("StrategyEnsemble: negative weight");
            total += v;
        }
        if (!(total > 0.0)) throw std::invalid_argument("StrategyEnsemble: zero total weight");
        for (double& v : weights) v /= total;
    }

    static StrategyEnsemble single(const StrategyTable& t) { return StrategyEnsemble({t}, {1.0}); }

    const StrategyTable& sample(rng::Stream& stream) const {
        const double u = stream.next_double();
        double acc = 0.0;
        for (std::size_t i = 0; i < tables.size(); ++i) {
            acc += weights[i];
            if (u < acc) return tables[i];
        }
        return tables.back();
    }

    JointPMF pmf(Choice alice, Choice bob) const {
        JointPMF out;
        for (std::size_t i = 0; i < tables.size(); ++i)
            out(tables[i].alice_value(alice), tables[i].bob_value(bob)) += weights[i];
        return out;
    }

    double correlation(Choice alice, Choice bob) const { return pmf(alice, bob).correlation(); }
};

// --- trials -------------------------------------------------------------

struct TrialRecord {
    long round = 0;
    Choice a_choice = Choice::primary;
    double a_deg = 0.0;
    Choice b_choice = Choice::primary;
    double b_deg = 0.0;
    int outcome_a = +1;
    int outcome_b = +1;
    std::optional<Direction> hidden_phi;  // sign-cos LHV runs only
    Model model = Model::qm;

    bool operator==(const TrialRecord& o) const {
        const bool phi_eq =
            hidden_phi.has_value() == o.hidden_phi.has_value() &&
            (!hidden_phi ||
             (hidden_phi->x == o.hidden_phi->x && hidden_phi->y == o.hidden_phi->y &&
              hidden_phi->z == o.hidden_phi->z));
        return round == o.round && a_choice == o.a_choice && a_deg == o.a_deg &&
               b_choice == o.b_choice && b_deg == o.b_deg && outcome_a == o.outcome_a &&
               outcome_b == o.outcome_b && phi_eq && model == o.model;
    }
};

// Draw one outcome pair from a pmf; cumulative walk in index order.
inline std::pair<int, int> sample_joint_outcome(const JointPMF& pmf, rng::Stream& stream) {
    static constexpr std::array<std::pair<int, int>, 4> kOutcomes = {
        {{+1, +1}, {+1, -1}, {-1, +1}, {-1, -1}}};
    const double u = stream.next_double();
    double acc = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        acc += pmf.p[i];
        if (u < acc) return kOutcomes[i];
    }
    return kOutcomes[3];
}

// One experimental round at a fixed setting choice. For qm the draw uses the
// joint pmf (the sampler necessarily sees both settings); LHV outcomes come
// from per-particle local responses with the hidden state recorded.
inline TrialRecord sample_trial(Model model, const SettingsQuad& settings, Choice a_choice,
                                Choice b_choice, rng::Stream& stream,
                                const StrategyEnsemble* ensemble = nullptr, long round = 0) {
    TrialRecord rec;
    rec.round = round;
    rec.model = model;
    rec.a_choice = a_choice;
    rec.b_choice = b_choice;
    rec.a_deg = settings.alice_deg(a_choice);
    rec.b_deg = settings.bob_deg(b_choice);

    switch (model) {
        case Model::qm: {
            const JointPMF pmf =
                qm_joint_pmf(settings.alice_direction(a_choice), settings.bob_direction(b_choice));
            const auto [oa, ob] = sample_joint_outcome(pmf, stream);
            rec.outcome_a = oa;
            rec.outcome_b = ob;
            break;
        }
        case Model::lhv_cos: {
            const HiddenState h = sample_hidden(stream);
            rec.outcome_a = lhv_cos_response(settings.alice_direction(a_choice), h);
            rec.outcome_b = lhv_cos_response(settings.bob_direction(b_choice), h.negated());
            rec.hidden_phi = h.phi;
            break;
        }
        case Model::lhv_table: {
            if (ensemble == nullptr || ensemble->tables.empty())
                throw invalid_config("sample_trial: lhv-table model requires an ensemble");
            const StrategyTable& t = ensemble->sample(stream);
            rec.outcome_a = t.alice_value(a_choice);
            rec.outcome_b = t.bob_value(b_choice);
            break;
        }
    }
    return rec;
}

// --- trial-log CSV -------------------------------------------------------

inline constexpr const char* kTrialCsvHeader =
    "round,setting_a_label,setting_a_deg,setting_b_label,setting_b_deg,"
    "outcome_a,outcome_b,phi_x,phi_y,phi_z,model";

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.push_back(field);
    return out;
}

}  // namespace detail

inline void write_trial_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
    os << kTrialCsvHeader << '\n';
    for (const TrialRecord& r : records) {
        os << r.round << ',' << alice_label(r.a_choice) << ',' << detail::format_double(r.a_deg)
           << ',' << bob_label(r.b_choice) << ',' << detail::format_double(r.b_deg) << ','
           << r.outcome_a << ',' << r.outcome_b << ',';
        if (r.hidden_phi) {
            os << detail::format_double(r.hidden_phi->x) << ','
               << detail::format_double(r.hidden_phi->y) << ','
               << detail::format_double(r.hidden_phi->z);
        } else {
            os << ",,";
        }
        os << ',' << model_name(r.model) << '\n';
    }
}

inline std::vector<TrialRecord> read_trial_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kTrialCsvHeader)
        throw std::invalid_argument("trial CSV: missing or malformed header");

    std::vector<TrialRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = detail::split_csv_line(line);
        if (f.size() != 11) throw std::invalid_argument("trial CSV: wrong column count");
        TrialRecord r;
        r.round = std::stol(f[0]);
        r.a_choice = f[1] == "a" ? Choice::primary : Choice::alternate;
        r.a_deg = std::stod(f[2]);
        r.b_choice = f[3] == "b" ? Choice::primary : Choice::alternate;
        r.b_deg = std::stod(f[4]);
        r.outcome_a = std::stoi(f[5]);
        r.outcome_b = std::stoi(f[6]);
        if (!f[7].empty())
            r.hidden_phi = Direction(std::stod(f[7]), std::stod(f[8]), std::stod(f[9]));
        r.model = model_from_name(f[10]);
        out.push_back(r);
    }
    return out;
}

}  // namespace belllab::models
