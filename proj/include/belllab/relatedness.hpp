// relatedness.hpp
// Executable relatedness formalism: operator relatedness via unitary
// conjugation, variable relatedness under an explicit finite transformation
// group, the composition property behind Theorem 1, and the four-outcome
// variable construction of Theorem 2.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "belllab/errors.hpp"
#include "belllab/qmath.hpp"

namespace belllab::relatedness {

using qmath::ComplexMatrix;
using qmath::cplx;

// A finite-valued function on a shared finite index space Omega = {0..m-1}.
struct MaximalVariable {
    std::string name;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }

    bool all_values_distinct() const {
        std::vector<double> v = values;
        std::sort(v.begin(), v.end());
        return std::adjacent_find(v.begin(), v.end()) == v.end();
    }
};

using Permutation = std::vector<std::uint32_t>;

inline Permutation identity_permutation(std::size_t m) {
    Permutation p(m);
    for (std::size_t i = 0; i < m; ++i) p[i] = static_cast<std::uint32_t>(i);
    return p;
}

inline Permutation compose_permutations(const Permutation& f, const Permutation& g) {
    // (f o g)(n) = f(g(n))
    Permutation out(f.size());
    for (std::size_t n = 0; n < f.size(); ++n) out[n] = f[g[n]];
    return out;
}

inline Permutation invert_permutation(const Permutation& f) {
    Permutation out(f.size());
    for (std::size_t n = 0; n < f.size(); ++n) out[f[n]] = static_cast<std::uint32_t>(n);
    return out;
}

// Explicit finite group of bijections of Omega. Elements are stored in
// lexicographic order (so the identity is element 0 and search results do not
// depend on construction order). Closure under composition and inverse is
// verified on construction.
class TransformationGroup {
public:
    explicit TransformationGroup(std::vector<Permutation> elements) : elements_(std::move(elements)) {
        if (elements_.empty()) throw bad_group("TransformationGroup: no elements");
        const std::size_t m = elements_.front().size();
        for (const Permutation& p : elements_) {
            if (p.size() != m) throw bad_group("TransformationGroup: mixed domain sizes");
            if (!is_bijection(p)) throw bad_group("TransformationGroup: element is not a bijection");
        }
        std::sort(elements_.begin(), elements_.end());
        elements_.erase(std::unique(elements_.begin(), elements_.end()), elements_.end());
        for (std::size_t i = 0; i < elements_.size(); ++i) index_[elements_[i]] = i;

        if (index_.find(identity_permutation(m)) == index_.end())
            throw bad_group("TransformationGroup: identity missing");
        for (const Permutation& p : elements_) {
            if (index_.find(invert_permutation(p)) == index_.end())
                throw bad_group("TransformationGroup: not closed under inverse");
            for (const Permutation& q : elements_) {
                if (index_.find(compose_permutations(p, q)) == index_.end())
                    throw bad_group("TransformationGroup: not closed under composition");
            }
        }
    }

    // Cyclic rotations of a discretized circle with m points: element k maps
    // n to (n + k) mod m.
    static TransformationGroup cyclic(std::size_t m) {
        std::vector<Permutation> elems;
        elems.reserve(m);
        for (std::size_t k = 0; k < m; ++k) {
            Permutation p(m);
            for (std::size_t n = 0; n < m; ++n)
                p[n] = static_cast<std::uint32_t>((n + k) % m);
            elems.push_back(std::move(p));
        }
        return TransformationGroup(std::move(elems));
    }

    // Close a generating set under composition (orbit algorithm), then build.
    static TransformationGroup generate(const std::vector<Permutation>& generators,
                                        std::size_t max_elements = 100000) {
        if (generators.empty()) throw bad_group("generate: no generators");
        const std::size_t m = generators.front().size();
        std::map<Permutation, bool> seen;
        std::vector<Permutation> frontier{identity_permutation(m)};
        seen[frontier.front()] = true;
        while (!frontier.empty()) {
            Permutation cur = std::move(frontier.back());
            frontier.pop_back();
            for (const Permutation& g : generators) {
                Permutation nxt = compose_permutations(g, cur);
                const auto [it, inserted] = seen.emplace(std::move(nxt), true);
                if (inserted) {
                    frontier.push_back(it->first);
                    if (seen.size() > max_elements)
                        throw bad_group("generate: group exceeds element cap");
                }
            }
        }
        std::vector<Permutation> elems;
        elems.reserve(seen.size());
        for (const auto& [p, _] : seen) elems.push_back(p);
        return TransformationGroup(std::move(elems));
    }

    std::size_t size() const { return elements_.size(); }
    std::size_t domain_size() const { return elements_.front().size(); }
    const Permutation& element(std::size_t i) const { return elements_[i]; }

    std::size_t identity_index() const { return *lookup(identity_permutation(domain_size())); }

    std::optional<std::size_t> lookup(const Permutation& p) const {
        auto it = index_.find(p);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t compose(std::size_t i, std::size_t j) const {
        return *lookup(compose_permutations(elements_[i], elements_[j]));
    }

    std::size_t inverse(std::size_t i) const { return *lookup(invert_permutation(elements_[i])); }

private:
    static bool is_bijection(const Permutation& p) {
        std::vector<bool> hit(p.size(), false);
        for (std::uint32_t v : p) {
            if (v >= p.size() || hit[v]) return false;
            hit[v] = true;
        }
        return true;
    }

    std::vector<Permutation> elements_;
    std::map<Permutation, std::size_t> index_;
};

// --- operator-level relatedness -----------------------------------------

namespace detail {

inline std::vector<double> checked_spectrum(const ComplexMatrix& op, double tol) {
    const qmath::Spectrum s = qmath::hermitian_eigen(op, tol);
    for (std::size_t i = 0; i + 1 < s.eigenvalues.size(); ++i) {
        if (s.eigenvalues[i + 1] - s.eigenvalues[i] <= tol)
            throw degenerate_spectrum(
                "operator has a degenerate spectrum; relatedness requires maximality");
    }
    return s.eigenvalues;
}

}  // namespace detail

// True iff both operators are nondegenerate Hermitian with equal eigenvalue
// multisets -- exactly the condition under which a unitary W with
// B = W^dagger A W exists.
inline bool operators_related(const ComplexMatrix& a, const ComplexMatrix& b,
                              double tol = qmath::kDefaultTol) {
    if (!a.is_square() || !b.is_square() || a.rows() != b.rows())
        throw dimension_mismatch("operators_related: dimensions differ");
    const std::vector<double> sa = detail::checked_spectrum(a, tol);
    const std::vector<double> sb = detail::checked_spectrum(b, tol);
    for (std::size_t i = 0; i < sa.size(); ++i)
        if (std::abs(sa[i] - sb[i]) > tol) return false;
    return true;
}

// Unitary W with B = W^dagger A W, built by matching sorted eigenbases.
inline ComplexMatrix relating_unitary(const ComplexMatrix& a, const ComplexMatrix& b,
                                      double tol = qmath::kDefaultTol) {
    if (!operators_related(a, b, tol))
        throw not_related("relating_unitary: spectra differ, no conjugating unitary exists");
    const qmath::Spectrum sa = qmath::hermitian_eigen(a, tol);
    const qmath::Spectrum sb = qmath::hermitian_eigen(b, tol);
    return sa.eigenvector_matrix() * sb.eigenvector_matrix().adjoint();
}

// --- variable-level relatedness -----------------------------------------

// First group element g (in canonical order) with lambda(n) = theta(g n) for
// every n, or nullopt when no element of G couples the two variables.
inline std::optional<std::size_t> variables_related_under_group(const MaximalVariable& theta,
                                                                const MaximalVariable& lambda,
                                                                const TransformationGroup& g) {
    if (theta.size() != lambda.size() || theta.size() != g.domain_size())
        throw index_space_mismatch("variables_related_under_group: index spaces differ");
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Permutation& p = g.element(i);
        bool ok = true;
        for (std::size_t n = 0; n < p.size(); ++n) {
            if (lambda.values[n] != theta.values[p[n]]) {
                ok = false;
                break;
            }
        }
        if (ok) return i;
    }
    return std::nullopt;
}

struct Theorem1Report {
    bool hypothesis_met = false;         // related(theta,eta) and related(theta,xi)
    std::optional<std::size_t> k;        // witness for (theta, eta)
    std::optional<std::size_t> s;        // witness for (theta, xi)
    std::optional<std::size_t> composed; // k^-1 s, the predicted witness for (eta, xi)
    bool composition_verified = false;   // eta(composed n) == xi(n) for all n
    bool vacuous = false;                // hypothesis not met; nothing to verify
};

// Composition property from the proof of Theorem 1: if eta = theta o k and
// xi = theta o s then xi = eta o (k^-1 s).
inline Theorem1Report theorem1_witness(const MaximalVariable& theta, const MaximalVariable& eta,
                                       const MaximalVariable& xi, const TransformationGroup& g) {
    Theorem1Report rep;
    rep.k = variables_related_under_group(theta, eta, g);
    rep.s = variables_related_under_group(theta, xi, g);
    rep.hypothesis_met = rep.k.has_value() && rep.s.has_value();
    if (!rep.hypothesis_met) {
        rep.vacuous = true;
        return rep;
    }
    const std::size_t composed = g.compose(g.inverse(*rep.k), *rep.s);
    rep.composed = composed;
    const Permutation& p = g.element(composed);
    rep.composition_verified = true;
    for (std::size_t n = 0; n < p.size(); ++n) {
        if (xi.values[n] != eta.values[p[n]]) {
            rep.composition_verified = false;
            break;
        }
    }
    return rep;
}

// --- concrete variable constructions ------------------------------------

// sign(cos(2 pi n / m - 2 pi shift / m)) on the m-point circle; sign(0) := +1.
// The angle is reduced to its canonical grid point before evaluation so that
// shifted copies agree exactly with composing by a rotation.
inline MaximalVariable sign_cos_circle_variable(std::size_t m, std::size_t shift,
                                                const std::string& name) {
    MaximalVariable v;
    v.name = name;
    v.values.resize(m);
    for (std::size_t n = 0; n < m; ++n) {
        const std::size_t p = (n + m - shift % m) % m;
        const double c = std::cos(2.0 * std::numbers::pi * static_cast<double>(p) /
                                  static_cast<double>(m));
        v.values[n] = c >= -1e-12 ? +1.0 : -1.0;
    }
    return v;
}

// Charlie's hypothetical outcome space Omega = {-1,+1}^4, 16 points.
// Index bit layout: bit3 = A, bit2 = A', bit1 = B, bit0 = B'; set bit = +1.
inline int theorem2_sign(std::size_t point, int bit) {
    return (point >> bit) & 1u ? +1 : -1;
}

struct Theorem2Variables {
    MaximalVariable A, A_prime, B, B_prime;
    MaximalVariable C;  // A(B + B'), values in {-2, 0, +2}
    MaximalVariable D;  // |C| - 1, values in {-1, +1}
};

inline Theorem2Variables theorem2_variables() {
    constexpr std::size_t kPoints = 16;
    Theorem2Variables out;
    out.A.name = "A";
    out.A_prime.name = "A'";
    out.B.name = "B";
    out.B_prime.name = "B'";
    out.C.name = "C";
    out.D.name = "D";
    for (MaximalVariable* v : {&out.A, &out.A_prime, &out.B, &out.B_prime, &out.C, &out.D})
        v->values.resize(kPoints);
    for (std::size_t n = 0; n < kPoints; ++n) {
        const int a = theorem2_sign(n, 3);
        const int ap = theorem2_sign(n, 2);
        const int b = theorem2_sign(n, 1);
        const int bp = theorem2_sign(n, 0);
        const int c = a * (b + bp);
        out.A.values[n] = a;
        out.A_prime.values[n] = ap;
        out.B.values[n] = b;
        out.B_prime.values[n] = bp;
        out.C.values[n] = c;
        out.D.values[n] = std::abs(c) - 1;
    }
    return out;
}

// Signed coordinate permutations of {-1,+1}^4 acting on the 16-point index
// space: permute the four slots (A, A', B, B') and optionally flip signs.
// Hyperoctahedral group, 2^4 * 4! = 384 elements.
inline TransformationGroup signed_coordinate_permutation_group() {
    constexpr int kBits = 4;
    constexpr std::size_t kPoints = 16;

    auto slot_swap = [](int i, int j) {
        Permutation p(kPoints);
        for (std::size_t n = 0; n < kPoints; ++n) {
            const bool bi = (n >> i) & 1u;
            const bool bj = (n >> j) & 1u;
            std::size_t t = n & ~((1u << i) | (1u << j));
            if (bj) t |= 1u << i;
            if (bi) t |= 1u << j;
            p[n] = static_cast<std::uint32_t>(t);
        }
        return p;
    };
    auto slot_flip = [](int i) {
        Permutation p(kPoints);
        for (std::size_t n = 0; n < kPoints; ++n)
            p[n] = static_cast<std::uint32_t>(n ^ (1u << i));
        return p;
    };

    std::vector<Permutation> gens;
    for (int i = 0; i + 1 < kBits; ++i) gens.push_back(slot_swap(i, i + 1));
    gens.push_back(slot_flip(0));
    return TransformationGroup::generate(gens);
}

}  // namespace belllab::relatedness
