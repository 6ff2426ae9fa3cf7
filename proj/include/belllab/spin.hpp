// spin.hpp
// Spin-1/2 operators, the two-particle singlet state, and the spectrum check
// for the dot-product operator sigma.sigma.

#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "belllab/errors.hpp"
#include "belllab/qmath.hpp"

namespace belllab::spin {

using qmath::ComplexMatrix;
using qmath::ComplexVector;
using qmath::cplx;

inline constexpr double kPi = std::numbers::pi;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Unit 3-vector. The planar form lives in the measurement plane z = 0, so a
// planar angle theta maps to (cos theta, sin theta, 0).
struct Direction {
    double x, y, z;

    Direction(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {
        const double n = std::sqrt(x * x + y * y + z * z);
        if (std::abs(n - 1.0) > 1e-9) throw not_unit("Direction: vector is not unit length");
    }

    static Direction from_angle(double theta_rad) {
        return Direction(std::cos(theta_rad), std::sin(theta_rad), 0.0);
    }

    static Direction from_degrees(double deg) { return from_angle(deg_to_rad(deg)); }

    double dot(const Direction& other) const { return x * other.x + y * other.y + z * other.z; }

    Direction opposite() const { return Direction(-x, -y, -z); }
};

enum class Axis { x, y, z };

inline ComplexMatrix pauli(Axis axis) {
    switch (axis) {
        case Axis::x:
            return ComplexMatrix{{cplx{0, 0}, cplx{1, 0}}, {cplx{1, 0}, cplx{0, 0}}};
        case Axis::y:
            return ComplexMatrix{{cplx{0, 0}, cplx{0, -1}}, {cplx{0, 1}, cplx{0, 0}}};
        case Axis::z:
        default:
            return ComplexMatrix{{cplx{1, 0}, cplx{0, 0}}, {cplx{0, 0}, cplx{-1, 0}}};
    }
}

// sigma . a : Hermitian, traceless, eigenvalues +/-1.
inline ComplexMatrix spin_component_operator(const Direction& a) {
    return ComplexMatrix{{cplx{a.z, 0}, cplx{a.x, -a.y}}, {cplx{a.x, a.y}, cplx{-a.z, 0}}};
}

// Two-particle basis order: |1+>|2+>, |1+>|2->, |1->|2+>, |1->|2->.
// Amplitudes (0, c, -c, 0) with c = 1/sqrt(2).
inline ComplexVector singlet_state() {
    const double c = 1.0 / std::numbers::sqrt2;
    return ComplexVector{cplx{0, 0}, cplx{c, 0}, cplx{-c, 0}, cplx{0, 0}};
}

// sigma.sigma = sx(x)sx + sy(x)sy + sz(x)sz on the two-particle space.
inline ComplexMatrix dot_operator() {
    using qmath::tensor_product;
    ComplexMatrix out = tensor_product(pauli(Axis::x), pauli(Axis::x)) +
                        tensor_product(pauli(Axis::y), pauli(Axis::y)) +
                        tensor_product(pauli(Axis::z), pauli(Axis::z));
    return out;
}

struct EtaSpectrumReport {
    std::vector<double> eigenvalues;  // ascending, all four
    std::vector<int> multiplicities;  // per distinct eigenvalue, ascending
    double singlet_eigenvalue = 0.0;  // eigenvalue of the singlet eigenvector
    double singlet_overlap = 0.0;     // |<psi|v_min>|
    double discrepancy = 0.0;         // worst deviation from the expected claim
    bool pass = false;
};

// Checks that the operator has eigenvalues {-3 (x1), +1 (x3)} and that the
// -3 eigenvector coincides with the singlet up to global phase.
inline EtaSpectrumReport eta_spectrum_report(const ComplexMatrix& op, double tol = 1e-9) {
    EtaSpectrumReport rep;
    const qmath::Spectrum decomp = qmath::hermitian_eigen(op, tol);
    rep.eigenvalues = decomp.eigenvalues;

    // cluster for multiplicities
    for (std::size_t i = 0; i < decomp.eigenvalues.size(); ++i) {
        if (i == 0 || decomp.eigenvalues[i] - decomp.eigenvalues[i - 1] > tol)
            rep.multiplicities.push_back(1);
        else
            rep.multiplicities.back() += 1;
    }

    const std::vector<double> expected = {-3.0, 1.0, 1.0, 1.0};
    double dev = 0.0;
    if (decomp.eigenvalues.size() != expected.size()) {
        dev = 1.0;
    } else {
        for (std::size_t i = 0; i < expected.size(); ++i)
            dev = std::max(dev, std::abs(decomp.eigenvalues[i] - expected[i]));
    }

    rep.singlet_eigenvalue = decomp.eigenvalues.front();
    rep.singlet_overlap = std::abs(singlet_state().inner(decomp.eigenvectors.front()));

    rep.discrepancy = std::max(dev, 1.0 - rep.singlet_overlap);
    rep.pass = dev <= tol && rep.singlet_overlap >= 1.0 - tol;
    return rep;
}

inline EtaSpectrumReport eta_spectrum_report(double tol = 1e-9) {
    return eta_spectrum_report(dot_operator(), tol);
}

// Throwing form: returns the report on success, raises verification_failed
// (carrying the measured discrepancy) otherwise.
inline EtaSpectrumReport verify_eta_spectrum(const ComplexMatrix& op, double tol = 1e-9) {
    EtaSpectrumReport rep = eta_spectrum_report(op, tol);
    if (!rep.pass)
        throw verification_failed("eta spectrum verification failed", rep.discrepancy);
    return rep;
}

inline EtaSpectrumReport verify_eta_spectrum(double tol = 1e-9) {
    return verify_eta_spectrum(dot_operator(), tol);
}

}  // namespace belllab::spin
