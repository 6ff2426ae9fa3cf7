#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "belllab/spin.hpp"
#include "test_support.hpp"

using namespace belllab;
using namespace belllab::spin;
using qmath::ComplexMatrix;
using qmath::ComplexVector;
using qmath::cplx;
using test_support::max_abs_diff;

namespace {

// exact 2x2 spin representation of a rotation by theta about a coordinate
// axis: U = cos(theta/2) I + i sin(theta/2) sigma_axis
ComplexMatrix axis_rotation_spin(Axis axis, double theta) {
    const cplx c{std::cos(theta / 2.0), 0.0};
    const cplx is{0.0, std::sin(theta / 2.0)};
    return ComplexMatrix::identity(2) * c + pauli(axis) * is;
}

// matching 3x3 rotation applied to a direction
Direction rotate_direction(Axis axis, double theta, const Direction& v) {
    const double c = std::cos(theta), s = std::sin(theta);
    switch (axis) {
        case Axis::x: return Direction(v.x, c * v.y - s * v.z, s * v.y + c * v.z);
        case Axis::y: return Direction(c * v.x + s * v.z, v.y, -s * v.x + c * v.z);
        case Axis::z:
        default: return Direction(c * v.x - s * v.y, s * v.x + c * v.y, v.z);
    }
}

}  // namespace

TEST_CASE("pauli matrices: canonical entries and algebra") {
    const ComplexMatrix sz = pauli(Axis::z);
    REQUIRE(sz(0, 0) == cplx{1, 0});
    REQUIRE(sz(1, 1) == cplx{-1, 0});
    REQUIRE(sz(0, 1) == cplx{0, 0});

    const ComplexMatrix sx = pauli(Axis::x);
    REQUIRE(max_abs_diff(sx * sx, ComplexMatrix::identity(2)) == 0.0);

    // sx * sy = i sz
    const ComplexMatrix sy = pauli(Axis::y);
    REQUIRE(max_abs_diff(sx * sy, sz * cplx{0, 1}) == 0.0);
}

TEST_CASE("spin component operator along the axes") {
    REQUIRE(max_abs_diff(spin_component_operator(Direction(0, 0, 1)), pauli(Axis::z)) == 0.0);
    REQUIRE(max_abs_diff(spin_component_operator(Direction(1, 0, 0)), pauli(Axis::x)) == 0.0);
}

TEST_CASE("spin component operator: Hermitian, squares to identity, eigenvalues +/-1") {
    rng::Stream stream(5);
    for (int trial = 0; trial < 50; ++trial) {
        const Direction a = test_support::random_direction(stream);
        const ComplexMatrix op = spin_component_operator(a);
        REQUIRE(op.hermiticity_defect() <= 1e-15);
        REQUIRE(std::abs(op.trace()) <= 1e-15);
        REQUIRE(max_abs_diff(op * op, ComplexMatrix::identity(2)) <= 1e-10);
        const qmath::Spectrum s = qmath::hermitian_eigen(op);
        REQUIRE(s.eigenvalues[0] == Catch::Approx(-1.0).margin(1e-10));
        REQUIRE(s.eigenvalues[1] == Catch::Approx(1.0).margin(1e-10));
    }
}

TEST_CASE("direction must be unit") {
    REQUIRE_THROWS_AS(Direction(1.0, 1.0, 0.0), not_unit);
}

TEST_CASE("rotational covariance for axis rotations") {
    rng::Stream stream(17);
    for (Axis axis : {Axis::x, Axis::y, Axis::z}) {
        for (int trial = 0; trial < 12; ++trial) {
            const double theta = 2.0 * kPi * stream.next_double();
            const Direction a = test_support::random_direction(stream);
            const ComplexMatrix u = axis_rotation_spin(axis, theta);
            REQUIRE(qmath::is_unitary(u, 1e-12));
            const ComplexMatrix lhs = qmath::unitary_conjugate(spin_component_operator(a), u);
            const ComplexMatrix rhs = spin_component_operator(rotate_direction(axis, theta, a));
            REQUIRE(max_abs_diff(lhs, rhs) <= 1e-9);
        }
    }
}

TEST_CASE("singlet state: norm, amplitude pattern, swap antisymmetry") {
    const ComplexVector psi = singlet_state();
    REQUIRE(psi.dim() == 4);
    REQUIRE(psi.norm() == Catch::Approx(1.0).margin(1e-12));
    const double c = 1.0 / std::numbers::sqrt2;
    REQUIRE(std::abs(psi[0]) == 0.0);
    REQUIRE(psi[1].real() == Catch::Approx(c).margin(1e-15));
    REQUIRE(psi[2].real() == Catch::Approx(-c).margin(1e-15));
    REQUIRE(std::abs(psi[3]) == 0.0);

    // particle-label swap permutes the middle basis states: |psi> -> -|psi>
    ComplexMatrix swap(4, 4);
    swap(0, 0) = swap(3, 3) = cplx{1, 0};
    swap(1, 2) = swap(2, 1) = cplx{1, 0};
    const ComplexVector swapped = swap * psi;
    REQUIRE((swapped - psi * cplx{-1.0, 0.0}).norm() <= 1e-15);
}

TEST_CASE("singlet expectation of sigma_z x sigma_z is -1") {
    const ComplexVector psi = singlet_state();
    const ComplexMatrix zz = qmath::tensor_product(pauli(Axis::z), pauli(Axis::z));
    REQUIRE(psi.inner(zz * psi).real() == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("singlet anticorrelation in every direction") {
    rng::Stream stream(23);
    const ComplexVector psi = singlet_state();
    for (int trial = 0; trial < 25; ++trial) {
        const Direction a = test_support::random_direction(stream);
        const ComplexMatrix op = spin_component_operator(a);
        const ComplexMatrix aa = qmath::tensor_product(op, op);
        REQUIRE(psi.inner(aa * psi).real() == Catch::Approx(-1.0).margin(1e-12));
    }
}

TEST_CASE("dot operator: trace, entries, action on the singlet") {
    const ComplexMatrix eta = dot_operator();
    REQUIRE(std::abs(eta.trace()) == 0.0);

    // hand-expanded sum of the three Kronecker products
    const ComplexMatrix expected{{cplx{1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{0, 0}},
                                 {cplx{0, 0}, cplx{-1, 0}, cplx{2, 0}, cplx{0, 0}},
                                 {cplx{0, 0}, cplx{2, 0}, cplx{-1, 0}, cplx{0, 0}},
                                 {cplx{0, 0}, cplx{0, 0}, cplx{0, 0}, cplx{1, 0}}};
    REQUIRE(max_abs_diff(eta, expected) == 0.0);

    // A^eta |psi> = -3 |psi>
    const ComplexVector psi = singlet_state();
    const ComplexVector scaled = psi * cplx{-3.0, 0.0};
    REQUIRE((eta * psi - scaled).norm() <= 1e-14);
}

TEST_CASE("verify_eta_spectrum passes for the dot operator") {
    const EtaSpectrumReport rep = verify_eta_spectrum(1e-9);
    REQUIRE(rep.pass);
    REQUIRE(rep.singlet_eigenvalue == Catch::Approx(-3.0).margin(1e-9));
    REQUIRE(rep.singlet_overlap >= 1.0 - 1e-9);
    REQUIRE(rep.multiplicities == std::vector<int>{1, 3});
}

TEST_CASE("verify_eta_spectrum flags a perturbed operator") {
    ComplexMatrix bad = dot_operator();
    bad(0, 0) += cplx{0.1, 0.0};
    REQUIRE_THROWS_AS(verify_eta_spectrum(bad, 1e-9), verification_failed);
    const EtaSpectrumReport rep = eta_spectrum_report(bad, 1e-9);
    REQUIRE_FALSE(rep.pass);
    REQUIRE(rep.discrepancy > 1e-9);
}
