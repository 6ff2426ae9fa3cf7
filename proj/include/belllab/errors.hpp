// errors.hpp
// Exception types shared across the belllab library.

#pragma once

#include <stdexcept>
#include <string>

namespace belllab {

class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// qmath
struct dimension_mismatch : error {
    using error::error;
};
struct not_hermitian : error {
    using error::error;
};
struct no_convergence : error {
    using error::error;
};
struct not_unitary : error {
    using error::error;
};

// spin
struct not_unit : error {
    using error::error;
};
struct verification_failed : error {
    double discrepancy;
    verification_failed(const std::string& what, double d) : error(what), discrepancy(d) {}
};

// models
struct angle_out_of_range : error {
    using error::error;
};

// relatedness
struct degenerate_spectrum : error {
    using error::error;
};
struct not_related : error {
    using error::error;
};
struct index_space_mismatch : error {
    using error::error;
};
struct bad_group : error {
    using error::error;
};

// bellsim
struct invalid_config : error {
    using error::error;
};
struct protocol_violation : error {
    using error::error;
};
struct insufficient_data : error {
    using error::error;
};
struct inconsistent_marginals : error {
    using error::error;
};

}  // namespace belllab
