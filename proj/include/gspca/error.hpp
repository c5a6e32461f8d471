#pragma once

#include <stdexcept>
#include <string>

namespace gspca {

/// Malformed argument: wrong shape, non-finite entries, out-of-range index.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A rank precondition does not hold (e.g. linearly dependent components).
class RankDeficient : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gspca
