#pragma once
// Exception types beyond the std ones. std::domain_error marks inputs outside
// a model's domain (t > T, m >= M, bad grids); std::invalid_argument marks bad
// options.

#include <stdexcept>
#include <string>

namespace bermudan {

/// Shape mismatch between objects that must agree (network vs inputs,
/// hedge vs contract).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation produced a non-finite or degenerate number.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File or record could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace bermudan
