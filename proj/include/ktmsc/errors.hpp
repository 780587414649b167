#pragma once

#include <stdexcept>
#include <string>

namespace ktmsc {

// Bad shapes, out-of-range parameters, malformed inputs.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Non-finite iterates, factorization failures, corrupted spectral data.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition that selects between code paths.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class DatasetError : public std::runtime_error {
public:
    enum class Kind { missing_path, inconsistent_samples, bad_cell, bad_labels, empty };

    DatasetError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

}  // namespace ktmsc
