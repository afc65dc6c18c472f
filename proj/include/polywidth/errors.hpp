#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace polywidth {

/// Arguments that break an operation's preconditions (shapes, orthonormality, ranges).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A combinatorial count does not fit into 64 bits.
class ArithmeticOverflow : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// Least-squares correction is underdetermined without regularization.
class IllPosedFit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fewer usable points than a fit requires.
class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A non-finite value showed up during an iterative solve.
/// Carries the last iterate at which everything was finite.
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string &what, std::vector<double> last_finite)
        : std::runtime_error(what), last_finite_iterate(std::move(last_finite)) {}

    std::vector<double> last_finite_iterate;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace polywidth
