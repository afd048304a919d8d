#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace accel {

/// Spec or configuration values that cannot describe a valid instance.
struct InvalidSpec : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// The method or quantity requires strong convexity (mu > 0).
struct Inapplicable : std::domain_error {
    using std::domain_error::domain_error;
};

/// Arguments outside an operation's domain (time before t0, range mismatch...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// A non-finite iterate or flow state.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::size_t step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Internal cross-check between two algebraic routes failed.
struct ConsistencyError : std::logic_error {
    using std::logic_error::logic_error;
};

} // namespace accel
