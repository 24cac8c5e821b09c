#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dbro {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using AgentId = std::size_t;

/// Base class for all recoverable library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or violated precondition on user input.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A run produced a non-finite state.
class DivergenceError : public Error {
public:
    DivergenceError(std::size_t iteration, const std::string& what)
        : Error(what), iteration_(iteration) {}
    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

} // namespace dbro
