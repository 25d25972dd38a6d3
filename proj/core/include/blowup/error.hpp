#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace blowup {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GridMismatch : public Error {
public:
    GridMismatch() : Error("fields live on different grids") {}
};

/// A Gaussian weight overflowed; `node` is the first offending index.
class WeightOverflow : public Error {
public:
    WeightOverflow(std::size_t node, double y)
        : Error("weight overflow at node " + std::to_string(node) + " (y = " + std::to_string(y) + ")"),
          node_(node) {}
    std::size_t node() const { return node_; }

private:
    std::size_t node_;
};

/// Precondition violated by the caller (negative time, p <= 1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// An iterative method failed; `history` holds the residual trail.
class ConvergenceFailure : public Error {
public:
    ConvergenceFailure(const std::string& what, std::vector<double> history = {})
        : Error(what), history_(std::move(history)) {}
    const std::vector<double>& history() const { return history_; }

private:
    std::vector<double> history_;
};

/// Decomposition left the neighbourhood where the splitting is defined.
class NeighborhoodExit : public Error {
public:
    using Error::Error;
};

}  // namespace blowup
