#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rdlab {

/// Structural problems with a triangulation, tagged so callers can tell a
/// malformed file from a geometrically invalid mesh.
class MeshError : public std::runtime_error {
public:
    enum class Kind { Malformed, Orientation, Degenerate, Conformity, BoundaryFlags, Io };

    MeshError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Iterative solver gave up before reaching the requested tolerance.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double achieved_residual, std::size_t iterations)
        : std::runtime_error(what), residual_(achieved_residual), iterations_(iterations)
    {
    }

    [[nodiscard]] double achieved_residual() const noexcept { return residual_; }
    [[nodiscard]] std::size_t iterations() const noexcept { return iterations_; }

private:
    double residual_;
    std::size_t iterations_;
};

/// An estimator was asked to evaluate outside the reaction range on which
/// its bound is proven.
class RangeError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace rdlab
