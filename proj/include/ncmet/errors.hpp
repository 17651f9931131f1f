#pragma once

#include <stdexcept>
#include <string>

namespace ncmet {

// Block layout of an element does not match its algebra, or operands live in
// different algebras.
struct StructureError : std::runtime_error {
    explicit StructureError(const std::string& what) : std::runtime_error(what) {}
};

// Input outside the mathematical domain of an operation (non-Hermitian where
// Hermitian is required, log at a nonpositive eigenvalue, ...).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Operation requires an inverse but a block is at or below the singularity
// floor.  Carries the offending singular value.
struct ConditioningError : std::runtime_error {
    ConditioningError(const std::string& what, double smallest_sv)
        : std::runtime_error(what), smallest_singular_value(smallest_sv) {}
    double smallest_singular_value;
};

// Bad experiment or system configuration.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// API misuse (mismatched horizons, unknown suite name, ...).
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

namespace tol {

// Relative Hermitian-check tolerance in ||.||_2; inputs within it are
// symmetrized before eigendecomposition.
inline constexpr double hermitian_check = 1e-10;

// Smallest singular value accepted for inversion, relative to ||x||_inf.
// Below it, operations fail loudly instead of regularizing.
inline constexpr double singularity_floor = 1e-12;

// Spectral-measure atoms closer than this (relative) are merged.
inline constexpr double atom_coalesce = 1e-9;

// Positive points closer than this in d_P compare equal.
inline constexpr double point_equality = 1e-10;

// Drift below this reports the zero-drift regime (limit operator = id).
inline constexpr double zero_drift = 1e-6;

}  // namespace tol

}  // namespace ncmet
