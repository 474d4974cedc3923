#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cpes {

/// Base of every error the toolkit throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or schema-violating input document. `where()` is a JSON path
/// ("attack.functional_level[0]") or a byte offset for syntax errors.
class ParseError : public Error {
public:
    ParseError(std::string where, const std::string& what)
        : Error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

/// A structurally valid input that breaks a domain invariant
/// (non-permutation priorities, inconsistent matrix dimensions, unresolved tap).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Failure while stepping a simulation. Carries the macro-step index and the
/// asset involved so the caller can point at the offending model element.
class SimulationError : public Error {
public:
    SimulationError(const std::string& what, std::size_t step, std::string asset = {})
        : Error(what + " (step " + std::to_string(step) + (asset.empty() ? "" : ", asset " + asset) + ")"),
          step_(step), asset_(std::move(asset)) {}

    std::size_t step() const noexcept { return step_; }
    const std::string& asset() const noexcept { return asset_; }

private:
    std::size_t step_;
    std::string asset_;
};

}  // namespace cpes
