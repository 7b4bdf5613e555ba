#pragma once

#include "roughstokes/boundary_data.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace roughstokes {

struct QuadratureRule;

struct SuiteResult {
    std::string name;
    int checks = 0;
    std::vector<std::string> failures;

    bool passed() const { return failures.empty(); }
};

struct VerifyOptions {
    /// Replaces the library rules inside the quadrature suite; used to check
    /// that a corrupted rule is reported.
    std::function<QuadratureRule(bool triangle, int degree)> rule_source;
};

/// Piecewise-smooth datum on the unit square with a jump inside every side
/// and at the corners, shifted by a constant normal field so that its flux
/// vanishes. Deterministic in `seed`.
BoundaryDatum random_compatible_datum(std::uint64_t seed, JumpPolicy policy = JumpPolicy::LowerSegment);

/// quadrature, local-matrices, jumps, compatibility, dorfler.
const std::vector<std::string>& default_suites();
/// default_suites() plus table1 (the Mini uniform cavity chain).
const std::vector<std::string>& known_suites();

/// Throws std::invalid_argument for an unknown suite name.
SuiteResult run_suite(const std::string& name, const VerifyOptions& options = {});
std::vector<SuiteResult> run_suites(const std::vector<std::string>& names, const VerifyOptions& options = {});

}  // namespace roughstokes
