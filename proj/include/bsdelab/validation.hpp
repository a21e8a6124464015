#pragma once

#include <string>
#include <vector>

#include "bsdelab/config.hpp"

namespace bsdelab {

// One invariant checked at the configured scale.  `measured` is the observed
// statistic and `allowed` the threshold it must not exceed; `detail` says
// what was compared.  Exceptions inside a check mark it failed and carry the
// message; a tripped solver precondition additionally flags the report as a
// numerical failure (distinct exit code at the CLI).
struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double allowed = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    bool numerical_failure = false;

    bool all_passed() const {
        for (const CheckResult& c : checks) {
            if (!c.passed) return false;
        }
        return true;
    }
};

// Runs the cross-module invariant suite on the configured market at the
// configured scale.  Statistical tolerances are multiples of measured
// standard errors; relative agreement tolerances widen by sqrt(1e5 / paths)
// below the reference path count, so reduced-path runs still pass.
ValidationReport run_validation_suite(const ExperimentConfig& config);

}  // namespace bsdelab
