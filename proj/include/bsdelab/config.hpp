#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bsdelab/market.hpp"
#include "bsdelab/pricing.hpp"
#include "bsdelab/utility.hpp"

namespace bsdelab {

enum class ExperimentKind { Price, BorrowPrice, Utility, Solve, Validate };

std::string to_string(ExperimentKind kind);

// One fully validated experiment description.  Built from flat INI-style
// text: [section] headers, key = value pairs, '#' starts a comment.  Vector
// values separate entries with ',' and matrix rows / list items with ';'.
//
// Sections and keys:
//   [run]        kind, paths, steps, seed, horizon, degree?, out?
//   [market]     model (black-scholes | constants), rate, excess, vol, spot
//   [claim]      name (call | put | digital | bond | asset | custom),
//                strike?, asset?, expr?
//   [borrowing]  rate, beta_points?          (borrow-price runs)
//   [constraint] kind (full | box | ball | points), lower?, upper?,
//                center?, radius?, points?   (utility runs)
//   [utility]    initial_wealth?
//
// Unknown or duplicate keys, missing required keys, and out-of-range values
// all raise ConfigError naming the field.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Price;
    MarketModel model;
    double horizon = 1.0;
    std::size_t paths = 0;
    std::size_t steps = 0;
    std::uint64_t seed = 0;
    std::size_t degree = 4;
    std::string out_dir = ".";

    std::optional<ClaimSpec> claim;           // price / borrow-price / solve
    std::optional<double> borrow_rate;        // borrow-price
    std::size_t beta_points = 21;             // dual control grid size
    std::optional<ConstraintSet> constraint;  // utility
    double initial_wealth = 1.0;              // utility

    // Effective settings as (key, value) lines; enough to reproduce the run.
    std::vector<std::pair<std::string, std::string>> echo;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Command-line overrides applied on top of the file; the echo is updated so
// it stays sufficient to reproduce the effective run.
struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::size_t> steps;
    std::optional<std::string> out_dir;
};

void apply_overrides(ExperimentConfig& config, const ConfigOverrides& overrides);

}  // namespace bsdelab
