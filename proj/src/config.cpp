#include "bsdelab/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "bsdelab/claim_expr.hpp"
#include "bsdelab/errors.hpp"
#include "bsdelab/regression.hpp"

namespace bsdelab {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = 0, end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

// Ordered key/value store with consumption tracking, so leftovers can be
// rejected by name after the typed extraction pass.
class KeyStore {
public:
    void insert(const std::string& key, const std::string& value, std::size_t line) {
        if (values_.count(key) != 0) {
            throw ConfigError(key, "duplicate key (line " + std::to_string(line) + ")");
        }
        values_[key] = value;
        order_.emplace_back(key, value);
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::optional<std::string> take(const std::string& key) {
        auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        consumed_.insert(key);
        return it->second;
    }

    std::string require(const std::string& key) {
        auto value = take(key);
        if (!value) throw ConfigError(key, "missing required key");
        return *value;
    }

    void reject_leftovers() const {
        for (const auto& [key, value] : values_) {
            if (consumed_.count(key) == 0) throw ConfigError(key, "unknown key");
        }
    }

    const std::vector<std::pair<std::string, std::string>>& entries() const { return order_; }

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
    std::vector<std::pair<std::string, std::string>> order_;
};

double to_double(const std::string& key, const std::string& text) {
    std::string t = trim(text);
    if (t.empty()) throw ConfigError(key, "empty value");
    char* end = nullptr;
    double value = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) throw ConfigError(key, "'" + t + "' is not a number");
    if (!std::isfinite(value)) throw ConfigError(key, "value must be finite");
    return value;
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
    std::string t = trim(text);
    if (t.empty() || t[0] == '-') throw ConfigError(key, "'" + t + "' is not a non-negative integer");
    char* end = nullptr;
    unsigned long long value = std::strtoull(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size()) {
        throw ConfigError(key, "'" + t + "' is not a non-negative integer");
    }
    return static_cast<std::uint64_t>(value);
}

std::size_t to_size(const std::string& key, const std::string& text) {
    return static_cast<std::size_t>(to_u64(key, text));
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        if (c == sep) {
            out.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    out.push_back(current);
    return out;
}

Eigen::VectorXd to_vector(const std::string& key, const std::string& text) {
    std::vector<std::string> parts = split(text, ',');
    Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = to_double(key, parts[i]);
    }
    return v;
}

// Rows separated by ';', entries by ','.
Eigen::MatrixXd to_matrix(const std::string& key, const std::string& text) {
    std::vector<std::string> rows = split(text, ';');
    std::vector<Eigen::VectorXd> parsed;
    parsed.reserve(rows.size());
    for (const std::string& row : rows) parsed.push_back(to_vector(key, row));
    Eigen::MatrixXd m(static_cast<Eigen::Index>(parsed.size()), parsed[0].size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        if (parsed[i].size() != m.cols()) throw ConfigError(key, "ragged matrix rows");
        m.row(static_cast<Eigen::Index>(i)) = parsed[i];
    }
    return m;
}

MarketModel build_market(KeyStore& store) {
    std::string flavor = trim(store.take("market.model").value_or("black-scholes"));
    try {
        if (flavor == "black-scholes") {
            return MarketModel::black_scholes(
                to_double("market.rate", store.require("market.rate")),
                to_double("market.excess", store.require("market.excess")),
                to_double("market.vol", store.require("market.vol")),
                to_double("market.spot", store.require("market.spot")));
        }
        if (flavor == "constants") {
            return MarketModel::constants(
                to_double("market.rate", store.require("market.rate")),
                to_vector("market.excess", store.require("market.excess")),
                to_matrix("market.vol", store.require("market.vol")),
                to_vector("market.spot", store.require("market.spot")));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("market", e.what());
    }
    throw ConfigError("market.model", "'" + flavor +
                      "' is not a model (expected black-scholes or constants)");
}

ClaimSpec build_claim(KeyStore& store, std::size_t n_assets) {
    std::string name = trim(store.require("claim.name"));
    auto strike = [&] { return to_double("claim.strike", store.require("claim.strike")); };
    auto asset = [&] {
        std::size_t index = store.has("claim.asset")
                                ? to_size("claim.asset", *store.take("claim.asset"))
                                : 1;
        if (index < 1 || index > n_assets) {
            throw ConfigError("claim.asset", "asset index must lie in [1, " +
                                             std::to_string(n_assets) + "]");
        }
        return index;
    };
    if (name == "call") return ClaimSpec::call(strike(), asset());
    if (name == "put") return ClaimSpec::put(strike(), asset());
    if (name == "digital") return ClaimSpec::digital(strike(), asset());
    if (name == "bond") return ClaimSpec::bond();
    if (name == "asset") return ClaimSpec::asset(asset());
    if (name == "custom") {
        std::string expr = store.require("claim.expr");
        try {
            return parse_claim(trim(expr), n_assets);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("claim.expr", e.what());
        }
    }
    throw ConfigError("claim.name", "'" + name +
                      "' is not a claim (expected call, put, digital, bond, asset, custom)");
}

ConstraintSet build_constraint(KeyStore& store, std::size_t d) {
    std::string kind = trim(store.require("constraint.kind"));
    ConstraintSet built;
    if (kind == "full") {
        built = FullSpace{};
    } else if (kind == "box") {
        built = BoxSet{to_vector("constraint.lower", store.require("constraint.lower")),
                       to_vector("constraint.upper", store.require("constraint.upper"))};
    } else if (kind == "ball") {
        built = BallSet{to_vector("constraint.center", store.require("constraint.center")),
                        to_double("constraint.radius", store.require("constraint.radius"))};
    } else if (kind == "points") {
        std::vector<Eigen::VectorXd> points;
        for (const std::string& row : split(store.require("constraint.points"), ';')) {
            points.push_back(to_vector("constraint.points", row));
        }
        built = FinitePointSet{std::move(points)};
    } else {
        throw ConfigError("constraint.kind", "'" + kind +
                          "' is not a constraint (expected full, box, ball, points)");
    }
    try {
        validate_constraint(built, d);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("constraint", e.what());
    }
    return built;
}

ExperimentKind parse_kind(const std::string& text) {
    if (text == "price") return ExperimentKind::Price;
    if (text == "borrow-price") return ExperimentKind::BorrowPrice;
    if (text == "utility") return ExperimentKind::Utility;
    if (text == "solve") return ExperimentKind::Solve;
    if (text == "validate") return ExperimentKind::Validate;
    throw ConfigError("run.kind", "'" + text +
                      "' is not an experiment kind (expected price, borrow-price, "
                      "utility, solve, validate)");
}

void set_echo(std::vector<std::pair<std::string, std::string>>& echo,
              const std::string& key, const std::string& value) {
    for (auto& [k, v] : echo) {
        if (k == key) {
            v = value;
            return;
        }
    }
    echo.emplace_back(key, value);
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Price: return "price";
        case ExperimentKind::BorrowPrice: return "borrow-price";
        case ExperimentKind::Utility: return "utility";
        case ExperimentKind::Solve: return "solve";
        case ExperimentKind::Validate: return "validate";
    }
    return "?";
}

ExperimentConfig parse_config(const std::string& text) {
    KeyStore store;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("config", "unterminated section header on line " +
                                            std::to_string(line_no));
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) {
                throw ConfigError("config", "empty section name on line " +
                                            std::to_string(line_no));
            }
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config", "expected key = value on line " +
                                        std::to_string(line_no));
        }
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw ConfigError("config", "empty key on line " + std::to_string(line_no));
        }
        if (section.empty()) {
            throw ConfigError(key, "key appears before any [section]");
        }
        store.insert(section + "." + key, trim(line.substr(eq + 1)), line_no);
    }

    ExperimentConfig config;
    config.kind = parse_kind(trim(store.require("run.kind")));
    config.paths = to_size("run.paths", store.require("run.paths"));
    config.steps = to_size("run.steps", store.require("run.steps"));
    config.seed = to_u64("run.seed", store.require("run.seed"));
    config.horizon = to_double("run.horizon", store.require("run.horizon"));
    if (auto v = store.take("run.degree")) config.degree = to_size("run.degree", *v);
    if (auto v = store.take("run.out")) config.out_dir = trim(*v);

    if (config.paths < 2) throw ConfigError("run.paths", "need at least 2 paths");
    if (config.steps < 1) throw ConfigError("run.steps", "need at least 1 step");
    if (!(config.horizon > 0.0)) throw ConfigError("run.horizon", "must be positive");
    if (config.out_dir.empty()) throw ConfigError("run.out", "must name a directory");

    config.model = build_market(store);
    if (config.kind == ExperimentKind::BorrowPrice && config.model.d != config.model.n) {
        throw ConfigError("run.kind", "borrow-price needs as many risky assets as "
                                      "Brownian dimensions");
    }

    RegressionBasis basis =
        RegressionBasis::log_price_monomials(config.degree, config.model.initial_prices);
    if (config.paths < basis.count) {
        throw ConfigError("run.paths", "need at least as many paths as the " +
                                       std::to_string(basis.count) +
                                       " regression features of degree " +
                                       std::to_string(config.degree));
    }

    const bool needs_claim = config.kind == ExperimentKind::Price ||
                             config.kind == ExperimentKind::BorrowPrice ||
                             config.kind == ExperimentKind::Solve;
    if (needs_claim || store.has("claim.name")) {
        config.claim = build_claim(store, config.model.d);
    }

    if (config.kind == ExperimentKind::BorrowPrice || store.has("borrowing.rate")) {
        double borrow = to_double("borrowing.rate", store.require("borrowing.rate"));
        std::vector<double> state(config.model.d + 1, 1.0);
        for (std::size_t i = 0; i < config.model.d; ++i) {
            state[i + 1] = config.model.initial_prices(static_cast<Eigen::Index>(i));
        }
        double base = config.model.rate(0.0, state);
        if (borrow < base) {
            throw ConfigError("borrowing.rate", "borrowing rate must be at least the "
                                                "riskless rate");
        }
        config.borrow_rate = borrow;
    }
    if (auto v = store.take("borrowing.beta_points")) {
        config.beta_points = to_size("borrowing.beta_points", *v);
        if (config.beta_points < 1) {
            throw ConfigError("borrowing.beta_points", "need at least one grid point");
        }
    }

    if (config.kind == ExperimentKind::Utility || store.has("constraint.kind")) {
        config.constraint = build_constraint(store, config.model.d);
    }
    if (auto v = store.take("utility.initial_wealth")) {
        config.initial_wealth = to_double("utility.initial_wealth", *v);
        if (!(config.initial_wealth > 0.0)) {
            throw ConfigError("utility.initial_wealth", "must be positive");
        }
    }

    store.reject_leftovers();
    config.echo = store.entries();
    set_echo(config.echo, "run.degree", std::to_string(config.degree));
    set_echo(config.echo, "run.out", config.out_dir);
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

void apply_overrides(ExperimentConfig& config, const ConfigOverrides& overrides) {
    if (overrides.seed) {
        config.seed = *overrides.seed;
        set_echo(config.echo, "run.seed", std::to_string(config.seed));
    }
    if (overrides.paths) {
        if (*overrides.paths < 2) throw ConfigError("run.paths", "need at least 2 paths");
        config.paths = *overrides.paths;
        set_echo(config.echo, "run.paths", std::to_string(config.paths));
    }
    if (overrides.steps) {
        if (*overrides.steps < 1) throw ConfigError("run.steps", "need at least 1 step");
        config.steps = *overrides.steps;
        set_echo(config.echo, "run.steps", std::to_string(config.steps));
    }
    if (overrides.out_dir) {
        if (overrides.out_dir->empty()) throw ConfigError("run.out", "must name a directory");
        config.out_dir = *overrides.out_dir;
        set_echo(config.echo, "run.out", config.out_dir);
    }
}

}  // namespace bsdelab
