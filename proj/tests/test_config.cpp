#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "bsdelab/config.hpp"
#include "bsdelab/errors.hpp"

using namespace bsdelab;

namespace {

std::string base_config() {
    return "[run]\n"
           "kind = price\n"
           "paths = 500\n"
           "steps = 10\n"
           "seed = 42\n"
           "horizon = 1.0\n"
           "[market]\n"
           "rate = 0.05\n"
           "excess = 0.06\n"
           "vol = 0.2\n"
           "spot = 100\n"
           "[claim]\n"
           "name = call\n"
           "strike = 100\n";
}

std::string drop_line(std::string text, const std::string& needle) {
    std::size_t pos = text.find(needle);
    REQUIRE(pos != std::string::npos);
    std::size_t end = text.find('\n', pos);
    text.erase(pos, end - pos + 1);
    return text;
}

}  // namespace

TEST_CASE("a minimal pricing config parses") {
    ExperimentConfig cfg = parse_config(base_config());
    CHECK(cfg.kind == ExperimentKind::Price);
    CHECK(cfg.paths == 500);
    CHECK(cfg.steps == 10);
    CHECK(cfg.seed == 42);
    CHECK(cfg.horizon == 1.0);
    CHECK(cfg.degree == 4);
    CHECK(cfg.out_dir == ".");
    CHECK(cfg.model.d == 1);
    CHECK(cfg.model.constant_coefficients);
    REQUIRE(cfg.claim.has_value());
    std::vector<double> state{1.0, 150.0};
    CHECK(cfg.claim->payoff(state) == 50.0);
    CHECK(!cfg.borrow_rate.has_value());
    CHECK(!cfg.constraint.has_value());
}

TEST_CASE("comments, blank lines, and spacing are tolerated") {
    std::string text = "# leading comment\n\n[run]\n  kind=price  # trailing\n"
                       "paths = 500\nsteps=10\n seed =  42\nhorizon = 1.0\n\n"
                       "[market]\nrate=0.05\nexcess=0.06\nvol=0.2\nspot=100\n"
                       "[claim]\nname= call\nstrike =100\n";
    ExperimentConfig cfg = parse_config(text);
    CHECK(cfg.seed == 42);
    CHECK(cfg.kind == ExperimentKind::Price);
}

TEST_CASE("missing seed is named in the error") {
    std::string text = drop_line(base_config(), "seed");
    try {
        parse_config(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string what = e.what();
        CHECK(what.find("seed") != std::string::npos);
        CHECK(e.field() == "run.seed");
    }
}

TEST_CASE("unknown, duplicate, and orphan keys are rejected") {
    CHECK_THROWS_AS(parse_config(base_config() + "[run]\njunk = 3\n"), ConfigError);
    try {
        parse_config(base_config() + "[run]\njunk = 3\n");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "run.junk");
        CHECK(std::string(e.what()).find("unknown") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config(base_config() + "[run]\nseed = 7\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("kind = price\n" + base_config()), ConfigError);
}

TEST_CASE("malformed values are rejected with the field name") {
    auto expect_field = [](const std::string& text, const std::string& field) {
        try {
            parse_config(text);
            FAIL_CHECK("expected ConfigError for ", field);
        } catch (const ConfigError& e) {
            CHECK(e.field() == field);
        }
    };
    expect_field(base_config() + "[run]\ndegree = four\n", "run.degree");
    std::string bad_paths = drop_line(base_config(), "paths") + "[run]\npaths = abc\n";
    expect_field(bad_paths, "run.paths");
    std::string neg_horizon = drop_line(base_config(), "horizon") + "[run]\nhorizon = -1\n";
    expect_field(neg_horizon, "run.horizon");
    std::string zero_steps = drop_line(base_config(), "steps") + "[run]\nsteps = 0\n";
    expect_field(zero_steps, "run.steps");
    std::string one_path = drop_line(base_config(), "paths") + "[run]\npaths = 1\n";
    expect_field(one_path, "run.paths");
}

TEST_CASE("too few paths for the regression features") {
    std::string text = drop_line(base_config(), "paths") + "[run]\npaths = 3\n";
    try {
        parse_config(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "run.paths");
        CHECK(std::string(e.what()).find("features") != std::string::npos);
    }
}

TEST_CASE("multi-asset constant-coefficient market") {
    std::string text = "[run]\nkind = validate\npaths = 500\nsteps = 10\nseed = 1\n"
                       "horizon = 0.5\n"
                       "[market]\nmodel = constants\nrate = 0.03\n"
                       "excess = 0.05, 0.02\n"
                       "vol = 0.3, 0.1; 0.05, 0.25\n"
                       "spot = 100, 50\n";
    ExperimentConfig cfg = parse_config(text);
    CHECK(cfg.kind == ExperimentKind::Validate);
    CHECK(cfg.model.d == 2);
    CHECK(cfg.model.n == 2);
    CHECK(cfg.model.initial_prices(1) == 50.0);
    CHECK(!cfg.claim.has_value());
}

TEST_CASE("borrow-price needs a borrowing rate at least the riskless rate") {
    std::string missing = base_config();
    missing.replace(missing.find("kind = price"), 12, "kind = borrow-price");
    CHECK_THROWS_AS(parse_config(missing), ConfigError);

    std::string ok = missing + "[borrowing]\nrate = 0.07\nbeta_points = 5\n";
    ExperimentConfig cfg = parse_config(ok);
    CHECK(cfg.borrow_rate == 0.07);
    CHECK(cfg.beta_points == 5);

    std::string low = missing + "[borrowing]\nrate = 0.01\n";
    try {
        parse_config(low);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "borrowing.rate");
    }
}

TEST_CASE("utility configs parse each constraint variant") {
    std::string head = "[run]\nkind = utility\npaths = 500\nsteps = 10\nseed = 3\n"
                       "horizon = 1.0\n"
                       "[market]\nrate = 0.05\nexcess = 0.06\nvol = 0.2\nspot = 100\n"
                       "[utility]\ninitial_wealth = 1.5\n";
    ExperimentConfig box =
        parse_config(head + "[constraint]\nkind = box\nlower = 0\nupper = 0.5\n");
    CHECK(box.initial_wealth == 1.5);
    CHECK(std::holds_alternative<BoxSet>(*box.constraint));

    ExperimentConfig ball =
        parse_config(head + "[constraint]\nkind = ball\ncenter = 0\nradius = 0.25\n");
    CHECK(std::holds_alternative<BallSet>(*ball.constraint));

    ExperimentConfig points =
        parse_config(head + "[constraint]\nkind = points\npoints = 0.4; -0.1\n");
    CHECK(std::get<FinitePointSet>(*points.constraint).points.size() == 2);

    ExperimentConfig full = parse_config(head + "[constraint]\nkind = full\n");
    CHECK(std::holds_alternative<FullSpace>(*full.constraint));

    CHECK_THROWS_AS(parse_config(head + "[constraint]\nkind = cone\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(head), ConfigError);  // constraint required
    // dimension mismatch: two entries against one asset
    CHECK_THROWS_AS(
        parse_config(head + "[constraint]\nkind = box\nlower = 0, 0\nupper = 1, 1\n"),
        ConfigError);
}

TEST_CASE("custom claim expressions run through the parser") {
    std::string text = drop_line(drop_line(base_config(), "name"), "strike") +
                       "[claim]\nname = custom\nexpr = max(P1 - 100, 0) / 2\n";
    ExperimentConfig cfg = parse_config(text);
    std::vector<double> state{1.0, 150.0};
    CHECK(cfg.claim->payoff(state) == 25.0);

    std::string bad = drop_line(drop_line(base_config(), "name"), "strike") +
                      "[claim]\nname = custom\nexpr = max(P9, 0)\n";
    try {
        parse_config(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "claim.expr");
    }
}

TEST_CASE("asset index is range checked") {
    std::string text = drop_line(drop_line(base_config(), "name"), "strike") +
                       "[claim]\nname = asset\nasset = 2\n";
    try {
        parse_config(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "claim.asset");
    }
}

TEST_CASE("overrides update both the fields and the echo") {
    ExperimentConfig cfg = parse_config(base_config());
    ConfigOverrides overrides;
    overrides.seed = 99;
    overrides.paths = 600;
    overrides.out_dir = "elsewhere";
    apply_overrides(cfg, overrides);
    CHECK(cfg.seed == 99);
    CHECK(cfg.paths == 600);
    CHECK(cfg.steps == 10);
    CHECK(cfg.out_dir == "elsewhere");
    bool seed_echoed = false, out_echoed = false;
    for (const auto& [key, value] : cfg.echo) {
        if (key == "run.seed") {
            CHECK(value == "99");
            seed_echoed = true;
        }
        if (key == "run.out") {
            CHECK(value == "elsewhere");
            out_echoed = true;
        }
    }
    CHECK(seed_echoed);
    CHECK(out_echoed);
}

TEST_CASE("kind names round-trip") {
    CHECK(to_string(ExperimentKind::Price) == "price");
    CHECK(to_string(ExperimentKind::BorrowPrice) == "borrow-price");
    CHECK(to_string(ExperimentKind::Utility) == "utility");
    CHECK(to_string(ExperimentKind::Solve) == "solve");
    CHECK(to_string(ExperimentKind::Validate) == "validate");
}

TEST_CASE("missing config file is a config error") {
    CHECK_THROWS_AS(load_config("/nonexistent/path.cfg"), ConfigError);
}
