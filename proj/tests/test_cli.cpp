#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

// Drives the installed binary end to end through std::system.

namespace fs = std::filesystem;

namespace {

const fs::path kWorkDir = fs::temp_directory_path() / "bsdelab_cli_test";

int run_cli(const std::string& args) {
    std::string command = std::string(BSDELAB_CLI_PATH) + " " + args;
    int status = std::system(command.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string market_block() {
    return "[market]\nrate = 0.05\nexcess = 0.06\nvol = 0.2\nspot = 100\n";
}

std::string run_block(const std::string& kind, int paths, int steps, int seed,
                      const std::string& out) {
    std::ostringstream cfg;
    cfg << "[run]\nkind = " << kind << "\npaths = " << paths << "\nsteps = " << steps
        << "\nseed = " << seed << "\nhorizon = 1.0\nout = " << out << "\n";
    return cfg.str();
}

// name -> (value, stderr, method)
struct Row {
    double value = 0.0;
    double std_error = 0.0;
    std::string method;
};

std::map<std::string, Row> parse_csv(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    REQUIRE(std::getline(in, line));
    REQUIRE(line == "name,value,stderr,method");
    std::map<std::string, Row> rows;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) fields.push_back(cell);
        REQUIRE(fields.size() == 4);
        rows[fields[0]] = Row{std::strtod(fields[1].c_str(), nullptr),
                              std::strtod(fields[2].c_str(), nullptr), fields[3]};
    }
    return rows;
}

struct WorkDirCleaner {
    WorkDirCleaner() {
        fs::remove_all(kWorkDir);
        fs::create_directories(kWorkDir);
    }
} cleaner;

}  // namespace

TEST_CASE("bond pricing run hits the discount factor and the csv contract") {
    fs::path cfg = kWorkDir / "bond.cfg";
    fs::path out = kWorkDir / "bond_out";
    write_file(cfg, run_block("price", 10000, 12, 42, out.string()) + market_block() +
                        "[claim]\nname = bond\n");
    CHECK(run_cli("run " + cfg.string() + " > /dev/null") == 0);

    auto rows = parse_csv(out / "results.csv");
    REQUIRE(rows.count("price") == 1);
    CHECK(std::abs(rows["price"].value - std::exp(-0.05)) <= 0.01);
    CHECK(rows["price"].method == "deflator-mc");
    CHECK(rows["price"].std_error > 0.0);
    CHECK(rows.count("emm_price") == 1);
    CHECK(rows.count("hedge_rmse") == 1);

    std::string summary = read_file(out / "summary.txt");
    CHECK(summary.find("wall time") != std::string::npos);
    CHECK(summary.find("run.seed = 42") != std::string::npos);
    CHECK(summary.find("market.rate = 0.05") != std::string::npos);
}

TEST_CASE("reruns of one config are byte-identical; seeds change the bytes") {
    fs::path cfg = kWorkDir / "det.cfg";
    write_file(cfg, run_block("price", 4000, 8, 5, (kWorkDir / "det_a").string()) +
                        market_block() + "[claim]\nname = call\nstrike = 100\n");
    CHECK(run_cli("run " + cfg.string() + " > /dev/null") == 0);
    CHECK(run_cli("run " + cfg.string() + " --out " + (kWorkDir / "det_b").string() +
                  " > /dev/null") == 0);
    std::string a = read_file(kWorkDir / "det_a" / "results.csv");
    std::string b = read_file(kWorkDir / "det_b" / "results.csv");
    CHECK(a == b);

    CHECK(run_cli("run " + cfg.string() + " --out " + (kWorkDir / "det_c").string() +
                  " --seed 6 > /dev/null") == 0);
    CHECK(read_file(kWorkDir / "det_c" / "results.csv") != a);
    CHECK(run_cli("run " + cfg.string() + " --out " + (kWorkDir / "det_d").string() +
                  " --seed 6 > /dev/null") == 0);
    CHECK(read_file(kWorkDir / "det_d" / "results.csv") ==
          read_file(kWorkDir / "det_c" / "results.csv"));
}

TEST_CASE("missing seed exits 2 and the message names the field") {
    fs::path cfg = kWorkDir / "noseed.cfg";
    write_file(cfg, "[run]\nkind = price\npaths = 500\nsteps = 5\nhorizon = 1.0\n" +
                        market_block() + "[claim]\nname = bond\n");
    fs::path err = kWorkDir / "noseed.err";
    CHECK(run_cli("run " + cfg.string() + " 2> " + err.string()) == 2);
    CHECK(read_file(err).find("seed") != std::string::npos);
}

TEST_CASE("config mistakes exit 2") {
    fs::path junk = kWorkDir / "junk.cfg";
    write_file(junk, run_block("price", 500, 5, 1, (kWorkDir / "junk_out").string()) +
                         market_block() + "[claim]\nname = bond\n[run]\ntypo = 1\n");
    CHECK(run_cli("run " + junk.string() + " 2> /dev/null") == 2);

    CHECK(run_cli("run " + (kWorkDir / "missing.cfg").string() + " 2> /dev/null") == 2);

    fs::path bad_horizon = kWorkDir / "badh.cfg";
    write_file(bad_horizon,
               "[run]\nkind = price\npaths = 500\nsteps = 5\nseed = 1\nhorizon = -2\n" +
                   market_block() + "[claim]\nname = bond\n");
    CHECK(run_cli("run " + bad_horizon.string() + " 2> /dev/null") == 2);

    CHECK(run_cli("2> /dev/null") == 2);                       // no subcommand
    CHECK(run_cli("frobnicate x.cfg 2> /dev/null") == 2);      // unknown subcommand
}

TEST_CASE("validate passes on a sane config and reports rows") {
    fs::path cfg = kWorkDir / "vali.cfg";
    fs::path out = kWorkDir / "vali_out";
    write_file(cfg, run_block("validate", 4000, 10, 9, out.string()) + market_block());
    CHECK(run_cli("validate " + cfg.string() + " > /dev/null") == 0);
    auto rows = parse_csv(out / "results.csv");
    REQUIRE(rows.count("prices-positive") == 1);
    CHECK(rows["prices-positive"].method == "pass");
    REQUIRE(rows.count("dual-dominance") == 1);
    CHECK(rows["dual-dominance"].method == "pass");

    // the `run` subcommand dispatches kind = validate the same way
    CHECK(run_cli("run " + cfg.string() + " --out " + (kWorkDir / "vali_out2").string() +
                  " > /dev/null") == 0);
    CHECK(parse_csv(kWorkDir / "vali_out2" / "results.csv").count("prices-positive") == 1);
}

TEST_CASE("a step size violating the stability precondition exits 3") {
    fs::path cfg = kWorkDir / "unstable.cfg";
    fs::path out = kWorkDir / "unstable_out";
    std::string text = "[run]\nkind = validate\npaths = 1000\nsteps = 4\nseed = 9\n"
                       "horizon = 1.0\nout = " + out.string() + "\n" +
                       "[market]\nrate = 8.0\nexcess = 0.06\nvol = 0.2\nspot = 100\n";
    write_file(cfg, text);
    fs::path log = kWorkDir / "unstable.log";
    CHECK(run_cli("validate " + cfg.string() + " > " + log.string()) == 3);
    CHECK(read_file(log).find("stability") != std::string::npos);
}

TEST_CASE("custom expression claims price exactly like their named forms") {
    std::string tail = market_block();
    fs::path named = kWorkDir / "named.cfg";
    write_file(named, run_block("price", 4000, 8, 33, (kWorkDir / "named_out").string()) +
                          tail + "[claim]\nname = call\nstrike = 100\n");
    fs::path custom = kWorkDir / "custom.cfg";
    write_file(custom, run_block("price", 4000, 8, 33, (kWorkDir / "custom_out").string()) +
                           tail + "[claim]\nname = custom\nexpr = max(P1 - 100, 0)\n");
    CHECK(run_cli("run " + named.string() + " > /dev/null") == 0);
    CHECK(run_cli("run " + custom.string() + " > /dev/null") == 0);
    auto named_rows = parse_csv(kWorkDir / "named_out" / "results.csv");
    auto custom_rows = parse_csv(kWorkDir / "custom_out" / "results.csv");
    CHECK(named_rows["price"].value == custom_rows["price"].value);
    CHECK(named_rows["price"].std_error == custom_rows["price"].std_error);
}

TEST_CASE("borrow-price emits primal and dual rows with the expected corner") {
    fs::path cfg = kWorkDir / "borrow.cfg";
    fs::path out = kWorkDir / "borrow_out";
    write_file(cfg, run_block("borrow-price", 4000, 10, 7, out.string()) +
                        "[market]\nrate = 0.04\nexcess = 0.06\nvol = 0.2\nspot = 100\n"
                        "[claim]\nname = call\nstrike = 100\n"
                        "[borrowing]\nrate = 0.06\nbeta_points = 11\n");
    CHECK(run_cli("run " + cfg.string() + " > /dev/null") == 0);
    auto rows = parse_csv(out / "results.csv");
    REQUIRE(rows.count("price") == 1);
    REQUIRE(rows.count("dual_price") == 1);
    CHECK(rows["price"].method == "borrowing-euler");
    CHECK(rows["dual_price"].method == "borrowing-dual");
    CHECK(rows["dual_price"].value <=
          rows["price"].value + 3.0 * (rows["price"].std_error + rows["dual_price"].std_error));
    // a plain call borrows throughout, so the best multiplier sits at -R
    CHECK(rows["dual_argmax_beta"].value == -0.06);
}

TEST_CASE("utility run reports both value routes") {
    fs::path cfg = kWorkDir / "util.cfg";
    fs::path out = kWorkDir / "util_out";
    write_file(cfg, run_block("utility", 4000, 10, 11, out.string()) + market_block() +
                        "[constraint]\nkind = box\nlower = 0\nupper = 0.5\n");
    CHECK(run_cli("run " + cfg.string() + " > /dev/null") == 0);
    auto rows = parse_csv(out / "results.csv");
    REQUIRE(rows.count("utility_value") == 1);
    REQUIRE(rows.count("utility_value_solver") == 1);
    // clamped box: f = 0.05 + 0.045 - 0.02
    CHECK(std::abs(rows["utility_value"].value - 0.075) <= 1e-6);
    CHECK(std::abs(rows["utility_value_solver"].value - 0.075) <= 1e-6);
}

TEST_CASE("solve run agrees across the three solver routes") {
    fs::path cfg = kWorkDir / "solve.cfg";
    fs::path out = kWorkDir / "solve_out";
    write_file(cfg, run_block("solve", 4000, 10, 5, out.string()) + market_block() +
                        "[claim]\nname = call\nstrike = 100\n");
    CHECK(run_cli("run " + cfg.string() + " > /dev/null") == 0);
    auto rows = parse_csv(out / "results.csv");
    REQUIRE(rows.count("y0_linear") == 1);
    REQUIRE(rows.count("y0_euler") == 1);
    REQUIRE(rows.count("y0_picard") == 1);
    double reference = rows["y0_linear"].value;
    CHECK(std::abs(rows["y0_euler"].value - reference) / reference <= 0.03);
    CHECK(std::abs(rows["y0_picard"].value - reference) / reference <= 0.03);
    CHECK(rows["picard_iterations"].value >= 1.0);
}
