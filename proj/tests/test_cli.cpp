#include "kdvtower/commands.hpp"
#include "kdvtower/errors.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

const std::string cli = KDVTOWER_CLI_PATH;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("kdvtower_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

int run(const std::string& args) {
    const std::string command = cli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("typecheck pipelines") {
    TempDir dir;
    const fs::path out = dir.path / "t.json";

    CHECK(run("typecheck \"p1\" --out " + out.string()) == 0);
    std::string text = slurp(out);
    CHECK(text.find("\"composite_type\": [\n      1,\n      0\n    ]") != std::string::npos);

    CHECK(run("typecheck \"p1;p1;p1\" --out " + out.string()) == 0);
    text = slurp(out);
    CHECK(text.find("\"composite_type\": [\n      3,\n      0\n    ]") != std::string::npos);
    CHECK(text.find("\"minimal_base\": 0") != std::string::npos);

    // family chaining: p2;p1;p2 composes with auto bases
    CHECK(run("typecheck \"p2;p1;p2\" --out " + out.string()) == 0);
    text = slurp(out);
    CHECK(text.find("\"composite_type\": [\n      6,\n      1\n    ]") != std::string::npos);

    // pinned equal bases cannot chain: diagnostic naming both levels
    CHECK(run("typecheck \"p2@4;p2@4\" --out " + out.string()) == 1);
    text = slurp(out);
    CHECK(text.find("\"produced_level\": 3") != std::string::npos);
    CHECK(text.find("\"required_level\": 6") != std::string::npos);

    CHECK(run("typecheck \"p2@0\" --out " + out.string()) == 1); // base below floor
    CHECK(run("typecheck \"nosuch\" --out " + out.string()) == 2);
}

TEST_CASE("verify-poisson exit codes") {
    TempDir dir;
    const fs::path out = dir.path / "v.json";
    CHECK(run("verify-poisson --morphism p1 --modes 32 --trials 5 --seed 7 --out " + out.string()) ==
          0);
    CHECK(run("verify-poisson --morphism p2 --modes 32 --trials 5 --seed 7 --out " + out.string()) ==
          0);
    CHECK(run("verify-poisson --morphism p2 --parsing literal --modes 32 --trials 5 --seed 7 "
              "--out " +
              out.string()) == 1);
    CHECK(run("verify-poisson --morphism p9 --modes 32 --trials 5 --out " + out.string()) == 2);
    CHECK(run("verify-poisson --morphism p1 --modes 7 --trials 5 --out " + out.string()) == 2);
}

TEST_CASE("simulate writes conservation CSV") {
    TempDir dir;
    const fs::path csv = dir.path / "c.csv";
    const fs::path rep = dir.path / "r.json";

    CHECK(run("simulate --modes 32 --dt 1e-3 --tmax 0.02 --initial cos --amplitude 0 "
              "--out-csv " +
              csv.string() + " --out " + rep.string()) == 0);
    std::istringstream lines(slurp(csv));
    std::string line;
    std::getline(lines, line);
    CHECK(line == "t,mass,h0,h1,norm0,norm1,norm2");
    int rows = 0;
    bool all_zero = true;
    while (std::getline(lines, line)) {
        ++rows;
        const auto comma = line.find(',');
        all_zero = all_zero && line.substr(comma + 1) == "0,0,0,0,0,0";
    }
    CHECK(rows >= 2);
    CHECK(all_zero);

    CHECK(run("simulate --modes 32 --dt -1 --tmax 0.1") == 2);
}

TEST_CASE("simulate snapshots and order study") {
    TempDir dir;
    const fs::path rep = dir.path / "r.json";
    const std::string prefix = (dir.path / "snap").string();
    CHECK(run("simulate --modes 32 --dt 1e-4 --tmax 0.004 --initial cos --amplitude 1.5 "
              "--snapshot-every 20 --snapshot-prefix " +
              prefix + " --order-study --out " + rep.string()) == 0);
    CHECK(fs::exists(dir.path / "snap_00000.json"));
    CHECK(fs::exists(dir.path / "snap_00002.json"));
    const std::string text = slurp(rep);
    CHECK(text.find("\"order_study\"") != std::string::npos);
    CHECK(text.find("\"observed_orders\"") != std::string::npos);

    // the snapshot is a loadable field
    const std::string snap = slurp(dir.path / "snap_00001.json");
    CHECK(snap.find("\"modes\":32") != std::string::npos);
}

TEST_CASE("norms accepts an operator manifest") {
    TempDir dir;
    const fs::path manifest = dir.path / "op.json";
    {
        std::ofstream f(manifest);
        f << R"({"label": "p1", "type": [1, 0], "base": 1, "action": "dx"})";
    }
    const fs::path out = dir.path / "n.json";
    CHECK(run("norms --operator " + manifest.string() + " --modes 32 --out " + out.string()) == 0);
    const std::string text = slurp(out);
    CHECK(text.find("\"operator\"") != std::string::npos);
    CHECK(text.find("\"norm\"") != std::string::npos);
}

TEST_CASE("hierarchy report") {
    TempDir dir;
    const fs::path out = dir.path / "h.json";
    CHECK(run("hierarchy --modes 64 --depth 3 --seed 5 --out " + out.string()) == 0);
    const std::string text = slurp(out);
    CHECK(text.find("\"solvability_means\"") != std::string::npos);
    CHECK(text.find("\"gradients\"") != std::string::npos);
    CHECK(run("hierarchy --modes 64 --depth 12 --out " + out.string()) == 1);
}

TEST_CASE("norms sweep") {
    TempDir dir;
    const fs::path out = dir.path / "n.json";
    CHECK(run("norms --operator dx --base 0 --modes 32 --modes 64 --family-top 2 --out " +
              out.string()) == 0);
    const std::string text = slurp(out);
    CHECK(text.find("\"family_norm\"") != std::string::npos);
    CHECK(run("norms --operator bogus --modes 32 --out " + out.string()) == 2);
}

TEST_CASE("reports are byte-identical across runs") {
    TempDir dir;
    const fs::path out = dir.path / "r.json";
    // identical config twice, including the output path (it is embedded)
    const std::string args =
        "verify-poisson --morphism p2 --modes 32 --trials 8 --seed 42 --out " + out.string();
    CHECK(run(args) == 0);
    const std::string first = slurp(out);
    CHECK_FALSE(first.empty());
    CHECK(run(args) == 0);
    CHECK(first == slurp(out));

    // a different seed must change the report (the seed is embedded)
    CHECK(run("verify-poisson --morphism p2 --modes 32 --trials 8 --seed 43 --out " +
              out.string()) == 0);
    CHECK(first != slurp(out));
}

TEST_CASE("config file merging with flag precedence") {
    TempDir dir;
    const fs::path cfg = dir.path / "cfg.json";
    const fs::path out = dir.path / "out.json";
    {
        std::ofstream f(cfg);
        f << R"({"morphism": "p2", "trials": 4, "seed": 11, "modes": [32]})";
    }
    CHECK(run("verify-poisson --config " + cfg.string() + " --out " + out.string()) == 0);
    std::string text = slurp(out);
    CHECK(text.find("\"trials\": 4") != std::string::npos);
    CHECK(text.find("\"seed\": 11") != std::string::npos);

    // explicit flag wins over the file
    CHECK(run("verify-poisson --config " + cfg.string() + " --trials 6 --out " + out.string()) == 0);
    text = slurp(out);
    CHECK(text.find("\"trials\": 6") != std::string::npos);
    CHECK(text.find("\"seed\": 11") != std::string::npos);

    CHECK(run("verify-poisson --config " + (dir.path / "missing.json").string()) == 2);
    {
        std::ofstream f(cfg);
        f << "{not json";
    }
    CHECK(run("verify-poisson --config " + cfg.string()) == 2);
}

TEST_CASE("exit codes stay within the contract") {
    CHECK(run("bogus-command") == 2);
    CHECK(run("") == 2); // missing subcommand
    CHECK(run("--help") == 0);
    CHECK(run("verify-poisson --trials notanumber") == 2);
}

TEST_CASE("config JSON application in-process") {
    kdvtower::RunConfig config;
    kdvtower::apply_config_json(config, R"({"trials": 17, "pairing_levels": [0, 1]})");
    CHECK(config.trials == 17);
    CHECK(config.pairing_levels == std::vector<int>{0, 1});
    CHECK(config.morphism == "p2"); // untouched default
    CHECK_THROWS_AS(kdvtower::apply_config_json(config, "nonsense"), kdvtower::config_error);
    CHECK_THROWS_AS(kdvtower::apply_config_json(config, R"({"trials": "many"})"),
                    kdvtower::config_error);
}
