#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hermite/experiment.hpp"

using namespace hermite;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("hermite_cli_" + name);
    fs::remove_all(p);
    return p;
}

int run(const std::string& args)
{
    const std::string cmd = std::string(HERMITE_RUN_PATH) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(slurp(p));
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        if (!line.empty() && line.back() == ',')
            cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST(Config, ValidationMessages)
{
    RunConfig c;
    EXPECT_NO_THROW(validate(c));
    c.experiment = "exp9";
    EXPECT_THROW(validate(c), usage_error);
    c = {};
    c.degree = 5;
    EXPECT_THROW(validate(c), usage_error);
    c = {};
    c.levels = { 4, 0 };
    EXPECT_THROW(validate(c), usage_error);
    c = {};
    c.tol = 0.0;
    EXPECT_THROW(validate(c), usage_error);
    c = {};
    c.eps_tilde = 1.5;
    EXPECT_THROW(validate(c), usage_error);
    c = {};
    c.experiment = "custom";
    EXPECT_THROW(validate(c), usage_error);
}

TEST(Config, ToleranceDefaultsPerExperiment)
{
    EXPECT_EQ(default_tolerance("exp3"), 1e-8);
    EXPECT_EQ(default_tolerance("custom"), 1e-8);
    EXPECT_EQ(default_tolerance("exp4"), 1e-6);
    RunConfig c;
    c.tol = -1.0;
    EXPECT_THROW(validate(c), usage_error);
}

TEST(Config, CustomProblemEpsilonMustHoldForTheData)
{
    RunConfig c;
    c.experiment = "custom";
    c.custom = CustomProblemConfig{};
    c.custom->A << 2, 1, 1, 2;
    c.custom->epsilon = 0.6;
    EXPECT_NO_THROW(validate(c));
    c.custom->epsilon = 0.7;
    EXPECT_THROW(validate(c), usage_error);
    c.custom->epsilon = 0.6;
    c.custom->c = 1.0;
    EXPECT_THROW(validate(c), usage_error); // lambda missing
}

TEST(Config, ReadJson)
{
    std::istringstream is(R"({"experiment": "custom", "degree": 4, "levels": [2, 4], "tol": 1e-9,
        "eps_tilde": 0.0, "out": "x",
        "problem": {"domain": [0, 2, 0, 1], "A": [[1, 0], [0, 1]], "b": [0.5, 0], "c": 1, "epsilon": 0.5, "lambda": 1}})");
    const RunConfig c = read_config(is);
    EXPECT_EQ(c.experiment, "custom");
    EXPECT_EQ(c.degree, 4);
    EXPECT_EQ(c.levels, (std::vector<int>{ 2, 4 }));
    EXPECT_EQ(c.tol, 1e-9);
    EXPECT_EQ(*c.eps_tilde, 0.0);
    ASSERT_TRUE(c.custom);
    EXPECT_EQ(c.custom->domain.xmax, 2.0);
    EXPECT_EQ(c.custom->b.x(), 0.5);
    EXPECT_NO_THROW(validate(c));

    std::istringstream bad_key(R"({"experimant": "exp1"})");
    EXPECT_THROW(read_config(bad_key), usage_error);
    std::istringstream bad_json("{");
    EXPECT_THROW(read_config(bad_json), usage_error);
    std::istringstream bad_type(R"({"degree": "three"})");
    EXPECT_THROW(read_config(bad_type), usage_error);
}

TEST(Cli, UnknownExperimentIsUsageErrorAndWritesNothing)
{
    const fs::path out = scratch("unknown");
    EXPECT_EQ(run("--experiment exp7 --out " + out.string()), exit_usage);
    EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, BadFlagsAreUsageErrors)
{
    EXPECT_EQ(run("--degree"), exit_usage);
    EXPECT_EQ(run("--no-such-flag"), exit_usage);
    EXPECT_EQ(run("--experiment exp1 --degree 2 --out " + scratch("deg").string()), exit_usage);
    EXPECT_EQ(run("--help"), exit_success);
}

TEST(Cli, Exp1SecondOrderInBrokenHessianNorm)
{
    const fs::path out = scratch("exp1");
    ASSERT_EQ(run("--experiment exp1 --degree 3 --levels 4,8,16,32,64 --out " + out.string()), exit_success);
    const auto rows = read_csv(out / "errors.csv");
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{ "h", "ndof", "l2", "h1", "h2_broken", "lambda_norm", "order_l2",
                                                  "order_h1", "order_h2", "order_lambda" }));
    EXPECT_EQ(rows[1][8], "");
    EXPECT_NEAR(std::stod(rows[5][8]), 2.0, 0.1);
    EXPECT_NEAR(std::stod(rows[4][8]), 2.0, 0.1);

    const auto mesh = read_csv(out / "meshinfo.csv");
    ASSERT_EQ(mesh.size(), 6u);
    EXPECT_EQ(mesh[0], (std::vector<std::string>{ "level", "triangles", "vertices", "ndof" }));
    EXPECT_EQ(mesh[1], (std::vector<std::string>{ "0", "32", "25", "107" }));
    EXPECT_EQ(mesh[5][3], rows[5][1]);
    EXPECT_FALSE(fs::exists(out / "newton_0.csv"));
}

TEST(Cli, Exp3ThirdOrderForQuartics)
{
    const fs::path out = scratch("exp3");
    ASSERT_EQ(run("--experiment exp3 --degree 4 --levels 2,4,8,16 --out " + out.string()), exit_success);
    const auto rows = read_csv(out / "errors.csv");
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_NEAR(std::stod(rows[4][9]), 3.0, 0.2);
    for (int level = 0; level < 4; ++level) {
        const auto newton = read_csv(out / ("newton_" + std::to_string(level) + ".csv"));
        ASSERT_GE(newton.size(), 2u);
        EXPECT_EQ(newton[0], (std::vector<std::string>{ "iteration", "increment_norm", "residual_norm",
                                                        "controls_changed" }));
        EXPECT_LT(std::stod(newton.back()[1]), 1e-8);
    }
}

TEST(Cli, RerunIsByteIdentical)
{
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    const std::string args = "--experiment exp3 --degree 3 --levels 2,4 --out ";
    ASSERT_EQ(run(args + a.string()), exit_success);
    ASSERT_EQ(run(args + b.string()), exit_success);
    for (const char* f : { "errors.csv", "meshinfo.csv", "newton_0.csv", "newton_1.csv" })
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Cli, ConfigFileWithFlagOverrides)
{
    const fs::path dir = scratch("config");
    fs::create_directories(dir);
    const fs::path cfg = dir / "run.json";
    std::ofstream(cfg) << R"({"experiment": "custom", "degree": 3, "levels": [2, 4],
        "problem": {"A": [[2, 1], [1, 2]], "epsilon": 0.6}})";
    const fs::path out = dir / "out";
    ASSERT_EQ(run("--config " + cfg.string() + " --levels 4,8 --eps-tilde 0 --out " + out.string()), exit_success);
    const auto rows = read_csv(out / "errors.csv");
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_NEAR(std::stod(rows[2][8]), 2.0, 0.2);

    std::ofstream(cfg) << R"({"experiment": "custom", "problem": {"A": [[2, 1], [1, 2]], "epsilon": 0.9}})";
    EXPECT_EQ(run("--config " + cfg.string() + " --out " + (dir / "bad").string()), exit_usage);
    EXPECT_FALSE(fs::exists(dir / "bad"));
}

TEST(Cli, InvariantViolationOnUnresolvedKinks)
{
    const fs::path out = scratch("kinks");
    EXPECT_EQ(run("--experiment exp1 --levels 3 --out " + out.string()), exit_invariant_violation);
}

TEST(Cli, NewtonFailureIsSolverFailure)
{
    const fs::path out = scratch("newton_fail");
    EXPECT_EQ(run("--experiment exp3 --levels 2 --max-iter 1 --tol 1e-300 --out " + out.string()),
              exit_solver_failure);
    EXPECT_TRUE(fs::exists(out / "newton_0.csv"));
}
