#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

fs::path workdir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("dmac_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

/// Runs dmac inside `dir`; `env` is prefixed to the command line.
Run dmac(const fs::path& dir, const std::string& args, const std::string& env = "") {
    const std::string cmd = "cd '" + dir.string() + "' && " + env + " '" DMAC_BINARY "' " + args + " 2>stderr.txt";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof(buf), p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

/// Config with the calibrated unit scale, so commands skip calibration.
fs::path calibrated_config(const fs::path& dir) {
    const auto s = testing_support::pinned_scale;
    nlohmann::json j{{"unit_scale", {s.sd, s.td}}};
    const fs::path p = dir / "config.json";
    std::ofstream(p) << j.dump();
    return p;
}

}  // namespace

TEST(Cli, RegionFiveBits) {
    const auto d = workdir("region5");
    calibrated_config(d);
    const auto r = dmac(d, "--config config.json region --bits 5 --out r5.csv");
    ASSERT_EQ(r.code, 0) << slurp(d / "stderr.txt");
    const auto summary = nlohmann::json::parse(slurp(d / "r5.summary.json"));
    EXPECT_TRUE(summary["feasible"].get<bool>());
    const double c = summary["optimum"]["c_star"], i = summary["optimum"]["i_star"];
    EXPECT_LT(std::abs(std::log(c / 2.2e-15)), 0.075);
    EXPECT_LT(std::abs(std::log(i / 1e-6)), 0.095);
    const auto rows = csv_rows(d / "r5.csv");
    EXPECT_EQ(rows.size(), 64u * 64u + 1u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"c_star", "i_star", "c1", "c2", "c3", "feasible"}));
    const auto manifest = nlohmann::json::parse(slurp(d / "r5.manifest.json"));
    EXPECT_EQ(manifest["command"], "region");
    EXPECT_EQ(manifest["outputs"].size(), 2u);
}

TEST(Cli, RegionSixBitsIsInfeasible) {
    const auto d = workdir("region6");
    calibrated_config(d);
    EXPECT_EQ(dmac(d, "--config config.json region --bits 6 --out r6.csv").code, 2);
    EXPECT_TRUE(fs::exists(d / "r6.csv"));
}

TEST(Cli, UsageAndConfigErrors) {
    const auto d = workdir("errors");
    calibrated_config(d);
    EXPECT_EQ(dmac(d, "--config config.json region --bits 0 --out r.csv").code, 1);
    EXPECT_NE(slurp(d / "stderr.txt").find("bits"), std::string::npos);
    EXPECT_EQ(dmac(d, "--config missing.json region --bits 5 --out r.csv").code, 1);
    EXPECT_FALSE(slurp(d / "stderr.txt").empty());
    EXPECT_EQ(dmac(d, "region --out r.csv").code, 1);
    EXPECT_EQ(dmac(d, "").code, 1);
    EXPECT_EQ(dmac(d, "frobnicate").code, 1);
    std::ofstream(d / "bad.json") << R"({"c_star": -1})";
    EXPECT_EQ(dmac(d, "--config bad.json energy --out e.json").code, 1);
    EXPECT_NE(slurp(d / "stderr.txt").find("c_star"), std::string::npos);
}

TEST(Cli, MaxBitsGrid) {
    const auto d = workdir("maxbits");
    calibrated_config(d);
    ASSERT_EQ(dmac(d, "--config config.json maxbits --epsilon-grid 1:16:31 --out mb.csv").code, 0);
    const auto rows = csv_rows(d / "mb.csv");
    ASSERT_EQ(rows.size(), 32u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"epsilon", "n_max"}));
    EXPECT_EQ(rows[1], (std::vector<std::string>{"1", "5"}));
    int prev = 99;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const int n = std::stoi(rows[k][1]);
        EXPECT_LE(n, prev);
        prev = n;
    }
    EXPECT_EQ(prev, 1);

    ASSERT_EQ(dmac(d, "--config config.json maxbits --epsilon-grid 1:1:1 --out one.csv").code, 0);
    EXPECT_EQ(csv_rows(d / "one.csv").size(), 2u);
    EXPECT_EQ(dmac(d, "--config config.json maxbits --epsilon-grid 5:1:3 --out x.csv").code, 1);
    EXPECT_EQ(dmac(d, "--config config.json maxbits --epsilon-grid 0.5:2:3 --out x.csv").code, 1);
    EXPECT_EQ(dmac(d, "--config config.json maxbits --epsilon-grid 1:2 --out x.csv").code, 1);
}

TEST(Cli, SimulateZeroWeight) {
    const auto d = workdir("simzero");
    calibrated_config(d);
    ASSERT_EQ(dmac(d, "--config config.json simulate --weights 0 --va 1.1 --trials 5 --model noisy --out s.csv").code, 0);
    const auto rows = csv_rows(d / "s.csv");
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"trial", "delta_t_s"}));
    for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_EQ(std::stod(rows[k][1]), 0.0);
}

TEST(Cli, SimulateNoisyStatistics) {
    const auto d = workdir("simnoisy");
    calibrated_config(d);
    const std::string args =
        "--config config.json simulate --weights 21,-9 --va 1.0,0.4 --seed 17 --trials 100000 --model noisy --out s.csv";
    ASSERT_EQ(dmac(d, args).code, 0);
    const auto summary = nlohmann::json::parse(slurp(d / "s.summary.json"));
    const double sigma = summary["sigma"], model = summary["model_sigma"];
    EXPECT_LT(std::abs(sigma / model - 1.0), 0.05);
    const auto first = slurp(d / "s.csv");
    ASSERT_EQ(dmac(d, args).code, 0);
    EXPECT_EQ(slurp(d / "s.csv"), first);
    EXPECT_EQ(dmac(d, "--config config.json simulate --weights 21,-9 --va 1.0 --out s.csv").code, 1);
    EXPECT_EQ(dmac(d, "--config config.json simulate --weights 21 --va 1.0 --model fancy --out s.csv").code, 1);
}

TEST(Cli, SimulateIdealMatchesClosedForm) {
    const auto d = workdir("simideal");
    ASSERT_EQ(dmac(d, "simulate --weights 3,-2 --va 1.0,0.9 --out s.csv").code, 0);
    const auto rows = csv_rows(d / "s.csv");
    EXPECT_NEAR(std::stod(rows[1][1]), -103.5e-12, 1e-17);
}

TEST(Cli, EnergyDefaults) {
    const auto d = workdir("energy");
    ASSERT_EQ(dmac(d, "energy --out e.json").code, 0);
    const auto j = nlohmann::json::parse(slurp(d / "e.json"));
    EXPECT_LT(std::abs(j["total"].get<double>() / 110e-15 - 1.0), 0.15);
    const auto rows = csv_rows(d / "e.csv");
    EXPECT_EQ(rows.back()[0], "Total");
    EXPECT_EQ(dmac(d, "energy --mode turbo --out e.json").code, 1);
}

TEST(Cli, BiasCurrentsHalve) {
    const auto d = workdir("bias");
    ASSERT_EQ(dmac(d, "bias --bits 5 --out b.json").code, 0);
    const auto rows = csv_rows(d / "b.csv");
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"i", "current_a", "v_b1", "v_b2"}));
    for (std::size_t k = 2; k < rows.size(); ++k) EXPECT_EQ(std::stod(rows[k - 1][1]), 2.0 * std::stod(rows[k][1]));
    EXPECT_EQ(dmac(d, "bias --bits 5 --i-bias 10u --out b.json").code, 1);
    EXPECT_EQ(dmac(d, "bias --bits 9 --out b.json").code, 1);
}

TEST(Cli, SweepHeaderAndSignConvention) {
    const auto d = workdir("sweep");
    ASSERT_EQ(dmac(d, "sweep --va-grid 0.3:1.2:4 --weights 31 --out a.csv").code, 0);
    ASSERT_EQ(dmac(d, "sweep --va-grid 0.3:1.2:4 --weights 31 --positive-means-greater-va --out b.csv").code, 0);
    const auto a = csv_rows(d / "a.csv"), b = csv_rows(d / "b.csv");
    EXPECT_EQ(a[0], (std::vector<std::string>{"v_a", "w", "s", "delta_t_s", "model", "seed"}));
    ASSERT_EQ(a.size(), 5u);
    EXPECT_LT(std::stod(a[4][3]), 0.0);
    EXPECT_EQ(std::stod(b[4][3]), -std::stod(a[4][3]));
}

TEST(Cli, CalibratePersistsAndIsReused) {
    const auto d = workdir("calibrate");
    const std::string env = "DMAC_CONFIG_DIR='" + d.string() + "'";
    ASSERT_EQ(dmac(d, "calibrate", env).code, 0);
    const auto j = nlohmann::json::parse(slurp(d / "calibration.json"));
    EXPECT_LT(testing_support::rel_err(j["unit_scale"][0].get<double>(), testing_support::pinned_scale.sd), 1e-9);
    EXPECT_LT(testing_support::rel_err(j["unit_scale"][1].get<double>(), testing_support::pinned_scale.td), 1e-9);

    ASSERT_EQ(dmac(d, "region --bits 5 --out r.csv", env).code, 0);
    EXPECT_EQ(slurp(d / "stderr.txt").find("calibrating"), std::string::npos);
}

TEST(Cli, RerunsAreByteIdentical) {
    const auto d = workdir("rerun");
    calibrated_config(d);
    ASSERT_EQ(dmac(d, "--config config.json region --bits 4 --out r.csv").code, 0);
    const auto csv = slurp(d / "r.csv"), summary = slurp(d / "r.summary.json"), manifest = slurp(d / "r.manifest.json");
    ASSERT_EQ(dmac(d, "--config config.json region --bits 4 --out r.csv").code, 0);
    EXPECT_EQ(slurp(d / "r.csv"), csv);
    EXPECT_EQ(slurp(d / "r.summary.json"), summary);
    EXPECT_EQ(slurp(d / "r.manifest.json"), manifest);
}
