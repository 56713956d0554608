#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "crq/cli/cli.hpp"
#include "support/fixtures.hpp"

using crq::cli::run;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& body) {
    auto p = std::filesystem::temp_directory_path() / ("crq_cli_" + name);
    std::ofstream(p) << body;
    return p.string();
}

}  // namespace

TEST(Cli, NoArgumentsIsUsage) {
    auto r = call({});
    EXPECT_EQ(r.code, crq::cli::kUsage);
    EXPECT_NE(r.err.find("Subcommands"), std::string::npos);
}

TEST(Cli, UnknownOptionIsUsage) {
    EXPECT_EQ(call({"bell-scan", "--bogus"}).code, crq::cli::kUsage);
    EXPECT_EQ(call({"embezzle", "--m", "2"}).code, crq::cli::kUsage);
}

TEST(Cli, BellScanCsv) {
    auto r = call({"bell-scan", "--n-max", "4"});
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string header, line;
    std::getline(in, header);
    EXPECT_NE(header.find("N"), std::string::npos);
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    EXPECT_EQ(rows, 4);
    EXPECT_NE(r.out.find("0.3044818"), std::string::npos);
}

TEST(Cli, BellScanJson) {
    auto r = call({"bell-scan", "--n-max", "2", "--format", "json"});
    ASSERT_EQ(r.code, 0);
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["passed"], true);
    ASSERT_EQ(j["rows"].size(), 2u);
    EXPECT_NEAR(j["rows"][1]["closed_form"].get<double>(), 0.58578643762690, 1e-12);
}

TEST(Cli, EmbezzleJson) {
    auto r = call({"embezzle", "--m", "2", "--N", "1", "--mi", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["passed"], true);
    EXPECT_NEAR(j["fidelity"].get<double>(), 0.837975319575053, 1e-12);
    EXPECT_NEAR(j["bound"].get<double>(), 0.5, 1e-15);
}

TEST(Cli, EmbezzleBadRank) {
    auto r = call({"embezzle", "--m", "2", "--N", "1", "--mi", "3"});
    EXPECT_EQ(r.code, crq::cli::kUsage);
    EXPECT_NE(r.err.find("m_i"), std::string::npos);
}

TEST(Cli, ApproxCoeffs) {
    auto r = call({"approx-coeffs", "--coeffs", "0.6,0.8", "--epsilon", "0.1"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["m"], nlohmann::json::parse(R"(["225","400"])"));
    EXPECT_EQ(j["q"], "1/25");
}

TEST(Cli, ApproxCoeffsUnnormalized) {
    EXPECT_EQ(call({"approx-coeffs", "--coeffs", "0.6,0.6", "--epsilon", "0.1"}).code, crq::cli::kUsage);
    EXPECT_EQ(call({"approx-coeffs", "--coeffs", "0.6,x", "--epsilon", "0.1"}).code, crq::cli::kUsage);
}

TEST(Cli, VerifyModelSignalingFails) {
    auto r = call({"verify-model", crq::testing::fixture_path("signaling.json")});
    EXPECT_EQ(r.code, crq::cli::kCertificateFailed);
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["passed"], false);
    EXPECT_NEAR(j["worst_deviation"].get<double>(), 0.1, 1e-12);
    EXPECT_EQ(j["witness"]["label"], "s0");
}

TEST(Cli, VerifyModelCqOnlyPasses) {
    auto r = call({"verify-model", crq::testing::fixture_path("signaling.json"), "--check", "cq"});
    EXPECT_EQ(r.code, 0);
}

TEST(Cli, TheoremFromFiles) {
    auto s = temp_file("state.json", R"({"dims":[2],"re":[0.7071067811865476,0.7071067811865476]})");
    auto z = temp_file("z.json", R"({"re":[[1,0],[0,-1]]})");
    auto r = call({"theorem", "--state", s, "--observable", z, "--epsilon", "0.01", "--N", "4", "--max-nonzeros",
                   "262144"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["passed"], true);
    EXPECT_EQ(j["N"], 4);
    EXPECT_EQ(j["epsilon"], 0.01);
}

TEST(Cli, TheoremRandomToFile) {
    auto out = (std::filesystem::temp_directory_path() / "crq_cli_theorem_out.json").string();
    std::remove(out.c_str());
    auto r = call({"theorem", "--random", "3", "--seed", "5", "--epsilon", "0.1", "--N", "4", "-o", out});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    std::ifstream in(out);
    auto j = nlohmann::json::parse(in);
    EXPECT_EQ(j["per_lambda"].size(), 1u);
    EXPECT_EQ(j["eigenvalues"].size(), 3u);
}

TEST(Cli, TheoremModelFileWithoutCoverageFails) {
    auto r = call({"theorem", "--random", "2", "--model", crq::testing::fixture_path("signaling.json"), "--epsilon",
                   "0.1", "--N", "4"});
    EXPECT_NE(r.code, 0);
}

TEST(Cli, TheoremNeedsInput) {
    EXPECT_EQ(call({"theorem", "--epsilon", "0.1"}).code, crq::cli::kUsage);
}
