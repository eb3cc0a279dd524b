#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::path(CAUSALQ_TEST_DIR) / "cli_work";

int run(const std::string& args, const fs::path& err = "/dev/null") {
    fs::create_directories(kWork);
    const std::string cmd = std::string("\"") + CAUSALQ_BIN + "\" " + args + " 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write(const std::string& name, const std::string& text) {
    fs::create_directories(kWork);
    const auto p = kWork / name;
    std::ofstream(p) << text;
    return p;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

fs::path simpson_csv(const std::string& name) {
    std::string text = "T,Z,Y\n";
    auto add = [&](const char* t, const char* z, const char* y, int n) {
        for (int i = 0; i < n; ++i) text += std::string(t) + "," + z + "," + y + "\n";
    };
    add("t1", "z0", "1", 81);
    add("t1", "z0", "0", 6);
    add("t0", "z0", "1", 234);
    add("t0", "z0", "0", 36);
    add("t1", "z1", "1", 192);
    add("t1", "z1", "0", 71);
    add("t0", "z1", "1", 55);
    add("t0", "z1", "0", 25);
    return write(name, text);
}

}  // namespace

TEST(Cli, HelpExitsZero) {
    EXPECT_EQ(run("--help > /dev/null"), 0);
    EXPECT_EQ(run("analyze --help > /dev/null"), 0);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run("> /dev/null"), 64);
    const auto csv = simpson_csv("usage.csv");
    EXPECT_EQ(run("analyze --data " + q(csv) + " --seed 1 > /dev/null"), 64);
    EXPECT_EQ(run("analyze --data " + q(csv) + " --seed 1 --treatment T --t0 t0 --t1 nope --outcome Y > /dev/null"), 64);
    EXPECT_EQ(run("indep --data " + q(csv) + " --seed 1 -x T -y Y --method anova > /dev/null"), 64);
}

TEST(Cli, AnalyzeSimpsonDeterministic) {
    const auto csv = simpson_csv("simpson.csv");
    const auto a = kWork / "a.json", b = kWork / "b.json";
    const std::string args = "analyze --data " + q(csv) + " --seed 7 --treatment T --t0 t0 --t1 t1 --outcome Y --out ";
    ASSERT_EQ(run(args + q(a)), 0);
    ASSERT_EQ(run(args + q(b) + " --threads 1"), 0);
    EXPECT_EQ(slurp(a), slurp(b));
    const auto j = nlohmann::json::parse(slurp(a));
    EXPECT_EQ(j["discovery"]["covariates"][0], "Z");
    const auto& o = j["contexts"][0]["outcomes"][0];
    EXPECT_LT(o["naive"]["delta"].get<double>(), 0.0);
    EXPECT_GT(o["total"]["delta"].get<double>(), 0.0);
    EXPECT_TRUE(o["sign_reversal"].get<bool>());
}

TEST(Cli, BalancedSummaryReadsUnbiased) {
    std::string text = "T,Z,Y\n";
    for (const char* t : {"0", "1"})
        for (const char* z : {"a", "b", "c"})
            for (int i = 0; i < 20; ++i) text += std::string(t) + "," + z + "," + std::to_string(i % 3 == 0) + "\n";
    const auto csv = write("balanced.csv", text);
    const auto err = kWork / "balanced_err.txt";
    ASSERT_EQ(run("analyze --data " + q(csv) + " --seed 1 --treatment T --t0 0 --t1 1 --outcome Y --covariates Z --out " +
                      q(kWork / "balanced.json"),
                  err),
              0);
    const auto summary = slurp(err);
    EXPECT_NE(summary.find("unbiased"), std::string::npos) << summary;
}

TEST(Cli, UndeterminedExitCode) {
    const auto csv = write("one_arm.csv", "T,Z,Y\n1,a,1\n1,b,0\n1,a,0\n0,a,1\n");
    EXPECT_EQ(run("analyze --data " + q(csv) + " --seed 1 --treatment T --t0 0 --t1 1 --outcome Y --where \"Z=b\" > /dev/null"),
              2);
}

TEST(Cli, SynthAndDirectAnalysis) {
    const auto csv = kWork / "synth.csv", csv2 = kWork / "synth2.csv", dag = kWork / "dag.json";
    const std::string args = "synth --nodes 6 --degree 2 --rows 2000 --seed 11 --out ";
    ASSERT_EQ(run(args + q(csv) + " --dag " + q(dag)), 0);
    ASSERT_EQ(run(args + q(csv2)), 0);
    EXPECT_EQ(slurp(csv), slurp(csv2));
    const auto d = nlohmann::json::parse(slurp(dag));
    EXPECT_TRUE(d.contains("nodes"));

    const auto out = kWork / "direct.json";
    ASSERT_EQ(run("analyze --data " + q(csv) + " --seed 3 --treatment V0 --t0 0 --t1 1 --outcome V5 --effect direct --out " +
                  q(out)),
              0);
    const auto j = nlohmann::json::parse(slurp(out));
    EXPECT_TRUE(j["contexts"][0]["outcomes"][0].contains("direct"));
}

TEST(Cli, IndepOnIndependentColumns) {
    std::string text = "X,Y\n";
    for (int i = 0; i < 400; ++i) text += std::to_string(i % 2) + "," + std::to_string((i / 2) % 2) + "\n";
    const auto csv = write("indep.csv", text);
    const auto out = kWork / "indep.json";
    ASSERT_EQ(run("indep --data " + q(csv) + " --seed 5 -x X -y Y --method mit --out " + q(out)), 0);
    const auto j = nlohmann::json::parse(slurp(out));
    EXPECT_GE(j["result"]["p_value"].get<double>(), 0.01);
}

TEST(Cli, DiscoverReportsParents) {
    const auto csv = kWork / "disc.csv";
    ASSERT_EQ(run("synth --nodes 5 --degree 2 --rows 3000 --seed 2 --out " + q(csv)), 0);
    const auto out = kWork / "disc.json";
    ASSERT_EQ(run("discover --data " + q(csv) + " --seed 2 --target V4 --out " + q(out)), 0);
    const auto j = nlohmann::json::parse(slurp(out));
    EXPECT_TRUE(j.contains("parents"));
}
