#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("bermudan_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = std::string(CLI_PATH) + " " + args + " >" + (workdir() / "stdout.txt").string() + " 2>" +
                            (workdir() / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path write(const std::string& name, const std::string& text) {
    const auto p = workdir() / name;
    std::ofstream(p) << text;
    return p;
}

const char* tiny =
    "[experiment]\n"
    "name = price hedge\n"
    "[contract]\n"
    "style = european\n"
    "start = 1\n"
    "end = 4\n"
    "[training]\n"
    "paths = 2000\n"
    "nodes = 8\n"
    "epochs = 50\n"
    "[bounds]\n"
    "paths = 2000\n"
    "runs = 2\n"
    "[hedge]\n"
    "paths = 300\n"
    "rebalances = 10\n";

}  // namespace

TEST(Cli, InvalidValueReportsLine) {
    const auto cfg = write("bad.ini", "[training]\n\nnodes = many\n");
    EXPECT_EQ(run("--config " + cfg.string() + " --out " + (workdir() / "bad").string()), 2);
    EXPECT_NE(slurp(workdir() / "stderr.txt").find("bad.ini:3"), std::string::npos);
}

TEST(Cli, UnknownKeyIsRejected) {
    const auto cfg = write("typo.ini", "[training]\nnodse = 8\n");
    EXPECT_EQ(run("--config " + cfg.string()), 2);
    EXPECT_NE(slurp(workdir() / "stderr.txt").find("unknown key"), std::string::npos);
}

TEST(Cli, EmptyExperimentListIsNoop) {
    const auto out = workdir() / "noop";
    EXPECT_EQ(run("--experiment '' --out " + out.string()), 0);
    EXPECT_TRUE(fs::exists(out / "manifest.ini"));
    EXPECT_FALSE(fs::exists(out / "results.csv"));
}

TEST(Cli, RunIsReproducibleFromManifest) {
    const auto cfg = write("tiny.ini", tiny);
    const auto a = workdir() / "a", b = workdir() / "b";
    ASSERT_EQ(run("--config " + cfg.string() + " --out " + a.string()), 0) << slurp(workdir() / "stderr.txt");
    ASSERT_EQ(run("--config " + (a / "manifest.ini").string() + " --out " + b.string()), 0);
    for (const char* f : {"results.csv", "diagnostics.csv", "hedge.csv", "errors_static_k0.csv", "errors_dynamic_k0.csv"}) {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    const auto results = slurp(a / "results.csv");
    EXPECT_EQ(results.rfind("type,style,moneyness,strike,direct,lb,lb_se,ub,ub_se", 0), 0u);
}

TEST(Cli, ReportMergesRunsAndRefusesMixedConfigs) {
    const auto cfg = write("tiny.ini", tiny);
    const auto dir = workdir() / "report";
    ASSERT_EQ(run("--config " + cfg.string() + " --experiment price --seed 1 --out " + (dir / "r1").string()), 0);
    ASSERT_EQ(run("--config " + cfg.string() + " --experiment price --seed 2 --out " + (dir / "r2").string()), 0);
    ASSERT_EQ(run("report " + dir.string()), 0) << slurp(workdir() / "stderr.txt");
    const auto table = slurp(dir / "table_bounds.csv");
    EXPECT_NE(table.find("lb,lb_se"), std::string::npos);
    EXPECT_NE(table.find(",2,"), std::string::npos);

    std::string other = tiny;
    other.replace(other.find("nodes = 8"), 9, "nodes = 4");
    const auto cfg2 = write("other.ini", other);
    ASSERT_EQ(run("--config " + cfg2.string() + " --experiment price --out " + (dir / "r3").string()), 0);
    EXPECT_NE(run("report " + dir.string()), 0);
    EXPECT_NE(slurp(workdir() / "stderr.txt").find("training.nodes"), std::string::npos);
}

TEST(Cli, SingleRunReportHasNaStandardErrors) {
    const auto cfg = write("tiny.ini", tiny);
    const auto dir = workdir() / "single";
    ASSERT_EQ(run("--config " + cfg.string() + " --experiment price --out " + dir.string()), 0);
    ASSERT_EQ(run("report " + dir.string()), 0);
    const auto table = slurp(dir / "table_bounds.csv");
    EXPECT_NE(table.find(",NA"), std::string::npos);
}

TEST(Cli, RuntimeFailureIsTagged) {
    const auto cfg = write("g2dyn.ini",
                           "[experiment]\nname = hedge\n[model]\nd = 2\n[contract]\nstyle = european\n"
                           "[hedge]\nstrategies = dynamic\npaths = 10\n");
    EXPECT_EQ(run("--config " + cfg.string() + " --out " + (workdir() / "g2dyn").string()), 3);
    EXPECT_NE(slurp(workdir() / "stderr.txt").find("error [hedging]"), std::string::npos);
}
