#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
    int status = -1;
    std::string out;
};

Run run(const std::string& args)
{
    const std::string cmd = std::string(HETMAC_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p)
        return r;
    std::array<char, 4096> buf{};
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), p)) > 0)
        r.out.append(buf.data(), got);
    const int raw = pclose(p);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::string scenario(const char* name) { return std::string(HETMAC_SCENARIOS) + "/" + name; }

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() / ("hetmac_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write(const std::string& name, const std::string& text)
    {
        const auto p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }

    fs::path dir_;
};

const char* two_users = "[user1]\nsnr_db = 24\nblocklength = 128\ntarget_eps = 1e-6\n"
                        "[user2]\nsnr_db = 12\nblocklength = 200\ntarget_eps = 1e-5\n"
                        "[estimator]\nsamples = 10000\nseed = 3\n";

} // namespace

TEST_F(Cli, UsageErrors)
{
    EXPECT_EQ(run("").status, 2);
    EXPECT_EQ(run("frobnicate").status, 2);
    EXPECT_EQ(run("region --scenario /nonexistent.ini --out x.csv").status, 2);
    EXPECT_EQ(run("region --scenario " + scenario("two_user.ini")).status, 2);
    EXPECT_EQ(run("--help").status, 0);
}

TEST_F(Cli, InvalidConfig)
{
    const auto bad = write("bad.ini", std::string(two_users) + "[flags]\nspeed = fast\n");
    EXPECT_EQ(run("det-verify --scenario " + bad.string()).status, 2);
    const auto odd = write("odd.ini", std::string(two_users) + "[alloc]\nX = 3, 0, 4\n");
    EXPECT_EQ(run("region --scenario " + odd.string() + " --out " + (dir_ / "o.csv").string()).status, 2);
    EXPECT_EQ(run("codeparams --scenario " + scenario("two_user.ini") + " --alloc Z").status, 2);
    EXPECT_EQ(run("constellation --scenario " + scenario("two_user.ini") + " --alloc E --component 3 --out " +
                  (dir_ / "c.csv").string())
                  .status,
              2);
}

TEST_F(Cli, Infeasible)
{
    const auto p = write("inf.ini", std::string(two_users) + "[alloc]\nX = 6, 4, 4\n");
    const auto r = run("det-verify --scenario " + p.string());
    EXPECT_EQ(r.status, 3);
    EXPECT_NE(r.out.find("FAIL"), std::string::npos);
    EXPECT_EQ(run("region --scenario " + p.string() + " --out " + (dir_ / "r.csv").string()).status, 3);
    EXPECT_EQ(run("codeparams --scenario " + p.string() + " --alloc X").status, 3);
}

TEST_F(Cli, DetVerifyExample)
{
    for (const char* s : {"1", "2", "both"}) {
        const auto r = run("det-verify --scenario " + scenario("det_example.ini") + " --scheme " + s);
        EXPECT_EQ(r.status, 0) << r.out;
        EXPECT_NE(r.out.find("MI (6,4,8)"), std::string::npos) << r.out;
        EXPECT_NE(r.out.find("PASS"), std::string::npos);
        EXPECT_NE(r.out.find("gains n: 10 8"), std::string::npos);
    }
}

TEST_F(Cli, CodeParams)
{
    const auto r = run("codeparams --scenario " + scenario("two_user.ini") + " --alloc E --samples 10000");
    ASSERT_EQ(r.status, 0);
    EXPECT_NE(r.out.find("user 1: I="), std::string::npos);
    EXPECT_NE(r.out.find("L=512 "), std::string::npos);
    EXPECT_NE(r.out.find("L=800 "), std::string::npos);
}

TEST_F(Cli, Constellation)
{
    const auto out = dir_ / "e.csv";
    const auto r = run("constellation --scenario " + scenario("two_user.ini") + " --alloc E --component 1 --out " +
                       out.string());
    ASSERT_EQ(r.status, 0);
    EXPECT_NE(r.out.find("256 points"), std::string::npos);
    std::istringstream csv(slurp(out));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "re,im");
    int rows = 0;
    while (std::getline(csv, line))
        ++rows;
    EXPECT_EQ(rows, 256);
}

TEST_F(Cli, RegionIsReproducible)
{
    const auto base = "region --scenario " + scenario("two_user.ini") + " --samples 10000 --seed 5";
    ASSERT_EQ(run(base + " --threads 1 --out " + (dir_ / "a.csv").string()).status, 0);
    ASSERT_EQ(run(base + " --threads 4 --out " + (dir_ / "b.csv").string()).status, 0);
    ASSERT_EQ(run(base + " --threads 4 --out " + (dir_ / "c.csv").string()).status, 0);
    const auto a = slurp(dir_ / "a.csv");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(dir_ / "b.csv"));
    EXPECT_EQ(a, slurp(dir_ / "c.csv"));
    EXPECT_EQ(a.rfind("# hetmac region csv v1 seed=5 samples=10000\n", 0), 0u);

    const auto other = "region --scenario " + scenario("two_user.ini") + " --samples 10000 --seed 6 --out ";
    ASSERT_EQ(run(other + (dir_ / "d.csv").string()).status, 0);
    EXPECT_NE(a, slurp(dir_ / "d.csv"));
}

TEST_F(Cli, RegionEnumeratesWhenNoAllocations)
{
    const auto p = write("enum.ini", "[user1]\nsnr_db = 10\nblocklength = 64\ntarget_eps = 1e-3\n"
                                     "[estimator]\nsamples = 10000\n");
    const auto out = dir_ / "r.csv";
    const auto r = run("region --scenario " + p.string() + " --out " + out.string());
    ASSERT_EQ(r.status, 0);
    // n = 4: orders 0, 2, 4
    for (const char* id : {"\n0 (", "\n2 (", "\n4 ("})
        EXPECT_NE(("\n" + r.out).find(id), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("best sum rate: 4"), std::string::npos) << r.out;
}
