/** cli_test.cpp - exit codes, error messages and repeatability of the hdru tool */

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "temp_dir.hpp"

using namespace hdru;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

CliResult hdru_cli(const TempDir& dir, const std::string& args) {
    const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = std::string(HDRU_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::string p(const std::filesystem::path& path) { return path.string(); }

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
    TempDir dir;
    EXPECT_EQ(hdru_cli(dir, "").code, 2);
    EXPECT_EQ(hdru_cli(dir, "frobnicate").code, 2);
    EXPECT_EQ(hdru_cli(dir, "simulate --count 1").code, 2);
    EXPECT_EQ(hdru_cli(dir, "fuse --method mertens --inputs a b --out x.png").code, 2);
    EXPECT_EQ(hdru_cli(dir, "fuse --method nope --inputs a b c --out " + p(dir / "x.png")).code, 2);
    const CliResult r = hdru_cli(dir, "fuse --method munet --inputs a b c --out " + p(dir / "x.png"));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("--weights"), std::string::npos) << r.err;
    EXPECT_EQ(hdru_cli(dir, "train --data-dir " + p(dir.path()) + " --seed 1 --policy best").code, 2);
}

TEST(Cli, HelpExitsZero) {
    TempDir dir;
    const CliResult r = hdru_cli(dir, "--help");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("simulate"), std::string::npos);
}

TEST(Cli, MissingOutputDirectoryExitsOneAndNamesPath) {
    TempDir dir;
    const std::string missing = p(dir / "no_such_dir");
    const CliResult r = hdru_cli(dir, "init-weights --out " + missing + "/w.munw");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find(missing), std::string::npos) << r.err;
    EXPECT_EQ(hdru_cli(dir, "fuse --method mertens --inputs a.pgm b.pgm c.pgm --out " + p(dir / "o.png")).code, 1);
}

TEST(Cli, InitWeightsIsDeterministic) {
    TempDir dir;
    const CliResult a = hdru_cli(dir, "init-weights --out " + p(dir / "a.munw"));
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_NE(a.out.find("parameters=15754"), std::string::npos) << a.out;
    ASSERT_EQ(hdru_cli(dir, "init-weights --out " + p(dir / "b.munw")).code, 0);
    EXPECT_EQ(slurp(dir / "a.munw"), slurp(dir / "b.munw"));
}

TEST(Cli, SimulateFuseEvalTrainRepeatBitIdentically) {
    TempDir dir;
    for (const char* c : {"c1", "c2"}) {
        const CliResult r = hdru_cli(dir, "simulate --count 10 --seed 3 --out " + p(dir / c));
        ASSERT_EQ(r.code, 0) << r.err;
        EXPECT_NE(r.out.find("samples=10 train=9 val=1"), std::string::npos) << r.out;
    }
    EXPECT_EQ(slurp(dir / "c1" / "manifest.txt"), slurp(dir / "c2" / "manifest.txt"));
    for (const char* f : {"cam1.pgm", "cam2.pgm", "cam3.pgm", "scene.pgm", "meta.txt"})
        EXPECT_EQ(slurp(dir / "c1" / "0004" / f), slurp(dir / "c2" / "0004" / f)) << f;

    const auto cam = [&](int k) { return p(dir / "c1" / "0004" / ("cam" + std::to_string(k) + ".pgm")); };
    const std::string inputs = " --inputs " + cam(1) + " " + cam(2) + " " + cam(3);
    ASSERT_EQ(hdru_cli(dir, "register" + inputs + " --out " + p(dir.path())).code, 0);
    ASSERT_EQ(hdru_cli(dir, "init-weights --out " + p(dir / "w.munw")).code, 0);
    for (const char* m : {"mertens", "debevec", "single", "munet"}) {
        for (const char* o : {"f1.png", "f2.png"}) {
            const CliResult r = hdru_cli(dir, std::string("fuse --register --method ") + m + inputs + " --weights " +
                                            p(dir / "w.munw") + " --out " + p(dir / o));
            ASSERT_EQ(r.code, 0) << m << ": " << r.err;
        }
        EXPECT_EQ(slurp(dir / "f1.png"), slurp(dir / "f2.png")) << m;
    }

    for (const char* rep : {"r1.txt", "r2.txt"})
        ASSERT_EQ(hdru_cli(dir, "eval --data-dir " + p(dir / "c1") + " --methods mertens,single --report " +
                                    p(dir / rep)).code,
                  0);
    EXPECT_EQ(slurp(dir / "r1.txt"), slurp(dir / "r2.txt"));
    EXPECT_FALSE(slurp(dir / "r1.txt").empty());

    for (const char* ck : {"k1", "k2"}) {
        const CliResult r = hdru_cli(dir, "train --data-dir " + p(dir / "c1") + " --seed 5 --epochs 1 --pretrain-epochs 1 --out " +
                                        p(dir / ck));
        ASSERT_EQ(r.code, 0) << r.err;
    }
    for (const char* f : {"gen_epoch_001.munw", "discriminator.munw", "reports.txt", "config.txt"})
        EXPECT_EQ(slurp(dir / "k1" / f), slurp(dir / "k2" / f)) << f;
}
