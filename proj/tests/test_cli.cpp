#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "reintel/io.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("reintel_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    CliResult exec(const std::string& args) const {
        const auto out = dir_ / "stdout.txt";
        const auto err = dir_ / "stderr.txt";
        const std::string cmd = std::string(REINTEL_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
        const int status = std::system(cmd.c_str());
        CliResult r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = reintel::io::read_file(out, "test");
        r.err = reintel::io::read_file(err, "test");
        return r;
    }

    std::string p(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

} // namespace

TEST_F(Cli, GenerateTrainPredictEvaluate) {
    ASSERT_EQ(exec("generate --out " + p("train.csv") + " --n 300 --seed 1").code, 0);
    ASSERT_EQ(exec("generate --out " + p("test.csv") + " --n 100 --seed 2 --id-prefix t").code, 0);
    const auto train = exec("train --train " + p("train.csv") + " --split " + p("test.csv") +
                           " --encoder hashing:hash:64 --k 12 --lr-override 1 --seed 3 --out " + p("model"));
    ASSERT_EQ(train.code, 0) << train.err;
    for (int f = 0; f < 12; ++f) {
        const std::string name = (f < 10 ? "fold_0" : "fold_") + std::to_string(f) + ".head";
        EXPECT_TRUE(fs::exists(dir_ / "model" / name)) << name;
    }
    EXPECT_TRUE(fs::exists(dir_ / "model" / "manifest.txt"));
    EXPECT_TRUE(fs::exists(dir_ / "model" / "scaler.txt"));
    const auto run_txt = reintel::io::read_file(dir_ / "model" / "run.txt", "test");
    EXPECT_NE(run_txt.find("# command: train"), std::string::npos);
    EXPECT_NE(run_txt.find("lr-override"), std::string::npos);

    const auto pred = exec("predict " + p("test.csv") + " --model " + p("model") + " --out " + p("pred.csv"));
    ASSERT_EQ(pred.code, 0) << pred.err;
    const auto eval = exec("evaluate --pred " + p("pred.csv") + " --gold " + p("test.csv"));
    ASSERT_EQ(eval.code, 0) << eval.err;
    EXPECT_EQ(eval.out.rfind("AUC ", 0), 0u) << eval.out;
}

TEST_F(Cli, EvaluatePerfectPredictions) {
    reintel::io::atomic_write(dir_ / "gold.csv", "id,label\na,1\nb,0\nc,1\n");
    reintel::io::atomic_write(dir_ / "pred.csv", "id,probability\nc,1\na,1\nb,0\n");
    const auto r = exec("evaluate --pred " + p("pred.csv") + " --gold " + p("gold.csv"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "AUC 1.0000 (n_pos=2, n_neg=1)\n");

    reintel::io::atomic_write(dir_ / "short.csv", "id,probability\na,1\n");
    EXPECT_EQ(exec("evaluate --pred " + p("short.csv") + " --gold " + p("gold.csv")).code, 2);
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(exec("predict " + p("none.csv") + " --model " + p("no_model") + " --out " + p("x.csv")).code, 2);
    EXPECT_EQ(exec("frobnicate").code, 1);
    EXPECT_EQ(exec("").code, 1);
    EXPECT_EQ(exec("stats " + p("missing.csv")).code, 2);
    EXPECT_EQ(exec("train --train x.csv --out m --encoder bogus").code, 1);
    const auto v = exec("--version");
    EXPECT_EQ(v.code, 0);
    EXPECT_NE(v.out.find("reintel"), std::string::npos);
}

TEST_F(Cli, StatsPrintsKeyValues) {
    ASSERT_EQ(exec("generate --out " + p("c.csv") + " --n 50 --seed 5").code, 0);
    const auto r = exec("stats " + p("c.csv") + " --labeled");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("n_examples=50\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("number of examples"), std::string::npos);
}

TEST_F(Cli, RerunsAreByteIdentical) {
    ASSERT_EQ(exec("generate --out " + p("train.csv") + " --n 200 --seed 7").code, 0);
    for (const char* m : {"m1", "m2"}) {
        ASSERT_EQ(exec("train --train " + p("train.csv") + " --encoder hashing:hash:32 --k 4 --lr-override 0.5 --out " +
                      p(m))
                      .code,
                  0);
        ASSERT_EQ(exec("predict " + p("train.csv") + " --model " + p(m) + " --out " + p(std::string(m) + ".csv")).code, 0);
    }
    for (const char* f : {"fold_00.head", "fold_03.head", "manifest.txt", "scaler.txt"})
        EXPECT_EQ(reintel::io::read_file(dir_ / "m1" / f, "test"), reintel::io::read_file(dir_ / "m2" / f, "test")) << f;
    EXPECT_EQ(reintel::io::read_file(p("m1.csv"), "test"), reintel::io::read_file(p("m2.csv"), "test"));
}

TEST_F(Cli, ConfigFileSuppliesOptions) {
    ASSERT_EQ(exec("generate --out " + p("train.csv") + " --n 120 --seed 8").code, 0);
    reintel::io::atomic_write(dir_ / "run.ini", "[train]\nk=3\nlr-override=0.5\nencoder=hashing:h:16\nout=" +
                                                    p("cfg_model") + "\ntrain=" + p("train.csv") + "\n");
    const auto r = exec("--config " + p("run.ini") + " train");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir_ / "cfg_model" / "fold_02.head"));
    EXPECT_FALSE(fs::exists(dir_ / "cfg_model" / "fold_03.head"));
    const auto manifest = reintel::io::read_file(dir_ / "cfg_model" / "manifest.txt", "test");
    EXPECT_NE(manifest.find("encoders=h:hashing:16:256"), std::string::npos) << manifest;
}

TEST_F(Cli, RunManifestReplaysTraining) {
    ASSERT_EQ(exec("generate --out " + p("train.csv") + " --n 150 --seed 9").code, 0);
    ASSERT_EQ(exec("train --train " + p("train.csv") + " --encoder hashing:hash:32 --k 3 --lr-override 0.5 --seed 4 --out " +
                   p("a"))
                  .code,
              0);
    const auto r = exec("--config " + p("a/run.txt") + " train --out " + p("b"));
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"fold_00.head", "fold_02.head", "manifest.txt"})
        EXPECT_EQ(reintel::io::read_file(dir_ / "a" / f, "test"), reintel::io::read_file(dir_ / "b" / f, "test")) << f;
}
