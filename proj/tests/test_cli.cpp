#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ced/io.hpp"

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = fs::temp_directory_path() / "ced_cli_test";
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    static void TearDownTestSuite() { fs::remove_all(dir_); }

    static int run(const std::string& args) {
        const std::string command = std::string(CED_CLI_PATH) + " " + args + " 2>" + (dir_ / "stderr.txt").string();
        const int status = std::system(command.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    static std::string path(const std::string& name) { return (dir_ / name).string(); }
    static std::string read(const std::string& name) { return ced::read_file_bytes(dir_ / name); }

    static std::vector<std::vector<std::string>> rows(const std::string& csv) {
        std::vector<std::vector<std::string>> out;
        std::istringstream lines(csv);
        std::string line;
        std::getline(lines, line);
        while (std::getline(lines, line)) {
            std::vector<std::string> cells;
            std::istringstream cell_stream(line);
            std::string cell;
            while (std::getline(cell_stream, cell, ',')) cells.push_back(cell);
            out.push_back(cells);
        }
        return out;
    }

    static inline fs::path dir_;
};

}  // namespace

TEST_F(Cli, SynthThenDetectWritesCsv) {
    ASSERT_EQ(run("synth --kind checker_floor --extent 0.4 --jitter 0.3 -o " + path("floor.ply")), 0);
    ASSERT_EQ(run("detect -i " + path("floor.ply") + " -o " + path("kp.csv")), 0);
    const std::string csv = read("kp.csv");
    EXPECT_EQ(csv.rfind("index,x,y,z,r,g,b,d_g,d_c\n", 0), 0U);
    EXPECT_FALSE(rows(csv).empty());
    ASSERT_EQ(run("detect -i " + path("floor.ply") + " -o " + path("kp.pcd")), 0);
    EXPECT_EQ(ced::load_cloud(path("kp.pcd")).size(), rows(csv).size());
}

TEST_F(Cli, UniformPlaneHasNoInteriorKeypoints) {
    ASSERT_EQ(run("synth --kind plane --extent 1 --pitch 0.01 -o " + path("plane.ply")), 0);
    ASSERT_EQ(run("detect --mode ced3d -i " + path("plane.ply") + " -o " + path("plane.csv")), 0);
    for (const auto& row : rows(read("plane.csv"))) {
        const double x = std::stod(row[1]);
        const double y = std::stod(row[2]);
        EXPECT_GT(std::max(std::abs(x), std::abs(y)), 0.5 - 0.05);
    }
}

TEST_F(Cli, UsageErrorsExitTwo) {
    ASSERT_EQ(run("synth --kind plane --extent 0.2 -o " + path("tiny.ply")), 0);
    EXPECT_EQ(run("detect -i " + path("tiny.ply") + " --tg 1.5"), 2);
    EXPECT_NE(read("stderr.txt").find("--tg"), std::string::npos);
    EXPECT_EQ(run("detect -i " + path("tiny.ply") + " --unknown-flag"), 2);
    EXPECT_EQ(run("detect"), 2);
    EXPECT_EQ(run("detect -i " + path("missing.ply")), 2);
    EXPECT_EQ(run("detect -i " + path("tiny.ply") + " --mode sift"), 2);
    EXPECT_EQ(run("repeat -i " + path("tiny.ply") + " --seed soon"), 2);
    EXPECT_EQ(run(""), 2);
}

TEST_F(Cli, RuntimeErrorsExitOne) {
    ced::write_file_bytes(path("broken.ply"), "ply\nformat ascii 1.0\nelement vertex 5\nproperty float x\n"
                                              "property float y\nproperty float z\nend_header\n0 0 0\n");
    EXPECT_EQ(run("detect -i " + path("broken.ply")), 1);
    EXPECT_NE(read("stderr.txt").find("TruncatedBody"), std::string::npos);

    ced::ColoredPointCloud bare;
    bare.has_color = false;
    for (int k = 0; k < 50; ++k) bare.points.push_back({0.01 * k, 0.0, 0.0});
    ced::save_cloud(path("bare.ply"), bare, ced::CloudFormat::PlyAscii);
    EXPECT_EQ(run("detect --mode ced -i " + path("bare.ply")), 1);
    EXPECT_EQ(run("detect --mode ced3d -i " + path("bare.ply") + " -o " + path("bare.csv")), 0);
}

TEST_F(Cli, SameArgumentsGiveIdenticalFiles) {
    ASSERT_EQ(run("synth --kind checker_floor --extent 0.4 --jitter 0.3 -o " + path("c.ply")), 0);
    ASSERT_EQ(run("synth --kind checker_floor --extent 0.4 --jitter 0.3 -o " + path("c2.ply")), 0);
    EXPECT_EQ(read("c.ply"), read("c2.ply"));
    for (const std::string mode : {"ced", "random"}) {
        const std::string args = "repeat --trials 3 --no-timing --mode " + mode + " -i " + path("c.ply") + " -o ";
        ASSERT_EQ(run(args + path("r1.csv")), 0);
        ASSERT_EQ(run(args + path("r2.csv") + " --threads 4"), 0);
        EXPECT_EQ(read("r1.csv"), read("r2.csv")) << mode;
        EXPECT_EQ(rows(read("r1.csv")).size(), 4U);
    }
    ASSERT_EQ(run("detect -i " + path("c.ply") + " -o " + path("d1.csv")), 0);
    ASSERT_EQ(run("detect --threads 3 -i " + path("c.ply") + " -o " + path("d2.csv")), 0);
    EXPECT_EQ(read("d1.csv"), read("d2.csv"));
}

TEST_F(Cli, AblateGivesFiveNonIncreasingRows) {
    ASSERT_EQ(run("synth --kind box_corner --jitter 0.3 -o " + path("box.ply")), 0);
    ASSERT_EQ(run("ablate --tg 0.1,0.2,0.3,0.4,0.5 --tc 0.1 --trials 2 -i " + path("box.ply") + " -o " +
                  path("ablate.csv")),
              0);
    const auto table = rows(read("ablate.csv"));
    ASSERT_EQ(table.size(), 5U);
    for (std::size_t k = 1; k < table.size(); ++k) EXPECT_LE(std::stoul(table[k][2]), std::stoul(table[k - 1][2]));
}

TEST_F(Cli, BenchReportsRepetitions) {
    ASSERT_EQ(run("synth --kind checker_floor --extent 0.3 -o " + path("b.pcd")), 0);
    ASSERT_EQ(run("bench --repetitions 3 -i " + path("b.pcd") + " -o " + path("bench.csv")), 0);
    EXPECT_EQ(rows(read("bench.csv")).size(), 6U);
    EXPECT_EQ(run("bench --repetitions 2 -i " + path("b.pcd")), 2);
}
