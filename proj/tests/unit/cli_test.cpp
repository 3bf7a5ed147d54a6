#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / ("grading_cli_" + std::to_string(::getpid()));

int run(const std::string& args, std::string* out = nullptr) {
  fs::create_directories(kWork);
  const fs::path log = kWork / "stdout.txt";
  const std::string cmd = std::string(GRADING_CLI) + " " + args + " > " + log.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  if (out) {
    std::ifstream in(log);
    std::stringstream buf;
    buf << in.rdbuf();
    *out = buf.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Cli : public ::testing::Test {
 protected:
  static void TearDownTestSuite() { fs::remove_all(kWork); }
};

}  // namespace

TEST_F(Cli, ConfigDump) {
  std::string out;
  EXPECT_EQ(run("config --dump", &out), 0);
  EXPECT_NE(out.find("cell_size"), std::string::npos);
  EXPECT_EQ(run("--set timeout_steps=9 config --dump", &out), 0);
  EXPECT_NE(out.find("timeout_steps = 9\n"), std::string::npos);
  EXPECT_EQ(run("config"), 2);
  EXPECT_EQ(run("--set cell_size=-1 config --dump"), 2);
}

TEST_F(Cli, InvalidInvocations) {
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("evaluate --policy nosuch --runs 1"), 2);
  EXPECT_EQ(run("scenario generate --family incline --out " + (kWork / "x").string()), 2);
}

TEST_F(Cli, GenerateRecordReplay) {
  const fs::path sc = kWork / "scenario";
  EXPECT_EQ(run("scenario generate --family init --seed 7 --out " + sc.string()), 0);
  EXPECT_TRUE(fs::exists(sc / "initial.hmap"));
  EXPECT_TRUE(fs::exists(sc / "target.hmap"));

  const fs::path rec = kWork / "records";
  EXPECT_EQ(run("oracle run --seed 7 --n 1 --record " + rec.string()), 0);
  const fs::path ep = rec / "episode_7";
  ASSERT_TRUE(fs::exists(ep / "manifest.txt"));
  std::string out;
  EXPECT_EQ(run("replay " + ep.string(), &out), 0);
  EXPECT_EQ(run("--set lambda_time=0.5 replay " + ep.string()), 3);

  // tamper with one observation
  {
    std::fstream f(ep / "obs" / "1.hmap", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(40);
    f.put('\x7f');
  }
  EXPECT_EQ(run("replay " + ep.string()), 3);
}

TEST_F(Cli, EvaluateWritesCsv) {
  const fs::path csv = kWork / "eval.csv";
  EXPECT_EQ(run("evaluate --policy snp --runs 2 --csv " + csv.string()), 0);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("seed,volume_left", 0), 0u);
}
