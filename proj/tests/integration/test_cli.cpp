#include <gtest/gtest.h>
#include <httplib.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <fstream>
#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "temp_dir.hpp"

using testing_support::TempDir;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

/// Runs the CLI; stderr is merged into the output unless `stdout_only`.
RunResult run(const std::string& args, bool stdout_only = false) {
  const std::string cmd = std::string(WARDEN_CLI_PATH) + " " + args + (stdout_only ? " 2>/dev/null" : " 2>&1");
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string fixture() { return testing_support::source_path("data/social_network_ads.csv").string(); }

/// A `serve` child whose stdout is readable line by line.
class ServeProcess {
 public:
  explicit ServeProcess(const std::vector<std::string>& args) {
    int fds[2];
    if (pipe(fds) != 0) return;
    pid_ = fork();
    if (pid_ == 0) {
      dup2(fds[1], STDOUT_FILENO);
      close(fds[0]);
      close(fds[1]);
      std::vector<char*> argv{const_cast<char*>(WARDEN_CLI_PATH)};
      for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
      argv.push_back(nullptr);
      execv(WARDEN_CLI_PATH, argv.data());
      _exit(127);
    }
    close(fds[1]);
    out_ = fdopen(fds[0], "r");
  }
  ~ServeProcess() {
    if (pid_ > 0 && !reaped_) {
      kill(pid_, SIGKILL);
      waitpid(pid_, nullptr, 0);
    }
    if (out_) fclose(out_);
  }

  std::string read_line() {
    std::array<char, 512> buf{};
    if (out_ == nullptr || fgets(buf.data(), static_cast<int>(buf.size()), out_) == nullptr) return {};
    return buf.data();
  }

  int interrupt_and_wait() {
    kill(pid_, SIGINT);
    int status = 0;
    waitpid(pid_, &status, 0);
    reaped_ = true;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

 private:
  pid_t pid_ = -1;
  FILE* out_ = nullptr;
  bool reaped_ = false;
};

int port_from_banner(const std::string& line) {
  auto colon = line.rfind(':');
  return colon == std::string::npos ? 0 : std::stoi(line.substr(colon + 1));
}

}  // namespace

TEST(Cli, SeedPrintsCount) {
  TempDir dir;
  auto r = run("--data-dir " + dir.path().string() + " seed --fixture " + fixture());
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("seeded 400 records"), std::string::npos) << r.output;
}

TEST(Cli, SeedMissingFixtureIsUserError) {
  TempDir dir;
  auto r = run("--data-dir " + dir.path().string() + " seed --fixture /nonexistent.csv");
  EXPECT_EQ(r.exit_code, 1);
}

TEST(Cli, ReportWithoutTrainingFails) {
  TempDir dir;
  auto r = run("--data-dir " + dir.path().string() + " report");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("no reports"), std::string::npos) << r.output;
}

TEST(Cli, FullPipelinePrintsClassificationTable) {
  TempDir dir;
  const std::string d = "--data-dir " + dir.path().string();
  ASSERT_EQ(run(d + " seed --fixture " + fixture()).exit_code, 0);
  ASSERT_EQ(run(d + " sync-once").exit_code, 0);
  auto train = run(d + " train");
  ASSERT_EQ(train.exit_code, 0) << train.output;
  auto report = run(d + " report");
  EXPECT_EQ(report.exit_code, 0);
  EXPECT_NE(report.output.find("precision    recall  f1-score   support"), std::string::npos) << report.output;
  EXPECT_NE(report.output.find("|--- "), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "reports/1/report.txt"));
}

TEST(Cli, RepeatedCommandsAreIdempotent) {
  TempDir dir;
  const std::string d = "--data-dir " + dir.path().string();
  ASSERT_EQ(run(d + " seed --fixture " + fixture()).exit_code, 0);
  ASSERT_EQ(run(d + " sync-once").exit_code, 0);
  std::ifstream first(dir / "sink/dataset.csv");
  std::string before((std::istreambuf_iterator<char>(first)), {});
  auto again = run(d + " sync-once");
  EXPECT_NE(again.output.find("applied 0 changes"), std::string::npos) << again.output;
  std::ifstream second(dir / "sink/dataset.csv");
  EXPECT_EQ(before, std::string((std::istreambuf_iterator<char>(second)), {}));
}

TEST(Cli, JsonOutputParses) {
  TempDir dir;
  const std::string d = "--data-dir " + dir.path().string();
  run(d + " seed --fixture " + fixture());
  run(d + " sync-once");
  auto train = run("--json " + d + " train", true);
  ASSERT_EQ(train.exit_code, 0);
  EXPECT_TRUE(nlohmann::json::accept(train.output)) << train.output;
  auto report = run(d + " --json report --id 1", true);
  ASSERT_EQ(report.exit_code, 0);
  auto j = nlohmann::json::parse(report.output);
  EXPECT_EQ(j["id"], 1);
  EXPECT_EQ(run(d + " report --id 9").exit_code, 1);
}

TEST(Cli, ZeroIntervalNamesField) {
  TempDir dir;
  std::ofstream(dir / "warden.toml") << "api_keys = [\"k\"]\nscheduler_interval = \"0s\"\n";
  auto r = run("--config " + (dir / "warden.toml").string() + " --data-dir " + dir.path().string() + " serve");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("scheduler_interval"), std::string::npos) << r.output;
}

TEST(Cli, UnknownCommandIsUserError) { EXPECT_EQ(run("frobnicate").exit_code, 1); }

TEST(Cli, ServeAnswersHealthAndStopsOnInterrupt) {
  TempDir dir;
  std::ofstream(dir / "warden.toml") << "bind = \"127.0.0.1:0\"\napi_keys = [\"k\"]\n";
  ServeProcess serve({"--config", (dir / "warden.toml").string(), "--data-dir", dir.path().string(), "serve"});
  const auto banner = serve.read_line();
  ASSERT_NE(banner.find("listening on"), std::string::npos) << banner;
  httplib::Client client("127.0.0.1", port_from_banner(banner));
  auto res = client.Get("/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(client.Get("/customers/social")->status, 401);
  EXPECT_EQ(serve.interrupt_and_wait(), 0);
}

TEST(Cli, SimulateWithoutInsertsExpectsNothing) {
  TempDir dir;
  std::ofstream(dir / "warden.toml") << "bind = \"127.0.0.1:0\"\napi_keys = [\"k\"]\n";
  ServeProcess serve({"--config", (dir / "warden.toml").string(), "--data-dir", dir.path().string(), "serve"});
  const int port = port_from_banner(serve.read_line());
  ASSERT_GT(port, 0);
  std::ofstream(dir / "sim.toml") << "bind = \"127.0.0.1:" << port << "\"\napi_keys = [\"k\"]\n";
  auto r = run("--config " + (dir / "sim.toml").string() + " --data-dir " + dir.path().string() +
          " simulate --inserts 0 --wait 1s");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("inserted 0 records"), std::string::npos) << r.output;
  EXPECT_EQ(serve.interrupt_and_wait(), 0);
}
