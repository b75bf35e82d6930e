#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace testsupport {

inline std::string cli_path() {
  const char* env = std::getenv("SQLSIM_CLI");
  if (env != nullptr && *env != '\0') return env;
  return "./sqlsim";
}

struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("sqlsim_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string str(const std::string& child = "") const {
    return child.empty() ? path.string() : (path / child).string();
  }
};

struct RunResult {
  int exit_code = -1;
  std::string stderr_text;
};

// Runs the CLI via the shell, capturing stderr; stdout goes to a scratch file.
inline RunResult run_cli(const std::string& args, const TempDir& dir,
                         const std::string& env_prefix = "") {
  const std::string err_file = dir.str("stderr_capture.txt");
  const std::string cmd = env_prefix + cli_path() + " " + args + " >" +
                          dir.str("stdout_capture.txt") + " 2>" + err_file;
  const int status = std::system(cmd.c_str());
  RunResult res;
  if (WIFEXITED(status)) res.exit_code = WEXITSTATUS(status);
  std::ifstream in(err_file);
  std::stringstream ss;
  ss << in.rdbuf();
  res.stderr_text = ss.str();
  return res;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Composite Simpson quadrature; the tests' independent integration route.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int intervals) {
  if (intervals % 2 != 0) ++intervals;
  const double h = (b - a) / intervals;
  double sum = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) {
    sum += f(a + i * h) * (i % 2 == 0 ? 2.0 : 4.0);
  }
  return sum * h / 3.0;
}

}  // namespace testsupport
