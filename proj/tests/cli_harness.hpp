#pragma once

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

namespace cli {

// Runs the surfdist binary with `args` (shell syntax), stdout and stderr
// redirected to files in `dir`. Returns the exit status.
inline int run(const std::string& args, const std::filesystem::path& dir, const std::string& env = {}) {
  const std::string cmd = (env.empty() ? "" : env + " ") + "\"" SURFDIST_CLI_PATH "\" " + args + " >\"" +
                          (dir / "stdout.txt").string() + "\" 2>\"" + (dir / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("surfdist_cli_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace cli
