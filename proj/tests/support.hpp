#pragma once

// Small helpers shared by the test files: scratch directories, file I/O and
// subprocess exit codes.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#ifdef _WIN32
#error "tests assume a POSIX shell"
#endif
#include <sys/wait.h>

namespace testsupport {

// Fresh directory under the system temp root, removed on destruction.
struct ScratchDir {
  std::filesystem::path path;

  ScratchDir() {
    std::mt19937_64 rng(std::random_device{}());
    std::ostringstream name;
    name << "condenser-test-" << std::hex << rng();
    path = std::filesystem::temp_directory_path() / name.str();
    std::filesystem::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs a shell command and returns its exit code (-1 when it did not exit
// normally). Output is left on the test's stdout/stderr unless redirected.
inline int run_command(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  if (WIFEXITED(rc)) return WEXITSTATUS(rc);
  return -1;
}

}  // namespace testsupport
