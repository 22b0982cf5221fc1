#pragma once

// Test-only helper: runs a script with the host Python interpreter and
// returns its exit status and stdout. Independent of the sandbox module so
// it can serve as an oracle for it.

#include <unistd.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>

namespace testing_support {

struct PyResult {
  int status = -1;
  std::string out;
};

inline std::string python_binary() {
  const char* env = std::getenv("PROCURE_PY");
  return env != nullptr && *env != '\0' ? env : "python3";
}

inline bool python_available() {
  static const bool ok = std::system((python_binary() + " -c pass >/dev/null 2>&1").c_str()) == 0;
  return ok;
}

inline PyResult run_python(const std::string& script) {
  char path[] = "/tmp/procure_oracle_XXXXXX";
  int fd = mkstemp(path);
  PyResult r;
  if (fd < 0) return r;
  close(fd);
  {
    std::ofstream f(path);
    f << script;
  }
  std::string cmd = python_binary() + " " + path + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe != nullptr) {
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    int status = pclose(pipe);
    r.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::remove(path);
  return r;
}

}  // namespace testing_support
