#include "procure/validate/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "procure/errors.hpp"

namespace procure::validate {
namespace {

namespace fs = std::filesystem;

std::optional<std::string> search_path(const std::string& name) {
  if (name.find('/') != std::string::npos) {
    if (access(name.c_str(), X_OK) == 0) return name;
    return std::nullopt;
  }
  const char* path = std::getenv("PATH");
  if (path == nullptr) return std::nullopt;
  std::stringstream ss(path);
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    if (dir.empty()) continue;
    std::string full = dir + "/" + name;
    if (access(full.c_str(), X_OK) == 0) return full;
  }
  return std::nullopt;
}

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "procure_run_XXXXXX").string();
    if (mkdtemp(tmpl.data()) == nullptr) throw IoError("cannot create temporary directory");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

Sandbox::Sandbox() : interpreter_(locate_interpreter()) {}

Sandbox::Sandbox(std::string interpreter) : interpreter_(search_path(interpreter)) {}

std::optional<std::string> Sandbox::locate_interpreter() {
  const char* env = std::getenv("PROCURE_PY");
  if (env != nullptr && *env != '\0') return search_path(env);
  return search_path("python3");
}

bool Sandbox::available() const { return interpreter_.has_value(); }

const std::string& Sandbox::interpreter() const {
  if (!interpreter_) throw SandboxUnavailable("no Python interpreter found (set PROCURE_PY)");
  return *interpreter_;
}

ExecResult Sandbox::run(const std::string& program, double timeout_s) const {
  const std::string& python = interpreter();
  TempDir dir;
  fs::path script = dir.path() / "main.py";
  {
    std::ofstream out(script, std::ios::binary);
    out << program;
    if (!out) throw IoError("cannot write " + script.string());
  }

  int fds[2];
  if (pipe2(fds, O_CLOEXEC) != 0) throw IoError("pipe2 failed");

  // Everything the child needs is prepared before fork.
  std::string workdir = dir.path().string();
  std::array<std::string, 4> args{python, "-I", "-B", "main.py"};
  std::array<char*, 5> argv{args[0].data(), args[1].data(), args[2].data(), args[3].data(), nullptr};

  auto start = std::chrono::steady_clock::now();
  pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    throw IoError("fork failed");
  }
  if (pid == 0) {
    setpgid(0, 0);
    struct rlimit core{0, 0};
    setrlimit(RLIMIT_CORE, &core);
    int devnull = open("/dev/null", O_RDONLY);
    if (devnull >= 0) dup2(devnull, STDIN_FILENO);
    dup2(fds[1], STDOUT_FILENO);
    dup2(fds[1], STDERR_FILENO);
    if (chdir(workdir.c_str()) != 0) _exit(126);
    execv(argv[0], argv.data());
    _exit(127);
  }
  executions_.fetch_add(1);
  setpgid(pid, pid);
  close(fds[1]);

  ExecResult result;
  auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(timeout_s));
  std::array<char, 8192> buf{};
  bool open_pipe = true;
  while (open_pipe) {
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      break;
    }
    int wait_ms = static_cast<int>(std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count()) + 1;
    pollfd pfd{fds[0], POLLIN, 0};
    int rc = poll(&pfd, 1, wait_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (rc == 0) continue;
    ssize_t n = read(fds[0], buf.data(), buf.size());
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      open_pipe = false;
      break;
    }
    std::size_t room = kOutputCap - std::min(kOutputCap, result.output.size());
    if (static_cast<std::size_t>(n) > room) result.truncated = true;
    result.output.append(buf.data(), std::min(room, static_cast<std::size_t>(n)));
  }
  if (result.timed_out) kill(-pid, SIGKILL);
  close(fds[0]);

  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  // Grandchildren may linger in the group after the interpreter exits.
  kill(-pid, SIGKILL);
  result.duration_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.signaled = !result.timed_out;
    result.exit_code = 128 + WTERMSIG(status);
  }
  return result;
}

}  // namespace procure::validate
