#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

namespace procure::validate {

struct ExecResult {
  int exit_code = -1;
  bool timed_out = false;
  bool signaled = false;
  bool truncated = false;
  std::string output;  // interleaved stdout and stderr
  double duration_ms = 0;
};

/// Runs Python programs in fresh interpreter processes, each in its own
/// temporary working directory and process group.
class Sandbox {
 public:
  static constexpr std::size_t kOutputCap = 1 << 20;

  /// Uses PROCURE_PY when set, else python3 from PATH. Resolution is lazy;
  /// run() throws SandboxUnavailable when nothing can be found.
  Sandbox();
  explicit Sandbox(std::string interpreter);

  static std::optional<std::string> locate_interpreter();

  bool available() const;
  const std::string& interpreter() const;

  ExecResult run(const std::string& program, double timeout_s) const;

  /// Number of processes started so far.
  std::uint64_t executions() const noexcept { return executions_.load(); }

 private:
  std::optional<std::string> interpreter_;
  mutable std::atomic<std::uint64_t> executions_{0};
};

}  // namespace procure::validate
