#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace procure::llm {

struct BackendConfig {
  std::string kind = "http";  // "http" or "fixture"
  std::string endpoint;       // full URL of the chat completions resource
  std::string model;
  double temperature = 1.0;
  int max_retries = 5;
  std::string auth_env = "PROCURE_LLM_KEY";
  std::string fixtures_dir;
  double request_timeout_s = 120.0;

  /// Throws std::invalid_argument on violated invariants.
  void check() const;
  /// Throws SchemaError / IoError.
  static BackendConfig parse(const std::string& json_text);
  static BackendConfig load(const std::filesystem::path& path);
};

struct Completion {
  std::string content;
  std::optional<std::int64_t> total_tokens;
};

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  /// `attempt` is 1-based. Throws TransportError.
  virtual Completion complete(const std::string& prompt, int attempt) = 0;
  virtual std::string model_id() const = 0;
};

/// Chat-completions style endpoint: POST {model, messages, temperature}.
class HttpBackend : public LlmBackend {
 public:
  explicit HttpBackend(BackendConfig cfg);
  Completion complete(const std::string& prompt, int attempt) override;
  std::string model_id() const override { return cfg_.model; }

 private:
  BackendConfig cfg_;
};

/// Offline backend reading `<dir>/<sha256(prompt)>.json`, shaped as
/// {"responses": [{"content": ..., "usage": {"total_tokens": n}} | {"status": 500}, ...]}.
/// Attempt i uses entry min(i, len) - 1.
class FixtureBackend : public LlmBackend {
 public:
  explicit FixtureBackend(std::filesystem::path dir, std::string model = "fixture");
  Completion complete(const std::string& prompt, int attempt) override;
  std::string model_id() const override { return model_; }

  static std::filesystem::path fixture_path(const std::filesystem::path& dir, const std::string& prompt);

 private:
  std::filesystem::path dir_;
  std::string model_;
};

struct ScriptedReply {
  std::string content;
  int status = 200;
  std::optional<std::int64_t> tokens;
};

/// Replays a fixed reply sequence, one reply per call; the last reply
/// repeats once the script runs out.
class ScriptedBackend : public LlmBackend {
 public:
  explicit ScriptedBackend(std::vector<ScriptedReply> replies, std::string model = "scripted");
  Completion complete(const std::string& prompt, int attempt) override;
  std::string model_id() const override { return model_; }
  int calls() const;

 private:
  std::vector<ScriptedReply> replies_;
  std::string model_;
  mutable std::mutex mu_;
  int calls_ = 0;
};

std::unique_ptr<LlmBackend> make_backend(const BackendConfig& cfg);

/// First fenced code block; failing that the whole response when it parses
/// and defines a function. Throws MalformedResponse otherwise.
std::string extract_code(const std::string& response);

/// One model call followed by extraction.
std::string generate_candidate(const std::string& prompt, LlmBackend& backend, int attempt = 1,
                               std::optional<std::int64_t>* tokens = nullptr);

}  // namespace procure::llm
