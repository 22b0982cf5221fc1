#include "procure/llm/backend.hpp"

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

#include "procure/code/digest.hpp"
#include "procure/code/parser.hpp"
#include "procure/errors.hpp"

namespace procure::llm {
namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::optional<std::int64_t> usage_tokens(const json& j) {
  auto usage = j.find("usage");
  if (usage == j.end() || !usage->is_object()) return std::nullopt;
  auto total = usage->find("total_tokens");
  if (total == usage->end() || !total->is_number_integer()) return std::nullopt;
  return total->get<std::int64_t>();
}

}  // namespace

void BackendConfig::check() const {
  if (max_retries < 1) throw std::invalid_argument("max_retries must be at least 1");
  if (temperature < 0) throw std::invalid_argument("temperature must be non-negative");
  if (kind == "http") {
    if (endpoint.empty()) throw std::invalid_argument("http backend needs an endpoint");
    if (model.empty()) throw std::invalid_argument("http backend needs a model");
  } else if (kind == "fixture") {
    if (fixtures_dir.empty()) throw std::invalid_argument("fixture backend needs fixtures_dir");
  } else {
    throw std::invalid_argument("unknown backend kind '" + kind + "'");
  }
}

BackendConfig BackendConfig::parse(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error&) {
    throw SchemaError(0, "<json>");
  }
  if (!j.is_object()) throw SchemaError(0, "<object>");
  BackendConfig c;
  auto str = [&](const char* key, std::string& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_string()) throw SchemaError(0, key);
    dst = j[key].get<std::string>();
  };
  auto num = [&](const char* key, double& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) throw SchemaError(0, key);
    dst = j[key].get<double>();
  };
  str("kind", c.kind);
  str("endpoint", c.endpoint);
  str("model", c.model);
  str("auth_env", c.auth_env);
  str("fixtures_dir", c.fixtures_dir);
  num("temperature", c.temperature);
  num("request_timeout_s", c.request_timeout_s);
  if (j.contains("max_retries")) {
    if (!j["max_retries"].is_number_integer()) throw SchemaError(0, "max_retries");
    c.max_retries = j["max_retries"].get<int>();
  }
  return c;
}

BackendConfig BackendConfig::load(const std::filesystem::path& path) {
  BackendConfig c = parse(read_file(path));
  if (!c.fixtures_dir.empty() && std::filesystem::path(c.fixtures_dir).is_relative()) {
    c.fixtures_dir = (path.parent_path() / c.fixtures_dir).string();
  }
  return c;
}

HttpBackend::HttpBackend(BackendConfig cfg) : cfg_(std::move(cfg)) {}

Completion HttpBackend::complete(const std::string& prompt, int /*attempt*/) {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(cfg_.endpoint, m, url_re)) throw TransportError("bad endpoint URL: " + cfg_.endpoint);
  std::string base = m[1].str();
  std::string path = m[2].matched ? m[2].str() : "/";

  httplib::Client client(base);
  auto secs = static_cast<time_t>(cfg_.request_timeout_s);
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  httplib::Headers headers;
  if (const char* key = std::getenv(cfg_.auth_env.c_str()); key != nullptr && *key != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  json body = {{"model", cfg_.model},
               {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
               {"temperature", cfg_.temperature}};
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw TransportError("HTTP status " + std::to_string(res->status));
  json j;
  try {
    j = json::parse(res->body);
    Completion c;
    c.content = j.at("choices").at(0).at("message").at("content").get<std::string>();
    c.total_tokens = usage_tokens(j);
    return c;
  } catch (const json::exception& e) {
    throw TransportError(std::string("unexpected response body: ") + e.what());
  }
}

FixtureBackend::FixtureBackend(std::filesystem::path dir, std::string model)
    : dir_(std::move(dir)), model_(std::move(model)) {}

std::filesystem::path FixtureBackend::fixture_path(const std::filesystem::path& dir, const std::string& prompt) {
  return dir / (code::sha256_hex(prompt) + ".json");
}

Completion FixtureBackend::complete(const std::string& prompt, int attempt) {
  auto path = fixture_path(dir_, prompt);
  if (!std::filesystem::exists(path)) throw TransportError("no fixture " + path.filename().string());
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error&) {
    throw TransportError("unreadable fixture " + path.string());
  }
  const json& responses = j.at("responses");
  if (!responses.is_array() || responses.empty()) throw TransportError("empty fixture " + path.string());
  std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(std::max(attempt, 1)), responses.size()) - 1;
  const json& r = responses[idx];
  int status = r.value("status", 200);
  if (status != 200) throw TransportError("HTTP status " + std::to_string(status));
  Completion c;
  c.content = r.value("content", std::string());
  c.total_tokens = usage_tokens(r);
  return c;
}

ScriptedBackend::ScriptedBackend(std::vector<ScriptedReply> replies, std::string model)
    : replies_(std::move(replies)), model_(std::move(model)) {
  if (replies_.empty()) throw std::invalid_argument("scripted backend needs at least one reply");
}

Completion ScriptedBackend::complete(const std::string& /*prompt*/, int /*attempt*/) {
  std::lock_guard lock(mu_);
  const ScriptedReply& r = replies_[std::min<std::size_t>(calls_, replies_.size() - 1)];
  ++calls_;
  if (r.status != 200) throw TransportError("HTTP status " + std::to_string(r.status));
  return {r.content, r.tokens};
}

int ScriptedBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::unique_ptr<LlmBackend> make_backend(const BackendConfig& cfg) {
  cfg.check();
  if (cfg.kind == "fixture") return std::make_unique<FixtureBackend>(cfg.fixtures_dir, cfg.model.empty() ? "fixture" : cfg.model);
  return std::make_unique<HttpBackend>(cfg);
}

std::string extract_code(const std::string& response) {
  static const std::regex fenced(R"(```[A-Za-z0-9_+-]*[ \t]*\r?\n([\s\S]*?)```)");
  std::smatch m;
  if (std::regex_search(response, m, fenced)) return m[1].str();
  static const std::regex has_def(R"((^|\n)\s*def\s)");
  if (std::regex_search(response, has_def)) {
    try {
      code::parse_module(response);
      return response;
    } catch (const SyntaxError&) {
    }
  }
  throw MalformedResponse("no code block in response");
}

std::string generate_candidate(const std::string& prompt, LlmBackend& backend, int attempt,
                               std::optional<std::int64_t>* tokens) {
  Completion c = backend.complete(prompt, attempt);
  if (tokens != nullptr) *tokens = c.total_tokens;
  return extract_code(c.content);
}

}  // namespace procure::llm
