#include "dce/http.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "dce/errors.hpp"

namespace dce {

namespace {

using nlohmann::json;

struct UrlParts {
  std::string base;  // scheme://host[:port]
  std::string path;  // /v1/chat/completions
};

UrlParts parse_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("backend url must include a scheme: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  UrlParts parts;
  if (path_start == std::string::npos) {
    parts.base = url;
    parts.path = "/";
  } else {
    parts.base = url.substr(0, path_start);
    parts.path = url.substr(path_start);
  }
  return parts;
}

std::string require_api_key(const std::string& env_name) {
  const char* key = std::getenv(env_name.c_str());
  if (key == nullptr || *key == '\0') {
    throw ConfigError("missing API key: set " + env_name);
  }
  return key;
}

bool retryable_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

/// Shared POST-with-retry. Returns the response body on 2xx. Throws
/// ConfigError on auth failures, TransportError when transient failures
/// outlast the retry budget, BatchFailure on other client errors.
std::string post_with_retry(httplib::Client& client, const std::string& path,
                            const std::string& body, const httplib::Headers& headers,
                            int max_attempts, int backoff_base_ms) {
  std::string last_error;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (attempt > 1) {
      int delay = backoff_base_ms << (attempt - 2);
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = "connection failed (" + httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    if (res->status == 401 || res->status == 403) {
      throw ConfigError("backend rejected credentials (HTTP " +
                        std::to_string(res->status) + ")");
    }
    if (retryable_status(res->status)) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    throw BatchFailure("backend returned HTTP " + std::to_string(res->status), res->body);
  }
  throw TransportError("backend unreachable after " + std::to_string(max_attempts) +
                       " attempts: " + last_error);
}

class HttpGenerator : public GeneratorBackend {
 public:
  explicit HttpGenerator(const CampaignConfig& config)
      : url_(parse_url(config.generator_url)),
        model_(config.generator_model),
        api_key_(require_api_key(config.generator_api_key_env)),
        max_attempts_(config.max_attempts),
        backoff_base_ms_(config.backoff_base_ms),
        client_(url_.base) {
    client_.set_connection_timeout(config.http_timeout_s, 0);
    client_.set_read_timeout(config.http_timeout_s, 0);
  }

  GenerationResult generate(const GenerationRequest& request) override {
    json body;
    body["model"] = model_;
    json messages = json::array();
    if (request.schema_mode == SchemaMode::native_structured) {
      messages.push_back(
          {{"role", "system"},
           {"content", "You generate idea batches as JSON following the response "
                       "schema exactly."}});
      body["response_format"] = {{"type", "json_schema"},
                                 {"json_schema",
                                  {{"name", "idea_batch"},
                                   {"strict", true},
                                   {"schema", idea_batch_schema()}}}};
    } else {
      messages.push_back(
          {{"role", "system"},
           {"content",
            "Respond with ONLY a JSON object matching this schema, no prose:\n" +
                idea_batch_schema().dump(2)}});
    }
    messages.push_back({{"role", "user"}, {"content", request.prompt}});
    body["messages"] = messages;

    const std::string payload = body.dump();
    httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};

    // one shared budget of max_attempts: transport failures and unparseable
    // responses both consume it (a retry often fixes either)
    std::string last_transport_error;
    bool saw_response = false;
    for (int attempt = 1; attempt <= max_attempts_; ++attempt) {
      if (attempt > 1) {
        int delay = backoff_base_ms_ << (attempt - 2);
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      }
      auto res = client_.Post(url_.path, headers, payload, "application/json");
      if (!res) {
        last_transport_error = "connection failed (" + httplib::to_string(res.error()) + ")";
        continue;
      }
      if (res->status == 401 || res->status == 403) {
        throw ConfigError("backend rejected credentials (HTTP " +
                          std::to_string(res->status) + ")");
      }
      if (retryable_status(res->status)) {
        last_transport_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status < 200 || res->status >= 300) {
        throw BatchFailure("backend returned HTTP " + std::to_string(res->status),
                           res->body);
      }
      saw_response = true;
      last_raw_ = res->body;

      json response = json::parse(res->body, nullptr, false);
      if (response.is_discarded() || !response.contains("choices") ||
          response["choices"].empty() ||
          !response["choices"][0]["message"].contains("content") ||
          !response["choices"][0]["message"]["content"].is_string()) {
        if (attempt == max_attempts_) {
          throw BatchFailure("response not in chat-completion shape", res->body);
        }
        continue;
      }
      std::string content = response["choices"][0]["message"]["content"];
      GenerationResult out;
      try {
        ParseResult parsed = parse_structured(content, request.batch_size);
        out.ideas = std::move(parsed.ideas);
        out.rejections = std::move(parsed.rejections);
      } catch (const BatchFailure&) {
        if (attempt == max_attempts_) throw;
        continue;
      }
      if (response.contains("usage")) {
        out.usage.prompt_tokens = response["usage"].value("prompt_tokens", 0);
        out.usage.completion_tokens = response["usage"].value("completion_tokens", 0);
      }
      return out;
    }
    if (saw_response) {
      throw BatchFailure("no parseable idea batch after " +
                             std::to_string(max_attempts_) + " attempts",
                         last_raw_);
    }
    throw TransportError("backend unreachable after " + std::to_string(max_attempts_) +
                         " attempts: " + last_transport_error);
  }

  std::string id() const override { return "http:" + model_; }

 private:
  UrlParts url_;
  std::string model_;
  std::string api_key_;
  int max_attempts_;
  int backoff_base_ms_;
  httplib::Client client_;
  std::string last_raw_;
};

class HttpEmbedder : public EmbedderBackend {
 public:
  explicit HttpEmbedder(const CampaignConfig& config)
      : url_(parse_url(config.embedder_url)),
        model_(config.embedder_model),
        api_key_(require_api_key(config.embedder_api_key_env)),
        dimension_(config.embedding_dimension),
        max_attempts_(config.max_attempts),
        backoff_base_ms_(config.backoff_base_ms),
        client_(url_.base) {
    client_.set_connection_timeout(config.http_timeout_s, 0);
    client_.set_read_timeout(config.http_timeout_s, 0);
  }

  Embedding embed(const std::string& text) override {
    if (trim(text).empty()) throw ConfigError("embed: empty text");
    json body = {{"model", model_}, {"input", text}};
    httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
    std::string raw = post_with_retry(client_, url_.path, body.dump(), headers,
                                      max_attempts_, backoff_base_ms_);
    json response = json::parse(raw, nullptr, false);
    if (response.is_discarded() || !response.contains("data") ||
        response["data"].empty() || !response["data"][0].contains("embedding")) {
      throw BatchFailure("embedding response not in expected shape", raw);
    }
    std::vector<double> v = response["data"][0]["embedding"].get<std::vector<double>>();
    if (static_cast<int>(v.size()) != dimension_) {
      throw ConfigError("embedding dimension mismatch: campaign expects " +
                        std::to_string(dimension_) + ", backend returned " +
                        std::to_string(v.size()));
    }
    return Embedding::of(std::move(v), model_id());
  }

  std::string model_id() const override { return "http:" + model_; }
  int dimension() const override { return dimension_; }

 private:
  UrlParts url_;
  std::string model_;
  std::string api_key_;
  int dimension_;
  int max_attempts_;
  int backoff_base_ms_;
  httplib::Client client_;
};

}  // namespace

std::unique_ptr<GeneratorBackend> make_http_generator(const CampaignConfig& config) {
  return std::make_unique<HttpGenerator>(config);
}

std::unique_ptr<EmbedderBackend> make_http_embedder(const CampaignConfig& config) {
  return std::make_unique<HttpEmbedder>(config);
}

}  // namespace dce
