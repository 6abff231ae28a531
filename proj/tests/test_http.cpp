#include <atomic>
#include <cstdlib>
#include <thread>

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include "dce/errors.hpp"
#include "dce/http.hpp"
#include "dce/pipeline.hpp"

using nlohmann::json;

namespace {

/// Local chat-completion stand-in; each test configures its behavior.
class FakeServer {
 public:
  FakeServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      ++chat_calls;
      last_request = json::parse(req.body, nullptr, false);
      last_auth = req.get_header_value("Authorization");
      if (chat_calls <= fail_first_n) {
        res.status = 503;
        res.set_content("overloaded", "text/plain");
        return;
      }
      res.status = chat_status;
      if (!scripted.empty()) {
        std::size_t index = std::min<std::size_t>(chat_calls - 1, scripted.size() - 1);
        res.set_content(scripted[index], "application/json");
        return;
      }
      res.set_content(chat_body, "application/json");
    });
    server_.Post("/v1/embeddings", [this](const httplib::Request&, httplib::Response& res) {
      ++embed_calls;
      res.status = 200;
      json embedding = json::array();
      for (int i = 0; i < embed_dim; ++i) embedding.push_back(0.25 * (i + 1));
      res.set_content(json{{"data", {{{"embedding", embedding}}}}}.dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string url(const char* path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }

  static std::string chat_response(const std::string& content) {
    return json{{"choices", {{{"message", {{"content", content}}}}}},
                {"usage", {{"prompt_tokens", 321}, {"completion_tokens", 99}}}}
        .dump();
  }

  std::atomic<int> chat_calls{0};
  std::atomic<int> embed_calls{0};
  int fail_first_n = 0;
  int chat_status = 200;
  std::string chat_body;
  std::vector<std::string> scripted;  // per-call bodies; last repeats
  int embed_dim = 4;
  json last_request;
  std::string last_auth;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

dce::CampaignConfig http_config(const FakeServer& server) {
  dce::CampaignConfig config;
  config.generator_backend = dce::BackendKind::http;
  config.embedder_backend = dce::BackendKind::http;
  config.generator_url = server.url("/v1/chat/completions");
  config.generator_model = "test-model";
  config.embedder_url = server.url("/v1/embeddings");
  config.embedder_model = "test-embedding";
  config.embedding_dimension = 4;
  config.max_attempts = 3;
  config.backoff_base_ms = 1;  // keep test retries fast
  return config;
}

const char* kGoodBatch =
    R"({"ideas": [
      {"name": "a", "description": "d1", "category": "c", "probability": 0.1},
      {"name": "b", "description": "d2", "category": "c", "probability": 0.2}
    ]})";

struct EnvKey {
  EnvKey() { setenv("GENERATOR_API_KEY", "test-key-123", 1);
             setenv("EMBEDDING_API_KEY", "embed-key-456", 1); }
};

}  // namespace

TEST_CASE("http generator: happy path, usage and auth header") {
  EnvKey env;
  FakeServer server;
  server.chat_body = FakeServer::chat_response(kGoodBatch);

  auto backend = dce::make_http_generator(http_config(server));
  dce::GenerationRequest request;
  request.prompt = "generate things";
  request.batch_size = 5;
  auto result = backend->generate(request);
  CHECK(result.ideas.size() == 2);
  CHECK(result.usage.prompt_tokens == 321);
  CHECK(result.usage.completion_tokens == 99);
  CHECK(server.last_auth == "Bearer test-key-123");

  // native structured mode attaches the schema as response_format
  CHECK(server.last_request.contains("response_format"));
  CHECK(server.last_request["messages"].size() == 2);
}

TEST_CASE("http generator: schema-in-system-prompt mode injects the schema") {
  EnvKey env;
  FakeServer server;
  server.chat_body = FakeServer::chat_response(kGoodBatch);

  dce::CampaignConfig config = http_config(server);
  config.schema_mode = dce::SchemaMode::schema_in_system_prompt;
  auto backend = dce::make_http_generator(config);
  dce::GenerationRequest request;
  request.prompt = "p";
  request.batch_size = 5;
  request.schema_mode = dce::SchemaMode::schema_in_system_prompt;
  backend->generate(request);

  CHECK_FALSE(server.last_request.contains("response_format"));
  std::string system = server.last_request["messages"][0]["content"];
  CHECK(system.find("\"ideas\"") != std::string::npos);
}

TEST_CASE("http generator: transient failures retry, then succeed") {
  EnvKey env;
  FakeServer server;
  server.fail_first_n = 2;
  server.chat_body = FakeServer::chat_response(kGoodBatch);

  auto backend = dce::make_http_generator(http_config(server));
  dce::GenerationRequest request;
  request.prompt = "p";
  request.batch_size = 5;
  auto result = backend->generate(request);
  CHECK(result.ideas.size() == 2);
  CHECK(server.chat_calls == 3);
}

TEST_CASE("http generator: transport exhaustion raises TransportError") {
  EnvKey env;
  FakeServer server;
  server.fail_first_n = 100;

  auto backend = dce::make_http_generator(http_config(server));
  dce::GenerationRequest request;
  request.prompt = "p";
  request.batch_size = 5;
  CHECK_THROWS_AS(backend->generate(request), dce::TransportError);
  CHECK(server.chat_calls == 3);  // max_attempts
}

TEST_CASE("http generator: unparseable content after retries carries the raw body") {
  EnvKey env;
  FakeServer server;
  server.chat_body = FakeServer::chat_response("no json here at all");

  auto backend = dce::make_http_generator(http_config(server));
  dce::GenerationRequest request;
  request.prompt = "p";
  request.batch_size = 5;
  try {
    backend->generate(request);
    FAIL("expected BatchFailure");
  } catch (const dce::BatchFailure& e) {
    CHECK(e.raw_response() == "no json here at all");
    CHECK(server.chat_calls == 3);  // parse failures are retried too
  }
}

TEST_CASE("http generator: under-production returns what parsed") {
  EnvKey env;
  FakeServer server;
  server.chat_body = FakeServer::chat_response(
      R"({"ideas": [
        {"name": "a", "description": "d", "category": "c", "probability": 0.1},
        {"name": "b", "description": "d", "category": "c", "probability": 0.2},
        {"name": "c", "description": "d", "category": "c"},
        {"name": "d", "description": "d", "category": "c", "probability": 0.4}
      ]})");

  auto backend = dce::make_http_generator(http_config(server));
  dce::GenerationRequest request;
  request.prompt = "p";
  request.batch_size = 5;
  auto result = backend->generate(request);
  CHECK(result.ideas.size() == 3);  // one item lost its probability
  CHECK(result.rejections.size() == 1);
}

TEST_CASE("http generator: missing API key is a config error") {
  FakeServer server;
  dce::CampaignConfig config = http_config(server);
  config.generator_api_key_env = "DCE_TEST_UNSET_KEY_VAR";
  unsetenv("DCE_TEST_UNSET_KEY_VAR");
  CHECK_THROWS_AS(dce::make_http_generator(config), dce::ConfigError);
}

TEST_CASE("campaign over http: an unparseable batch is recorded, the loop continues") {
  EnvKey env;
  FakeServer server;
  // batch 1 good, batch 2 unparseable through all 3 attempts, batch 3 good
  std::string good = FakeServer::chat_response(kGoodBatch);
  std::string bad = FakeServer::chat_response("sorry, no ideas today");
  server.scripted = {good, bad, bad, bad, good};

  dce::CampaignConfig config = http_config(server);
  config.batch_size = 2;
  config.batch_count = 3;
  config.sync_writes = false;
  dce::apply_arm(config, "naive");

  auto dir = std::filesystem::temp_directory_path() / "dce_httptest" / "failed_batch";
  std::filesystem::remove_all(dir);
  auto summary = dce::run_campaign(config, dir);
  CHECK(summary.completed);
  CHECK(summary.batches_completed == 3);
  CHECK(summary.generated == 4);  // batches 1 and 3 only

  dce::RunData run = dce::load_run(dir);
  REQUIRE(run.batches.size() == 3);
  CHECK_FALSE(run.batches[0].failed);
  CHECK(run.batches[1].failed);
  CHECK(run.batches[1].generated == 0);
  CHECK(run.batches[1].failure_reason.find("sorry, no ideas today") != std::string::npos);
  CHECK_FALSE(run.batches[2].failed);
}

TEST_CASE("http embedder: happy path and dimension checks") {
  EnvKey env;
  FakeServer server;
  auto embedder = dce::make_http_embedder(http_config(server));
  auto e = embedder->embed("some idea text");
  CHECK(e.dimension() == 4);
  CHECK(e.vector[1] == doctest::Approx(0.5));
  CHECK(e.norm_cached > 0);

  // campaign expects 8 dims, backend returns 4 -> configuration error
  FakeServer wrong;
  dce::CampaignConfig config = http_config(wrong);
  config.embedding_dimension = 8;
  auto mismatched = dce::make_http_embedder(config);
  CHECK_THROWS_AS(mismatched->embed("text"), dce::ConfigError);
}
