#pragma once

#include <memory>

#include "dce/config.hpp"
#include "dce/embedder.hpp"
#include "dce/generator.hpp"

namespace dce {

/// Chat-completion generation backend. The request body follows the
/// provider's chat wire format; the idea-batch schema is attached natively
/// (response_format json_schema) or injected into the system prompt,
/// depending on the configured schema mode. The API key is read from the
/// environment variable named in the config.
///
/// Retry policy: transient failures (connection errors, 429, 5xx) retry with
/// exponential backoff up to max_attempts; an unparseable response after
/// retries raises BatchFailure carrying the raw body; transport exhaustion
/// raises TransportError.
std::unique_ptr<GeneratorBackend> make_http_generator(const CampaignConfig& config);

/// Embedding API backend: POST {model, input} -> data[0].embedding.
/// A response whose dimension differs from the campaign dimension raises
/// ConfigError.
std::unique_ptr<EmbedderBackend> make_http_embedder(const CampaignConfig& config);

}  // namespace dce
