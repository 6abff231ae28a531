#include "dce/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "dce/errors.hpp"
#include "dce/http.hpp"
#include "dce/memory.hpp"
#include "dce/prompt.hpp"
#include "dce/vts.hpp"

namespace dce {

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

nlohmann::json checkpoint_to_json(const Checkpoint& c) {
  return nlohmann::json{{"format_version", c.format_version},
                        {"config_hash", c.config_hash},
                        {"completed_batches", c.completed_batches},
                        {"candidate_seq", c.candidate_seq},
                        {"accepted", c.accepted},
                        {"embedded", c.embedded},
                        {"rng_state", c.rng_state},
                        {"strategy_position", c.strategy_position},
                        {"prompt_tokens", c.prompt_tokens},
                        {"completion_tokens", c.completion_tokens},
                        {"generator_state", c.generator_state},
                        {"embedder_state", c.embedder_state}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  Checkpoint c;
  c.format_version = j.at("format_version").get<int>();
  if (c.format_version != 1) {
    throw StorageError("checkpoint: unsupported format version");
  }
  c.config_hash = j.at("config_hash").get<std::uint64_t>();
  c.completed_batches = j.at("completed_batches").get<int>();
  c.candidate_seq = j.at("candidate_seq").get<std::int64_t>();
  c.accepted = j.at("accepted").get<std::int64_t>();
  c.embedded = j.at("embedded").get<std::int64_t>();
  c.rng_state = j.at("rng_state").get<std::uint64_t>();
  c.strategy_position = j.at("strategy_position").get<int>();
  c.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
  c.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
  c.generator_state = j.at("generator_state");
  c.embedder_state = j.at("embedder_state");
  return c;
}

struct CampaignState {
  CampaignConfig config;
  std::filesystem::path run_dir;
  std::shared_ptr<const SimWorld> world;
  std::unique_ptr<GeneratorBackend> generator;
  std::unique_ptr<EmbedderBackend> embedder;
  std::unique_ptr<MemoryStore> memory;
  std::unique_ptr<PromptBuilder> builder;
  std::unique_ptr<RunLogWriter> log;
  Rng rng{0};
  std::int64_t candidate_seq = 0;
  std::int64_t embedded = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  int completed_batches = 0;
};

/// Candidate-level bookkeeping shared by the accept and reject paths.
struct AbortRequested {};

CampaignSummary run_loop(CampaignState& st, const RunHooks& hooks) {
  CampaignSummary summary;
  summary.batches_completed = st.completed_batches;
  const CampaignConfig& cfg = st.config;

  for (int b = st.completed_batches + 1; b <= cfg.batch_count; ++b) {
    auto batch_start = std::chrono::steady_clock::now();
    PromptBuilder::Built built = st.builder->build(*st.memory, b, st.rng);

    GenerationRequest request;
    request.prompt = built.prompt;
    request.batch_size = cfg.batch_size;
    request.schema_mode = cfg.schema_mode;
    request.signals = built.signals;

    BatchRecord batch;
    batch.batch_index = b;
    batch.strategy =
        built.signals.prompt_evolution ? strategy_name(built.signals.strategy.kind) : "none";
    batch.phase = built.signals.prompt_evolution ? phase_name(built.signals.phase) : "none";
    batch.prompt_hash = hex64(fnv1a64(built.prompt));

    GenerationResult result;
    bool batch_failed = false;
    try {
      result = st.generator->generate(request);
    } catch (const BatchFailure& failure) {
      batch_failed = true;
      batch.failed = true;
      std::string raw = failure.raw_response();
      if (raw.size() > 2000) raw = raw.substr(0, 2000) + "...";
      batch.failure_reason = std::string(failure.what()) + "; raw: " + raw;
    }
    // TransportError propagates: the checkpoint from the previous batch
    // makes the abort resumable.

    if (!batch_failed) {
      batch.generated =
          static_cast<int>(result.ideas.size() + result.rejections.size());
      batch.prompt_tokens = result.usage.prompt_tokens;
      batch.completion_tokens = result.usage.completion_tokens;
      st.prompt_tokens += result.usage.prompt_tokens;
      st.completion_tokens += result.usage.completion_tokens;

      int candidate_index = 0;
      auto check_abort = [&](int idx) {
        if (hooks.before_candidate && !hooks.before_candidate(b, idx)) {
          throw AbortRequested{};
        }
      };

      try {
        // parse rejections first: they carry the raw item index as slot
        for (const ParseRejection& rejection : result.rejections) {
          check_abort(candidate_index++);
          CandidateRecord rec;
          rec.seq = ++st.candidate_seq;
          rec.batch_index = b;
          rec.slot_index = rejection.item_index;
          rec.name = "";
          rec.description = rejection.snippet;
          rec.strategy = batch.strategy;
          rec.phase = batch.phase;
          rec.outcome = Outcome::parse_rejected;
          rec.reject_reason = rejection.reason;
          st.log->append_candidate(rec);
          ++batch.parse_rejected;
          ++summary.parse_rejected;
        }

        int slot = 0;
        for (Idea idea : result.ideas) {
          check_abort(candidate_index++);
          idea.batch_index = b;
          idea.slot_index = slot++;

          CandidateRecord rec;
          rec.seq = ++st.candidate_seq;
          rec.batch_index = b;
          rec.slot_index = idea.slot_index;
          rec.name = idea.name;
          rec.description = idea.description;
          rec.category = idea.category;
          rec.probability = idea.probability;
          rec.strategy = batch.strategy;
          rec.phase = batch.phase;

          // every parsed candidate is embedded, filters enabled or not, so
          // later analyses (confusion matrix, collapse, novelty) can replay
          Embedding embedding = st.embedder->embed(embedding_input(idea));
          st.log->append_embedding(rec.seq, embedding.vector);
          ++st.embedded;
          rec.has_embedding = true;

          bool accepted = true;
          if (cfg.enable_vts) {
            rec.vts_checked = true;
            VtsVerdict verdict = vts_check(idea, cfg.tau);
            rec.vts_accepted = verdict.accepted;
            if (!verdict.accepted) {
              accepted = false;
              rec.outcome = Outcome::vts_rejected;
              rec.reject_reason = "self-assessed probability >= tau";
              ++batch.vts_rejected;
              ++summary.vts_rejected;
            }
          }
          if (accepted && cfg.enable_dedup) {
            rec.dedup_checked = true;
            DedupVerdict verdict = st.memory->check_duplicate(embedding, cfg.delta);
            rec.dedup_accepted = verdict.accepted;
            rec.dedup_max_similarity = verdict.max_similarity;
            rec.dedup_nearest_order = verdict.nearest_accept_order;
            if (!verdict.accepted) {
              accepted = false;
              rec.outcome = Outcome::dedup_rejected;
              rec.reject_reason = "cosine similarity to memory >= delta";
              ++batch.dedup_rejected;
              ++summary.dedup_rejected;
            }
          }
          if (accepted) {
            rec.outcome = Outcome::accepted;
            rec.accept_order = st.memory->insert(idea, embedding);
            ++batch.accepted;
            ++summary.accepted;
          }
          st.log->append_candidate(rec);
        }
      } catch (const AbortRequested&) {
        // simulated crash: no batch record, no checkpoint; resume truncates
        summary.completed = false;
        return summary;
      }
      summary.generated += batch.generated;
    }

    st.log->append_batch(batch);
    double elapsed_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - batch_start)
                            .count();
    st.log->append_timing(b, elapsed_ms);

    Checkpoint ckpt;
    ckpt.config_hash = config_hash(cfg);
    ckpt.completed_batches = b;
    ckpt.candidate_seq = st.candidate_seq;
    ckpt.accepted = st.memory->next_accept_order() - 1;
    ckpt.embedded = st.embedded;
    ckpt.rng_state = st.rng.state();
    ckpt.strategy_position = static_cast<int>(strategy_for_batch(b + 1));
    ckpt.prompt_tokens = st.prompt_tokens;
    ckpt.completion_tokens = st.completion_tokens;
    ckpt.generator_state = st.generator->state();
    ckpt.embedder_state = nlohmann::json::object();
    write_checkpoint(st.run_dir, ckpt);

    st.completed_batches = b;
    summary.batches_completed = b;
    summary.prompt_tokens = st.prompt_tokens;
    summary.completion_tokens = st.completion_tokens;

    if (hooks.progress) {
      (*hooks.progress) << "batch " << b << "/" << cfg.batch_count << ": +"
                        << batch.accepted << " accepted (" << batch.vts_rejected
                        << " vts, " << batch.dedup_rejected << " dedup, "
                        << batch.parse_rejected << " parse";
      if (batch.failed) (*hooks.progress) << ", FAILED";
      (*hooks.progress) << ")\n";
    }

    if (hooks.after_batch && !hooks.after_batch(b)) {
      summary.completed = false;
      return summary;
    }
  }

  summary.completed = true;
  return summary;
}

void init_backends(CampaignState& st) {
  st.world = make_sim_world(st.config);
  st.generator = make_generator(st.config, st.world);
  st.embedder = make_embedder(st.config, st.world);
  st.builder = std::make_unique<PromptBuilder>(st.config);
}

int campaign_dimension(const CampaignConfig& config) {
  return config.embedder_backend == BackendKind::simulation ? config.sim_dimension
                                                            : config.embedding_dimension;
}

}  // namespace

Checkpoint read_checkpoint(const std::filesystem::path& run_dir) {
  std::ifstream in(run_dir / kCheckpointFile);
  if (!in) throw StorageError("no checkpoint in " + run_dir.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw StorageError("corrupt checkpoint in " + run_dir.string());
  try {
    return checkpoint_from_json(j);
  } catch (const nlohmann::json::exception&) {
    throw StorageError("corrupt checkpoint in " + run_dir.string());
  }
}

void write_checkpoint(const std::filesystem::path& run_dir, const Checkpoint& checkpoint) {
  std::filesystem::path path = run_dir / kCheckpointFile;
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << checkpoint_to_json(checkpoint).dump(2) << "\n";
    if (!out) throw StorageError("cannot write checkpoint in " + run_dir.string());
  }
  std::filesystem::rename(tmp, path);
}

std::shared_ptr<const SimWorld> make_sim_world(const CampaignConfig& config) {
  if (config.generator_backend != BackendKind::simulation &&
      config.embedder_backend != BackendKind::simulation) {
    return nullptr;
  }
  SimWorldParams params;
  params.concept_count = config.sim_concept_count;
  params.dimension = config.sim_dimension;
  params.zipf_exponent = config.sim_zipf_exponent;
  params.category_count = config.sim_category_count;
  params.seed = config.world_seed();
  return std::make_shared<const SimWorld>(SimWorld::make(params));
}

std::unique_ptr<GeneratorBackend> make_generator(const CampaignConfig& config,
                                                 std::shared_ptr<const SimWorld> world) {
  if (config.generator_backend == BackendKind::simulation) {
    return std::make_unique<SimGenerator>(std::move(world),
                                          mix_seed(config.seed, fnv1a64("generator")));
  }
  return make_http_generator(config);
}

std::unique_ptr<EmbedderBackend> make_embedder(const CampaignConfig& config,
                                               std::shared_ptr<const SimWorld> world) {
  if (config.embedder_backend == BackendKind::simulation) {
    return std::make_unique<SimEmbedder>(std::move(world));
  }
  return make_http_embedder(config);
}

CampaignSummary run_campaign(const CampaignConfig& config,
                             const std::filesystem::path& run_dir, const RunHooks& hooks) {
  config.validate();
  if (std::filesystem::exists(run_dir / kCheckpointFile)) {
    throw ConfigError("run dir " + run_dir.string() +
                      " already holds a campaign; resume it instead");
  }
  std::error_code ec;
  std::filesystem::create_directories(run_dir, ec);
  if (ec) throw StorageError("cannot create run dir " + run_dir.string());

  {
    std::ofstream out(run_dir / kConfigSnapshotFile, std::ios::trunc);
    out << canonical_config_text(config);
    if (!out) throw StorageError("cannot write config snapshot");
  }

  CampaignState st;
  st.config = config;
  st.run_dir = run_dir;
  init_backends(st);
  st.memory = MemoryStore::open(run_dir / kMemorySubdir, campaign_dimension(config),
                                st.embedder->model_id(), config.sync_writes);
  st.log = std::make_unique<RunLogWriter>(run_dir);
  st.rng = Rng(mix_seed(config.seed, fnv1a64("campaign")));
  return run_loop(st, hooks);
}

CampaignSummary resume_campaign(const std::filesystem::path& run_dir, const RunHooks& hooks) {
  CampaignConfig config = load_config_file(run_dir / kConfigSnapshotFile);
  config.validate();
  Checkpoint ckpt = read_checkpoint(run_dir);
  if (ckpt.config_hash != config_hash(config)) {
    throw ConfigError("resume: config snapshot does not match the checkpoint");
  }

  if (ckpt.completed_batches >= config.batch_count) {
    // nothing to do; leave every file untouched
    RunData data = load_run(run_dir);
    CampaignSummary summary;
    summary.batches_completed = ckpt.completed_batches;
    summary.completed = true;
    for (const BatchRecord& b : data.batches) {
      summary.generated += b.generated;
      summary.parse_rejected += b.parse_rejected;
      summary.vts_rejected += b.vts_rejected;
      summary.dedup_rejected += b.dedup_rejected;
      summary.accepted += b.accepted;
    }
    summary.prompt_tokens = ckpt.prompt_tokens;
    summary.completion_tokens = ckpt.completion_tokens;
    return summary;
  }

  // drop partial work from any batch that never reached its checkpoint
  truncate_run_logs(run_dir, ckpt.candidate_seq, ckpt.completed_batches);

  CampaignState st;
  st.config = config;
  st.run_dir = run_dir;
  init_backends(st);
  st.memory = MemoryStore::open(run_dir / kMemorySubdir, campaign_dimension(config),
                                st.embedder->model_id(), config.sync_writes);
  if (static_cast<std::int64_t>(st.memory->size()) < ckpt.accepted) {
    throw StorageError("resume: memory store is behind the checkpoint");
  }
  st.memory->truncate_to(ckpt.accepted);
  st.log = std::make_unique<RunLogWriter>(run_dir);
  st.rng.set_state(ckpt.rng_state);
  st.generator->restore_state(ckpt.generator_state);
  st.candidate_seq = ckpt.candidate_seq;
  st.embedded = ckpt.embedded;
  st.prompt_tokens = ckpt.prompt_tokens;
  st.completion_tokens = ckpt.completion_tokens;
  st.completed_batches = ckpt.completed_batches;

  CampaignSummary summary = run_loop(st, hooks);

  // fold in the counts from the batches that ran before the resume
  RunData data = load_run(run_dir);
  CampaignSummary total;
  total.batches_completed = summary.batches_completed;
  total.completed = summary.completed;
  total.prompt_tokens = st.prompt_tokens;
  total.completion_tokens = st.completion_tokens;
  for (const BatchRecord& b : data.batches) {
    total.generated += b.generated;
    total.parse_rejected += b.parse_rejected;
    total.vts_rejected += b.vts_rejected;
    total.dedup_rejected += b.dedup_rejected;
    total.accepted += b.accepted;
  }
  return total;
}

}  // namespace dce
