#include "dce/runlog.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dce/errors.hpp"
#include "dce/rng.hpp"

namespace dce {

const char* kConfigSnapshotFile = "config.cfg";
const char* kCandidatesFile = "candidates.jsonl";
const char* kBatchesFile = "batches.jsonl";
const char* kEmbeddingsFile = "embeddings.log";
const char* kTimingsFile = "timings.tsv";
const char* kCheckpointFile = "checkpoint.json";
const char* kMemorySubdir = "store";

namespace {

using nlohmann::ordered_json;

constexpr std::uint8_t kEmbeddingRecordVersion = 1;

int open_append(const std::filesystem::path& path) {
  int fd = ::open(path.c_str(), O_CREAT | O_WRONLY | O_APPEND, 0644);
  if (fd < 0) throw StorageError("run log: cannot open " + path.string());
  return fd;
}

void write_all_fd(int fd, const char* data, std::size_t size, const char* what) {
  std::size_t off = 0;
  while (off < size) {
    ssize_t n = ::write(fd, data + off, size - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw StorageError(std::string(what) + ": write failed: " + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

template <typename T>
void set_optional(ordered_json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
  else j[key] = nullptr;
}

template <typename T>
std::optional<T> get_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

ordered_json candidate_to_json(const CandidateRecord& r) {
  ordered_json j;
  j["v"] = 1;
  j["seq"] = r.seq;
  j["batch"] = r.batch_index;
  j["slot"] = r.slot_index;
  j["name"] = r.name;
  j["description"] = r.description;
  j["category"] = r.category;
  set_optional(j, "probability", r.probability);
  j["strategy"] = r.strategy;
  j["phase"] = r.phase;
  j["vts_checked"] = r.vts_checked;
  set_optional(j, "vts_accepted", r.vts_accepted);
  j["dedup_checked"] = r.dedup_checked;
  set_optional(j, "dedup_accepted", r.dedup_accepted);
  set_optional(j, "dedup_max_similarity", r.dedup_max_similarity);
  set_optional(j, "dedup_nearest_order", r.dedup_nearest_order);
  j["outcome"] = outcome_name(r.outcome);
  j["reject_reason"] = r.reject_reason;
  set_optional(j, "accept_order", r.accept_order);
  j["has_embedding"] = r.has_embedding;
  return j;
}

CandidateRecord candidate_from_json(const nlohmann::json& j) {
  CandidateRecord r;
  r.seq = j.at("seq").get<std::int64_t>();
  r.batch_index = j.at("batch").get<int>();
  r.slot_index = j.at("slot").get<int>();
  r.name = j.at("name").get<std::string>();
  r.description = j.at("description").get<std::string>();
  r.category = j.at("category").get<std::string>();
  r.probability = get_optional<double>(j, "probability");
  r.strategy = j.at("strategy").get<std::string>();
  r.phase = j.at("phase").get<std::string>();
  r.vts_checked = j.at("vts_checked").get<bool>();
  r.vts_accepted = get_optional<bool>(j, "vts_accepted");
  r.dedup_checked = j.at("dedup_checked").get<bool>();
  r.dedup_accepted = get_optional<bool>(j, "dedup_accepted");
  r.dedup_max_similarity = get_optional<double>(j, "dedup_max_similarity");
  r.dedup_nearest_order = get_optional<std::int64_t>(j, "dedup_nearest_order");
  r.outcome = outcome_from_name(j.at("outcome").get<std::string>());
  r.reject_reason = j.at("reject_reason").get<std::string>();
  r.accept_order = get_optional<std::int64_t>(j, "accept_order");
  r.has_embedding = j.at("has_embedding").get<bool>();
  return r;
}

ordered_json batch_to_json(const BatchRecord& r) {
  ordered_json j;
  j["v"] = 1;
  j["batch"] = r.batch_index;
  j["strategy"] = r.strategy;
  j["phase"] = r.phase;
  j["prompt_hash"] = r.prompt_hash;
  j["generated"] = r.generated;
  j["parse_rejected"] = r.parse_rejected;
  j["vts_rejected"] = r.vts_rejected;
  j["dedup_rejected"] = r.dedup_rejected;
  j["accepted"] = r.accepted;
  j["prompt_tokens"] = r.prompt_tokens;
  j["completion_tokens"] = r.completion_tokens;
  j["failed"] = r.failed;
  j["failure_reason"] = r.failure_reason;
  return j;
}

BatchRecord batch_from_json(const nlohmann::json& j) {
  BatchRecord r;
  r.batch_index = j.at("batch").get<int>();
  r.strategy = j.at("strategy").get<std::string>();
  r.phase = j.at("phase").get<std::string>();
  r.prompt_hash = j.at("prompt_hash").get<std::string>();
  r.generated = j.at("generated").get<int>();
  r.parse_rejected = j.at("parse_rejected").get<int>();
  r.vts_rejected = j.at("vts_rejected").get<int>();
  r.dedup_rejected = j.at("dedup_rejected").get<int>();
  r.accepted = j.at("accepted").get<int>();
  r.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
  r.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
  r.failed = j.at("failed").get<bool>();
  r.failure_reason = j.at("failure_reason").get<std::string>();
  return r;
}

// embeddings.log binary record: u8 version, u32 payload_len, u64 seq,
// u32 dim, f64 x dim (little-endian)
std::string encode_embedding_record(std::int64_t seq, const std::vector<double>& v) {
  std::string payload;
  auto put_u32 = [&payload](std::uint32_t x) {
    for (int i = 0; i < 4; ++i) payload.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
  };
  auto put_u64 = [&payload](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) payload.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
  };
  put_u64(static_cast<std::uint64_t>(seq));
  put_u32(static_cast<std::uint32_t>(v.size()));
  for (double x : v) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof(bits));
    put_u64(bits);
  }
  std::string record;
  record.push_back(static_cast<char>(kEmbeddingRecordVersion));
  std::uint32_t len = static_cast<std::uint32_t>(payload.size());
  for (int i = 0; i < 4; ++i) record.push_back(static_cast<char>((len >> (8 * i)) & 0xff));
  record.append(payload);
  return record;
}

}  // namespace

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::accepted: return "accepted";
    case Outcome::vts_rejected: return "vts_rejected";
    case Outcome::dedup_rejected: return "dedup_rejected";
    case Outcome::parse_rejected: return "parse_rejected";
  }
  return "accepted";
}

Outcome outcome_from_name(const std::string& name) {
  if (name == "accepted") return Outcome::accepted;
  if (name == "vts_rejected") return Outcome::vts_rejected;
  if (name == "dedup_rejected") return Outcome::dedup_rejected;
  if (name == "parse_rejected") return Outcome::parse_rejected;
  throw StorageError("run log: unknown outcome '" + name + "'");
}

RunLogWriter::RunLogWriter(const std::filesystem::path& run_dir) {
  candidates_fd_ = open_append(run_dir / kCandidatesFile);
  batches_fd_ = open_append(run_dir / kBatchesFile);
  embeddings_fd_ = open_append(run_dir / kEmbeddingsFile);
  timings_fd_ = open_append(run_dir / kTimingsFile);
}

RunLogWriter::~RunLogWriter() {
  for (int fd : {candidates_fd_, batches_fd_, embeddings_fd_, timings_fd_}) {
    if (fd >= 0) ::close(fd);
  }
}

void RunLogWriter::append_candidate(const CandidateRecord& record) {
  std::string line = candidate_to_json(record).dump();
  line += "\n";
  write_all_fd(candidates_fd_, line.data(), line.size(), "candidates.jsonl");
}

void RunLogWriter::append_batch(const BatchRecord& record) {
  std::string line = batch_to_json(record).dump();
  line += "\n";
  write_all_fd(batches_fd_, line.data(), line.size(), "batches.jsonl");
}

void RunLogWriter::append_embedding(std::int64_t seq, const std::vector<double>& vector) {
  std::string record = encode_embedding_record(seq, vector);
  write_all_fd(embeddings_fd_, record.data(), record.size(), "embeddings.log");
}

void RunLogWriter::append_timing(int batch_index, double elapsed_ms) {
  std::ostringstream line;
  line << batch_index << "\t" << elapsed_ms << "\n";
  std::string s = line.str();
  write_all_fd(timings_fd_, s.data(), s.size(), "timings.tsv");
}

const std::vector<double>* RunData::embedding_of(std::int64_t seq) const {
  auto it = embeddings.find(seq);
  return it == embeddings.end() ? nullptr : &it->second;
}

int RunData::max_batch_index() const {
  int b = 0;
  for (const auto& record : batches) b = std::max(b, record.batch_index);
  return b;
}

RunData load_run(const std::filesystem::path& run_dir) {
  RunData data;
  std::filesystem::path config_path = run_dir / kConfigSnapshotFile;
  if (!std::filesystem::exists(config_path)) {
    throw StorageError("run dir " + run_dir.string() + " has no config snapshot");
  }
  data.config = load_config_file(config_path);

  auto read_jsonl = [](const std::filesystem::path& path, auto&& consume) {
    std::ifstream in(path);
    if (!in) return;
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) break;  // partial trailing line after a crash
      consume(j);
    }
  };

  read_jsonl(run_dir / kCandidatesFile, [&data](const nlohmann::json& j) {
    data.candidates.push_back(candidate_from_json(j));
  });
  read_jsonl(run_dir / kBatchesFile, [&data](const nlohmann::json& j) {
    data.batches.push_back(batch_from_json(j));
  });

  // embeddings sidecar
  std::ifstream in(run_dir / kEmbeddingsFile, std::ios::binary);
  if (in) {
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t offset = 0;
    while (offset + 5 <= bytes.size()) {
      auto version = static_cast<std::uint8_t>(bytes[offset]);
      if (version != kEmbeddingRecordVersion) {
        throw StorageError("embeddings.log: unsupported record version");
      }
      std::uint32_t len = 0;
      for (int i = 0; i < 4; ++i) {
        len |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + 1 + i]))
               << (8 * i);
      }
      if (offset + 5 + len > bytes.size()) break;  // truncated tail
      const unsigned char* p =
          reinterpret_cast<const unsigned char*>(bytes.data()) + offset + 5;
      std::uint64_t seq = 0;
      for (int i = 0; i < 8; ++i) seq |= static_cast<std::uint64_t>(p[i]) << (8 * i);
      std::uint32_t dim = 0;
      for (int i = 0; i < 4; ++i) dim |= static_cast<std::uint32_t>(p[8 + i]) << (8 * i);
      if (12 + static_cast<std::size_t>(dim) * 8 != len) {
        throw StorageError("embeddings.log: corrupt record length");
      }
      std::vector<double> v(dim);
      for (std::uint32_t i = 0; i < dim; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) {
          bits |= static_cast<std::uint64_t>(p[12 + i * 8 + b]) << (8 * b);
        }
        std::memcpy(&v[i], &bits, sizeof(double));
      }
      data.embeddings[static_cast<std::int64_t>(seq)] = std::move(v);
      offset += 5 + len;
    }
  }
  return data;
}

void truncate_run_logs(const std::filesystem::path& run_dir, std::int64_t max_seq,
                       int max_batch) {
  auto rewrite_jsonl = [](const std::filesystem::path& path, auto&& keep) {
    if (!std::filesystem::exists(path)) return;
    std::vector<std::string> kept;
    {
      std::ifstream in(path);
      std::string line;
      while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) break;
        if (!keep(j)) break;  // records are appended in order; stop at the first drop
        kept.push_back(line);
      }
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      for (const std::string& line : kept) out << line << "\n";
      if (!out) throw StorageError("run log: cannot rewrite " + path.string());
    }
    std::filesystem::rename(tmp, path);
  };

  rewrite_jsonl(run_dir / kCandidatesFile, [max_seq](const nlohmann::json& j) {
    return j.at("seq").get<std::int64_t>() <= max_seq;
  });
  rewrite_jsonl(run_dir / kBatchesFile, [max_batch](const nlohmann::json& j) {
    return j.at("batch").get<int>() <= max_batch;
  });

  // timings.tsv: keep rows for completed batches
  std::filesystem::path timings = run_dir / kTimingsFile;
  if (std::filesystem::exists(timings)) {
    std::vector<std::string> kept;
    {
      std::ifstream in(timings);
      std::string line;
      while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        int batch = 0;
        try {
          batch = std::stoi(line.substr(0, line.find('\t')));
        } catch (const std::exception&) {
          break;
        }
        if (batch > max_batch) break;
        kept.push_back(line);
      }
    }
    std::filesystem::path tmp = timings;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      for (const std::string& line : kept) out << line << "\n";
    }
    std::filesystem::rename(tmp, timings);
  }

  // embeddings.log: binary scan, keep records with seq <= max_seq
  std::filesystem::path emb_path = run_dir / kEmbeddingsFile;
  if (std::filesystem::exists(emb_path)) {
    std::string bytes;
    {
      std::ifstream in(emb_path, std::ios::binary);
      bytes.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    }
    std::size_t offset = 0;
    std::size_t keep_end = 0;
    while (offset + 5 <= bytes.size()) {
      std::uint32_t len = 0;
      for (int i = 0; i < 4; ++i) {
        len |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + 1 + i]))
               << (8 * i);
      }
      if (offset + 5 + len > bytes.size()) break;
      const unsigned char* p =
          reinterpret_cast<const unsigned char*>(bytes.data()) + offset + 5;
      std::uint64_t seq = 0;
      for (int i = 0; i < 8; ++i) seq |= static_cast<std::uint64_t>(p[i]) << (8 * i);
      if (static_cast<std::int64_t>(seq) > max_seq) break;
      offset += 5 + len;
      keep_end = offset;
    }
    if (keep_end < bytes.size()) std::filesystem::resize_file(emb_path, keep_end);
  }
}

}  // namespace dce
