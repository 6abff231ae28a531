#include "dce/memory.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "dce/errors.hpp"

namespace dce {

namespace {

constexpr std::uint8_t kRecordVersion = 1;
constexpr const char* kEntriesFile = "entries.log";
constexpr const char* kMetaFile = "meta.json";
constexpr const char* kLockFile = "lock";

void append_u8(std::string& buf, std::uint8_t v) { buf.push_back(static_cast<char>(v)); }

void append_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f64(std::string& buf, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  append_u64(buf, bits);
}

void append_str(std::string& buf, const std::string& s) {
  append_u32(buf, static_cast<std::uint32_t>(s.size()));
  buf.append(s);
}

struct Reader {
  const unsigned char* p;
  std::size_t remaining;

  bool u8(std::uint8_t* out) {
    if (remaining < 1) return false;
    *out = *p;
    p += 1;
    remaining -= 1;
    return true;
  }
  bool u32(std::uint32_t* out) {
    if (remaining < 4) return false;
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    *out = v;
    p += 4;
    remaining -= 4;
    return true;
  }
  bool u64(std::uint64_t* out) {
    if (remaining < 8) return false;
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    *out = v;
    p += 8;
    remaining -= 8;
    return true;
  }
  bool f64(double* out) {
    std::uint64_t bits;
    if (!u64(&bits)) return false;
    std::memcpy(out, &bits, sizeof(*out));
    return true;
  }
  bool str(std::string* out) {
    std::uint32_t len;
    if (!u32(&len) || remaining < len) return false;
    out->assign(reinterpret_cast<const char*>(p), len);
    p += len;
    remaining -= len;
    return true;
  }
};

std::string encode_record(const MemoryEntry& e) {
  std::string payload;
  append_u64(payload, static_cast<std::uint64_t>(e.accept_order));
  append_u32(payload, static_cast<std::uint32_t>(e.batch_index));
  append_u32(payload, static_cast<std::uint32_t>(e.idea.slot_index));
  append_f64(payload, e.idea.probability);
  append_str(payload, e.idea.name);
  append_str(payload, e.idea.description);
  append_str(payload, e.idea.category);
  append_u32(payload, static_cast<std::uint32_t>(e.embedding.vector.size()));
  append_f64(payload, e.embedding.norm_cached);
  for (double x : e.embedding.vector) append_f64(payload, x);

  std::string record;
  append_u8(record, kRecordVersion);
  append_u32(record, static_cast<std::uint32_t>(payload.size()));
  record.append(payload);
  return record;
}

void write_all(int fd, const std::string& buf, const char* what) {
  std::size_t off = 0;
  while (off < buf.size()) {
    ssize_t n = ::write(fd, buf.data() + off, buf.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw StorageError(std::string(what) + ": write failed: " + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

}  // namespace

std::unique_ptr<MemoryStore> MemoryStore::open(const std::filesystem::path& dir,
                                               int dimension,
                                               const std::string& model_id,
                                               bool sync_writes) {
  if (dimension < 1) throw ConfigError("memory store: dimension must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw StorageError("memory store: cannot create " + dir.string());

  auto store = std::unique_ptr<MemoryStore>(new MemoryStore());
  store->dir_ = dir;
  store->dimension_ = dimension;
  store->model_id_ = model_id;
  store->sync_writes_ = sync_writes;

  store->lock_fd_ = ::open((dir / kLockFile).c_str(), O_CREAT | O_RDWR, 0644);
  if (store->lock_fd_ < 0) {
    throw StorageError("memory store: cannot open lock file in " + dir.string());
  }
  if (::flock(store->lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(store->lock_fd_);
    store->lock_fd_ = -1;
    throw StorageError("memory store: " + dir.string() + " is locked by another process");
  }

  std::filesystem::path meta_path = dir / kMetaFile;
  if (std::filesystem::exists(meta_path)) {
    std::ifstream in(meta_path);
    nlohmann::json meta = nlohmann::json::parse(in, nullptr, false);
    if (meta.is_discarded()) throw StorageError("memory store: corrupt meta file");
    if (meta.value("dimension", -1) != dimension) {
      throw ConfigError("memory store: dimension mismatch with existing store");
    }
    if (meta.value("model_id", std::string()) != model_id) {
      throw ConfigError("memory store: embedding model mismatch with existing store");
    }
  }

  store->load();
  store->write_meta();

  store->log_fd_ = ::open((dir / kEntriesFile).c_str(), O_CREAT | O_WRONLY | O_APPEND, 0644);
  if (store->log_fd_ < 0) {
    throw StorageError("memory store: cannot open entries log for append");
  }
  return store;
}

std::unique_ptr<MemoryStore> MemoryStore::open_existing(const std::filesystem::path& dir) {
  std::filesystem::path meta_path = dir / kMetaFile;
  if (!std::filesystem::exists(meta_path)) {
    throw StorageError("memory store: no store at " + dir.string());
  }
  std::ifstream in(meta_path);
  nlohmann::json meta = nlohmann::json::parse(in, nullptr, false);
  if (meta.is_discarded()) throw StorageError("memory store: corrupt meta file");
  return open(dir, meta.value("dimension", -1), meta.value("model_id", std::string()));
}

MemoryStore::~MemoryStore() {
  try {
    write_meta();  // keep the advisory counters fresh on clean close
  } catch (...) {
  }
  if (log_fd_ >= 0) ::close(log_fd_);
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

void MemoryStore::load() {
  entries_.clear();
  next_accept_order_ = 1;
  std::filesystem::path log_path = dir_ / kEntriesFile;
  if (!std::filesystem::exists(log_path)) return;

  std::ifstream in(log_path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t offset = 0;
  std::size_t valid_end = 0;

  while (offset < bytes.size()) {
    Reader header{reinterpret_cast<const unsigned char*>(bytes.data()) + offset,
                  bytes.size() - offset};
    std::uint8_t version;
    std::uint32_t payload_len;
    if (!header.u8(&version) || !header.u32(&payload_len)) break;  // truncated tail
    if (version != kRecordVersion) {
      throw StorageError("memory store: unsupported record version " + std::to_string(version));
    }
    if (header.remaining < payload_len) break;  // truncated tail

    Reader r{header.p, payload_len};
    MemoryEntry e;
    std::uint64_t order;
    std::uint32_t batch, slot, dim;
    double prob, cached_norm;
    if (!r.u64(&order) || !r.u32(&batch) || !r.u32(&slot) || !r.f64(&prob) ||
        !r.str(&e.idea.name) || !r.str(&e.idea.description) || !r.str(&e.idea.category) ||
        !r.u32(&dim) || !r.f64(&cached_norm)) {
      throw StorageError("memory store: corrupt record payload");
    }
    if (static_cast<int>(dim) != dimension_) {
      throw StorageError("memory store: record dimension mismatch");
    }
    e.embedding.vector.resize(dim);
    for (std::uint32_t i = 0; i < dim; ++i) {
      if (!r.f64(&e.embedding.vector[i])) {
        throw StorageError("memory store: corrupt record payload");
      }
    }
    e.embedding.norm_cached = cached_norm;
    e.embedding.model_id = model_id_;
    e.accept_order = static_cast<std::int64_t>(order);
    e.batch_index = static_cast<int>(batch);
    e.idea.batch_index = static_cast<int>(batch);
    e.idea.slot_index = static_cast<int>(slot);
    e.idea.probability = prob;
    if (e.accept_order != next_accept_order_) {
      throw StorageError("memory store: accept_order sequence broken at " +
                         std::to_string(e.accept_order));
    }
    ++next_accept_order_;
    entries_.push_back(std::move(e));
    offset += 1 + 4 + payload_len;
    valid_end = offset;
  }

  if (valid_end < bytes.size()) {
    // drop the truncated tail left by a crash mid-append
    std::filesystem::resize_file(log_path, valid_end);
  }
}

void MemoryStore::write_meta() const {
  nlohmann::json meta{{"format_version", 1},
                      {"dimension", dimension_},
                      {"model_id", model_id_},
                      {"entries", entries_.size()},
                      {"next_accept_order", next_accept_order_}};
  std::filesystem::path tmp = dir_ / (std::string(kMetaFile) + ".tmp");
  {
    std::ofstream out(tmp);
    out << meta.dump(2) << "\n";
    if (!out) throw StorageError("memory store: cannot write meta file");
  }
  std::filesystem::rename(tmp, dir_ / kMetaFile);
}

DedupVerdict MemoryStore::check_duplicate(const Embedding& candidate, double delta) const {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw ConfigError("check_duplicate: delta must be in (0, 1]");
  }
  DedupVerdict v;
  if (entries_.empty()) {
    v.accepted = true;
    v.max_similarity = 0.0;
    return v;
  }
  double best = -2.0;
  std::int64_t best_order = 0;
  for (const MemoryEntry& e : entries_) {
    double sim = cosine(candidate, e.embedding);
    if (sim > best) {
      best = sim;
      best_order = e.accept_order;
    }
  }
  v.max_similarity = best;
  v.nearest_accept_order = best_order;
  v.accepted = best < delta;  // rejection at similarity >= delta
  return v;
}

std::int64_t MemoryStore::insert(const Idea& idea, const Embedding& embedding) {
  if (embedding.dimension() != dimension_) {
    throw ConfigError("insert: embedding dimension mismatch");
  }
  MemoryEntry e;
  e.idea = idea;
  e.embedding = embedding;
  e.accept_order = next_accept_order_;
  e.batch_index = idea.batch_index;

  std::string record = encode_record(e);
  write_all(log_fd_, record, "memory store");
  if (sync_writes_ && ::fdatasync(log_fd_) != 0) {
    throw StorageError("memory store: fdatasync failed");
  }
  ++next_accept_order_;
  entries_.push_back(std::move(e));
  return entries_.back().accept_order;
}

std::vector<Idea> MemoryStore::recent(int k) const {
  std::vector<Idea> out;
  if (k <= 0) return out;
  auto it = entries_.rbegin();
  for (; it != entries_.rend() && static_cast<int>(out.size()) < k; ++it) {
    out.push_back(it->idea);
  }
  return out;
}

std::vector<Idea> MemoryStore::dense_regions(int k, int m) const {
  std::vector<Idea> out;
  if (k < 1 || m < 1) throw ConfigError("dense_regions: k and m must be >= 1");
  const int n = static_cast<int>(entries_.size());
  if (n < 2) return out;

  const int neighbors = std::min(m, n - 1);
  std::vector<std::pair<double, std::int64_t>> density(n);  // (density, accept_order)
  std::vector<double> sims;
  sims.reserve(n - 1);
  for (int i = 0; i < n; ++i) {
    sims.clear();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      sims.push_back(cosine(entries_[i].embedding, entries_[j].embedding));
    }
    std::partial_sort(sims.begin(), sims.begin() + neighbors, sims.end(),
                      std::greater<double>());
    double sum = 0.0;
    for (int t = 0; t < neighbors; ++t) sum += sims[t];
    density[i] = {sum / neighbors, entries_[i].accept_order};
  }

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (density[a].first != density[b].first) return density[a].first > density[b].first;
    return density[a].second < density[b].second;
  });
  for (int i = 0; i < n && static_cast<int>(out.size()) < k; ++i) {
    out.push_back(entries_[order[i]].idea);
  }
  return out;
}

std::map<std::string, std::int64_t> MemoryStore::category_distribution() const {
  std::map<std::string, std::int64_t> counts;
  for (const MemoryEntry& e : entries_) ++counts[e.idea.category];
  return counts;
}

std::vector<std::pair<std::string, std::int64_t>> MemoryStore::underrepresented_categories(
    int j) const {
  if (j < 1) throw ConfigError("underrepresented_categories: j must be >= 1");
  auto counts = category_distribution();
  std::vector<std::pair<std::string, std::int64_t>> items(counts.begin(), counts.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second < b.second;
    return a.first < b.first;
  });
  if (static_cast<int>(items.size()) > j) items.resize(j);
  return items;
}

void MemoryStore::truncate_to(std::int64_t accepted_count) {
  if (accepted_count < 0 || accepted_count > static_cast<std::int64_t>(entries_.size())) {
    throw StorageError("memory store: cannot truncate to " + std::to_string(accepted_count) +
                       " entries, store has " + std::to_string(entries_.size()));
  }
  if (accepted_count == static_cast<std::int64_t>(entries_.size())) return;

  std::size_t bytes = 0;
  for (std::int64_t i = 0; i < accepted_count; ++i) {
    bytes += encode_record(entries_[static_cast<std::size_t>(i)]).size();
  }
  if (::ftruncate(log_fd_, static_cast<off_t>(bytes)) != 0) {
    throw StorageError("memory store: ftruncate failed");
  }
  entries_.resize(static_cast<std::size_t>(accepted_count));
  next_accept_order_ = accepted_count + 1;
  write_meta();
}

}  // namespace dce
