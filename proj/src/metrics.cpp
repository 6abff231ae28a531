#include "dce/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "dce/embedding.hpp"
#include "dce/errors.hpp"
#include "dce/rng.hpp"

namespace dce {
namespace metrics {

namespace {

struct ParsedIdea {
  std::int64_t seq = 0;
  int batch = 0;
  double probability = 0.0;
  const std::vector<double>* vector = nullptr;
  bool accepted = false;
  std::string category;
};

/// Parsed candidates in stream order, each with its embedding.
std::vector<ParsedIdea> parsed_ideas(const RunData& run) {
  std::vector<ParsedIdea> out;
  out.reserve(run.candidates.size());
  for (const CandidateRecord& r : run.candidates) {
    if (r.outcome == Outcome::parse_rejected) continue;
    ParsedIdea p;
    p.seq = r.seq;
    p.batch = r.batch_index;
    p.probability = r.probability.value_or(0.0);
    p.vector = run.embedding_of(r.seq);
    if (p.vector == nullptr) {
      throw AnalysisError("run log is missing the embedding for candidate " +
                          std::to_string(r.seq));
    }
    p.accepted = r.outcome == Outcome::accepted;
    p.category = r.category;
    out.push_back(std::move(p));
  }
  return out;
}

double mean(const std::vector<double>& values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

}  // namespace

const char* formulation_name(EdvFormulation f) {
  switch (f) {
    case EdvFormulation::multiplicative: return "multiplicative";
    case EdvFormulation::additive: return "additive";
    case EdvFormulation::geometric: return "geometric";
  }
  return "multiplicative";
}

EdvFormulation formulation_from_name(const std::string& name) {
  if (name == "multiplicative") return EdvFormulation::multiplicative;
  if (name == "additive") return EdvFormulation::additive;
  if (name == "geometric") return EdvFormulation::geometric;
  throw AnalysisError("unknown EDV formulation: " + name);
}

std::vector<std::optional<double>> MetricSeries::rolling(int window) const {
  std::vector<std::optional<double>> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    double sum = 0.0;
    int count = 0;
    std::size_t start = i + 1 >= static_cast<std::size_t>(window) ? i + 1 - window : 0;
    for (std::size_t j = start; j <= i; ++j) {
      if (raw[j]) {
        sum += *raw[j];
        ++count;
      }
    }
    if (count > 0) out[i] = sum / count;
  }
  return out;
}

std::optional<double> edv_batch(const std::vector<ScoredIdea>& accepted,
                                const std::vector<const std::vector<double>*>& memory_before,
                                EdvFormulation formulation) {
  if (accepted.empty()) return std::nullopt;
  std::vector<double> terms;
  terms.reserve(accepted.size());
  for (const ScoredIdea& idea : accepted) {
    double depth = 1.0 - idea.probability;
    double breadth = 1.0;
    for (const std::vector<double>* m : memory_before) {
      breadth = std::min(breadth, 1.0 - cosine_raw(*idea.vector, *m));
    }
    switch (formulation) {
      case EdvFormulation::multiplicative:
        terms.push_back(depth * breadth);
        break;
      case EdvFormulation::additive:
        terms.push_back((depth + breadth) / 2.0);
        break;
      case EdvFormulation::geometric:
        terms.push_back(std::sqrt(depth * breadth));
        break;
    }
  }
  return mean(terms);
}

MetricSeries edv_series(const RunData& run, EdvFormulation formulation) {
  const int max_batch = run.max_batch_index();
  MetricSeries series;
  series.raw.resize(max_batch);

  auto ideas = parsed_ideas(run);
  std::vector<const std::vector<double>*> memory;
  std::size_t i = 0;
  for (int b = 1; b <= max_batch; ++b) {
    std::vector<ScoredIdea> batch_accepted;
    std::size_t batch_start = i;
    for (; i < ideas.size() && ideas[i].batch == b; ++i) {
      if (ideas[i].accepted) {
        batch_accepted.push_back({ideas[i].probability, ideas[i].vector});
      }
    }
    series.raw[b - 1] = edv_batch(batch_accepted, memory, formulation);
    for (std::size_t j = batch_start; j < i; ++j) {
      if (ideas[j].accepted) memory.push_back(ideas[j].vector);
    }
  }
  return series;
}

Retention edv_retention(const MetricSeries& series) {
  Retention r;
  int first = -1;
  int last = -1;
  for (std::size_t i = 0; i < series.raw.size(); ++i) {
    if (series.raw[i]) {
      if (first < 0) first = static_cast<int>(i);
      last = static_cast<int>(i);
    }
  }
  if (first < 0 || first == last) {
    throw AnalysisError("EDV retention needs at least two batches with values");
  }
  r.first_batch = first + 1;
  r.last_batch = last + 1;
  r.flagged = first != 0 || last != static_cast<int>(series.raw.size()) - 1;
  r.percent = *series.raw[last] / *series.raw[first] * 100.0;
  return r;
}

double batch_novelty(const std::vector<const std::vector<double>*>& batch,
                     const std::vector<const std::vector<double>*>& prior) {
  if (batch.empty()) {
    throw AnalysisError("batch_novelty: empty batch");
  }
  std::vector<double> distances;
  distances.reserve(batch.size());
  for (const std::vector<double>* idea : batch) {
    double d = 1.0;
    for (const std::vector<double>* p : prior) {
      d = std::min(d, 1.0 - cosine_raw(*idea, *p));
    }
    distances.push_back(d);
  }
  return mean(distances);
}

MetricSeries novelty_series(const RunData& run) {
  const int max_batch = run.max_batch_index();
  MetricSeries series;
  series.raw.resize(max_batch);

  auto ideas = parsed_ideas(run);
  std::vector<const std::vector<double>*> prior;
  std::size_t i = 0;
  for (int b = 1; b <= max_batch; ++b) {
    std::vector<const std::vector<double>*> batch_accepted;
    std::size_t batch_start = i;
    for (; i < ideas.size() && ideas[i].batch == b; ++i) {
      if (ideas[i].accepted) batch_accepted.push_back(ideas[i].vector);
    }
    if (!batch_accepted.empty()) {
      series.raw[b - 1] = batch_novelty(batch_accepted, prior);
    }
    for (std::size_t j = batch_start; j < i; ++j) {
      if (ideas[j].accepted) prior.push_back(ideas[j].vector);
    }
  }
  return series;
}

CollapseResult collapse_rate(const RunData& run, double delta_c, int window) {
  const int max_batch = run.max_batch_index();
  if (max_batch < 2 * window) {
    throw AnalysisError("collapse_rate needs at least " + std::to_string(2 * window) +
                        " batches, run has " + std::to_string(max_batch));
  }
  auto ideas = parsed_ideas(run);
  std::vector<const std::vector<double>*> early;
  std::vector<const std::vector<double>*> late;
  for (const ParsedIdea& p : ideas) {
    if (!p.accepted) continue;
    if (p.batch <= window) early.push_back(p.vector);
    if (p.batch > max_batch - window) late.push_back(p.vector);
  }
  CollapseResult result;
  result.threshold = delta_c;
  result.window = window;
  result.late_ideas = static_cast<int>(late.size());
  for (const std::vector<double>* l : late) {
    for (const std::vector<double>* e : early) {
      if (cosine_raw(*l, *e) > delta_c) {
        ++result.collapsed;
        break;
      }
    }
  }
  result.percent = late.empty()
                       ? 0.0
                       : 100.0 * result.collapsed / static_cast<double>(late.size());
  return result;
}

ConfusionMatrix2x2 confusion_matrix(const RunData& run, double tau, double delta) {
  if (run.config.enable_vts || run.config.enable_dedup) {
    throw AnalysisError(
        "confusion_matrix runs on unfiltered (naive-style) logs only; this run "
        "had filtering enabled");
  }
  auto ideas = parsed_ideas(run);
  ConfusionMatrix2x2 m;
  std::vector<const std::vector<double>*> prior;
  for (const ParsedIdea& p : ideas) {
    bool vts_reject = p.probability >= tau;
    bool dedup_reject = false;
    for (const std::vector<double>* q : prior) {
      if (cosine_raw(*p.vector, *q) > delta) {
        dedup_reject = true;
        break;
      }
    }
    if (vts_reject) {
      if (dedup_reject) ++m.vts_reject_dedup_reject;
      else ++m.vts_reject_dedup_accept;
    } else {
      if (dedup_reject) ++m.vts_accept_dedup_reject;
      else ++m.vts_accept_dedup_accept;
    }
    prior.push_back(p.vector);
  }
  return m;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&values](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = mean(a);
  double mb = mean(b);
  double cov = 0.0;
  double va = 0.0;
  double vb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va <= 0.0 || vb <= 0.0) return std::nullopt;
  return cov / std::sqrt(va * vb);
}

}  // namespace

std::optional<double> spearman_rho(const std::vector<double>& a,
                                   const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw AnalysisError("spearman_rho: need two equal-length vectors");
  }
  return pearson(average_ranks(a), average_ranks(b));
}

Correlation typicality_correlation(const RunData& run, int permutations,
                                   std::uint64_t seed) {
  auto ideas = parsed_ideas(run);
  Correlation out;
  out.n = static_cast<int>(ideas.size());
  if (out.n < 10) {
    throw AnalysisError("typicality_correlation needs at least 10 ideas");
  }

  const std::size_t dim = ideas[0].vector->size();
  std::vector<double> centroid(dim, 0.0);
  for (const ParsedIdea& p : ideas) {
    for (std::size_t i = 0; i < dim; ++i) centroid[i] += (*p.vector)[i];
  }
  for (double& x : centroid) x /= static_cast<double>(ideas.size());

  std::vector<double> probabilities;
  std::vector<double> distances;
  probabilities.reserve(ideas.size());
  distances.reserve(ideas.size());
  for (const ParsedIdea& p : ideas) {
    probabilities.push_back(p.probability);
    distances.push_back(1.0 - cosine_raw(*p.vector, centroid));
  }

  std::vector<double> prob_ranks = average_ranks(probabilities);
  std::vector<double> dist_ranks = average_ranks(distances);
  out.rho = pearson(prob_ranks, dist_ranks);
  if (!out.rho) return out;  // constant input, rho undefined

  // two-sided permutation test on the probability ranks
  Rng rng(seed);
  const double observed = std::abs(*out.rho);
  int at_least = 0;
  std::vector<double> shuffled = prob_ranks;
  for (int p = 0; p < permutations; ++p) {
    for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
      auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
      std::swap(shuffled[i], shuffled[j]);
    }
    auto rho_p = pearson(shuffled, dist_ranks);
    if (rho_p && std::abs(*rho_p) >= observed - 1e-12) ++at_least;
  }
  out.p_value = (1.0 + at_least) / (1.0 + permutations);
  return out;
}

StrategyStats per_strategy_stats(const RunData& run) {
  if (!run.config.enable_prompt_evolution) {
    throw AnalysisError("per_strategy_stats needs a prompt-evolution-enabled run");
  }
  MetricSeries edv = edv_series(run, EdvFormulation::multiplicative);
  MetricSeries novelty = novelty_series(run);

  struct Bucket {
    int batches = 0;
    std::int64_t generated = 0;
    std::int64_t accepted = 0;
    std::vector<double> edv_values;
    std::vector<double> novelty_values;
  };
  std::map<std::string, Bucket> by_strategy;
  std::map<std::string, Bucket> by_phase;

  for (const BatchRecord& b : run.batches) {
    for (auto* bucket : {&by_strategy[b.strategy], &by_phase[b.phase]}) {
      bucket->batches += 1;
      bucket->generated += b.generated;
      bucket->accepted += b.accepted;
      std::size_t i = static_cast<std::size_t>(b.batch_index) - 1;
      if (i < edv.raw.size() && edv.raw[i]) bucket->edv_values.push_back(*edv.raw[i]);
      if (i < novelty.raw.size() && novelty.raw[i]) {
        bucket->novelty_values.push_back(*novelty.raw[i]);
      }
    }
  }

  auto rows_of = [](const std::map<std::string, Bucket>& buckets) {
    std::vector<StrategyRow> rows;
    for (const auto& [name, bucket] : buckets) {
      StrategyRow row;
      row.group = name;
      row.batches = bucket.batches;
      row.generated = bucket.generated;
      row.accepted = bucket.accepted;
      row.acceptance_pct = bucket.generated > 0
                               ? 100.0 * bucket.accepted / static_cast<double>(bucket.generated)
                               : 0.0;
      if (!bucket.edv_values.empty()) row.mean_edv = mean(bucket.edv_values);
      if (!bucket.novelty_values.empty()) row.mean_novelty = mean(bucket.novelty_values);
      rows.push_back(std::move(row));
    }
    return rows;
  };

  StrategyStats stats;
  stats.per_strategy = rows_of(by_strategy);
  stats.per_phase = rows_of(by_phase);
  return stats;
}

Coherence category_coherence(const RunData& run) {
  auto ideas = parsed_ideas(run);
  Coherence out;

  std::map<std::string, std::vector<const std::vector<double>*>> by_label;
  for (const ParsedIdea& p : ideas) {
    if (!p.accepted) continue;
    by_label[p.category].push_back(p.vector);
    ++out.ideas;
  }
  out.unique_labels = static_cast<int>(by_label.size());
  if (out.ideas == 0) return out;

  // normalized Shannon entropy of the label distribution
  double entropy = 0.0;
  for (const auto& [label, members] : by_label) {
    (void)label;
    double p = static_cast<double>(members.size()) / out.ideas;
    entropy -= p * std::log(p);
  }
  out.normalized_entropy =
      out.unique_labels > 1 ? entropy / std::log(static_cast<double>(out.unique_labels)) : 0.0;

  // pooled mean pairwise cosine within categories of size >= 2
  double intra_sum = 0.0;
  std::int64_t intra_pairs = 0;
  for (const auto& [label, members] : by_label) {
    (void)label;
    if (members.size() < 2) continue;
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        intra_sum += cosine_raw(*members[i], *members[j]);
        ++intra_pairs;
      }
    }
  }
  if (intra_pairs > 0) out.mean_intra_sim = intra_sum / static_cast<double>(intra_pairs);

  // mean pairwise cosine between category centroids (all categories)
  if (by_label.size() >= 2) {
    std::vector<std::vector<double>> centroids;
    for (const auto& [label, members] : by_label) {
      (void)label;
      std::vector<double> c(members[0]->size(), 0.0);
      for (const std::vector<double>* v : members) {
        for (std::size_t i = 0; i < c.size(); ++i) c[i] += (*v)[i];
      }
      for (double& x : c) x /= static_cast<double>(members.size());
      centroids.push_back(std::move(c));
    }
    double inter_sum = 0.0;
    std::int64_t inter_pairs = 0;
    for (std::size_t i = 0; i < centroids.size(); ++i) {
      for (std::size_t j = i + 1; j < centroids.size(); ++j) {
        inter_sum += cosine_raw(centroids[i], centroids[j]);
        ++inter_pairs;
      }
    }
    out.mean_inter_centroid_sim = inter_sum / static_cast<double>(inter_pairs);
  }
  return out;
}

PooledStream seed_rotation_baseline(const std::vector<const RunData*>& runs, double delta) {
  if (runs.size() < 2) {
    throw AnalysisError("seed_rotation_baseline needs at least 2 runs");
  }
  const RunData& first = *runs[0];
  for (const RunData* run : runs) {
    if (run->config.enable_vts || run->config.enable_dedup) {
      throw AnalysisError("seed_rotation_baseline pools naive runs only");
    }
    if (run->config.domain_label != first.config.domain_label ||
        run->config.batch_size != first.config.batch_size ||
        run->config.batch_count != first.config.batch_count) {
      throw AnalysisError("seed_rotation_baseline: runs must share domain and batch structure");
    }
  }

  int max_batch = 0;
  std::vector<std::vector<ParsedIdea>> streams;
  for (const RunData* run : runs) {
    streams.push_back(parsed_ideas(*run));
    max_batch = std::max(max_batch, run->max_batch_index());
  }

  PooledStream out;
  out.run.config = first.config;
  out.run.config.enable_dedup = true;  // the pooled stream is dedup-filtered
  out.run.batches.resize(max_batch);

  std::vector<const std::vector<double>*> kept;
  std::vector<std::size_t> cursor(streams.size(), 0);
  std::int64_t seq = 0;
  std::int64_t accept_order = 0;

  for (int b = 1; b <= max_batch; ++b) {
    BatchRecord& batch = out.run.batches[b - 1];
    batch.batch_index = b;
    batch.strategy = "none";
    batch.phase = "none";
    for (std::size_t s = 0; s < streams.size(); ++s) {
      auto& stream = streams[s];
      auto& i = cursor[s];
      for (; i < stream.size() && stream[i].batch == b; ++i) {
        ++out.pooled;
        ++batch.generated;
        bool duplicate = false;
        double max_sim = 0.0;
        for (const std::vector<double>* q : kept) {
          double sim = cosine_raw(*stream[i].vector, *q);
          max_sim = std::max(max_sim, sim);
          if (sim >= delta) {
            duplicate = true;
            break;
          }
        }
        if (duplicate) {
          ++out.rejected;
          ++batch.dedup_rejected;
          continue;
        }
        ++out.survivors;
        ++batch.accepted;
        kept.push_back(stream[i].vector);

        CandidateRecord rec;
        rec.seq = ++seq;
        rec.batch_index = b;
        rec.slot_index = static_cast<int>(batch.accepted) - 1;
        rec.name = "pooled";
        rec.description = "pooled survivor";
        rec.category = stream[i].category;
        rec.probability = stream[i].probability;
        rec.strategy = "none";
        rec.phase = "none";
        rec.dedup_checked = true;
        rec.dedup_accepted = true;
        rec.dedup_max_similarity = max_sim;
        rec.outcome = Outcome::accepted;
        rec.accept_order = ++accept_order;
        rec.has_embedding = true;
        out.run.candidates.push_back(std::move(rec));
        out.run.embeddings[seq] = *stream[i].vector;
      }
    }
  }
  return out;
}

std::vector<std::int64_t> vts_replay_accepted(const RunData& run, double tau) {
  std::vector<std::int64_t> out;
  for (const CandidateRecord& r : run.candidates) {
    if (r.outcome == Outcome::parse_rejected) continue;
    if (r.probability.value_or(0.0) < tau) out.push_back(r.seq);
  }
  return out;
}

std::int64_t dedup_replay_accept_count(const RunData& run, double delta) {
  auto ideas = parsed_ideas(run);
  std::vector<const std::vector<double>*> kept;
  for (const ParsedIdea& p : ideas) {
    bool duplicate = false;
    for (const std::vector<double>* q : kept) {
      if (cosine_raw(*p.vector, *q) >= delta) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) kept.push_back(p.vector);
  }
  return static_cast<std::int64_t>(kept.size());
}

}  // namespace metrics
}  // namespace dce
