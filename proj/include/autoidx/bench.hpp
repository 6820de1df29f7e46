#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "autoidx/executor.hpp"
#include "autoidx/tuner.hpp"
#include "autoidx/zipf.hpp"

namespace autoidx::bench {

enum class WorkloadMixture { ReadOnly, ReadHeavy, Balanced, WriteHeavy };

const char* to_string(WorkloadMixture m);
WorkloadMixture mixture_from_string(const std::string& s);
double mixture_update_fraction(WorkloadMixture m);

struct BenchConfig {
  // Data
  std::uint64_t scale = 1000000;       // narrow table tuples
  std::uint64_t wide_scale = 100000;   // wide table tuples
  std::uint32_t narrow_attrs = 20;     // p for the narrow table
  std::uint32_t wide_attrs = 200;      // p for the wide table
  double zipf_skew = 1.0;
  std::uint32_t page_capacity = 1000;

  // Workload
  std::string scenario = "phases";  // phases|fig2|dl|affinity|writeshift
  std::uint64_t queries = 5000;     // t
  std::uint64_t phase_length = 500; // l; must divide t
  WorkloadMixture mixture = WorkloadMixture::ReadOnly;
  QueryTemplate scan_template = QueryTemplate::LowS;
  double selectivity = 0.01;
  double update_selectivity = 0.0001;
  double projectivity = 0.1;
  std::uint32_t affinity_subdomains = 0;  // 0 disables affinity mode
  double noise_fraction = 0.0;
  std::uint32_t dominant_pairs = 2;  // alternating dominant predicates (dl scenario)
  bool drop_at_phase_end = false;
  std::uint32_t idle_cycles = 0;  // tuner-only cycles at each phase start
  std::uint64_t ins_batch = 1;

  // Tuner
  IndexScheme scheme = IndexScheme::VAP;
  DecisionLogicKind dl = DecisionLogicKind::Predictive;
  TuningFrequency frequency = TuningFrequency::Mod;
  bool deterministic = true;
  std::uint32_t queries_per_cycle = 50;  // Q
  std::uint64_t storage_budget = 256ull << 20;
  std::uint32_t pages_per_step = 32;
  double build_aggressiveness = 0.1;
  std::uint32_t min_pages_step = 4;
  std::uint32_t hw_season = 0;  // 0: derived from the phase structure
  bool vbp_immediate = true;

  // Harness
  std::uint64_t seed = 42;
  std::uint32_t repeats = 1;
  std::string out_dir;
  bool force_table_scan = false;  // shadow-oracle mode: pure table scans

  void validate() const;
  std::string canonical() const;
  std::uint64_t config_hash() const;
};

// key=value file, one entry per line, '#' comments.
BenchConfig load_config_file(const std::string& path);
void apply_config_entry(BenchConfig& config, const std::string& key, const std::string& value);

struct QueryRow {
  std::uint64_t query_idx = 0;
  QueryTemplate tmpl = QueryTemplate::LowS;
  double latency_us = 0.0;  // thread CPU time
  AccessPath access_path = AccessPath::TableScan;
  std::uint64_t tuples_scanned = 0;
  std::uint64_t index_entries_read = 0;
  std::uint64_t work_units = 0;  // deterministic latency proxy
  std::uint64_t digest = 0;
};

struct CycleRow {
  CycleReport report;
  std::uint64_t queries_seen = 0;  // queries executed before the cycle fired
};

struct BuildSample {
  std::uint64_t cycle = 0;
  std::string spec;
  double fraction = 0.0;  // entries relative to table versions
};

struct RunMetrics {
  std::vector<QueryRow> rows;
  std::vector<CycleRow> cycles;
  std::vector<BuildSample> build_progress;
  double cumulative_us = 0.0;
  std::uint64_t cumulative_work = 0;
  std::uint64_t final_index_count = 0;
  std::vector<std::uint64_t> phase_starts;

  std::string latency_csv() const;
  std::string cycle_csv() const;
  std::string summary_csv(const BenchConfig& config) const;
};

// The full benchmark database: a narrow and a wide table populated from the
// configured Zipf distribution; histograms pre-built.
struct BenchContext {
  std::unique_ptr<Database> db;
  std::unique_ptr<IndexRegistry> registry;
  std::unique_ptr<HistogramCatalog> histograms;
  std::unique_ptr<Executor> executor;
  std::unique_ptr<WorkloadMonitor> monitor;
  std::shared_ptr<ZipfDistribution> zipf;
};

BenchContext generate_data(const BenchConfig& config);

// Query generation; `phase` selects the dominant predicate attributes.
class WorkloadGenerator {
 public:
  WorkloadGenerator(const BenchConfig& config, const BenchContext& ctx);

  Query generate_query(QueryTemplate tmpl, std::mt19937_64& rng, std::uint64_t phase) const;
  // The q-th query of a run, including mixture and noise decisions.
  Query query_at(std::uint64_t q, std::mt19937_64& rng) const;
  std::uint64_t phase_of(std::uint64_t q) const;
  // Dominant attribute pair of a phase (dl scenario alternation).
  std::pair<std::uint32_t, std::uint32_t> dominant_pair(std::uint64_t phase) const;
  bool is_noise_slot(std::uint64_t q) const;

 private:
  const BenchConfig* config_;
  const BenchContext* ctx_;
  std::vector<ZipfDistribution::Interval> affinity_intervals_;
  std::vector<std::uint64_t> noise_slots_;  // sorted query indexes
};

RunMetrics run(const BenchConfig& config);
// Writes latency/cycle/summary (and forecaster) CSV files to config.out_dir.
void write_outputs(const BenchConfig& config, const RunMetrics& metrics,
                   const std::string& prefix = "run");

// Labeled feature snapshots for classifier training: small-scale mixture
// streams observed through a real monitor.
std::vector<LabeledSnapshot> collect_labeled_snapshots(WorkloadMixture mixture,
                                                       std::size_t count,
                                                       std::uint64_t seed);

}  // namespace autoidx::bench
