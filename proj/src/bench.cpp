#include "autoidx/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace autoidx::bench {

const char* to_string(WorkloadMixture m) {
  switch (m) {
    case WorkloadMixture::ReadOnly: return "read-only";
    case WorkloadMixture::ReadHeavy: return "read-heavy";
    case WorkloadMixture::Balanced: return "balanced";
    case WorkloadMixture::WriteHeavy: return "write-heavy";
  }
  return "?";
}

WorkloadMixture mixture_from_string(const std::string& s) {
  if (s == "read-only") return WorkloadMixture::ReadOnly;
  if (s == "read-heavy") return WorkloadMixture::ReadHeavy;
  if (s == "balanced") return WorkloadMixture::Balanced;
  if (s == "write-heavy") return WorkloadMixture::WriteHeavy;
  throw ConfigError("unknown mixture '" + s + "'");
}

double mixture_update_fraction(WorkloadMixture m) {
  switch (m) {
    case WorkloadMixture::ReadOnly: return 0.0;
    case WorkloadMixture::ReadHeavy: return 0.1;
    case WorkloadMixture::Balanced: return 0.5;
    case WorkloadMixture::WriteHeavy: return 0.9;
  }
  return 0.0;
}

namespace {

IndexScheme scheme_from_string(const std::string& s) {
  if (s == "VAP") return IndexScheme::VAP;
  if (s == "VBP") return IndexScheme::VBP;
  if (s == "FULL") return IndexScheme::FULL;
  throw ConfigError("unknown scheme '" + s + "'");
}

DecisionLogicKind dl_from_string(const std::string& s) {
  if (s == "immediate") return DecisionLogicKind::Immediate;
  if (s == "retrospective") return DecisionLogicKind::Retrospective;
  if (s == "predictive") return DecisionLogicKind::Predictive;
  throw ConfigError("unknown decision logic '" + s + "'");
}

TuningFrequency frequency_from_string(const std::string& s) {
  if (s == "FAST") return TuningFrequency::Fast;
  if (s == "MOD") return TuningFrequency::Mod;
  if (s == "SLOW") return TuningFrequency::Slow;
  if (s == "DIS") return TuningFrequency::Disabled;
  throw ConfigError("unknown frequency '" + s + "'");
}

double now_us() {
  return std::chrono::duration<double, std::micro>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

void BenchConfig::validate() const {
  if (queries == 0) throw ConfigError("queries must be positive");
  if (phase_length == 0 || queries % phase_length != 0) {
    throw ConfigError("phase length must divide the workload length");
  }
  if (selectivity <= 0.0 || selectivity > 1.0) throw ConfigError("selectivity must be in (0, 1]");
  if (update_selectivity <= 0.0 || update_selectivity > 1.0) {
    throw ConfigError("update selectivity must be in (0, 1]");
  }
  if (projectivity <= 0.0 || projectivity > 1.0) throw ConfigError("projectivity must be in (0, 1]");
  if (scale == 0) {
    // allowed: empty tables
  }
  if (narrow_attrs == 0 || wide_attrs == 0) throw ConfigError("attribute count must be positive");
  if (page_capacity == 0) throw ConfigError("page capacity must be positive");
  if (noise_fraction < 0.0 || noise_fraction > 0.5) {
    throw ConfigError("noise fraction must be in [0, 0.5]");
  }
  if (scenario != "phases" && scenario != "fig2" && scenario != "dl" &&
      scenario != "affinity" && scenario != "writeshift") {
    throw ConfigError("unknown scenario '" + scenario + "'");
  }
  if (queries_per_cycle == 0) throw ConfigError("queries per cycle must be positive");
  if (dominant_pairs == 0) throw ConfigError("dominant pair count must be positive");
}

std::string BenchConfig::canonical() const {
  std::ostringstream out;
  out << "scale=" << scale << ";wide_scale=" << wide_scale << ";narrow_attrs=" << narrow_attrs
      << ";wide_attrs=" << wide_attrs << ";zipf_skew=" << zipf_skew
      << ";page_capacity=" << page_capacity << ";scenario=" << scenario
      << ";queries=" << queries << ";phase_length=" << phase_length
      << ";mixture=" << bench::to_string(mixture)
      << ";scan_template=" << autoidx::to_string(scan_template)
      << ";selectivity=" << selectivity << ";update_selectivity=" << update_selectivity
      << ";projectivity=" << projectivity << ";affinity=" << affinity_subdomains
      << ";noise=" << noise_fraction << ";dominant_pairs=" << dominant_pairs
      << ";drop_at_phase_end=" << drop_at_phase_end << ";idle_cycles=" << idle_cycles
      << ";ins_batch=" << ins_batch << ";scheme=" << autoidx::to_string(scheme)
      << ";dl=" << autoidx::to_string(dl) << ";frequency=" << autoidx::to_string(frequency)
      << ";deterministic=" << deterministic << ";Q=" << queries_per_cycle
      << ";budget=" << storage_budget << ";pages_per_step=" << pages_per_step
      << ";aggr=" << build_aggressiveness << ";min_step=" << min_pages_step
      << ";hw_season=" << hw_season << ";vbp_immediate=" << vbp_immediate
      << ";seed=" << seed << ";force_table_scan=" << force_table_scan;
  return out.str();
}

std::uint64_t BenchConfig::config_hash() const { return fnv1a_str(canonical()); }

void apply_config_entry(BenchConfig& c, const std::string& key, const std::string& value) {
  auto u64 = [&] { return std::stoull(value); };
  auto u32 = [&] { return static_cast<std::uint32_t>(std::stoul(value)); };
  auto f64 = [&] { return std::stod(value); };
  auto flag = [&] { return value == "1" || value == "true" || value == "yes"; };
  if (key == "scale") c.scale = u64();
  else if (key == "wide_scale") c.wide_scale = u64();
  else if (key == "narrow_attrs") c.narrow_attrs = u32();
  else if (key == "wide_attrs") c.wide_attrs = u32();
  else if (key == "zipf_skew") c.zipf_skew = f64();
  else if (key == "page_capacity") c.page_capacity = u32();
  else if (key == "scenario") c.scenario = value;
  else if (key == "queries") c.queries = u64();
  else if (key == "phase_length") c.phase_length = u64();
  else if (key == "mixture") c.mixture = mixture_from_string(value);
  else if (key == "scan_template") {
    if (value == "LOW-S") c.scan_template = QueryTemplate::LowS;
    else if (value == "MOD-S") c.scan_template = QueryTemplate::ModS;
    else if (value == "HIGH-S") c.scan_template = QueryTemplate::HighS;
    else throw ConfigError("unknown scan template '" + value + "'");
  }
  else if (key == "selectivity") c.selectivity = f64();
  else if (key == "update_selectivity") c.update_selectivity = f64();
  else if (key == "projectivity") c.projectivity = f64();
  else if (key == "affinity_subdomains") c.affinity_subdomains = u32();
  else if (key == "noise_fraction") c.noise_fraction = f64();
  else if (key == "dominant_pairs") c.dominant_pairs = u32();
  else if (key == "drop_at_phase_end") c.drop_at_phase_end = flag();
  else if (key == "idle_cycles") c.idle_cycles = u32();
  else if (key == "ins_batch") c.ins_batch = u64();
  else if (key == "scheme") c.scheme = scheme_from_string(value);
  else if (key == "dl") c.dl = dl_from_string(value);
  else if (key == "frequency") c.frequency = frequency_from_string(value);
  else if (key == "deterministic") c.deterministic = flag();
  else if (key == "queries_per_cycle") c.queries_per_cycle = u32();
  else if (key == "storage_budget") c.storage_budget = u64();
  else if (key == "pages_per_step") c.pages_per_step = u32();
  else if (key == "build_aggressiveness") c.build_aggressiveness = f64();
  else if (key == "min_pages_step") c.min_pages_step = u32();
  else if (key == "hw_season") c.hw_season = u32();
  else if (key == "vbp_immediate") c.vbp_immediate = flag();
  else if (key == "seed") c.seed = u64();
  else if (key == "repeats") c.repeats = u32();
  else if (key == "out_dir") c.out_dir = value;
  else if (key == "force_table_scan") c.force_table_scan = flag();
  else throw ConfigError("unknown config key '" + key + "'");
}

BenchConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  BenchConfig config;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) apply_config_entry(config, key, value);
  }
  return config;
}

BenchContext generate_data(const BenchConfig& config) {
  config.validate();
  BenchContext ctx;
  ctx.db = std::make_unique<Database>();
  ctx.registry = std::make_unique<IndexRegistry>(*ctx.db);
  ctx.histograms = std::make_unique<HistogramCatalog>(*ctx.db);
  ctx.executor = std::make_unique<Executor>(*ctx.db, *ctx.registry, *ctx.histograms);
  ctx.monitor = std::make_unique<WorkloadMonitor>(100);
  ctx.zipf = std::make_shared<ZipfDistribution>(1000000, config.zipf_skew);

  auto make_schema = [](const std::string& name, std::uint32_t p) {
    Schema schema;
    schema.table_name = name;
    schema.attributes.push_back({"a0", AttributeKind::Timestamp});
    for (std::uint32_t i = 1; i <= p; ++i) {
      schema.attributes.push_back({"a" + std::to_string(i), AttributeKind::Integer});
    }
    return schema;
  };

  std::mt19937_64 rng(config.seed * 0x9E3779B97F4A7C15ull + 1);
  auto fill = [&](Table& table, std::uint64_t rows, std::uint32_t p) {
    std::vector<Value> row(p + 1);
    for (std::uint64_t i = 0; i < rows; ++i) {
      row[0] = static_cast<Value>(i);
      for (std::uint32_t a = 1; a <= p; ++a) row[a] = ctx.zipf->sample(rng);
      table.insert(row);
    }
  };

  Table& narrow = ctx.db->create_table(make_schema("narrow", config.narrow_attrs),
                                       config.page_capacity);
  fill(narrow, config.scale, config.narrow_attrs);
  Table& wide = ctx.db->create_table(make_schema("wide", config.wide_attrs),
                                     config.page_capacity);
  fill(wide, config.wide_scale, config.wide_attrs);

  // Pre-build histograms so selectivity estimation never runs on the query
  // path.
  for (std::uint32_t a = 0; a <= config.narrow_attrs; ++a) ctx.histograms->get("narrow", a);
  for (std::uint32_t a = 0; a <= config.wide_attrs; ++a) ctx.histograms->get("wide", a);
  return ctx;
}

WorkloadGenerator::WorkloadGenerator(const BenchConfig& config, const BenchContext& ctx)
    : config_(&config), ctx_(&ctx) {
  if (config.affinity_subdomains > 0) {
    const double per_attr =
        config.scan_template == QueryTemplate::LowS ? config.selectivity
                                                    : std::sqrt(config.selectivity);
    for (std::uint32_t c = 0; c < config.affinity_subdomains; ++c) {
      const double pos =
          (static_cast<double>(c) + 0.5) / config.affinity_subdomains * (1.0 - per_attr);
      affinity_intervals_.push_back(ctx.zipf->interval_at(pos, per_attr));
    }
  }
  if (config.noise_fraction > 0.0) {
    std::mt19937_64 noise_rng(config.seed * 0x2545F4914F6CDD1Dull + 7);
    const std::uint64_t phases = config.queries / config.phase_length;
    const auto per_phase = static_cast<std::uint64_t>(
        std::llround(config.noise_fraction * static_cast<double>(config.phase_length)));
    for (std::uint64_t p = 0; p < phases; ++p) {
      const std::uint64_t start = p * config.phase_length;
      std::set<std::uint64_t> slots;
      // One designated noise query per phase lands right before a tuning
      // cycle so the immediate DL reliably sees it as the most recent query.
      if (per_phase > 0) {
        const std::uint64_t pinned = std::min<std::uint64_t>(
            config.phase_length - 1, 6ull * config.queries_per_cycle - 1);
        slots.insert(start + pinned);
      }
      std::uniform_int_distribution<std::uint64_t> pick(0, config.phase_length - 1);
      while (slots.size() < per_phase) slots.insert(start + pick(noise_rng));
      noise_slots_.insert(noise_slots_.end(), slots.begin(), slots.end());
    }
    std::sort(noise_slots_.begin(), noise_slots_.end());
  }
}

std::uint64_t WorkloadGenerator::phase_of(std::uint64_t q) const {
  return q / config_->phase_length;
}

std::pair<std::uint32_t, std::uint32_t> WorkloadGenerator::dominant_pair(
    std::uint64_t phase) const {
  const std::uint32_t slot = static_cast<std::uint32_t>(phase % config_->dominant_pairs);
  const std::uint32_t first = 1 + 2 * slot;
  return {first, first + 1};
}

bool WorkloadGenerator::is_noise_slot(std::uint64_t q) const {
  return std::binary_search(noise_slots_.begin(), noise_slots_.end(), q);
}

namespace {

std::vector<std::uint32_t> projection_attrs(std::uint32_t p, double projectivity) {
  const auto width = std::max<std::uint32_t>(
      1, static_cast<std::uint32_t>(std::llround(projectivity * p)));
  std::vector<std::uint32_t> attrs;
  for (std::uint32_t a = 1; a <= std::min(width, p); ++a) attrs.push_back(a);
  return attrs;
}

}  // namespace

Query WorkloadGenerator::generate_query(QueryTemplate tmpl, std::mt19937_64& rng,
                                        std::uint64_t phase) const {
  const BenchConfig& cfg = *config_;
  const ZipfDistribution& zipf = *ctx_->zipf;
  Query query;
  query.tmpl = tmpl;
  const auto [da, db_attr] = dominant_pair(phase);

  auto range_conjunct = [&](std::uint32_t attr, double fraction) {
    ZipfDistribution::Interval interval{};
    if (!affinity_intervals_.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, affinity_intervals_.size() - 1);
      interval = affinity_intervals_[pick(rng)];
    } else {
      interval = zipf.place_interval(rng, fraction);
    }
    return AttrRange{attr, interval.lo, interval.hi};
  };

  switch (tmpl) {
    case QueryTemplate::LowS: {
      query.kind = QueryKind::Scan;
      TableRef ref;
      ref.table = "narrow";
      ref.predicates.push_back(range_conjunct(da, cfg.selectivity));
      query.tables.push_back(std::move(ref));
      query.projection = projection_attrs(cfg.narrow_attrs, cfg.projectivity);
      query.sum_attr = query.projection.back();
      break;
    }
    case QueryTemplate::ModS: {
      query.kind = QueryKind::Scan;
      TableRef ref;
      ref.table = "narrow";
      const double per_attr = std::sqrt(cfg.selectivity);
      ref.predicates.push_back(range_conjunct(da, per_attr));
      ref.predicates.push_back(range_conjunct(db_attr, per_attr));
      query.tables.push_back(std::move(ref));
      query.projection = projection_attrs(cfg.narrow_attrs, cfg.projectivity);
      query.sum_attr = query.projection.back();
      break;
    }
    case QueryTemplate::HighS: {
      query.kind = QueryKind::Scan;
      const double per_attr = std::sqrt(cfg.selectivity);
      TableRef left;
      left.table = "narrow";
      left.predicates.push_back(range_conjunct(da, per_attr));
      TableRef right;
      right.table = "wide";
      right.predicates.push_back(range_conjunct(db_attr, per_attr));
      query.tables.push_back(std::move(left));
      query.tables.push_back(std::move(right));
      query.join = {{2u, 2u}};  // narrow.a2 = wide.a2
      query.projection = projection_attrs(std::min(cfg.narrow_attrs, cfg.wide_attrs),
                                          cfg.projectivity);
      break;
    }
    case QueryTemplate::LowU:
    case QueryTemplate::HighU: {
      query.kind = QueryKind::Update;
      TableRef ref;
      ref.table = "narrow";
      ref.predicates.push_back(range_conjunct(da, tmpl == QueryTemplate::LowU
                                                      ? cfg.update_selectivity
                                                      : std::sqrt(cfg.update_selectivity)));
      if (tmpl == QueryTemplate::HighU) {
        ref.predicates.push_back(range_conjunct(db_attr, std::sqrt(cfg.update_selectivity)));
      }
      query.tables.push_back(std::move(ref));
      const auto targets = projection_attrs(cfg.narrow_attrs, cfg.projectivity);
      for (std::size_t i = 0; i + 1 < targets.size(); ++i) {
        query.set_clauses.push_back({targets[i], zipf.sample(rng), false});
      }
      query.set_clauses.push_back({targets.back(), 1, true});
      break;
    }
    case QueryTemplate::Ins: {
      query.kind = QueryKind::Insert;
      TableRef ref;
      ref.table = "narrow";
      query.tables.push_back(std::move(ref));
      const Table& table = ctx_->db->table("narrow");
      for (std::uint64_t i = 0; i < cfg.ins_batch; ++i) {
        std::vector<Value> row(cfg.narrow_attrs + 1);
        row[0] = static_cast<Value>(table.version_count() + i);
        for (std::uint32_t a = 1; a <= cfg.narrow_attrs; ++a) row[a] = zipf.sample(rng);
        query.insert_rows.push_back(std::move(row));
      }
      break;
    }
  }
  return query;
}

Query WorkloadGenerator::query_at(std::uint64_t q, std::mt19937_64& rng) const {
  const BenchConfig& cfg = *config_;
  const std::uint64_t phase = phase_of(q);

  if (cfg.scenario == "fig2") {
    return generate_query(cfg.scan_template, rng, 0);
  }
  if (cfg.scenario == "dl") {
    if (is_noise_slot(q)) {
      // A noisy one-off: a distinct attribute pair outside the dominant set.
      const std::uint32_t lo_attr = 1 + 2 * cfg.dominant_pairs;
      std::uniform_int_distribution<std::uint32_t> pick(lo_attr, cfg.narrow_attrs);
      std::uint32_t i = pick(rng);
      std::uint32_t j = pick(rng);
      while (j == i) j = pick(rng);
      if (i > j) std::swap(i, j);
      Query query = generate_query(QueryTemplate::ModS, rng, phase);
      query.tables[0].predicates[0].attr = i;
      query.tables[0].predicates[1].attr = j;
      return query;
    }
    return generate_query(QueryTemplate::ModS, rng, phase);
  }
  if (cfg.scenario == "affinity") {
    return generate_query(cfg.scan_template, rng, 0);
  }
  if (cfg.scenario == "writeshift") {
    const std::uint64_t segment = q / (cfg.queries / 3);
    if (segment >= 2) return generate_query(QueryTemplate::Ins, rng, phase);
    // Scan segments alternate two moderate-complexity templates.
    return generate_query(QueryTemplate::ModS, rng, q % 2);
  }
  // "phases": the configured scan template with the mixture's update share.
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  if (uniform(rng) < mixture_update_fraction(cfg.mixture)) {
    return generate_query(QueryTemplate::LowU, rng, phase);
  }
  return generate_query(cfg.scan_template, rng, phase);
}

namespace {

std::uint32_t derived_hw_season(const BenchConfig& cfg) {
  if (cfg.hw_season > 0) return cfg.hw_season;
  const std::uint64_t cycles_per_phase =
      cfg.phase_length / cfg.queries_per_cycle + cfg.idle_cycles;
  const std::uint64_t period = std::max<std::uint64_t>(2, cfg.dominant_pairs * cycles_per_phase);
  return static_cast<std::uint32_t>(std::min<std::uint64_t>(period, 512));
}

TunerConfig make_tuner_config(const BenchConfig& cfg) {
  TunerConfig tc;
  tc.frequency = cfg.frequency;
  tc.decision_logic = cfg.dl;
  tc.scheme = cfg.scheme;
  tc.queries_per_cycle = cfg.queries_per_cycle;
  tc.planner.storage_budget = cfg.storage_budget;
  tc.planner.pages_per_step = cfg.pages_per_step;
  tc.planner.build_aggressiveness = cfg.build_aggressiveness;
  tc.planner.min_pages_step = cfg.min_pages_step;
  tc.planner.u_min_base = static_cast<double>(cfg.page_capacity) * 100.0 * 0.01;
  tc.holt_winters.season_length = derived_hw_season(cfg);
  tc.vbp_immediate = cfg.vbp_immediate;
  return tc;
}

void sample_builds(const BenchContext& ctx, std::uint64_t cycle, RunMetrics& metrics) {
  for (const auto& index : ctx.registry->all()) {
    const Table& table = ctx.db->table(index->spec().table);
    const double fraction =
        table.version_count() == 0
            ? 1.0
            : static_cast<double>(index->entry_count()) /
                  static_cast<double>(table.version_count());
    metrics.build_progress.push_back({cycle, index->spec().to_string(), fraction});
  }
}

RunMetrics run_once(const BenchConfig& config, std::uint64_t seed) {
  BenchContext ctx = generate_data(config);
  ctx.executor->vbp_immediate_population = config.vbp_immediate;

  IndexTuner tuner(*ctx.executor, *ctx.monitor, make_tuner_config(config));
  WorkloadGenerator generator(config, ctx);
  std::mt19937_64 rng(seed);

  RunMetrics metrics;
  const bool tuning = config.frequency != TuningFrequency::Disabled && !config.force_table_scan;
  const bool deterministic = config.deterministic;
  if (tuning && !deterministic) tuner.start();

  PlannerContext planner_ctx;
  planner_ctx.registry = ctx.registry.get();
  planner_ctx.histograms = ctx.histograms.get();
  planner_ctx.prefer_vbp = config.scheme == IndexScheme::VBP;

  for (std::uint64_t q = 0; q < config.queries; ++q) {
    if (q % config.phase_length == 0) {
      metrics.phase_starts.push_back(q);
      if (q > 0 && config.drop_at_phase_end && tuning) tuner.drop_all_indexes();
      if (tuning && deterministic) {
        for (std::uint32_t g = 0; g < config.idle_cycles; ++g) {
          CycleRow row{tuner.tuning_cycle(), q};
          sample_builds(ctx, row.report.cycle, metrics);
          metrics.cycles.push_back(std::move(row));
        }
      }
    }

    Query query = generator.query_at(q, rng);
    Plan plan;
    if (config.force_table_scan) {
      for (std::size_t i = 0; i < query.tables.size(); ++i) {
        plan.per_table.push_back(TablePlan{AccessPath::TableScan, nullptr, 0.0});
      }
      if (query.join) plan.join = JoinStrategy::HashJoin;
    } else {
      plan = choose_access_path(*ctx.db, planner_ctx, query);
    }

    const Epoch epoch = ctx.db->table(query.tables[0].table).committed_epoch();
    QueryStats stats;
    const double t0 = now_us();
    const QueryResult result = ctx.executor->execute_query(query, epoch, plan, stats);
    stats.latency_us = now_us() - t0;
    stats.access_path = plan.per_table.empty() ? AccessPath::TableScan
                                               : plan.per_table[0].path;

    std::vector<IndexKeySpec> used;
    for (const auto& tp : plan.per_table) {
      if (tp.index) used.push_back(tp.index->spec());
    }
    ctx.monitor->record(query, stats, ctx.db->table(query.tables[0].table).version_count(),
                        used);

    QueryRow row;
    row.query_idx = q;
    row.tmpl = query.tmpl;
    row.latency_us = stats.latency_us;
    row.access_path = stats.access_path;
    row.tuples_scanned = stats.tuples_scanned;
    row.index_entries_read = stats.index_entries_read;
    row.work_units = stats.tuples_scanned + 2 * stats.index_entries_read +
                     stats.tuples_written + 2 * stats.index_entries_maintained;
    row.digest = result.digest;
    metrics.cumulative_us += row.latency_us;
    metrics.cumulative_work += row.work_units;
    metrics.rows.push_back(row);

    if (tuning && deterministic && (q + 1) % config.queries_per_cycle == 0) {
      CycleRow cycle_row{tuner.tuning_cycle(), q + 1};
      sample_builds(ctx, cycle_row.report.cycle, metrics);
      metrics.cycles.push_back(std::move(cycle_row));
    }
  }
  if (tuning && !deterministic) tuner.stop();
  metrics.final_index_count = ctx.registry->size();
  return metrics;
}

}  // namespace

RunMetrics run(const BenchConfig& config) {
  config.validate();
  RunMetrics first;
  double total_us = 0.0;
  for (std::uint32_t rep = 0; rep < std::max<std::uint32_t>(1, config.repeats); ++rep) {
    RunMetrics metrics = run_once(config, config.seed + rep);
    total_us += metrics.cumulative_us;
    if (rep == 0) first = std::move(metrics);
  }
  first.cumulative_us = total_us / std::max<std::uint32_t>(1, config.repeats);
  return first;
}

std::string RunMetrics::latency_csv() const {
  std::ostringstream out;
  out << "query_idx,template,latency_us,access_path,tuples_scanned\n";
  out.precision(3);
  out << std::fixed;
  for (const auto& row : rows) {
    out << row.query_idx << "," << autoidx::to_string(row.tmpl) << "," << row.latency_us << ","
        << autoidx::to_string(row.access_path) << "," << row.tuples_scanned << "\n";
  }
  return out.str();
}

std::string RunMetrics::cycle_csv() const {
  std::ostringstream out;
  out << cycle_report_csv_header() << ",queries_seen\n";
  for (const auto& row : cycles) {
    out << cycle_report_csv_row(row.report) << "," << row.queries_seen << "\n";
  }
  return out.str();
}

std::string RunMetrics::summary_csv(const BenchConfig& config) const {
  std::ostringstream out;
  out << "config_hash,cumulative_us,queries,scheme,dl,frequency\n";
  out << config.config_hash() << "," << std::llround(cumulative_us) << "," << rows.size()
      << "," << autoidx::to_string(config.scheme) << "," << autoidx::to_string(config.dl) << ","
      << autoidx::to_string(config.frequency) << "\n";
  return out.str();
}

void write_outputs(const BenchConfig& config, const RunMetrics& metrics,
                   const std::string& prefix) {
  if (config.out_dir.empty()) return;
  std::filesystem::create_directories(config.out_dir);
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream out(std::filesystem::path(config.out_dir) / name);
    out << content;
  };
  write(prefix + "_latency.csv", metrics.latency_csv());
  write(prefix + "_cycles.csv", metrics.cycle_csv());
  write(prefix + "_summary.csv", metrics.summary_csv(config));
}

std::vector<LabeledSnapshot> collect_labeled_snapshots(WorkloadMixture mixture,
                                                       std::size_t count,
                                                       std::uint64_t seed) {
  BenchConfig config;
  config.scale = 2000;
  config.wide_scale = 200;
  config.narrow_attrs = 8;
  config.wide_attrs = 8;
  config.page_capacity = 100;
  config.queries = 100000;  // upper bound; the loop stops at `count`
  config.phase_length = 100000;
  config.mixture = mixture;
  config.selectivity = 0.05;
  config.update_selectivity = 0.01;
  config.seed = seed;
  config.validate();

  BenchContext ctx = generate_data(config);
  WorkloadGenerator generator(config, ctx);
  std::mt19937_64 rng(seed);
  PlannerContext planner_ctx;
  planner_ctx.registry = ctx.registry.get();
  planner_ctx.histograms = ctx.histograms.get();

  const WorkloadLabel label = (mixture == WorkloadMixture::ReadOnly ||
                               mixture == WorkloadMixture::ReadHeavy)
                                  ? WorkloadLabel::ReadIntensive
                                  : WorkloadLabel::WriteIntensive;
  std::vector<LabeledSnapshot> out;
  std::uint64_t q = 0;
  while (out.size() < count) {
    Query query = generator.query_at(q % config.queries, rng);
    Plan plan = choose_access_path(*ctx.db, planner_ctx, query);
    const Epoch epoch = ctx.db->table(query.tables[0].table).committed_epoch();
    QueryStats stats;
    ctx.executor->execute_query(query, epoch, plan, stats);
    ctx.monitor->record(query, stats, ctx.db->table(query.tables[0].table).version_count());
    ++q;
    if (q >= 100 && q % 10 == 0) {
      const WorkloadSnapshot snap = ctx.monitor->snapshot();
      out.push_back({snap.features(), label});
    }
  }
  return out;
}

}  // namespace autoidx::bench
