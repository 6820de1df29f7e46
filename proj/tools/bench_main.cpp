// TUNER-style benchmark CLI: data/workload generation, benchmark runs, and
// side-by-side scheme/DL comparisons. All outputs are CSV.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "autoidx/bench.hpp"

namespace {

using autoidx::bench::BenchConfig;

void add_config_flags(CLI::App* cmd, BenchConfig& config, std::string& config_file,
                      std::string& scheme, std::string& dl, std::string& frequency,
                      std::string& mixture, std::string& scan_template) {
  cmd->add_option("--config", config_file, "key=value config file (flags override)");
  cmd->add_option("--scale", config.scale, "narrow table tuples");
  cmd->add_option("--wide-scale", config.wide_scale, "wide table tuples");
  cmd->add_option("--narrow-attrs", config.narrow_attrs, "narrow table attribute count (p)");
  cmd->add_option("--wide-attrs", config.wide_attrs, "wide table attribute count (p)");
  cmd->add_option("--zipf-skew", config.zipf_skew, "Zipf skew parameter");
  cmd->add_option("--page-capacity", config.page_capacity, "tuples per page");
  cmd->add_option("--scenario", config.scenario,
                  "workload scenario: phases|fig2|dl|affinity|writeshift");
  cmd->add_option("--queries", config.queries, "workload length t");
  cmd->add_option("--phase-length", config.phase_length, "phase length l (divides t)");
  cmd->add_option("--mixture", mixture, "read-only|read-heavy|balanced|write-heavy");
  cmd->add_option("--scan-template", scan_template, "LOW-S|MOD-S|HIGH-S");
  cmd->add_option("--selectivity", config.selectivity, "scan predicate selectivity");
  cmd->add_option("--update-selectivity", config.update_selectivity,
                  "update predicate selectivity");
  cmd->add_option("--projectivity", config.projectivity, "projection width fraction");
  cmd->add_option("--affinity-subdomains", config.affinity_subdomains,
                  "fixed subdomain count (0 = off)");
  cmd->add_option("--noise-fraction", config.noise_fraction, "noisy query fraction");
  cmd->add_option("--dominant-pairs", config.dominant_pairs,
                  "alternating dominant predicate pairs");
  cmd->add_flag("--drop-at-phase-end", config.drop_at_phase_end,
                "drop all built indexes at each phase end");
  cmd->add_option("--idle-cycles", config.idle_cycles, "tuner-only cycles at phase starts");
  cmd->add_option("--ins-batch", config.ins_batch, "tuples per INS query");
  cmd->add_option("--scheme", scheme, "index scheme under test: VAP|VBP|FULL");
  cmd->add_option("--dl", dl, "decision logic: immediate|retrospective|predictive");
  cmd->add_option("--frequency", frequency, "tuning frequency: FAST|MOD|SLOW|DIS");
  cmd->add_option("--deterministic", config.deterministic,
                  "deterministic every-Q-queries scheduling");
  cmd->add_option("--queries-per-cycle", config.queries_per_cycle,
                  "queries per tuning cycle (deterministic mode)");
  cmd->add_option("--storage-budget", config.storage_budget, "index storage budget in bytes");
  cmd->add_option("--pages-per-step", config.pages_per_step, "build page budget per cycle");
  cmd->add_option("--build-aggressiveness", config.build_aggressiveness,
                  "fraction of remaining pages per cycle");
  cmd->add_option("--min-pages-step", config.min_pages_step, "build schedule floor");
  cmd->add_option("--hw-season", config.hw_season, "Holt-Winters season length in cycles");
  cmd->add_option("--vbp-immediate", config.vbp_immediate,
                  "populate uncovered VBP subdomains during queries");
  cmd->add_option("--seed", config.seed, "random seed");
  cmd->add_option("--repeats", config.repeats, "repeat count; cumulative time is averaged");
  cmd->add_option("--out-dir", config.out_dir, "CSV output directory");
}

BenchConfig finalize_config(const std::string& config_file, BenchConfig flags_config,
                            const std::string& scheme, const std::string& dl,
                            const std::string& frequency, const std::string& mixture,
                            const std::string& scan_template, CLI::App* cmd) {
  BenchConfig config;
  if (!config_file.empty()) config = autoidx::bench::load_config_file(config_file);
  // Flags override file entries when explicitly given.
  auto overridden = [&](const std::string& name) { return cmd->count(name) > 0; };
  BenchConfig& out = config_file.empty() ? flags_config : config;
  if (!config_file.empty()) {
    // Re-apply explicitly set flags on top of the file config.
    BenchConfig defaults;
    (void)defaults;
    if (overridden("--scale")) out.scale = flags_config.scale;
    if (overridden("--wide-scale")) out.wide_scale = flags_config.wide_scale;
    if (overridden("--narrow-attrs")) out.narrow_attrs = flags_config.narrow_attrs;
    if (overridden("--wide-attrs")) out.wide_attrs = flags_config.wide_attrs;
    if (overridden("--zipf-skew")) out.zipf_skew = flags_config.zipf_skew;
    if (overridden("--page-capacity")) out.page_capacity = flags_config.page_capacity;
    if (overridden("--scenario")) out.scenario = flags_config.scenario;
    if (overridden("--queries")) out.queries = flags_config.queries;
    if (overridden("--phase-length")) out.phase_length = flags_config.phase_length;
    if (overridden("--selectivity")) out.selectivity = flags_config.selectivity;
    if (overridden("--update-selectivity"))
      out.update_selectivity = flags_config.update_selectivity;
    if (overridden("--projectivity")) out.projectivity = flags_config.projectivity;
    if (overridden("--affinity-subdomains"))
      out.affinity_subdomains = flags_config.affinity_subdomains;
    if (overridden("--noise-fraction")) out.noise_fraction = flags_config.noise_fraction;
    if (overridden("--dominant-pairs")) out.dominant_pairs = flags_config.dominant_pairs;
    if (overridden("--drop-at-phase-end"))
      out.drop_at_phase_end = flags_config.drop_at_phase_end;
    if (overridden("--idle-cycles")) out.idle_cycles = flags_config.idle_cycles;
    if (overridden("--ins-batch")) out.ins_batch = flags_config.ins_batch;
    if (overridden("--deterministic")) out.deterministic = flags_config.deterministic;
    if (overridden("--queries-per-cycle"))
      out.queries_per_cycle = flags_config.queries_per_cycle;
    if (overridden("--storage-budget")) out.storage_budget = flags_config.storage_budget;
    if (overridden("--pages-per-step")) out.pages_per_step = flags_config.pages_per_step;
    if (overridden("--build-aggressiveness"))
      out.build_aggressiveness = flags_config.build_aggressiveness;
    if (overridden("--min-pages-step")) out.min_pages_step = flags_config.min_pages_step;
    if (overridden("--hw-season")) out.hw_season = flags_config.hw_season;
    if (overridden("--vbp-immediate")) out.vbp_immediate = flags_config.vbp_immediate;
    if (overridden("--seed")) out.seed = flags_config.seed;
    if (overridden("--repeats")) out.repeats = flags_config.repeats;
    if (overridden("--out-dir")) out.out_dir = flags_config.out_dir;
  }
  if (!scheme.empty()) autoidx::bench::apply_config_entry(out, "scheme", scheme);
  if (!dl.empty()) autoidx::bench::apply_config_entry(out, "dl", dl);
  if (!frequency.empty()) autoidx::bench::apply_config_entry(out, "frequency", frequency);
  if (!mixture.empty()) autoidx::bench::apply_config_entry(out, "mixture", mixture);
  if (!scan_template.empty())
    autoidx::bench::apply_config_entry(out, "scan_template", scan_template);
  out.validate();
  return out;
}

int cmd_generate(const BenchConfig& config) {
  auto ctx = autoidx::bench::generate_data(config);
  autoidx::bench::WorkloadGenerator generator(config, ctx);
  std::mt19937_64 rng(config.seed);

  std::ostringstream workload;
  workload << "query_idx,template,kind,table,predicates\n";
  for (std::uint64_t q = 0; q < config.queries; ++q) {
    const autoidx::Query query = generator.query_at(q, rng);
    workload << q << "," << autoidx::to_string(query.tmpl) << ","
             << autoidx::to_string(query.kind) << "," << query.tables[0].table << ",";
    const auto& schema = ctx.db->table(query.tables[0].table).schema();
    for (std::size_t i = 0; i < query.tables[0].predicates.size(); ++i) {
      const auto& c = query.tables[0].predicates[i];
      if (i) workload << ";";
      workload << schema.attributes[c.attr].name << " in [" << c.lo << " " << c.hi << "]";
    }
    workload << "\n";
  }

  std::ostringstream stats;
  stats << "table,tuples,pages,attributes\n";
  for (const auto& name : ctx.db->table_names()) {
    const auto& table = ctx.db->table(name);
    stats << name << "," << table.version_count() << "," << table.page_count() << ","
          << table.arity() << "\n";
  }

  if (config.out_dir.empty()) {
    std::cout << stats.str();
    return 0;
  }
  std::filesystem::create_directories(config.out_dir);
  std::ofstream(std::filesystem::path(config.out_dir) / "workload.csv") << workload.str();
  std::ofstream(std::filesystem::path(config.out_dir) / "tables.csv") << stats.str();
  std::cout << "wrote " << config.out_dir << "/workload.csv and tables.csv\n";
  return 0;
}

int cmd_run(const BenchConfig& config) {
  const autoidx::bench::RunMetrics metrics = autoidx::bench::run(config);
  autoidx::bench::write_outputs(config, metrics, "run");
  std::cout << metrics.summary_csv(config);
  return 0;
}

int cmd_compare(const BenchConfig& base, const std::string& vary,
                const std::vector<std::string>& values) {
  std::ostringstream combined;
  combined << "config_hash,cumulative_us,queries,scheme,dl,frequency\n";
  for (const auto& value : values) {
    BenchConfig config = base;
    autoidx::bench::apply_config_entry(config, vary, value);
    config.validate();
    const autoidx::bench::RunMetrics metrics = autoidx::bench::run(config);
    if (!config.out_dir.empty()) {
      autoidx::bench::write_outputs(config, metrics, vary + "_" + value);
    }
    std::istringstream rows(metrics.summary_csv(config));
    std::string line;
    std::getline(rows, line);  // header
    while (std::getline(rows, line)) combined << line << "\n";
  }
  if (!base.out_dir.empty()) {
    std::filesystem::create_directories(base.out_dir);
    std::ofstream(std::filesystem::path(base.out_dir) / "compare_summary.csv")
        << combined.str();
  }
  std::cout << combined.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"in-memory store benchmark with online index tuning"};
  app.require_subcommand(1);

  BenchConfig gen_config;
  BenchConfig run_config;
  BenchConfig cmp_config;
  std::string gen_file, run_file, cmp_file;
  std::string gen_scheme, run_scheme, cmp_scheme;
  std::string gen_dl, run_dl, cmp_dl;
  std::string gen_freq, run_freq, cmp_freq;
  std::string gen_mix, run_mix, cmp_mix;
  std::string gen_tmpl, run_tmpl, cmp_tmpl;
  std::string vary = "scheme";
  std::vector<std::string> values;

  CLI::App* generate = app.add_subcommand("generate", "generate data and a workload CSV");
  add_config_flags(generate, gen_config, gen_file, gen_scheme, gen_dl, gen_freq, gen_mix,
                   gen_tmpl);

  CLI::App* run_cmd = app.add_subcommand("run", "run the benchmark and emit CSV metrics");
  add_config_flags(run_cmd, run_config, run_file, run_scheme, run_dl, run_freq, run_mix,
                   run_tmpl);

  CLI::App* compare = app.add_subcommand("compare", "run variants and emit a combined summary");
  add_config_flags(compare, cmp_config, cmp_file, cmp_scheme, cmp_dl, cmp_freq, cmp_mix,
                   cmp_tmpl);
  compare->add_option("--vary", vary, "config key to vary (e.g. scheme, dl, frequency)");
  compare->add_option("--values", values, "comma-separated values for the varied key")
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      return cmd_generate(finalize_config(gen_file, gen_config, gen_scheme, gen_dl, gen_freq,
                                          gen_mix, gen_tmpl, generate));
    }
    if (run_cmd->parsed()) {
      return cmd_run(finalize_config(run_file, run_config, run_scheme, run_dl, run_freq,
                                     run_mix, run_tmpl, run_cmd));
    }
    if (compare->parsed()) {
      if (values.empty()) throw autoidx::ConfigError("compare requires --values");
      return cmd_compare(finalize_config(cmp_file, cmp_config, cmp_scheme, cmp_dl, cmp_freq,
                                         cmp_mix, cmp_tmpl, compare),
                         vary, values);
    }
  } catch (const autoidx::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
