#include "poisonbench/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "poisonbench/config.hpp"
#include "poisonbench/environments.hpp"
#include "poisonbench/harness.hpp"
#include "poisonbench/serialization.hpp"
#include "poisonbench/summary.hpp"

namespace poisonbench {

using nlohmann::json;
namespace fs = std::filesystem;

std::string resolve_out_dir(const std::optional<std::string>& flag, const std::string& manifest_value,
                            const char* env_value) {
  if (flag && !flag->empty()) return *flag;
  if (!manifest_value.empty()) return manifest_value;
  if (env_value != nullptr && *env_value != '\0') return env_value;
  return kDefaultOutDir;
}

namespace {

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void run_job(const ManifestJob& job, const fs::path& dir, bool dump_tables) {
  RunResult result = execute_experiment(job.config, nullptr, job.name);
  std::ostringstream csv;
  write_metrics_csv(result.series, csv);
  write_text_file(dir / (job.id() + ".csv"), csv.str());
  write_text_file(dir / (job.id() + ".json"), metrics_sidecar(job.config, result.series).dump(2) + "\n");
  if (dump_tables) {
    if (const auto* lcbh = dynamic_cast<const LcbhAttack*>(result.attacker.get())) {
      write_text_file(dir / (job.id() + ".tables.json"), lcbh_tables_to_json(lcbh->state()).dump() + "\n");
    }
  }
}

void print_policy_row(std::ostream& out, const Policy& pi, int h, int states) {
  for (int s = 0; s < states; ++s) out << (s ? " " : "") << pi.action(h, s);
}

void print_values(std::ostream& out, const char* label, const ValueTables& values, const Policy* pi) {
  const int H = values.horizon();
  const int S = values.num_states();
  const int A = values.num_actions();
  out << label << '\n';
  for (int h = 0; h < H; ++h) {
    out << "  h=" << h << "  V:";
    for (int s = 0; s < S; ++s) out << ' ' << format_double(values.v(h, s));
    if (pi != nullptr) {
      out << "  policy: ";
      print_policy_row(out, *pi, h, S);
    }
    out << '\n';
    for (int s = 0; s < S; ++s) {
      out << "    s=" << s << " Q:";
      for (int a = 0; a < A; ++a) out << ' ' << format_double(values.q(h, s, a));
      out << '\n';
    }
  }
}

}  // namespace

int cmd_run(const RunCommand& command, std::ostream& out, std::ostream& err) {
  RunManifest manifest;
  try {
    manifest = manifest_from_json(read_json_file(command.manifest_path));
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "error: " << command.manifest_path << ": " << e.what() << '\n';
    return kExitBadInput;
  }

  if (command.seed_override) {
    std::set<std::string> seen;
    std::vector<ManifestJob> jobs;
    for (auto& job : manifest.jobs) {
      job.seed = *command.seed_override;
      job.config.seed = *command.seed_override;
      if (seen.insert(job.id()).second) jobs.push_back(std::move(job));
    }
    manifest.jobs = std::move(jobs);
  }
  if (manifest.jobs.empty()) {
    out << "no jobs\n";
    return kExitOk;
  }

  const fs::path dir = resolve_out_dir(command.out_dir, manifest.out_dir, std::getenv(kOutDirEnv));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    err << "error: cannot create " << dir.string() << ": " << ec.message() << '\n';
    return kExitJobFailed;
  }

  const int workers = std::clamp(command.jobs.value_or(manifest.parallelism), 1,
                                 static_cast<int>(manifest.jobs.size()));
  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t i = next++; i < manifest.jobs.size(); i = next++) {
      const ManifestJob& job = manifest.jobs[i];
      try {
        run_job(job, dir, command.dump_tables);
        std::lock_guard lock(io);
        out << "ok " << job.id() << '\n';
      } catch (const std::exception& e) {
        ++failures;
        std::lock_guard lock(io);
        err << "failed " << job.id() << ": " << e.what() << '\n';
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  out << manifest.jobs.size() - static_cast<std::size_t>(failures.load()) << '/' << manifest.jobs.size()
      << " jobs written to " << dir.string() << '\n';
  return failures.load() == 0 ? kExitOk : kExitJobFailed;
}

int cmd_solve(const SolveCommand& command, std::ostream& out, std::ostream& err) {
  MdpSpec spec;
  std::optional<Policy> target;
  std::optional<std::uint64_t> target_seed = command.seed_override ? command.seed_override : command.target_seed;
  try {
    spec = load_mdp(command.spec_path);
    require_valid(spec);
    if (command.target_path) {
      target = policy_from_json(read_json_file(*command.target_path), spec.num_actions());
      const auto issues = validate_policy(*target, spec.horizon(), spec.num_states(), spec.num_actions());
      if (!issues.empty()) throw ModelError("target: " + issues.front().message);
      if (!target->is_deterministic()) throw ModelError("target: policy must be deterministic");
    } else if (target_seed) {
      target = gen_target_policy(spec, *target_seed);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  }

  json resolved{{"spec", command.spec_path}};
  if (command.target_path) resolved["target"] = *command.target_path;
  if (!command.target_path && target_seed) resolved["target_seed"] = *target_seed;

  const OptimalSolution optimal = solve_optimal(spec);
  std::optional<ValueTables> target_values;
  double gap = 0.0;
  bool admissible = false;
  if (target) {
    target_values = evaluate_policy(spec, *target);
    gap = minimum_gap(spec, *target);
    admissible = check_target_admissible(spec, *target);
    if (!admissible) {
      err << "warning: target policy is not admissible: at some (h, s) every action is at least as good as "
             "the target action under the target's own values (minimum gap "
          << format_double(gap) << ")\n";
    }
  }

  if (command.json) {
    json doc{{"resolved", resolved},
             {"dims", {{"S", spec.num_states()}, {"A", spec.num_actions()}, {"H", spec.horizon()}}},
             {"optimal", value_tables_to_json(optimal.values)},
             {"optimal_policy", policy_to_json(optimal.policy)}};
    if (target) {
      doc["target"] = {{"policy", policy_to_json(*target)},
                       {"values", value_tables_to_json(*target_values)},
                       {"minimum_gap", gap},
                       {"admissible", admissible}};
    }
    out << doc.dump(2) << '\n';
  } else {
    out << "resolved: " << resolved.dump() << '\n';
    out << "S=" << spec.num_states() << " A=" << spec.num_actions() << " H=" << spec.horizon() << '\n';
    print_values(out, "optimal", optimal.values, &optimal.policy);
    if (target) {
      print_values(out, "target", *target_values, &*target);
      out << "minimum gap: " << format_double(gap) << '\n';
      out << "admissible: " << (admissible ? "yes" : "no") << '\n';
    }
  }
  return kExitOk;
}

int cmd_summary(const SummaryCommand& command, std::ostream& out, std::ostream& err) {
  std::vector<MetricsRow> rows;
  try {
    for (const auto& path : command.csv_paths) {
      auto part = read_metrics_csv_file(path);
      rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  if (command.seed_override) {
    std::erase_if(rows, [&](const MetricsRow& r) { return r.seed != *command.seed_override; });
  }
  json resolved{{"csv", command.csv_paths}};
  if (command.seed_override) resolved["seed"] = *command.seed_override;
  err << "resolved: " << resolved.dump() << '\n';
  write_summary(summarize(rows), out);
  return kExitOk;
}

int cmd_generate(const GenerateCommand& command, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = command.seed_override.value_or(command.seed);
  MdpSpec spec;
  try {
    if (command.kind == "grid1d") {
      Grid1dParams params;
      params.seed = seed;
      spec = gen_periodic_1d(params);
    } else if (command.kind == "grid2d") {
      spec = gen_gridworld_2d();
    } else if (command.kind == "random") {
      spec = gen_random_mdp(command.num_states, command.num_actions, command.horizon, seed);
    } else if (command.kind == "two_state") {
      spec = two_state_fixture();
    } else {
      err << "error: unknown environment kind '" << command.kind << "'\n";
      return kExitBadInput;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  const std::string text = mdp_to_json(spec).dump() + "\n";
  if (command.out_path) {
    try {
      write_text_file(*command.out_path, text);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitJobFailed;
    }
  } else {
    out << text;
  }
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Action-poisoning attack simulator for tabular episodic RL", "poisonbench"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed_override;
  app.add_option("--seed-override", seed_override, "Replace the seed of every job / target / filter")
      ->type_name("SEED");

  RunCommand run;
  auto* run_cmd = app.add_subcommand("run", "Execute every job in a manifest");
  run_cmd->add_option("--manifest", run.manifest_path, "Manifest JSON")->required();
  run_cmd->add_option("--out-dir", run.out_dir, "Output directory (overrides manifest and $POISONBENCH_OUT)");
  run_cmd->add_option("--jobs", run.jobs, "Worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed-override", run.seed_override, "Use this seed for every job");
  run_cmd->add_flag("--dump-tables", run.dump_tables, "Write final LCB-H tables next to each CSV");

  SolveCommand solve;
  auto* solve_cmd = app.add_subcommand("solve", "Print optimal values and policy of an MDP spec");
  solve_cmd->add_option("spec", solve.spec_path, "MDP spec JSON")->required();
  auto* target_opt = solve_cmd->add_option("--target", solve.target_path, "Target policy JSON");
  solve_cmd->add_option("--target-seed", solve.target_seed, "Generate a random target with this seed")
      ->excludes(target_opt);
  solve_cmd->add_option("--seed-override", solve.seed_override, "Replaces --target-seed");
  solve_cmd->add_flag("--json", solve.json, "Emit JSON");

  SummaryCommand summary;
  auto* summary_cmd = app.add_subcommand("summary", "Aggregate metrics CSVs across seeds");
  summary_cmd->add_option("csv", summary.csv_paths, "Metrics CSV files")->required();
  summary_cmd->add_option("--seed-override", summary.seed_override, "Keep only rows with this seed");

  GenerateCommand generate;
  auto* generate_cmd = app.add_subcommand("generate", "Write an environment spec as JSON");
  generate_cmd->add_option("kind", generate.kind, "grid1d | grid2d | random | two_state")->required();
  generate_cmd->add_option("--seed", generate.seed, "Generator seed");
  generate_cmd->add_option("--seed-override", generate.seed_override, "Replaces --seed");
  generate_cmd->add_option("--states", generate.num_states, "random: number of states");
  generate_cmd->add_option("--actions", generate.num_actions, "random: number of actions");
  generate_cmd->add_option("--horizon", generate.horizon, "random: horizon");
  generate_cmd->add_option("-o,--out", generate.out_path, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (*run_cmd) {
      if (!run.seed_override) run.seed_override = seed_override;
      return cmd_run(run, out, err);
    }
    if (*solve_cmd) {
      if (!solve.seed_override) solve.seed_override = seed_override;
      return cmd_solve(solve, out, err);
    }
    if (*summary_cmd) {
      if (!summary.seed_override) summary.seed_override = seed_override;
      return cmd_summary(summary, out, err);
    }
    if (*generate_cmd) {
      if (!generate.seed_override) generate.seed_override = seed_override;
      return cmd_generate(generate, out, err);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitJobFailed;
  }
  return kExitBadInput;
}

}  // namespace poisonbench
