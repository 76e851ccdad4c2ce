// kglab: experiment runner.
//
//   kglab run --config FILE --out DIR [--threads N] [--seed-override S]
//   kglab verify <lemmas|basecase|inheritance|dichotomy|all> [--threads N]
//   kglab plotdata DIR <ratio|fraction|blocks|stripes> [--out FILE]
//
// Exit codes: 0 success, 1 internal error or failed invariant,
// 2 invalid input, 3 irrational scale requested in exact mode.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "config.hpp"
#include "experiments.hpp"
#include "output.hpp"
#include "plot.hpp"
#include "suites.hpp"

namespace fs = std::filesystem;
using namespace kglab;
using namespace kglab::cli;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitUnsupported = 3;

/// --threads, then KGLAB_THREADS, then the config, then 0 (all cores).
unsigned resolve_threads(int flag, const Config* cfg) {
  if (flag >= 0) return static_cast<unsigned>(flag);
  if (const char* env = std::getenv("KGLAB_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 0 || v > 1024) throw ConfigError("KGLAB_THREADS: '" + std::string(env) + "' is not a thread count");
    return static_cast<unsigned>(v);
  }
  if (cfg != nullptr) return static_cast<unsigned>(cfg->integer("threads", 0, 1024, 0));
  return 0;
}

Table verify_table(const std::vector<Check>& checks) {
  Table t;
  t.kind = "verify";
  t.columns = {{"suite", ColumnType::text},   {"invariant", ColumnType::text}, {"checks", ColumnType::integer},
               {"failures", ColumnType::integer}, {"pass", ColumnType::boolean},  {"counterexample", ColumnType::text}};
  for (const auto& c : checks) {
    t.add({c.suite, c.invariant, cell(c.checks), cell(c.failures), cell(c.pass()), c.counterexample});
  }
  return t;
}

bool report(const std::vector<Check>& checks) {
  bool ok = true;
  for (const auto& c : checks) {
    std::cout << (c.pass() ? "PASS " : "FAIL ") << c.suite << ": " << c.invariant << " (" << c.checks << " checks, "
              << c.failures << " failures)\n";
    if (!c.pass() && !c.counterexample.empty()) std::cout << "  counterexample: " << c.counterexample << "\n";
    ok = ok && c.pass();
  }
  return ok;
}

int run_command(const std::string& config_path, const std::string& out_dir, int threads_flag,
                std::optional<std::uint64_t> seed_override) {
  const auto started = std::chrono::system_clock::now();
  std::string bytes;
  try {
    bytes = read_file(config_path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  std::istringstream in(bytes);
  const Config cfg = Config::parse(in, config_path);
  const std::string kind = cfg.choice("kind", kKinds);
  const unsigned threads = resolve_threads(threads_flag, &cfg);

  Table table;
  bool verified = true;
  if (kind == "measure") table = run_measure(cfg);
  if (kind == "gcdsum") table = run_gcdsum(cfg);
  if (kind == "pairsum") table = run_pairsum(cfg, threads);
  if (kind == "qia") table = run_qia(cfg, threads);
  if (kind == "inherit") table = run_inherit(cfg, threads);
  if (kind == "simulate") table = run_simulate(cfg, threads, seed_override);
  if (kind == "transfer") table = run_transfer(cfg);
  if (kind == "verify") {
    const std::string suite = cfg.choice("suite", suites::kSuites);
    cfg.finish();
    const auto checks = suites::run(suite, threads);
    verified = report(checks);
    table = verify_table(checks);
  }
  cfg.finish();

  fs::create_directories(out_dir);
  const std::string csv = table.csv();
  const std::string results = table.to_json().dump(2) + "\n";
  write_file(fs::path(out_dir) / "results.csv", csv);
  write_file(fs::path(out_dir) / "results.json", results);

  json manifest;
  manifest["tool"] = "kglab";
  manifest["version"] = kVersion;
  manifest["schema"] = "kglab." + table.kind + "/" + std::to_string(table.schema_version);
  manifest["config_file"] = config_path;
  manifest["config_sha256"] = sha256_hex(bytes);
  json entries = json::object();
  for (const auto& [k, v] : cfg.entries()) entries[k] = v.value;
  manifest["config"] = entries;
  if (seed_override) manifest["seed_override"] = *seed_override;
  manifest["threads"] = threads;
  manifest["started"] = utc_timestamp(started);
  manifest["finished"] = utc_timestamp(std::chrono::system_clock::now());
  manifest["files"] = json::array({{{"name", "results.csv"}, {"sha256", sha256_hex(csv)}, {"bytes", csv.size()}},
                                   {{"name", "results.json"}, {"sha256", sha256_hex(results)}, {"bytes", results.size()}}});
  manifest["enclosure_widths"] = enclosure_widths(table);
  write_file(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
  return verified ? 0 : kExitFailure;
}

int plot_command(const std::string& dir, const std::string& view, const std::string& out) {
  const fs::path manifest_path = fs::path(dir) / "manifest.json";
  if (!fs::exists(manifest_path)) throw ConfigError("no manifest.json in " + dir);
  if (std::find(kViews.begin(), kViews.end(), view) == kViews.end()) throw ConfigError("unknown view '" + view + "'");
  const json manifest = json::parse(read_file(manifest_path));
  const Table results = Table::from_json(json::parse(read_file(fs::path(dir) / "results.json")));
  Table t;
  if (view == "ratio") t = ratio_view(results);
  if (view == "fraction") t = fraction_view(results);
  if (view == "stripes") t = stripes_view(results);
  if (view == "blocks") {
    std::map<std::string, std::string> kv;
    for (const auto& [k, v] : manifest.at("config").items()) kv[k] = v.get<std::string>();
    t = blocks_view(results, Config::from_map(kv, manifest_path.string()));
  }
  if (out.empty()) {
    std::cout << t.csv();
  } else {
    write_file(out, t.csv());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kglab: exact measures, pair sums and limsup experiments on the torus"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config_path, out_dir;
  int threads = -1;
  std::optional<std::uint64_t> seed_override;
  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--threads", threads, "worker threads (0: all cores)")->check(CLI::Range(0, 1024));
  run->add_option("--seed-override", seed_override, "replace the config seed");

  std::string suite;
  auto* verify = app.add_subcommand("verify", "run an invariant suite");
  verify->add_option("suite", suite, "lemmas, basecase, inheritance, dichotomy or all")->required();
  verify->add_option("--threads", threads, "worker threads (0: all cores)")->check(CLI::Range(0, 1024));

  std::string plot_dir, view, plot_out;
  auto* plot = app.add_subcommand("plotdata", "emit plot-ready CSV from a results directory");
  plot->add_option("dir", plot_dir, "results directory")->required();
  plot->add_option("view", view, "ratio, fraction, blocks or stripes")->required();
  plot->add_option("--out", plot_out, "write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (run->parsed()) return run_command(config_path, out_dir, threads, seed_override);
    if (verify->parsed()) {
      if (std::find(suites::kSuites.begin(), suites::kSuites.end(), suite) == suites::kSuites.end()) {
        throw ConfigError("unknown suite '" + suite + "'");
      }
      return report(suites::run(suite, resolve_threads(threads, nullptr))) ? 0 : kExitFailure;
    }
    return plot_command(plot_dir, view, plot_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ViewError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const UnsupportedScale& e) {
    std::cerr << "error: unsupported in exact mode: " << e.what() << "\n";
    return kExitUnsupported;
  } catch (const std::domain_error& e) {
    std::cerr << "error: invalid experiment: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
