#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "jittermon/errors.hpp"
#include "jittermon/scenario.hpp"

namespace {

enum class LogLevel { quiet, info, debug };

LogLevel log_level() {
  const char* env = std::getenv("JITTERMON_LOG");
  if (env == nullptr) {
    return LogLevel::info;
  }
  const std::string v = env;
  if (v == "quiet") {
    return LogLevel::quiet;
  }
  if (v == "debug") {
    return LogLevel::debug;
  }
  return LogLevel::info;
}

// "7", "1,5,9" or "1..10" (inclusive).
std::vector<std::uint64_t> parse_seeds(const std::string& expr) {
  std::vector<std::uint64_t> seeds;
  auto parse_u64 = [&](const std::string& s) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) {
      throw jittermon::config_error("bad --seeds value '" + expr + "'");
    }
    return v;
  };
  if (const auto dots = expr.find(".."); dots != std::string::npos) {
    const std::uint64_t lo = parse_u64(expr.substr(0, dots));
    const std::uint64_t hi = parse_u64(expr.substr(dots + 2));
    if (hi < lo) {
      throw jittermon::config_error("bad --seeds range '" + expr + "'");
    }
    for (std::uint64_t s = lo; s <= hi; ++s) {
      seeds.push_back(s);
    }
    return seeds;
  }
  std::size_t start = 0;
  while (start <= expr.size()) {
    const auto comma = expr.find(',', start);
    const auto part = expr.substr(start, comma == std::string::npos ? comma : comma - start);
    seeds.push_back(parse_u64(part));
    if (comma == std::string::npos) {
      break;
    }
    start = comma + 1;
  }
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "jittermon: deterministic jitter-monitoring experiments on a simulated "
      "switch line, with controller polling and in-switch window estimators"};
  std::vector<std::string> scenario_names;
  std::vector<std::string> config_paths;
  std::string seeds_expr;
  std::string out_dir = "out";
  bool assert_trends = false;
  bool emit_events = false;
  bool list_scenarios = false;
  unsigned jobs = 0;

  app.add_option("--scenario", scenario_names,
                 "built-in scenario name (repeatable); see --list-scenarios");
  app.add_option("--config", config_paths, "scenario config file (repeatable)");
  app.add_option("--seeds", seeds_expr, "seed list: '7', '1,5,9' or '1..10'");
  app.add_option("--out", out_dir, "output directory (default: out)");
  app.add_flag("--assert-trends", assert_trends,
               "evaluate declared scenario-family orderings; exit 3 when violated");
  app.add_flag("--emit-events", emit_events, "stream per-run event records to log files");
  app.add_flag("--list-scenarios", list_scenarios, "print built-in scenario names and exit");
  app.add_option("--jobs", jobs, "max parallel simulations (default: hardware threads)");
  CLI11_PARSE(app, argc, argv);

  if (list_scenarios) {
    for (const auto& name : jittermon::scenario::builtin_names()) {
      std::puts(name.c_str());
    }
    return 0;
  }

  const LogLevel level = log_level();
  try {
    std::vector<jittermon::scenario::ScenarioConfig> configs;
    for (const auto& name : scenario_names) {
      configs.push_back(jittermon::scenario::builtin_scenario(name));
    }
    for (const auto& path : config_paths) {
      configs.push_back(jittermon::scenario::parse_config_file(path));
    }
    if (configs.empty()) {
      throw jittermon::config_error("nothing to run: give --scenario and/or --config");
    }
    if (!seeds_expr.empty()) {
      const auto seeds = parse_seeds(seeds_expr);
      for (auto& cfg : configs) {
        cfg.seeds = seeds;
      }
    }

    std::vector<jittermon::scenario::BatchResult> batches;
    for (const auto& cfg : configs) {
      const auto started = std::chrono::steady_clock::now();
      std::optional<std::filesystem::path> events_dir;
      if (emit_events) {
        events_dir = std::filesystem::path(out_dir) / cfg.name;
        std::filesystem::create_directories(*events_dir);
      }
      auto progress = [&](const jittermon::scenario::RunResult& run) {
        if (level == LogLevel::debug) {
          std::fprintf(stderr, "[%s] seed %llu done\n", cfg.name.c_str(),
                       static_cast<unsigned long long>(run.seed));
        }
      };
      auto batch = jittermon::scenario::run_batch(cfg, cfg.seeds, jobs, events_dir, progress);
      jittermon::scenario::write_batch_outputs(batch, out_dir);
      if (level != LogLevel::quiet) {
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - started)
                            .count();
        std::fprintf(stderr, "[%s] %zu seed(s) in %lld ms -> %s\n", cfg.name.c_str(),
                     cfg.seeds.size(), static_cast<long long>(ms),
                     (std::filesystem::path(out_dir) / cfg.name).string().c_str());
      }
      batches.push_back(std::move(batch));
    }

    if (assert_trends) {
      const auto report = jittermon::scenario::evaluate_builtin_trends(batches);
      if (!report) {
        std::fprintf(stderr, "no declared orderings apply to the selected scenarios\n");
        return 0;
      }
      const std::string text = jittermon::analysis::to_text(*report);
      std::filesystem::create_directories(out_dir);
      std::ofstream f(std::filesystem::path(out_dir) / "trend_report.txt",
                      std::ios::binary | std::ios::trunc);
      f << text;
      std::fputs(text.c_str(), stdout);
      if (!report->all_pass) {
        return 3;
      }
    }
    return 0;
  } catch (const jittermon::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
