#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "roadsearch/config.hpp"
#include "roadsearch/protocol.hpp"
#include "roadsearch/report.hpp"
#include "roadsearch/search.hpp"

namespace {

using namespace roadsearch;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitProtocol = 3;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("roadsearch");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("ROADSEARCH_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; keep the default instead.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

json read_config_doc(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw harness::ConfigError("", "cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw harness::ConfigError("", std::string("malformed JSON in ") + path + ": " + e.what());
  }
}

class LogReporter : public search::Reporter {
 public:
  explicit LogReporter(int run) : run_(run) {}

  void on_record(const search::TestRecord& r) override {
    spdlog::debug("run {} test {}: {} fitness {:.3f} ({:.3f} s)", run_, r.id,
                  sim::to_string(r.verdict), r.fitness, r.eval_time);
    if (r.error != search::ErrorKind::kNone) {
      spdlog::warn("run {} test {}: {} error: {}", run_, r.id, search::to_string(r.error),
                   r.error_detail);
    }
  }

  void on_event(const search::Event& e) override {
    const auto level = e.kind == search::EventKind::kFail ? spdlog::level::info
                                                           : spdlog::level::debug;
    spdlog::log(level, "run {} {} after {} tests (epoch {}, generation {})", run_,
                search::to_string(e.kind), e.after_records, e.epoch, e.generation);
  }

 private:
  int run_;
};

struct RunOptions {
  std::string config;
  std::optional<std::string> variant;
  std::optional<std::uint64_t> seed;
  std::optional<int> budget_evals;
  std::optional<double> budget_seconds;
  std::string out;
  std::optional<std::string> sut;
  std::optional<double> sut_timeout;
  int runs{1};
  bool novelty{false};
  std::optional<int> workers;
};

int cmd_run(const RunOptions& o) {
  json doc = read_config_doc(o.config);
  if (!doc.is_object()) throw harness::ConfigError("", "config root must be an object");
  json& s = doc["search"];
  if (s.is_null()) s = json::object();
  if (o.variant) s["variant"] = *o.variant;
  if (o.seed) s["seed"] = *o.seed;
  if (o.budget_evals) s["budget"] = {{"max_evaluations", *o.budget_evals}};
  if (o.budget_seconds) s["budget"] = {{"wall_time", *o.budget_seconds}};
  if (o.novelty) s["novelty_filter"] = true;
  if (o.workers) s["workers"] = *o.workers;
  if (o.sut || o.sut_timeout) {
    json& sut = doc["sut"];
    if (sut.is_null()) sut = json::object();
    if (o.sut) {
      sut["kind"] = "external";
      sut["command"] = *o.sut;
    }
    if (o.sut_timeout) sut["timeout"] = *o.sut_timeout;
  }
  const harness::HarnessConfig base = harness::parse_config_json(doc);

  std::vector<harness::Archive> archives;
  bool sut_errors = false;
  for (int k = 1; k <= o.runs; ++k) {
    harness::Archive a;
    a.run = k;
    a.config = base;
    a.config.search.seed = base.search.seed + static_cast<std::uint64_t>(k - 1);

    std::unique_ptr<search::Evaluator> evaluator;
    if (a.config.sut.kind == harness::SutDescriptor::Kind::kExternal) {
      evaluator = std::make_unique<harness::ExternalEvaluator>(a.config.road, a.config.sut);
    } else {
      evaluator = std::make_unique<search::BuiltinEvaluator>(a.config.road, a.config.vehicle,
                                                             a.config.simulation);
    }
    spdlog::info("run {} of {}: variant {} seed {}", k, o.runs,
                 search::to_string(a.config.search.variant), a.config.search.seed);
    LogReporter reporter(k);
    a.report = search::run_search(a.config.search, *evaluator, &reporter);
    if (a.report.partial_seed) {
      spdlog::warn("run {}: budget smaller than one seed population; results are partial", k);
    }
    for (const auto& r : a.report.records) {
      if (r.error == search::ErrorKind::kSpawn || r.error == search::ErrorKind::kProtocol) {
        sut_errors = true;
      }
    }
    archives.push_back(std::move(a));
  }

  const auto files = harness::write_report(archives, o.out);
  std::cout << harness::summary_csv(archives);
  spdlog::info("wrote {} archives, {} SVGs and {}", files.archives.size(), files.svgs.size(),
               files.summary.string());
  if (sut_errors) {
    spdlog::error("the SUT could not be spawned or replied malformed messages; see the archive");
    return kExitProtocol;
  }
  return kExitOk;
}

int cmd_replay(const std::string& archive_path, int test_id, const std::optional<std::string>& sut) {
  const auto archive = harness::load_archive(archive_path);
  if (archive.version != harness::kVersion) {
    spdlog::warn("archive written by version {}, replaying with {}", archive.version,
                 harness::kVersion);
  }
  const auto& stored = archive.record(test_id);
  const auto replayed = harness::replay(archive, test_id, sut);
  std::cout << "test " << test_id << ": " << sim::to_string(replayed.verdict) << " max_oob "
            << replayed.fitness << " (archived " << sim::to_string(stored.verdict) << " "
            << stored.fitness << ")\n";
  return kExitOk;
}

int cmd_render(const std::string& archive_path, const std::string& out) {
  const auto archive = harness::load_archive(archive_path);
  const auto files = harness::render_archive(archive, out);
  for (const auto& f : files) std::cout << f.string() << '\n';
  return kExitOk;
}

int cmd_sut(const std::string& config_path, bool trajectory) {
  const auto config = harness::parse_config_json(read_config_doc(config_path));
  harness::serve_builtin(std::cin, std::cout, config, trajectory);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Search-based generation of lane-keeping test roads"};
  app.set_version_flag("--version", std::string(harness::kVersion));
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run the genetic search and write reports");
  run_cmd->add_option("--config", run.config, "JSON configuration file")->check(CLI::ExistingFile);
  run_cmd->add_option("--variant", run.variant, "Search variant")
      ->check(CLI::IsMember({"A", "B", "C"}));
  run_cmd->add_option("--seed", run.seed, "RNG seed of the first run");
  auto* evals = run_cmd->add_option("--budget-evals", run.budget_evals, "Evaluation budget");
  auto* secs = run_cmd->add_option("--budget-seconds", run.budget_seconds, "Wall-time budget");
  evals->excludes(secs);
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_option("--sut", run.sut, "External SUT command (run via /bin/sh)");
  run_cmd->add_option("--sut-timeout", run.sut_timeout, "Seconds to wait for each SUT reply");
  run_cmd->add_option("--runs", run.runs, "Independent runs with seeds seed, seed+1, ...")
      ->check(CLI::PositiveNumber);
  run_cmd->add_flag("--novelty", run.novelty, "Enable the Frechet novelty filter");
  run_cmd->add_option("--workers", run.workers, "Parallel evaluation workers")
      ->check(CLI::PositiveNumber);

  std::string archive_path;
  int test_id = 0;
  std::optional<std::string> replay_sut;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run one archived test");
  replay_cmd->add_option("--archive", archive_path, "archive.json")->required();
  replay_cmd->add_option("--test", test_id, "Test id")->required();
  replay_cmd->add_option("--sut", replay_sut, "SUT command of an external-SUT archive");

  std::string render_archive_path;
  std::string render_out;
  auto* render_cmd = app.add_subcommand("render", "Render failing tests of an archive as SVG");
  render_cmd->add_option("--archive", render_archive_path, "archive.json")->required();
  render_cmd->add_option("--out", render_out, "Output directory")->required();

  std::string sut_config;
  bool sut_trajectory = false;
  auto* sut_cmd = app.add_subcommand("sut", "Serve the built-in simulator over stdin/stdout");
  sut_cmd->add_option("--config", sut_config, "JSON configuration file")->check(CLI::ExistingFile);
  sut_cmd->add_flag("--trajectory", sut_trajectory, "Include trajectories in replies");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*replay_cmd) return cmd_replay(archive_path, test_id, replay_sut);
    if (*render_cmd) return cmd_render(render_archive_path, render_out);
    if (*sut_cmd) return cmd_sut(sut_config, sut_trajectory);
  } catch (const harness::ConfigError& e) {
    spdlog::error("configuration error: {}", e.what());
    return kExitConfig;
  } catch (const harness::ReplayDivergence& e) {
    spdlog::error("{}", e.what());
    return kExitProtocol;
  } catch (const harness::ReplayRefused& e) {
    spdlog::error("replay refused: {}", e.what());
    return kExitProtocol;
  } catch (const harness::ReportError& e) {
    spdlog::error("{}", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}
