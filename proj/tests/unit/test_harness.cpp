#include <gtest/gtest.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "roadsearch/config.hpp"
#include "roadsearch/protocol.hpp"
#include "roadsearch/report.hpp"

namespace {

namespace fs = std::filesystem;
using namespace roadsearch;
using namespace roadsearch::harness;
using nlohmann::json;
using search::ErrorKind;
using sim::Verdict;

const std::string kBinary = ROADSEARCH_BINARY;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("roadsearch_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_command(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

road::RoadSpec random_valid_road(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(0.0, 200.0);
  while (true) {
    std::vector<geometry::Point2D> pts(7);
    for (auto& p : pts) p = {c(rng), c(rng)};
    search::sort_by_x(pts);
    auto road = road::build_road(geometry::ControlPointSet(pts, 200.0), road::RoadParams{});
    if (road::validate(road).valid()) return road;
  }
}

// ---------------------------------------------------------------------------
// Configuration

TEST(Config, EmptyFileGivesDefaults) {
  TempDir dir;
  write_text(dir / "empty.json", "");
  const HarnessConfig c = parse_config(dir / "empty.json");
  EXPECT_EQ(c, HarnessConfig{});
  EXPECT_EQ(c.search.variant, search::Variant::kA);
  EXPECT_EQ(c.search.population_size, 25);
  EXPECT_EQ(c.search.num_control_points, 7);
  EXPECT_EQ(c.sut.kind, SutDescriptor::Kind::kBuiltin);
  EXPECT_EQ(parse_config_text("{}"), HarnessConfig{});
}

TEST(Config, VariantCDefaultsToFifteen) {
  EXPECT_EQ(parse_config_text(R"({"search":{"variant":"C"}})").search.population_size, 15);
  EXPECT_EQ(parse_config_text(R"({"search":{"variant":"C","population_size":30}})").search.population_size,
            30);
  EXPECT_EQ(parse_config_text(R"({"search":{"variant":"B"}})").search.population_size, 25);
}

TEST(Config, OutOfRangeNamesTheKey) {
  try {
    parse_config_text(R"({"search":{"mutation_prob":1.5}})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key_path(), "search.mutation_prob");
    EXPECT_NE(std::string(e.what()).find("mutation_prob"), std::string::npos);
  }
}

TEST(Config, ErrorsCarryKeyPaths) {
  const auto path_of = [](const std::string& text) {
    try {
      parse_config_text(text);
    } catch (const ConfigError& e) {
      return e.key_path();
    }
    return std::string("<no error>");
  };
  EXPECT_EQ(path_of(R"({"search":{"mutaton_prob":0.1}})"), "search.mutaton_prob");
  EXPECT_EQ(path_of(R"({"serch":{}})"), "serch");
  EXPECT_EQ(path_of(R"({"road":{"lane_width":"wide"}})"), "road.lane_width");
  EXPECT_EQ(path_of(R"({"road":{"lane_width":-1}})"), "road.lane_width");
  EXPECT_EQ(path_of(R"({"vehicle":{"max_steer":2.0}})"), "vehicle.max_steer");
  EXPECT_EQ(path_of(R"({"search":{"variant":"D"}})"), "search.variant");
  EXPECT_EQ(path_of(R"({"search":{"budget":{"max_evaluations":5,"wall_time":3}}})"), "search.budget");
  EXPECT_EQ(path_of(R"({"search":{"budget":{"max_evals":5}}})"), "search.budget");
  EXPECT_EQ(path_of(R"({"sut":{"kind":"external"}})"), "sut.command");
  EXPECT_EQ(path_of(R"({"simulation":{"dt":0}})"), "simulation.dt");
  EXPECT_EQ(path_of("[1,2]"), "");
  EXPECT_THROW(parse_config_text("{not json"), ConfigError);
}

TEST(Config, MissingFile) { EXPECT_THROW(parse_config("/nonexistent/config.json"), ConfigError); }

TEST(Config, RoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> pick(0, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    HarnessConfig c;
    c.search.variant = static_cast<search::Variant>(pick(rng));
    c.search.population_size = 2 + static_cast<int>(unit(rng) * 40);
    c.search.num_control_points = 3 + static_cast<int>(unit(rng) * 8);
    c.search.budget = unit(rng) < 0.5 ? search::Budget::evaluations(1 + static_cast<int>(unit(rng) * 1000))
                                      : search::Budget::seconds(0.5 + unit(rng) * 100);
    c.search.mutation_prob = unit(rng);
    c.search.mutation_range = 1.0 + unit(rng) * 50;
    c.search.crossover_prob = unit(rng);
    c.search.elitism = static_cast<int>(unit(rng) * 2);
    c.search.novelty_filter = unit(rng) < 0.5;
    c.search.seed = rng();
    c.road.lane_width = 2.0 + unit(rng) * 3;
    if (unit(rng) < 0.5) c.road.overlap_buffer = unit(rng) * 10;
    c.vehicle.speed = 1.0 + unit(rng) * 30;
    c.vehicle.max_steer_rate = 0.1 + unit(rng);
    c.simulation.dt = 0.01 + unit(rng) * 0.1;
    if (unit(rng) < 0.5) c.sut = SutDescriptor::external("my-sut --flag", 1.0 + unit(rng) * 10);
    const HarnessConfig back = parse_config_text(to_json(c).dump());
    EXPECT_EQ(back, c);
  }
}

// ---------------------------------------------------------------------------
// Protocol

TEST(Protocol, RequestShape) {
  std::mt19937_64 rng(2);
  const auto road = random_valid_road(rng);
  const std::string line = make_request(road);
  ASSERT_EQ(line.back(), '\n');
  EXPECT_EQ(line.find('\n'), line.size() - 1);
  const json req = json::parse(line);
  EXPECT_EQ(req.at("type"), "evaluate");
  EXPECT_EQ(req.at("road").get<road::RoadSpec>(), road);
}

TEST(Protocol, ParseReply) {
  auto ok = parse_reply(R"({"verdict":"FAIL","max_oob":97.5})");
  EXPECT_EQ(ok.error, ErrorKind::kNone);
  EXPECT_EQ(ok.result.verdict, Verdict::kFail);
  EXPECT_EQ(ok.result.max_oob, 97.5);

  for (const char* bad : {"garbage", "[]", R"({"verdict":"MAYBE","max_oob":1})",
                          R"({"verdict":"PASS","max_oob":150})", R"({"verdict":"PASS"})",
                          R"({"error":"boom"})", R"({"verdict":"PASS","max_oob":1,"trajectory":[1]})"}) {
    const auto r = parse_reply(bad);
    EXPECT_EQ(r.error, ErrorKind::kProtocol) << bad;
    EXPECT_EQ(r.result.verdict, Verdict::kInvalid) << bad;
  }
}

TEST(Protocol, GarbageReplyIsProtocolError) {
  std::mt19937_64 rng(3);
  const auto out = external_evaluate(random_valid_road(rng), SutDescriptor::external("echo garbage"));
  EXPECT_EQ(out.error, ErrorKind::kProtocol);
  EXPECT_EQ(out.result.verdict, Verdict::kInvalid);
}

TEST(Protocol, SilentExitIsProtocolError) {
  std::mt19937_64 rng(4);
  const auto out = external_evaluate(random_valid_road(rng), SutDescriptor::external("cat >/dev/null"));
  EXPECT_EQ(out.error, ErrorKind::kProtocol);
}

TEST(Protocol, MissingCommandIsSpawnError) {
  std::mt19937_64 rng(5);
  const auto out =
      external_evaluate(random_valid_road(rng), SutDescriptor::external("/nonexistent/roadsearch-sut"));
  EXPECT_EQ(out.error, ErrorKind::kSpawn);
  EXPECT_EQ(out.result.verdict, Verdict::kInvalid);
}

TEST(Protocol, SleepingSutTimesOut) {
  std::mt19937_64 rng(6);
  const auto t0 = std::chrono::steady_clock::now();
  const auto out = external_evaluate(random_valid_road(rng), SutDescriptor::external("sleep 10", 0.3));
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(out.error, ErrorKind::kTimeout);
  EXPECT_EQ(out.result.verdict, Verdict::kInvalid);
  EXPECT_LT(elapsed, 3.0);
}

TEST(Protocol, RunContinuesAfterSutErrors) {
  search::SearchConfig c;
  c.population_size = 10;
  c.budget = search::Budget::evaluations(28);
  const ExternalEvaluator eval(road::RoadParams{}, SutDescriptor::external("sleep 10", 0.05));
  const auto report = search::run_search(c, eval);
  EXPECT_EQ(report.records.size(), 28u);
  int timeouts = 0;
  for (const auto& r : report.records) {
    EXPECT_EQ(r.verdict, Verdict::kInvalid);
    if (r.error == ErrorKind::kTimeout) ++timeouts;
  }
  EXPECT_GT(timeouts, 0);
}

TEST(Protocol, ServeBuiltinAnswersEachLine) {
  std::mt19937_64 rng(7);
  const auto road = random_valid_road(rng);
  std::istringstream in(make_request(road) + "\nnot json\n" + make_request(road));
  std::ostringstream out;
  HarnessConfig config;
  serve_builtin(in, out, config, true);
  std::istringstream lines(out.str());
  std::string a, b, c;
  std::getline(lines, a);
  std::getline(lines, b);
  std::getline(lines, c);
  const auto direct = sim::run_test(road, config.vehicle, config.simulation);
  const auto ra = parse_reply(a);
  EXPECT_EQ(ra.error, ErrorKind::kNone);
  EXPECT_EQ(ra.result.verdict, direct.verdict);
  EXPECT_EQ(ra.result.max_oob, direct.max_oob);
  EXPECT_EQ(ra.result.trajectory, direct.trajectory);
  EXPECT_TRUE(json::parse(b).contains("error"));
  EXPECT_EQ(a, c);
}

class BuiltinBehindProtocol : public ::testing::Test {
 protected:
  void SetUp() override {
    write_text(dir_ / "sut.json", R"({"vehicle":{"speed":25}})");
    config_ = parse_config(dir_ / "sut.json");
    sut_ = SutDescriptor::external(kBinary + " sut --config " + (dir_ / "sut.json").string(), 30.0);
  }
  TempDir dir_;
  HarnessConfig config_;
  SutDescriptor sut_;
};

TEST_F(BuiltinBehindProtocol, MatchesInProcessOnRandomRoads) {
  std::mt19937_64 rng(8);
  int fails = 0;
  for (int i = 0; i < 20; ++i) {
    const auto road = random_valid_road(rng);
    const auto direct = sim::run_test(road, config_.vehicle, config_.simulation);
    const auto remote = external_evaluate(road, sut_);
    ASSERT_EQ(remote.error, ErrorKind::kNone) << remote.detail;
    EXPECT_EQ(remote.result.verdict, direct.verdict);
    EXPECT_EQ(remote.result.max_oob, direct.max_oob);
    if (direct.verdict == Verdict::kFail) ++fails;
  }
  EXPECT_GT(fails, 0);
}

TEST_F(BuiltinBehindProtocol, IdenticalRunReports) {
  for (const auto v : {search::Variant::kA, search::Variant::kB}) {
    search::SearchConfig c;
    c.variant = v;
    c.seed = 21;
    c.budget = search::Budget::evaluations(60);
    const auto direct = search::run_search(c, search::BuiltinEvaluator(config_.road, config_.vehicle));
    const auto remote = search::run_search(c, ExternalEvaluator(config_.road, sut_));
    ASSERT_EQ(direct.records.size(), remote.records.size());
    for (std::size_t i = 0; i < direct.records.size(); ++i) {
      EXPECT_EQ(direct.records[i].genotype, remote.records[i].genotype);
      EXPECT_EQ(direct.records[i].verdict, remote.records[i].verdict);
      EXPECT_EQ(direct.records[i].fitness, remote.records[i].fitness);
    }
    EXPECT_EQ(direct.events, remote.events);
  }
}

// ---------------------------------------------------------------------------
// Reports

search::TestRecord synthetic_record(int id, Verdict v, geometry::Polyline centerline) {
  search::TestRecord r;
  r.id = id;
  r.genotype = geometry::ControlPointSet({{0, 0}, {100, 100}, {200, 0}}, 200.0);
  r.verdict = v;
  r.fitness = v == Verdict::kFail ? 99.0 : 0.0;
  r.centerline = std::move(centerline);
  return r;
}

Archive synthetic_archive(int run, std::vector<search::TestRecord> records) {
  Archive a;
  a.run = run;
  a.report.records = std::move(records);
  return a;
}

std::vector<std::string> csv_rows(const std::string& csv) {
  std::vector<std::string> rows;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) rows.push_back(line);
  return rows;
}

TEST(Report, SingleFailureRendersNotAvailable) {
  const std::vector<Archive> runs{synthetic_archive(
      3, {synthetic_record(1, Verdict::kPass, {{0, 0}}), synthetic_record(2, Verdict::kFail, {{1, 1}}),
          synthetic_record(3, Verdict::kInvalid, {{2, 2}})})};
  const auto rows = csv_rows(summary_csv(runs));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], "Run,T,P,I,F,AvgFrechet,MaxFrechet");
  EXPECT_EQ(rows[1], "3,3,1,1,1,n/a,n/a");
}

TEST(Report, MaxCellIsLargestPairwiseDistance) {
  const double cy = std::sqrt(109.0 * 109.0 - 50.0 * 50.0);
  const std::vector<Archive> runs{synthetic_archive(
      4, {synthetic_record(1, Verdict::kFail, {{0, 0}}), synthetic_record(2, Verdict::kFail, {{84, 0}}),
          synthetic_record(3, Verdict::kFail, {{50, cy}})})};
  const auto agg = runs[0].report.aggregates();
  EXPECT_NEAR(*agg.max_frechet, 109.0, 1e-9);
  const double bc = std::hypot(34.0, cy);
  EXPECT_NEAR(*agg.avg_frechet, (84.0 + 109.0 + bc) / 3.0, 1e-9);
  EXPECT_EQ(csv_rows(summary_csv(runs))[1].substr(0, 10), "4,3,0,0,3,");
  EXPECT_NE(summary_csv(runs).find(",109.00\n"), std::string::npos);
}

TEST(Report, EmptyRun) {
  const std::vector<Archive> runs{synthetic_archive(1, {})};
  EXPECT_EQ(csv_rows(summary_csv(runs))[1], "1,0,0,0,0,n/a,n/a");
}

class RecordedRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    HarnessConfig config;
    config.vehicle.speed = 25.0;
    config.search.variant = search::Variant::kB;
    config.search.seed = 1;
    config.search.budget = search::Budget::evaluations(150);
    archive_ = new Archive;
    archive_->config = config;
    archive_->report = search::run_search(config.search,
                                          search::BuiltinEvaluator(config.road, config.vehicle, config.simulation));
  }
  static void TearDownTestSuite() {
    delete archive_;
    archive_ = nullptr;
  }
  static Archive* archive_;
};

Archive* RecordedRun::archive_ = nullptr;

TEST_F(RecordedRun, HasFailures) { ASSERT_GE(archive_->report.aggregates().failed, 2); }

TEST_F(RecordedRun, WritesLayout) {
  TempDir dir;
  const std::vector<Archive> runs{*archive_};
  const auto files = write_report(runs, dir.path());
  EXPECT_TRUE(fs::exists(dir / "summary.csv"));
  EXPECT_TRUE(fs::exists(dir.path() / "run_1" / "archive.json"));
  EXPECT_EQ(static_cast<int>(files.svgs.size()), archive_->report.aggregates().failed);
  for (const auto& svg : files.svgs) {
    const std::string text = read_text(svg);
    EXPECT_EQ(text.rfind("<svg", 0), 0u);
    EXPECT_NE(text.find("</svg>"), std::string::npos);
    EXPECT_NE(text.find("class=\"failure\""), std::string::npos);
    EXPECT_NE(text.find("width=\"200.00\""), std::string::npos);
  }
  const auto rows = csv_rows(read_text(dir / "summary.csv"));
  ASSERT_EQ(rows.size(), 2u);
}

TEST_F(RecordedRun, ArchiveRoundTrip) {
  const json doc = archive_to_json(*archive_);
  EXPECT_EQ(doc.at("format"), kArchiveFormat);
  EXPECT_EQ(doc.at("version"), kVersion);
  EXPECT_EQ(doc.at("seed"), 1u);
  const Archive back = archive_from_json(json::parse(doc.dump()));
  EXPECT_EQ(back.config, archive_->config);
  ASSERT_EQ(back.report.records.size(), archive_->report.records.size());
  for (std::size_t i = 0; i < back.report.records.size(); ++i) {
    const auto& a = back.report.records[i];
    const auto& b = archive_->report.records[i];
    EXPECT_EQ(a.id, b.id);
    EXPECT_EQ(a.genotype, b.genotype);
    EXPECT_EQ(a.verdict, b.verdict);
    EXPECT_EQ(a.fitness, b.fitness);
    EXPECT_EQ(a.centerline, b.centerline);
    EXPECT_EQ(a.result.has_value(), b.result.has_value());
    if (a.result) {
      EXPECT_EQ(a.result->trajectory, b.result->trajectory);
      EXPECT_EQ(a.result->oob_trace, b.result->oob_trace);
    }
  }
  EXPECT_EQ(back.report.events, archive_->report.events);
}

TEST_F(RecordedRun, AggregatesRecomputableFromArchive) {
  const json doc = archive_to_json(*archive_);
  const Archive back = archive_from_json(doc);
  std::vector<geometry::Polyline> fails;
  int t = 0, p = 0, i = 0, f = 0;
  for (const auto& r : back.report.records) {
    ++t;
    if (r.verdict == Verdict::kPass) ++p;
    if (r.verdict == Verdict::kInvalid) ++i;
    if (r.verdict == Verdict::kFail) {
      ++f;
      fails.push_back(road::build_road(r.genotype, back.config.road).centerline);
    }
  }
  const json& agg = doc.at("aggregates");
  EXPECT_EQ(agg.at("T"), t);
  EXPECT_EQ(agg.at("P"), p);
  EXPECT_EQ(agg.at("I"), i);
  EXPECT_EQ(agg.at("F"), f);
  EXPECT_EQ(t, p + i + f);
  double mx = 0.0;
  for (std::size_t a = 0; a < fails.size(); ++a) {
    for (std::size_t b = a + 1; b < fails.size(); ++b) {
      mx = std::max(mx, oracle::frechet_dp_reference(fails[a], fails[b]));
    }
  }
  EXPECT_NEAR(agg.at("avg_frechet").get<double>(), oracle::average_pairwise(fails), 1e-6);
  EXPECT_NEAR(agg.at("max_frechet").get<double>(), mx, 1e-6);
}

TEST_F(RecordedRun, ReplayReproducesEveryRecord) {
  const Archive back = archive_from_json(archive_to_json(*archive_));
  for (const auto& r : back.report.records) {
    const auto e = replay(back, r.id);
    EXPECT_EQ(e.verdict, r.verdict);
    EXPECT_EQ(e.fitness, r.fitness);
  }
  EXPECT_THROW(replay(back, 100000), std::out_of_range);
}

TEST_F(RecordedRun, TamperedGenotypeDiverges) {
  json doc = archive_to_json(*archive_);
  int tampered = -1;
  for (auto& r : doc.at("records")) {
    if (r.at("verdict") != "FAIL") continue;
    // Flatten the road: every control point moves to y = 100.
    for (auto& pt : r.at("genotype")) pt[1] = 100.0;
    tampered = r.at("id").get<int>();
    break;
  }
  ASSERT_GT(tampered, 0);
  const Archive back = archive_from_json(doc);
  try {
    replay(back, tampered);
    FAIL() << "expected ReplayDivergence";
  } catch (const ReplayDivergence& e) {
    EXPECT_EQ(e.stored_verdict, Verdict::kFail);
    EXPECT_NE(e.replayed_verdict, Verdict::kFail);
    EXPECT_NE(std::string(e.what()).find("FAIL"), std::string::npos);
  }
}

TEST_F(RecordedRun, ExternalArchiveNeedsSameCommand) {
  TempDir dir;
  write_text(dir / "sut.json", R"({"vehicle":{"speed":25}})");
  const std::string cmd = kBinary + " sut --config " + (dir / "sut.json").string();
  Archive a = *archive_;
  a.config.sut = SutDescriptor::external(cmd);
  const int id = a.report.records.front().id;
  EXPECT_THROW(replay(a, id), ReplayRefused);
  EXPECT_THROW(replay(a, id, std::string("other-sut")), ReplayRefused);
  EXPECT_EQ(replay(a, id, cmd).verdict, a.report.records.front().verdict);
  EXPECT_THROW(replay(*archive_, id, cmd), ReplayRefused);
}

TEST(Report, UnwritableOutputWarnsAboutPartialOutput) {
  TempDir dir;
  write_text(dir / "blocker", "x");
  const std::vector<Archive> runs{synthetic_archive(1, {})};
  try {
    write_report(runs, dir / "blocker");
    FAIL() << "expected ReportError";
  } catch (const ReportError& e) {
    EXPECT_NE(std::string(e.what()).find("partial"), std::string::npos);
  }
}

TEST(Report, LoadRejectsForeignFiles) {
  TempDir dir;
  write_text(dir / "x.json", R"({"format":"other"})");
  EXPECT_THROW(load_archive(dir / "x.json"), std::runtime_error);
  EXPECT_THROW(load_archive(dir / "missing.json"), std::runtime_error);
}

// ---------------------------------------------------------------------------
// Command line

TEST(Cli, RunReplayRender) {
  TempDir dir;
  write_text(dir / "cfg.json", R"({"vehicle":{"speed":25}})");
  const std::string out = (dir / "out").string();
  ASSERT_EQ(run_command(kBinary + " run --config " + (dir / "cfg.json").string() +
                        " --variant B --seed 2 --budget-evals 80 --runs 2 --out " + out),
            0);
  const auto rows = csv_rows(read_text(dir.path() / "out" / "summary.csv"));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].substr(0, 2), "1,");
  EXPECT_EQ(rows[2].substr(0, 2), "2,");

  const fs::path archive_path = dir.path() / "out" / "run_2" / "archive.json";
  const Archive a = load_archive(archive_path);
  EXPECT_EQ(a.config.search.seed, 3u);
  EXPECT_EQ(a.config.search.variant, search::Variant::kB);
  EXPECT_EQ(run_command(kBinary + " replay --archive " + archive_path.string() + " --test 1"), 0);
  EXPECT_EQ(run_command(kBinary + " render --archive " + archive_path.string() + " --out " +
                        (dir / "svg").string()),
            0);
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  write_text(dir / "bad.json", R"({"search":{"mutation_prob":1.5}})");
  const std::string out = (dir / "out").string();
  EXPECT_EQ(run_command(kBinary + " run --config " + (dir / "bad.json").string() + " --out " + out), 2);
  EXPECT_EQ(run_command(kBinary + " run --variant X --out " + out), 2);
  EXPECT_EQ(run_command(kBinary + " run --budget-evals 5 --budget-seconds 1 --out " + out), 2);
  EXPECT_EQ(run_command(kBinary + " run --budget-evals 3 --out " + out + " --sut /nonexistent/sut"), 3);
  EXPECT_EQ(run_command(kBinary + " --help"), 0);
}

}  // namespace
