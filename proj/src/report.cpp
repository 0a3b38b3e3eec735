#include "roadsearch/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "roadsearch/protocol.hpp"

namespace roadsearch::harness {

using nlohmann::json;
using search::TestRecord;

namespace {

constexpr double kReplayTolerance = 1e-9;

json frechet_json(std::optional<double> v) { return v ? json(*v) : json("n/a"); }

json record_to_json(const TestRecord& r) {
  json j = {{"id", r.id},
            {"genotype", road::points_to_json(r.genotype.points())},
            {"verdict", sim::to_string(r.verdict)},
            {"fitness", r.fitness},
            {"eval_time", r.eval_time},
            {"epoch", r.epoch},
            {"generation", r.generation},
            {"error", search::to_string(r.error)},
            {"error_detail", r.error_detail}};
  if (r.result) {
    j["max_oob"] = r.result->max_oob;
    j["trajectory"] = r.result->trajectory;
    auto trace = json::array();
    for (const auto& s : r.result->oob_trace) trace.push_back({s.time, s.oob_percent});
    j["oob_trace"] = std::move(trace);
  }
  return j;
}

TestRecord record_from_json(const json& j, const HarnessConfig& config) {
  TestRecord r;
  r.id = j.at("id").get<int>();
  r.genotype = geometry::ControlPointSet(road::points_from_json(j.at("genotype")), config.road.map_size);
  r.verdict = sim::verdict_from_string(j.at("verdict").get<std::string>());
  r.fitness = j.at("fitness").get<double>();
  r.eval_time = j.at("eval_time").get<double>();
  r.epoch = j.at("epoch").get<int>();
  r.generation = j.at("generation").get<int>();
  r.error = search::error_kind_from_string(j.at("error").get<std::string>());
  r.error_detail = j.at("error_detail").get<std::string>();
  r.centerline = road::build_road(r.genotype, config.road).centerline;
  if (j.contains("trajectory")) {
    sim::TestResult res;
    res.verdict = r.verdict;
    res.max_oob = j.at("max_oob").get<double>();
    res.trajectory = j.at("trajectory").get<std::vector<sim::VehicleState>>();
    for (const auto& s : j.at("oob_trace")) {
      res.oob_trace.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
    }
    r.result = std::move(res);
  }
  return r;
}

json event_to_json(const search::Event& e) {
  return {{"kind", search::to_string(e.kind)},
          {"after_records", e.after_records},
          {"epoch", e.epoch},
          {"generation", e.generation}};
}

search::Event event_from_json(const json& j) {
  return {search::event_kind_from_string(j.at("kind").get<std::string>()),
          j.at("after_records").get<int>(), j.at("epoch").get<int>(),
          j.at("generation").get<int>()};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw ReportError("cannot write " + path.string());
}

void make_dirs(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ReportError("cannot create " + dir.string() + ": " + ec.message());
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string svg_points(const geometry::Polyline& line) {
  std::string out;
  for (const auto& p : line) {
    if (!out.empty()) out += ' ';
    out += fmt(p.x) + "," + fmt(p.y);
  }
  return out;
}

/// Green at 0 % OOB through yellow to red at 100 %.
std::string oob_color(double pct) {
  const double t = std::clamp(pct / 100.0, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255.0 * std::min(1.0, 2.0 * t)));
  const int g = static_cast<int>(std::lround(255.0 * std::min(1.0, 2.0 * (1.0 - t))));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x00", r, g);
  return buf;
}

}  // namespace

const TestRecord& Archive::record(int test_id) const {
  for (const auto& r : report.records) {
    if (r.id == test_id) return r;
  }
  throw std::out_of_range("archive has no test " + std::to_string(test_id));
}

json archive_to_json(const Archive& a) {
  const auto agg = a.report.aggregates();
  HarnessConfig config = a.config;
  config.search = a.report.config;

  auto records = json::array();
  for (const auto& r : a.report.records) records.push_back(record_to_json(r));
  auto events = json::array();
  for (const auto& e : a.report.events) events.push_back(event_to_json(e));

  return {{"format", kArchiveFormat},
          {"version", a.version},
          {"run", a.run},
          {"seed", config.search.seed},
          {"config", to_json(config)},
          {"parallel_workers", a.report.parallel_workers},
          {"partial_seed", a.report.partial_seed},
          {"elapsed_seconds", a.report.elapsed_seconds},
          {"records", std::move(records)},
          {"events", std::move(events)},
          {"aggregates",
           {{"T", agg.total},
            {"P", agg.passed},
            {"I", agg.invalid},
            {"F", agg.failed},
            {"avg_frechet", frechet_json(agg.avg_frechet)},
            {"max_frechet", frechet_json(agg.max_frechet)}}}};
}

Archive archive_from_json(const json& doc) {
  try {
    if (!doc.is_object() || doc.value("format", "") != kArchiveFormat) {
      throw std::runtime_error("not a run archive");
    }
    Archive a;
    a.version = doc.at("version").get<std::string>();
    a.run = doc.at("run").get<int>();
    a.config = parse_config_json(doc.at("config"));
    a.report.config = a.config.search;
    a.report.parallel_workers = doc.at("parallel_workers").get<int>();
    a.report.partial_seed = doc.at("partial_seed").get<bool>();
    a.report.elapsed_seconds = doc.at("elapsed_seconds").get<double>();
    for (const auto& r : doc.at("records")) a.report.records.push_back(record_from_json(r, a.config));
    for (const auto& e : doc.at("events")) a.report.events.push_back(event_from_json(e));
    return a;
  } catch (const ConfigError& e) {
    throw std::runtime_error(std::string("archive config: ") + e.what());
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed archive: ") + e.what());
  } catch (const DomainError& e) {
    throw std::runtime_error(std::string("malformed archive: ") + e.what());
  }
}

Archive load_archive(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open archive " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("malformed archive " + path.string() + ": " + e.what());
  }
  return archive_from_json(doc);
}

std::string format_frechet(std::optional<double> value) {
  return value ? fmt(*value) : std::string("n/a");
}

std::string summary_csv(std::span<const Archive> runs) {
  std::ostringstream out;
  out << "Run,T,P,I,F,AvgFrechet,MaxFrechet\n";
  for (const auto& a : runs) {
    const auto agg = a.report.aggregates();
    out << a.run << ',' << agg.total << ',' << agg.passed << ',' << agg.invalid << ','
        << agg.failed << ',' << format_frechet(agg.avg_frechet) << ','
        << format_frechet(agg.max_frechet) << '\n';
  }
  return out.str();
}

std::string render_svg(const TestRecord& record, const road::RoadParams& params) {
  const road::RoadSpec road = road::build_road(record.genotype, params);
  const double size = params.map_size;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(size) << "\" height=\""
      << fmt(size) << "\" viewBox=\"0 0 " << fmt(size) << ' ' << fmt(size) << "\">\n";
  out << "<title>test " << record.id << ' ' << sim::to_string(record.verdict) << " max_oob "
      << fmt(record.fitness) << "</title>\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  out << "<g transform=\"translate(0," << fmt(size) << ") scale(1,-1)\">\n";

  geometry::Polyline surface = road.left_boundary;
  surface.insert(surface.end(), road.right_boundary.rbegin(), road.right_boundary.rend());
  out << "<polygon points=\"" << svg_points(surface) << "\" fill=\"#d0d0d0\" stroke=\"none\"/>\n";
  for (const auto* line : {&road.left_boundary, &road.right_boundary}) {
    out << "<polyline points=\"" << svg_points(*line)
        << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"0.4\"/>\n";
  }
  out << "<polyline points=\"" << svg_points(road.centerline)
      << "\" fill=\"none\" stroke=\"#f0c000\" stroke-width=\"0.3\" stroke-dasharray=\"2,2\"/>\n";

  if (record.result && !record.result->trajectory.empty()) {
    const auto& traj = record.result->trajectory;
    const auto& trace = record.result->oob_trace;
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
      const double pct = i + 1 < trace.size() ? trace[i + 1].oob_percent : 0.0;
      out << "<line x1=\"" << fmt(traj[i].position.x) << "\" y1=\"" << fmt(traj[i].position.y)
          << "\" x2=\"" << fmt(traj[i + 1].position.x) << "\" y2=\"" << fmt(traj[i + 1].position.y)
          << "\" stroke=\"" << oob_color(pct) << "\" stroke-width=\"0.8\"/>\n";
    }
    std::size_t worst = 0;
    for (std::size_t i = 0; i < trace.size() && i < traj.size(); ++i) {
      if (trace[i].oob_percent > trace[worst].oob_percent) worst = i;
    }
    if (record.verdict == sim::Verdict::kFail) {
      const auto& p = traj[std::min(worst, traj.size() - 1)].position;
      out << "<circle class=\"failure\" cx=\"" << fmt(p.x) << "\" cy=\"" << fmt(p.y) << "\" r=\""
          << fmt(2.0 * params.lane_width)
          << "\" fill=\"#ff0000\" fill-opacity=\"0.25\" stroke=\"#ff0000\" stroke-width=\"0.6\"/>\n";
    }
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

std::vector<std::filesystem::path> render_archive(const Archive& archive,
                                                  const std::filesystem::path& out_dir) {
  make_dirs(out_dir);
  std::vector<std::filesystem::path> files;
  for (const auto& r : archive.report.records) {
    if (r.verdict != sim::Verdict::kFail) continue;
    const auto path = out_dir / ("test_" + std::to_string(r.id) + ".svg");
    write_file(path, render_svg(r, archive.config.road));
    files.push_back(path);
  }
  return files;
}

ReportFiles write_report(std::span<const Archive> runs, const std::filesystem::path& out_dir) {
  ReportFiles files;
  try {
    make_dirs(out_dir);
    for (const auto& a : runs) {
      const auto run_dir = out_dir / ("run_" + std::to_string(a.run));
      make_dirs(run_dir);
      const auto path = run_dir / "archive.json";
      write_file(path, archive_to_json(a).dump(1) + "\n");
      files.archives.push_back(path);
      for (auto& svg : render_archive(a, run_dir / "svg")) files.svgs.push_back(std::move(svg));
    }
    files.summary = out_dir / "summary.csv";
    write_file(files.summary, summary_csv(runs));
  } catch (const ReportError& e) {
    const std::size_t written = files.archives.size() + files.svgs.size();
    throw ReportError(std::string(e.what()) + "; output in " + out_dir.string() +
                      " is partial (" + std::to_string(written) + " files written)");
  }
  return files;
}

ReplayDivergence::ReplayDivergence(const TestRecord& stored, const search::Evaluation& replayed)
    : std::runtime_error("replay of test " + std::to_string(stored.id) + " diverged: stored " +
                         sim::to_string(stored.verdict) + " max_oob " + std::to_string(stored.fitness) +
                         ", replayed " + sim::to_string(replayed.verdict) + " max_oob " +
                         std::to_string(replayed.fitness)),
      stored_verdict(stored.verdict),
      stored_max_oob(stored.fitness),
      replayed_verdict(replayed.verdict),
      replayed_max_oob(replayed.fitness) {}

search::Evaluation replay(const Archive& archive, int test_id,
                          const std::optional<std::string>& sut_command) {
  const TestRecord& stored = archive.record(test_id);
  const HarnessConfig& c = archive.config;

  search::Evaluation replayed;
  if (c.sut.kind == SutDescriptor::Kind::kExternal) {
    if (!sut_command || *sut_command != c.sut.command) {
      throw ReplayRefused("archive was produced by external SUT '" + c.sut.command +
                          "'; replay needs the same command");
    }
    replayed = ExternalEvaluator(c.road, c.sut).evaluate(stored.genotype);
  } else {
    if (sut_command) {
      throw ReplayRefused("archive was produced by the built-in SUT; refusing external command");
    }
    replayed = search::BuiltinEvaluator(c.road, c.vehicle, c.simulation).evaluate(stored.genotype);
  }

  if (replayed.verdict != stored.verdict ||
      std::abs(replayed.fitness - stored.fitness) > kReplayTolerance) {
    throw ReplayDivergence(stored, replayed);
  }
  return replayed;
}

}  // namespace roadsearch::harness
