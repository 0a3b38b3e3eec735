#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "roadsearch/config.hpp"
#include "roadsearch/search.hpp"

namespace roadsearch::harness {

inline constexpr const char* kArchiveFormat = "roadsearch-archive";

/// One run as stored on disk.
struct Archive {
  std::string version{kVersion};
  int run{1};
  HarnessConfig config;
  search::RunReport report;

  const search::TestRecord& record(int test_id) const;
};

/// Full record list plus everything needed to replay it. Failing records also
/// carry their trajectory and OOB trace.
nlohmann::json archive_to_json(const Archive& archive);

/// Centerlines are rebuilt from the genotypes.
Archive archive_from_json(const nlohmann::json& doc);
Archive load_archive(const std::filesystem::path& path);

/// Meters with two decimals, or "n/a".
std::string format_frechet(std::optional<double> value);

/// Comma-separated summary with columns Run,T,P,I,F,AvgFrechet,MaxFrechet.
std::string summary_csv(std::span<const Archive> runs);

/// Top-down view at 1 px per meter: lane, centerline, trajectory colored by
/// OOB and the failure point highlighted.
std::string render_svg(const search::TestRecord& record, const road::RoadParams& road);

/// Raised when output cannot be written; files already written stay on disk.
class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReportFiles {
  std::vector<std::filesystem::path> archives;
  std::vector<std::filesystem::path> svgs;
  std::filesystem::path summary;
};

/// Writes out_dir/run_<k>/archive.json, out_dir/run_<k>/svg/test_<id>.svg and
/// out_dir/summary.csv.
ReportFiles write_report(std::span<const Archive> runs, const std::filesystem::path& out_dir);

/// Writes one SVG per failing record of `archive` into `out_dir`.
std::vector<std::filesystem::path> render_archive(const Archive& archive,
                                                  const std::filesystem::path& out_dir);

class ReplayRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stored and replayed outcomes disagree.
class ReplayDivergence : public std::runtime_error {
 public:
  ReplayDivergence(const search::TestRecord& stored, const search::Evaluation& replayed);

  sim::Verdict stored_verdict;
  double stored_max_oob;
  sim::Verdict replayed_verdict;
  double replayed_max_oob;
};

/// Re-evaluates one archived test with the SUT that produced it. An archive
/// from an external SUT is only replayed when the same command is supplied.
search::Evaluation replay(const Archive& archive, int test_id,
                          const std::optional<std::string>& sut_command = std::nullopt);

}  // namespace roadsearch::harness
