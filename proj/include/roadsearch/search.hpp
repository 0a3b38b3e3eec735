#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "roadsearch/geometry.hpp"
#include "roadsearch/road.hpp"
#include "roadsearch/simulator.hpp"

namespace roadsearch::search {

using geometry::ControlPointSet;
using geometry::Polyline;
using sim::Verdict;

using Rng = std::mt19937_64;

enum class Variant { kA, kB, kC };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

/// Exactly one of the two limits is set.
struct Budget {
  std::optional<int> max_evaluations;
  std::optional<double> wall_time;

  static Budget evaluations(int n) { return {n, std::nullopt}; }
  static Budget seconds(double s) { return {std::nullopt, s}; }

  friend bool operator==(const Budget&, const Budget&) = default;
};

/// Acceptance probability for invalid candidates when seeding variant C.
inline constexpr double kGuidedInvalidAcceptance = 0.25;

struct SearchConfig {
  Variant variant{Variant::kA};
  int population_size{25};
  int num_control_points{7};
  Budget budget{Budget::evaluations(300)};
  double mutation_prob{0.2};
  double mutation_range{25.0};
  int tournament_size{2};
  int elitism{1};
  double crossover_prob{0.8};
  bool novelty_filter{false};
  std::uint64_t seed{0};
  /// Parallel evaluation workers; 1 means sequential.
  int workers{1};

  /// Population size used by the paper's configurations: 15 for C, else 25.
  static int default_population(Variant v) { return v == Variant::kC ? 15 : 25; }

  /// Throws DomainError naming the offending field.
  void check() const;

  friend bool operator==(const SearchConfig&, const SearchConfig&) = default;
};

struct Score {
  double fitness{0.0};
  Verdict verdict{Verdict::kInvalid};

  friend bool operator==(const Score&, const Score&) = default;
};

struct Individual {
  ControlPointSet genotype;
  std::optional<Score> score;

  bool evaluated() const { return score.has_value(); }
  double fitness() const { return score ? score->fitness : 0.0; }
};

enum class ErrorKind { kNone, kSimulation, kSpawn, kTimeout, kProtocol };

std::string to_string(ErrorKind e);
ErrorKind error_kind_from_string(const std::string& s);

/// Outcome of evaluating one genotype.
struct Evaluation {
  Verdict verdict{Verdict::kInvalid};
  double fitness{0.0};
  Polyline centerline;
  ErrorKind error{ErrorKind::kNone};
  std::string error_detail;
  std::vector<road::Violation> violations;
  /// Full simulator output, when the evaluator has one.
  std::optional<sim::TestResult> result;
};

/// Turns genotypes into verdicts. Implementations must be safe to call from
/// several threads when parallel evaluation is enabled.
class Evaluator {
 public:
  explicit Evaluator(road::RoadParams params) : road_params_(std::move(params)) {}
  virtual ~Evaluator() = default;

  virtual Evaluation evaluate(const ControlPointSet& genotype) const = 0;

  /// Pre-execution validity used to guide seeding.
  virtual bool precheck_valid(const ControlPointSet& genotype) const;

  Polyline centerline(const ControlPointSet& genotype) const;
  const road::RoadParams& road_params() const { return road_params_; }

 private:
  road::RoadParams road_params_;
};

/// In-process evaluation against the built-in simulator.
class BuiltinEvaluator : public Evaluator {
 public:
  BuiltinEvaluator(road::RoadParams road, sim::VehicleParams vehicle, sim::SimSettings settings = {});

  Evaluation evaluate(const ControlPointSet& genotype) const override;

  const sim::VehicleParams& vehicle() const { return vehicle_; }
  const sim::SimSettings& settings() const { return settings_; }

 private:
  sim::VehicleParams vehicle_;
  sim::SimSettings settings_;
};

/// Shared evaluation path for any SUT: build, validate, then execute valid
/// roads through `execute`.
Evaluation evaluate_road(const ControlPointSet& genotype, const road::RoadParams& params,
                         const std::function<Evaluation(const road::RoadSpec&)>& execute);

struct TestRecord {
  int id{0};
  ControlPointSet genotype;
  Verdict verdict{Verdict::kInvalid};
  double fitness{0.0};
  double eval_time{0.0};
  int epoch{0};
  int generation{0};
  ErrorKind error{ErrorKind::kNone};
  std::string error_detail;
  /// Not archived; rebuilt from the genotype when loading.
  Polyline centerline;
  /// Kept for failing tests only, for rendering.
  std::optional<sim::TestResult> result;
};

enum class EventKind { kSeed, kGeneration, kFail, kReseed, kBudgetExhausted };

std::string to_string(EventKind k);
EventKind event_kind_from_string(const std::string& s);

struct Event {
  EventKind kind;
  /// Number of records emitted before this event.
  int after_records{0};
  int epoch{0};
  int generation{0};

  friend bool operator==(const Event&, const Event&) = default;
};

struct Aggregates {
  int total{0};
  int passed{0};
  int invalid{0};
  int failed{0};
  /// Pairwise discrete Frechet among failing centerlines; empty when F < 2.
  std::optional<double> avg_frechet;
  std::optional<double> max_frechet;
};

struct RunReport {
  SearchConfig config;
  std::vector<TestRecord> records;
  std::vector<Event> events;
  /// The first seed population did not fit the budget.
  bool partial_seed{false};
  int parallel_workers{1};
  double elapsed_seconds{0.0};

  Aggregates aggregates() const;
};

/// Failing tests plus an incrementally maintained pairwise Frechet table.
class FailureArchive {
 public:
  void add(Individual failure, Polyline centerline);

  std::size_t size() const { return entries_.size(); }
  std::optional<double> average() const;
  std::optional<double> maximum() const;
  double pairwise(std::size_t i, std::size_t j) const;

 private:
  struct Entry {
    Individual individual;
    Polyline centerline;
  };
  std::vector<Entry> entries_;
  std::vector<std::vector<double>> distances_;
  double sum_{0.0};
  double max_{0.0};
};

/// Receives progress as the search runs.
class Reporter {
 public:
  virtual ~Reporter() = default;
  virtual void on_record(const TestRecord&) {}
  virtual void on_event(const Event&) {}
  /// A fully evaluated population, before breeding from it.
  virtual void on_population(std::span<const Individual>, int /*epoch*/, int /*generation*/) {}
};

void sort_by_x(std::vector<geometry::Point2D>& points);

Individual random_individual(Rng& rng, const SearchConfig& config, double map_size);

/// Variant C seeding: valid draws are accepted, invalid ones with
/// probability `invalid_acceptance`.
Individual guided_individual(Rng& rng, const SearchConfig& config, double map_size,
                             const std::function<bool(const ControlPointSet&)>& is_valid,
                             double invalid_acceptance = kGuidedInvalidAcceptance);

Individual evaluate(const Individual& ind, const Evaluator& evaluator);

/// Tournament with replacement; ties go to the lower index.
const Individual& select(std::span<const Individual> population, Rng& rng,
                         const SearchConfig& config);

std::pair<Individual, Individual> crossover(const Individual& a, const Individual& b, Rng& rng,
                                            const SearchConfig& config);

/// Deterministic cut used by crossover, exposed for testing.
std::pair<Individual, Individual> crossover_at(const Individual& a, const Individual& b,
                                               std::size_t cut);

Individual mutate(const Individual& ind, Rng& rng, const SearchConfig& config);

/// Mean pairwise discrete Frechet distance; empty for fewer than two curves.
std::optional<double> population_avg_frechet(std::span<const Polyline> centerlines);

/// True iff swapping the candidate in for its most similar member strictly
/// raises the population's average Frechet distance.
bool novelty_accept(const Polyline& candidate, std::span<const Polyline> population);

RunReport run_search(const SearchConfig& config, const Evaluator& evaluator,
                     Reporter* reporter = nullptr);

}  // namespace roadsearch::search
