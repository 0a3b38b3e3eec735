#include "roadsearch/search.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <limits>

namespace roadsearch::search {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kA: return "A";
    case Variant::kB: return "B";
    case Variant::kC: return "C";
  }
  return "A";
}

Variant variant_from_string(const std::string& s) {
  if (s == "A" || s == "a") return Variant::kA;
  if (s == "B" || s == "b") return Variant::kB;
  if (s == "C" || s == "c") return Variant::kC;
  throw DomainError("variant must be one of A, B, C (got '" + s + "')");
}

void SearchConfig::check() const {
  if (population_size < 2) throw DomainError("search.population_size must be >= 2");
  if (num_control_points < 3) throw DomainError("search.num_control_points must be >= 3");
  if (budget.max_evaluations.has_value() == budget.wall_time.has_value()) {
    throw DomainError("search.budget must set exactly one of max_evaluations, wall_time");
  }
  if (budget.max_evaluations && *budget.max_evaluations < 0) {
    throw DomainError("search.budget.max_evaluations must be >= 0");
  }
  if (budget.wall_time && !(*budget.wall_time >= 0.0)) {
    throw DomainError("search.budget.wall_time must be >= 0");
  }
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) {
    throw DomainError("search.mutation_prob must lie in [0, 1]");
  }
  if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) {
    throw DomainError("search.crossover_prob must lie in [0, 1]");
  }
  if (!(mutation_range > 0.0)) throw DomainError("search.mutation_range must be > 0");
  if (tournament_size < 1) throw DomainError("search.tournament_size must be >= 1");
  if (elitism < 0 || elitism >= population_size) {
    throw DomainError("search.elitism must lie in [0, population_size)");
  }
  if (workers < 1) throw DomainError("search.workers must be >= 1");
}

std::string to_string(ErrorKind e) {
  switch (e) {
    case ErrorKind::kNone: return "none";
    case ErrorKind::kSimulation: return "simulation";
    case ErrorKind::kSpawn: return "spawn";
    case ErrorKind::kTimeout: return "timeout";
    case ErrorKind::kProtocol: return "protocol";
  }
  return "none";
}

ErrorKind error_kind_from_string(const std::string& s) {
  for (auto e : {ErrorKind::kNone, ErrorKind::kSimulation, ErrorKind::kSpawn, ErrorKind::kTimeout,
                 ErrorKind::kProtocol}) {
    if (to_string(e) == s) return e;
  }
  throw DomainError("unknown error kind '" + s + "'");
}

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::kSeed: return "SEED";
    case EventKind::kGeneration: return "GENERATION";
    case EventKind::kFail: return "FAIL";
    case EventKind::kReseed: return "RESEED";
    case EventKind::kBudgetExhausted: return "BUDGET_EXHAUSTED";
  }
  return "SEED";
}

EventKind event_kind_from_string(const std::string& s) {
  for (auto k : {EventKind::kSeed, EventKind::kGeneration, EventKind::kFail, EventKind::kReseed,
                 EventKind::kBudgetExhausted}) {
    if (to_string(k) == s) return k;
  }
  throw DomainError("unknown event kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// Evaluators

bool Evaluator::precheck_valid(const ControlPointSet& genotype) const {
  return road::validate(road::build_road(genotype, road_params_)).valid();
}

Polyline Evaluator::centerline(const ControlPointSet& genotype) const {
  return road::build_road(genotype, road_params_).centerline;
}

Evaluation evaluate_road(const ControlPointSet& genotype, const road::RoadParams& params,
                         const std::function<Evaluation(const road::RoadSpec&)>& execute) {
  const road::RoadSpec road = road::build_road(genotype, params);
  const road::ValidityReport validity = road::validate(road);
  if (!validity.valid()) {
    Evaluation out;
    out.verdict = Verdict::kInvalid;
    out.fitness = 0.0;
    out.centerline = road.centerline;
    for (const auto& v : validity.violations) out.violations.push_back(v.kind);
    return out;
  }
  Evaluation out;
  try {
    out = execute(road);
  } catch (const std::exception& e) {
    out = Evaluation{};
    out.verdict = Verdict::kInvalid;
    out.error = ErrorKind::kSimulation;
    out.error_detail = e.what();
  }
  if (out.verdict == Verdict::kInvalid) out.fitness = 0.0;
  out.centerline = road.centerline;
  return out;
}

BuiltinEvaluator::BuiltinEvaluator(road::RoadParams road, sim::VehicleParams vehicle,
                                   sim::SimSettings settings)
    : Evaluator(std::move(road)), vehicle_(vehicle), settings_(settings) {
  vehicle_.check();
}

Evaluation BuiltinEvaluator::evaluate(const ControlPointSet& genotype) const {
  return evaluate_road(genotype, road_params(), [this](const road::RoadSpec& road) {
    Evaluation out;
    sim::TestResult result = sim::run_test(road, vehicle_, settings_);
    out.verdict = result.verdict;
    out.fitness = result.max_oob;
    out.result = std::move(result);
    return out;
  });
}

// ---------------------------------------------------------------------------
// Failure archive and aggregates

void FailureArchive::add(Individual failure, Polyline centerline) {
  std::vector<double> row;
  row.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const double d = geometry::discrete_frechet(entries_[i].centerline, centerline);
    row.push_back(d);
    sum_ += d;
    max_ = std::max(max_, d);
  }
  distances_.push_back(std::move(row));
  entries_.push_back({std::move(failure), std::move(centerline)});
}

double FailureArchive::pairwise(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  if (i < j) std::swap(i, j);
  return distances_.at(i).at(j);
}

std::optional<double> FailureArchive::average() const {
  const std::size_t n = entries_.size();
  if (n < 2) return std::nullopt;
  return sum_ / static_cast<double>(n * (n - 1) / 2);
}

std::optional<double> FailureArchive::maximum() const {
  if (entries_.size() < 2) return std::nullopt;
  return max_;
}

Aggregates RunReport::aggregates() const {
  Aggregates agg;
  FailureArchive failures;
  for (const auto& rec : records) {
    ++agg.total;
    switch (rec.verdict) {
      case Verdict::kPass: ++agg.passed; break;
      case Verdict::kInvalid: ++agg.invalid; break;
      case Verdict::kFail:
        ++agg.failed;
        failures.add(Individual{rec.genotype, Score{rec.fitness, rec.verdict}}, rec.centerline);
        break;
    }
  }
  agg.avg_frechet = failures.average();
  agg.max_frechet = failures.maximum();
  return agg;
}

// ---------------------------------------------------------------------------
// Operators

void sort_by_x(std::vector<geometry::Point2D>& points) {
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
}

Individual random_individual(Rng& rng, const SearchConfig& config, double map_size) {
  std::uniform_real_distribution<double> coord(0.0, map_size);
  std::vector<geometry::Point2D> points(static_cast<std::size_t>(config.num_control_points));
  for (auto& p : points) {
    p.x = coord(rng);
    p.y = coord(rng);
  }
  sort_by_x(points);
  return Individual{ControlPointSet(std::move(points), map_size), std::nullopt};
}

Individual guided_individual(Rng& rng, const SearchConfig& config, double map_size,
                             const std::function<bool(const ControlPointSet&)>& is_valid,
                             double invalid_acceptance) {
  if (!(invalid_acceptance > 0.0 && invalid_acceptance <= 1.0)) {
    throw DomainError("invalid-candidate acceptance must lie in (0, 1]");
  }
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  while (true) {
    Individual candidate = random_individual(rng, config, map_size);
    if (is_valid(candidate.genotype)) return candidate;
    if (coin(rng) < invalid_acceptance) return candidate;
  }
}

Individual evaluate(const Individual& ind, const Evaluator& evaluator) {
  const Evaluation e = evaluator.evaluate(ind.genotype);
  return Individual{ind.genotype, Score{e.fitness, e.verdict}};
}

const Individual& select(std::span<const Individual> population, Rng& rng,
                         const SearchConfig& config) {
  if (population.empty()) throw DomainError("select needs a non-empty population");
  std::uniform_int_distribution<std::size_t> pick(0, population.size() - 1);
  std::size_t best = pick(rng);
  for (int k = 1; k < config.tournament_size; ++k) {
    const std::size_t other = pick(rng);
    const double fo = population[other].fitness();
    const double fb = population[best].fitness();
    if (fo > fb || (fo == fb && other < best)) best = other;
  }
  return population[best];
}

std::pair<Individual, Individual> crossover_at(const Individual& a, const Individual& b,
                                               std::size_t cut) {
  const auto& pa = a.genotype.points();
  const auto& pb = b.genotype.points();
  if (pa.size() != pb.size()) throw DomainError("crossover needs equal genotype lengths");
  if (cut == 0 || cut >= pa.size()) throw DomainError("crossover cut must lie in [1, n-1]");
  std::vector<geometry::Point2D> c1(pa.begin(), pa.begin() + static_cast<std::ptrdiff_t>(cut));
  std::vector<geometry::Point2D> c2(pb.begin(), pb.begin() + static_cast<std::ptrdiff_t>(cut));
  c1.insert(c1.end(), pb.begin() + static_cast<std::ptrdiff_t>(cut), pb.end());
  c2.insert(c2.end(), pa.begin() + static_cast<std::ptrdiff_t>(cut), pa.end());
  sort_by_x(c1);
  sort_by_x(c2);
  return {Individual{ControlPointSet(std::move(c1), a.genotype.map_size()), std::nullopt},
          Individual{ControlPointSet(std::move(c2), b.genotype.map_size()), std::nullopt}};
}

std::pair<Individual, Individual> crossover(const Individual& a, const Individual& b, Rng& rng,
                                            const SearchConfig& config) {
  if (a.genotype.size() != b.genotype.size()) {
    throw DomainError("crossover needs equal genotype lengths");
  }
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < config.crossover_prob) {
    std::uniform_int_distribution<std::size_t> cut(1, a.genotype.size() - 1);
    return crossover_at(a, b, cut(rng));
  }
  return {Individual{a.genotype, std::nullopt}, Individual{b.genotype, std::nullopt}};
}

Individual mutate(const Individual& ind, Rng& rng, const SearchConfig& config) {
  const double map = ind.genotype.map_size();
  const double r = config.mutation_range;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<geometry::Point2D> points = ind.genotype.points();
  for (auto& p : points) {
    if (coin(rng) >= config.mutation_prob) continue;
    std::uniform_real_distribution<double> dx(std::max(0.0, p.x - r), std::min(map, p.x + r));
    std::uniform_real_distribution<double> dy(std::max(0.0, p.y - r), std::min(map, p.y + r));
    const double nx = dx(rng);
    const double ny = dy(rng);
    p = {nx, ny};
  }
  sort_by_x(points);
  return Individual{ControlPointSet(std::move(points), map), std::nullopt};
}

// ---------------------------------------------------------------------------
// Diversity

namespace {

/// Pairwise Frechet table of a population, reused across candidate checks.
class NoveltyGate {
 public:
  explicit NoveltyGate(std::span<const Polyline> population)
      : population_(population), row_sums_(population.size(), 0.0) {
    const std::size_t n = population.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = geometry::discrete_frechet(population[i], population[j]);
        row_sums_[i] += d;
        row_sums_[j] += d;
        total_ += d;
      }
    }
  }

  bool accept(const Polyline& candidate) const {
    const std::size_t n = population_.size();
    if (n < 2) return true;
    std::vector<double> to_candidate(n);
    std::size_t closest = 0;
    for (std::size_t i = 0; i < n; ++i) {
      to_candidate[i] = geometry::discrete_frechet(candidate, population_[i]);
      if (to_candidate[i] < to_candidate[closest]) closest = i;
    }
    double replaced = total_ - row_sums_[closest];
    for (std::size_t i = 0; i < n; ++i) {
      if (i != closest) replaced += to_candidate[i];
    }
    // Same pair count before and after, so compare sums.
    return replaced > total_;
  }

 private:
  std::span<const Polyline> population_;
  std::vector<double> row_sums_;
  double total_{0.0};
};

}  // namespace

std::optional<double> population_avg_frechet(std::span<const Polyline> centerlines) {
  const std::size_t n = centerlines.size();
  if (n < 2) return std::nullopt;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      sum += geometry::discrete_frechet(centerlines[i], centerlines[j]);
    }
  }
  return sum / static_cast<double>(n * (n - 1) / 2);
}

bool novelty_accept(const Polyline& candidate, std::span<const Polyline> population) {
  return NoveltyGate(population).accept(candidate);
}

// ---------------------------------------------------------------------------
// Search loop

namespace {

// Re-mutation attempts before a non-novel offspring is admitted anyway.
constexpr int kNoveltyRetries = 10;

class SearchRun {
 public:
  SearchRun(const SearchConfig& config, const Evaluator& evaluator, Reporter* reporter)
      : config_(config),
        evaluator_(evaluator),
        reporter_(reporter),
        rng_(config.seed),
        map_size_(evaluator.road_params().map_size),
        start_(Clock::now()) {
    report_.config = config;
    report_.parallel_workers = config.workers;
  }

  RunReport run() {
    bool first_seed = true;
    while (true) {
      if (!budget_left()) {
        report_.partial_seed = report_.partial_seed || first_seed;
        break;
      }
      emit(EventKind::kSeed);
      std::vector<Individual> population = seed_population();
      const Outcome seeded = evaluate_batch(population);
      if (first_seed && seeded == Outcome::kExhausted) report_.partial_seed = true;
      first_seed = false;
      if (seeded == Outcome::kExhausted) break;
      if (seeded == Outcome::kRestart) continue;
      if (reporter_) reporter_->on_population(population, epoch_, generation_);

      if (evolve(population) == Outcome::kExhausted) break;
    }
    emit(EventKind::kBudgetExhausted);
    report_.elapsed_seconds = elapsed();
    return std::move(report_);
  }

 private:
  using Clock = std::chrono::steady_clock;
  enum class Outcome { kDone, kRestart, kExhausted };

  double elapsed() const {
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }

  int evaluations() const { return static_cast<int>(report_.records.size()); }

  bool budget_left() const {
    if (config_.budget.max_evaluations) return evaluations() < *config_.budget.max_evaluations;
    return elapsed() < *config_.budget.wall_time;
  }

  /// Offspring generations are only started when they fit entirely.
  bool can_afford(int count) const {
    if (config_.budget.max_evaluations) {
      return evaluations() + count <= *config_.budget.max_evaluations;
    }
    return budget_left();
  }

  void emit(EventKind kind) {
    Event e{kind, evaluations(), epoch_, generation_};
    report_.events.push_back(e);
    if (reporter_) reporter_->on_event(e);
  }

  std::vector<Individual> seed_population() {
    std::vector<Individual> pop;
    pop.reserve(static_cast<std::size_t>(config_.population_size));
    for (int i = 0; i < config_.population_size; ++i) {
      if (config_.variant == Variant::kC) {
        pop.push_back(guided_individual(rng_, config_, map_size_, [this](const ControlPointSet& g) {
          return evaluator_.precheck_valid(g);
        }));
      } else {
        pop.push_back(random_individual(rng_, config_, map_size_));
      }
    }
    return pop;
  }

  struct Timed {
    Evaluation evaluation;
    double seconds;
  };

  Timed timed_evaluate(const ControlPointSet& genotype) const {
    const auto t0 = Clock::now();
    Evaluation e = evaluator_.evaluate(genotype);
    return {std::move(e), std::chrono::duration<double>(Clock::now() - t0).count()};
  }

  /// Returns true when the search must restart.
  bool commit(Individual& ind, Timed timed) {
    Evaluation& e = timed.evaluation;
    ind.score = Score{e.fitness, e.verdict};

    TestRecord rec;
    rec.id = evaluations() + 1;
    rec.genotype = ind.genotype;
    rec.verdict = e.verdict;
    rec.fitness = e.fitness;
    rec.eval_time = timed.seconds;
    rec.epoch = epoch_;
    rec.generation = generation_;
    rec.error = e.error;
    rec.error_detail = e.error_detail;
    rec.centerline = std::move(e.centerline);
    if (e.verdict == Verdict::kFail) rec.result = std::move(e.result);
    report_.records.push_back(std::move(rec));
    if (reporter_) reporter_->on_record(report_.records.back());

    if (e.verdict != Verdict::kFail) return false;
    emit(EventKind::kFail);
    if (config_.variant == Variant::kA) return false;
    emit(EventKind::kReseed);
    ++epoch_;
    generation_ = 0;
    return true;
  }

  /// Evaluates `batch` in order, committing results in submission order.
  Outcome evaluate_batch(std::vector<Individual>& batch) {
    std::size_t next = 0;
    while (next < batch.size()) {
      if (!budget_left()) return Outcome::kExhausted;
      std::size_t chunk = static_cast<std::size_t>(config_.workers);
      if (config_.budget.max_evaluations) {
        const auto room = static_cast<std::size_t>(*config_.budget.max_evaluations - evaluations());
        chunk = std::min(chunk, room);
      }
      chunk = std::min(chunk, batch.size() - next);

      std::vector<Timed> results;
      results.reserve(chunk);
      if (chunk == 1) {
        results.push_back(timed_evaluate(batch[next].genotype));
      } else {
        std::vector<std::future<Timed>> futures;
        for (std::size_t k = 0; k < chunk; ++k) {
          futures.push_back(std::async(std::launch::async, [this, &batch, next, k] {
            return timed_evaluate(batch[next + k].genotype);
          }));
        }
        for (auto& f : futures) results.push_back(f.get());
      }
      for (std::size_t k = 0; k < chunk; ++k) {
        // Results after a restart are discarded so the trace matches sequential mode.
        if (commit(batch[next + k], std::move(results[k]))) return Outcome::kRestart;
      }
      next += chunk;
    }
    return Outcome::kDone;
  }

  std::vector<Individual> breed(const std::vector<Individual>& population) {
    std::vector<Individual> offspring;
    const auto wanted = static_cast<std::size_t>(config_.population_size - config_.elitism);

    std::optional<NoveltyGate> gate;
    std::vector<Polyline> parent_lines;
    if (config_.novelty_filter) {
      for (const auto& ind : population) parent_lines.push_back(evaluator_.centerline(ind.genotype));
      gate.emplace(parent_lines);
    }

    while (offspring.size() < wanted) {
      const Individual& a = select(population, rng_, config_);
      const Individual& b = select(population, rng_, config_);
      auto [c1, c2] = crossover(a, b, rng_, config_);
      for (Individual* child : {&c1, &c2}) {
        if (offspring.size() >= wanted) break;
        Individual candidate = mutate(*child, rng_, config_);
        if (gate) {
          for (int attempt = 0; attempt < kNoveltyRetries; ++attempt) {
            if (gate->accept(evaluator_.centerline(candidate.genotype))) break;
            candidate = mutate(candidate, rng_, config_);
          }
        }
        offspring.push_back(std::move(candidate));
      }
    }
    return offspring;
  }

  Outcome evolve(std::vector<Individual> population) {
    const int per_generation = config_.population_size - config_.elitism;
    while (true) {
      if (!can_afford(per_generation)) return Outcome::kExhausted;
      ++generation_;
      emit(EventKind::kGeneration);

      std::vector<Individual> offspring = breed(population);
      const Outcome outcome = evaluate_batch(offspring);
      if (outcome != Outcome::kDone) return outcome;

      std::vector<std::size_t> order(population.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return population[a].fitness() > population[b].fitness();
      });
      std::vector<Individual> next;
      next.reserve(population.size());
      for (int e = 0; e < config_.elitism; ++e) {
        next.push_back(population[order[static_cast<std::size_t>(e)]]);
      }
      for (auto& child : offspring) next.push_back(std::move(child));
      population = std::move(next);
      if (reporter_) reporter_->on_population(population, epoch_, generation_);
    }
  }

  const SearchConfig& config_;
  const Evaluator& evaluator_;
  Reporter* reporter_;
  Rng rng_;
  double map_size_;
  Clock::time_point start_;
  RunReport report_;
  int epoch_{0};
  int generation_{0};
};

}  // namespace

RunReport run_search(const SearchConfig& config, const Evaluator& evaluator, Reporter* reporter) {
  config.check();
  return SearchRun(config, evaluator, reporter).run();
}

}  // namespace roadsearch::search
