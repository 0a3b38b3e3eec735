#include "roadsearch/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace roadsearch::harness {

namespace {

using nlohmann::json;

/// Reads one JSON object, tracking which keys were consumed.
class Section {
 public:
  Section(const json& parent, const std::string& key, const std::string& path)
      : path_(path.empty() ? key : path + "." + key) {
    if (key.empty()) {
      path_ = path;
      node_ = &parent;
    } else if (parent.contains(key)) {
      node_ = &parent.at(key);
    }
    if (node_ && !node_->is_object()) throw ConfigError(path_, "expected an object");
  }

  bool present() const { return node_ != nullptr; }
  bool has(const std::string& key) const { return node_ && node_->contains(key); }
  const std::string& path() const { return path_; }
  const json* node() const { return node_; }

  void number(const std::string& key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) throw ConfigError(key_path(key), "expected a number");
      out = v->get<double>();
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) throw ConfigError(key_path(key), "expected an integer");
      out = v->get<int>();
    }
  }

  void unsigned64(const std::string& key, std::uint64_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned()) {
        throw ConfigError(key_path(key), "expected a non-negative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) throw ConfigError(key_path(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void text(const std::string& key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) throw ConfigError(key_path(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void mark(const std::string& key) { seen_.insert(key); }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  /// Rejects keys nobody asked for.
  void finish() const {
    if (!node_) return;
    for (const auto& item : node_->items()) {
      if (!seen_.contains(item.key())) throw ConfigError(key_path(item.key()), "unknown key");
    }
  }

 private:
  const json* take(const std::string& key) {
    seen_.insert(key);
    if (!node_ || !node_->contains(key)) return nullptr;
    return &node_->at(key);
  }

  std::string path_;
  const json* node_{nullptr};
  std::set<std::string> seen_;
};

/// Library checks phrase errors as "<key.path> must ..."; keep the path.
[[noreturn]] void rethrow_range(const DomainError& e) {
  const std::string msg = e.what();
  const auto space = msg.find(' ');
  if (space == std::string::npos) throw ConfigError("", msg);
  throw ConfigError(msg.substr(0, space), "out of range, " + msg.substr(space + 1));
}

void read_search(const json& doc, search::SearchConfig& s) {
  Section sec(doc, "search", "");
  std::string variant = "A";
  sec.text("variant", variant);
  try {
    s.variant = search::variant_from_string(variant);
  } catch (const DomainError& e) {
    throw ConfigError(sec.key_path("variant"), e.what());
  }
  s.population_size = search::SearchConfig::default_population(s.variant);
  sec.integer("population_size", s.population_size);
  sec.integer("num_control_points", s.num_control_points);
  sec.number("mutation_prob", s.mutation_prob);
  sec.number("mutation_range", s.mutation_range);
  sec.integer("tournament_size", s.tournament_size);
  sec.integer("elitism", s.elitism);
  sec.number("crossover_prob", s.crossover_prob);
  sec.boolean("novelty_filter", s.novelty_filter);
  sec.unsigned64("seed", s.seed);
  sec.integer("workers", s.workers);

  sec.mark("budget");
  static const json kEmpty = json::object();
  Section budget(sec.node() ? *sec.node() : kEmpty, "budget", sec.path());
  if (budget.present()) {
    const bool evals = budget.has("max_evaluations");
    const bool wall = budget.has("wall_time");
    if (evals == wall) {
      throw ConfigError(budget.path(), "set exactly one of max_evaluations, wall_time");
    }
    if (evals) {
      int n = 0;
      budget.integer("max_evaluations", n);
      s.budget = search::Budget::evaluations(n);
    } else {
      double t = 0.0;
      budget.number("wall_time", t);
      s.budget = search::Budget::seconds(t);
    }
    budget.finish();
  }
  sec.finish();
}

void read_road(const json& doc, road::RoadParams& r) {
  Section sec(doc, "road", "");
  sec.number("lane_width", r.lane_width);
  sec.integer("num_samples", r.num_samples);
  sec.number("min_radius", r.min_radius);
  sec.number("map_size", r.map_size);
  if (sec.has("overlap_buffer")) {
    double b = 0.0;
    sec.number("overlap_buffer", b);
    r.overlap_buffer = b;
  } else {
    sec.mark("overlap_buffer");
  }
  sec.finish();
}

void read_vehicle(const json& doc, sim::VehicleParams& v) {
  Section sec(doc, "vehicle", "");
  sec.number("wheelbase", v.wheelbase);
  sec.number("width", v.width);
  sec.number("length", v.length);
  sec.number("speed", v.speed);
  sec.number("max_steer", v.max_steer);
  sec.number("max_steer_rate", v.max_steer_rate);
  sec.number("lookahead", v.lookahead);
  sec.finish();
}

void read_simulation(const json& doc, sim::SimSettings& s) {
  Section sec(doc, "simulation", "");
  sec.number("dt", s.dt);
  sec.number("max_time", s.max_time);
  sec.finish();
  if (!(s.dt > 0.0)) throw ConfigError("simulation.dt", "out of range, must be > 0");
  if (!(s.max_time > 0.0)) throw ConfigError("simulation.max_time", "out of range, must be > 0");
}

void read_sut(const json& doc, SutDescriptor& sut) {
  Section sec(doc, "sut", "");
  std::string kind = "builtin";
  sec.text("kind", kind);
  if (kind == "builtin") {
    sut.kind = SutDescriptor::Kind::kBuiltin;
  } else if (kind == "external") {
    sut.kind = SutDescriptor::Kind::kExternal;
  } else {
    throw ConfigError(sec.key_path("kind"), "expected \"builtin\" or \"external\"");
  }
  sec.text("command", sut.command);
  sec.number("timeout", sut.timeout);
  sec.finish();
  if (sut.kind == SutDescriptor::Kind::kExternal && sut.command.empty()) {
    throw ConfigError("sut.command", "required for an external SUT");
  }
  if (!(sut.timeout > 0.0)) throw ConfigError("sut.timeout", "out of range, must be > 0");
}

}  // namespace

HarnessConfig parse_config_json(const json& doc) {
  if (doc.is_null()) return parse_config_json(json::object());
  if (!doc.is_object()) throw ConfigError("", "config root must be an object");

  HarnessConfig cfg;
  Section root(doc, "", "");
  for (const char* key : {"search", "road", "vehicle", "simulation", "sut"}) root.mark(key);
  root.finish();

  read_search(doc, cfg.search);
  read_road(doc, cfg.road);
  read_vehicle(doc, cfg.vehicle);
  read_simulation(doc, cfg.simulation);
  read_sut(doc, cfg.sut);

  try {
    cfg.search.check();
    cfg.road.check();
    cfg.vehicle.check();
  } catch (const DomainError& e) {
    rethrow_range(e);
  }
  return cfg;
}

HarnessConfig parse_config_text(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return parse_config_json(json::object());
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_config_json(doc);
}

HarnessConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

nlohmann::json to_json(const HarnessConfig& c) {
  json search = {{"variant", search::to_string(c.search.variant)},
                 {"population_size", c.search.population_size},
                 {"num_control_points", c.search.num_control_points},
                 {"mutation_prob", c.search.mutation_prob},
                 {"mutation_range", c.search.mutation_range},
                 {"tournament_size", c.search.tournament_size},
                 {"elitism", c.search.elitism},
                 {"crossover_prob", c.search.crossover_prob},
                 {"novelty_filter", c.search.novelty_filter},
                 {"seed", c.search.seed},
                 {"workers", c.search.workers}};
  if (c.search.budget.max_evaluations) {
    search["budget"] = {{"max_evaluations", *c.search.budget.max_evaluations}};
  } else {
    search["budget"] = {{"wall_time", c.search.budget.wall_time.value_or(0.0)}};
  }
  json sut = {{"kind", c.sut.kind == SutDescriptor::Kind::kBuiltin ? "builtin" : "external"},
              {"timeout", c.sut.timeout}};
  if (!c.sut.command.empty()) sut["command"] = c.sut.command;

  json vehicle;
  sim::to_json(vehicle, c.vehicle);
  json road;
  road::to_json(road, c.road);
  return json{{"search", search},
              {"road", road},
              {"vehicle", vehicle},
              {"simulation", {{"dt", c.simulation.dt}, {"max_time", c.simulation.max_time}}},
              {"sut", sut}};
}

}  // namespace roadsearch::harness
