#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "roadsearch/config.hpp"
#include "roadsearch/road.hpp"
#include "roadsearch/search.hpp"
#include "roadsearch/simulator.hpp"

// External-SUT protocol: for each test the harness spawns the SUT command via
// /bin/sh, writes one request line to its stdin and reads one reply line from
// its stdout.
//
//   request: {"type":"evaluate","road":<RoadSpec>}
//   reply:   {"verdict":"PASS|FAIL|INVALID","max_oob":<0..100>,
//             "trajectory":[[x,y,heading,steer,time],...]}   (trajectory optional)

namespace roadsearch::harness {

struct ExternalOutcome {
  sim::TestResult result;
  search::ErrorKind error{search::ErrorKind::kNone};
  std::string detail;
};

std::string make_request(const road::RoadSpec& road);

/// Malformed replies map to INVALID with a protocol error.
ExternalOutcome parse_reply(const std::string& line);

ExternalOutcome external_evaluate(const road::RoadSpec& road, const SutDescriptor& sut);

class ExternalEvaluator : public search::Evaluator {
 public:
  ExternalEvaluator(road::RoadParams road, SutDescriptor sut);

  search::Evaluation evaluate(const search::ControlPointSet& genotype) const override;

  const SutDescriptor& sut() const { return sut_; }

 private:
  SutDescriptor sut_;
};

/// Reply the built-in simulator gives for one request.
nlohmann::json builtin_reply(const nlohmann::json& request, const HarnessConfig& config,
                             bool include_trajectory = false);

/// Serves requests line by line until end of input.
void serve_builtin(std::istream& in, std::ostream& out, const HarnessConfig& config,
                   bool include_trajectory = false);

}  // namespace roadsearch::harness
