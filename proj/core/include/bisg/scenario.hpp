#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "bisg/attack_graph.hpp"
#include "bisg/behavioral.hpp"

namespace bisg {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A graph with its defenders. `family` and `params` record which builder
// produced it ("der1", "scada", ...; "custom" for hand-written files) so that
// scaling operations can regenerate it.
struct Scenario {
  std::string name;
  std::string family = "custom";
  std::map<std::string, double> params;
  AttackGraph graph;
  std::vector<Defender> defenders;
  EdgeMirrorMap mirror;

  Game game() const { return Game(graph, defenders, mirror); }
};

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const Scenario& scenario, int indent = 2);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

std::string to_string(NodeKind kind);
NodeKind node_kind_from_string(const std::string& s);

}  // namespace bisg
