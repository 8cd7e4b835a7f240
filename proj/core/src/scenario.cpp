#include "bisg/scenario.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace bisg {

using nlohmann::json;

std::string to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::kSource: return "source";
    case NodeKind::kCritical: return "critical";
    case NodeKind::kIntermediate: break;
  }
  return "intermediate";
}

NodeKind node_kind_from_string(const std::string& s) {
  if (s == "source") return NodeKind::kSource;
  if (s == "critical") return NodeKind::kCritical;
  if (s == "intermediate" || s.empty()) return NodeKind::kIntermediate;
  throw ScenarioError("unknown node kind '" + s + "'");
}

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
  }
  try {
    Scenario sc;
    sc.name = doc.value("name", "");
    sc.family = doc.value("family", "custom");
    if (doc.contains("params")) sc.params = doc.at("params").get<std::map<std::string, double>>();

    std::vector<Node> nodes;
    for (const auto& n : doc.at("nodes")) {
      nodes.push_back({n.at("id").get<std::string>(), n.value("label", ""),
                       node_kind_from_string(n.value("kind", "intermediate"))});
    }
    std::vector<Edge> edges;
    for (const auto& e : doc.at("edges")) {
      edges.push_back({e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                       e.at("p0").get<double>(), e.value("s", 1.0), e.value("note", "")});
    }
    auto sources = doc.at("sources").get<std::vector<std::string>>();
    std::vector<CriticalAsset> critical;
    for (const auto& c : doc.at("critical_assets")) {
      critical.push_back({c.at("node").get<std::string>(), c.value("loss", 1.0),
                          c.value("owners", std::vector<std::string>{})});
    }
    sc.graph = AttackGraph(std::move(nodes), std::move(edges), std::move(sources),
                           std::move(critical));
    if (doc.contains("defenders")) {
      for (const auto& d : doc.at("defenders")) {
        sc.defenders.push_back({d.at("id").get<std::string>(),
                                d.value("edges", std::vector<std::string>{}),
                                d.value("budget", 0.0), d.value("alpha", 1.0),
                                d.value("eta", 0.0)});
      }
    }
    if (doc.contains("mirror")) sc.mirror = doc.at("mirror").get<EdgeMirrorMap>();
    return sc;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string scenario_to_json(const Scenario& sc, int indent) {
  json doc;
  doc["name"] = sc.name;
  doc["family"] = sc.family;
  if (!sc.params.empty()) doc["params"] = sc.params;
  doc["nodes"] = json::array();
  for (const auto& n : sc.graph.nodes()) {
    doc["nodes"].push_back({{"id", n.id}, {"label", n.label}, {"kind", to_string(n.kind)}});
  }
  doc["edges"] = json::array();
  for (const auto& e : sc.graph.edges()) {
    json je = {{"from", e.from}, {"to", e.to}, {"p0", e.p0}, {"s", e.s}};
    if (!e.note.empty()) je["note"] = e.note;
    doc["edges"].push_back(je);
  }
  doc["sources"] = sc.graph.sources();
  doc["critical_assets"] = json::array();
  for (const auto& c : sc.graph.critical_assets()) {
    doc["critical_assets"].push_back({{"node", c.node}, {"loss", c.loss}, {"owners", c.owners}});
  }
  doc["defenders"] = json::array();
  for (const auto& d : sc.defenders) {
    doc["defenders"].push_back({{"id", d.id}, {"budget", d.budget}, {"alpha", d.alpha},
                                {"eta", d.eta}, {"edges", d.edges}});
  }
  if (!sc.mirror.empty()) doc["mirror"] = sc.mirror;
  return doc.dump(indent);
}

void save_scenario(const Scenario& sc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError("cannot write " + path.string());
  out << scenario_to_json(sc) << '\n';
}

}  // namespace bisg
