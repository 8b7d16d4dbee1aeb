#include "delib/sim/scene.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace delib::sim {

using nlohmann::json;

namespace {

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
Vec3 vec3_from(const json& j) { return {j.at(0), j.at(1), j.at(2)}; }

json subgoal_json(const monitor::Subgoal& s) {
  json j;
  j["patient"] = s.patient;
  j["predicate"] = monitor::to_string(s.predicate);
  if (s.destination) j["destination"] = *s.destination;
  if (s.completed_hint) j["completed"] = true;
  return j;
}

monitor::Subgoal subgoal_from(const json& j) {
  monitor::Subgoal s;
  s.patient = j.at("patient").get<std::string>();
  auto p = monitor::subgoal_predicate_from(j.at("predicate").get<std::string>());
  if (!p) throw std::runtime_error("unknown subgoal predicate in file");
  s.predicate = *p;
  if (j.contains("destination")) s.destination = j["destination"].get<std::string>();
  if (j.contains("completed")) s.completed_hint = j["completed"].get<bool>();
  s.validate();
  return s;
}

}  // namespace

std::string subgoals_to_json(const std::vector<monitor::Subgoal>& sgs) {
  json arr = json::array();
  for (const auto& s : sgs) arr.push_back(subgoal_json(s));
  return arr.dump(2) + "\n";
}

std::vector<monitor::Subgoal> subgoals_from_json(const std::string& text) {
  json arr = json::parse(text);
  std::vector<monitor::Subgoal> out;
  for (const auto& j : arr) out.push_back(subgoal_from(j));
  return out;
}

std::string to_json(const EpisodeSpec& e) {
  json j;
  json scene;
  scene["dims"] = json::array({e.scene.X, e.scene.Y, e.scene.Z});
  scene["voxel_size"] = kVoxelSize;
  json blocked = json::array();
  for (const auto& c : e.scene.blocked) blocked.push_back(json::array({c.x, c.y}));
  scene["blocked"] = blocked;
  scene["agent"] = {{"cell", json::array({e.scene.agent.cell.x, e.scene.agent.cell.y})},
                    {"heading", e.scene.agent.heading},
                    {"pitch", e.scene.agent.pitch}};
  json insts = json::array();
  for (const auto& i : e.scene.instances) {
    json ji;
    ji["id"] = i.id;
    ji["category"] = i.category;
    ji["position"] = vec3_json(i.position);
    ji["size"] = vec3_json(i.size);
    if (!i.states.empty()) ji["states"] = i.states;
    if (!i.contained_in.empty()) ji["contained_in"] = i.contained_in;
    if (!i.supported_on.empty()) ji["supported_on"] = i.supported_on;
    if (i.capacity >= 0) ji["capacity"] = i.capacity;
    if (i.open) ji["open"] = true;
    insts.push_back(std::move(ji));
  }
  scene["instances"] = insts;
  j["scene"] = scene;

  json task;
  task["name"] = e.task.name;
  json conds = json::array();
  for (const auto& c : e.task.conditions) {
    json jc;
    jc["category"] = c.category;
    jc["predicate"] = monitor::to_string(c.predicate);
    if (c.destination) jc["destination"] = *c.destination;
    jc["count"] = c.count;
    conds.push_back(std::move(jc));
  }
  task["conditions"] = conds;
  j["task"] = task;

  json sgs = json::array();
  for (const auto& s : e.subgoals) sgs.push_back(subgoal_json(s));
  j["subgoals"] = sgs;
  if (e.reference_length >= 0) j["reference_length"] = e.reference_length;
  return j.dump(2) + "\n";
}

EpisodeSpec episode_from_json(const std::string& text) {
  json j = json::parse(text);
  EpisodeSpec e;
  const json& scene = j.at("scene");
  e.scene.X = scene.at("dims").at(0);
  e.scene.Y = scene.at("dims").at(1);
  e.scene.Z = scene.at("dims").at(2);
  for (const auto& c : scene.at("blocked"))
    e.scene.blocked.push_back({c.at(0), c.at(1)});
  e.scene.agent.cell = {scene.at("agent").at("cell").at(0),
                        scene.at("agent").at("cell").at(1)};
  e.scene.agent.heading = scene.at("agent").at("heading");
  e.scene.agent.pitch = scene.at("agent").at("pitch");
  for (const auto& ji : scene.at("instances")) {
    InstanceSpec i;
    i.id = ji.at("id");
    i.category = ji.at("category");
    i.position = vec3_from(ji.at("position"));
    i.size = vec3_from(ji.at("size"));
    if (ji.contains("states"))
      i.states = ji["states"].get<std::map<std::string, bool>>();
    if (ji.contains("contained_in")) i.contained_in = ji["contained_in"];
    if (ji.contains("supported_on")) i.supported_on = ji["supported_on"];
    if (ji.contains("capacity")) i.capacity = ji["capacity"];
    if (ji.contains("open")) i.open = ji["open"];
    e.scene.instances.push_back(std::move(i));
  }
  const json& task = j.at("task");
  e.task.name = task.at("name");
  for (const auto& jc : task.at("conditions")) {
    GoalCondition c;
    c.category = jc.at("category");
    auto p = monitor::subgoal_predicate_from(jc.at("predicate").get<std::string>());
    if (!p) throw std::runtime_error("unknown predicate in task condition");
    c.predicate = *p;
    if (jc.contains("destination")) c.destination = jc["destination"].get<std::string>();
    c.count = jc.value("count", 1);
    e.task.conditions.push_back(std::move(c));
  }
  if (j.contains("subgoals"))
    for (const auto& js : j["subgoals"]) e.subgoals.push_back(subgoal_from(js));
  e.reference_length = j.value("reference_length", -1);
  return e;
}

EpisodeSpec load_episode(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw std::runtime_error("cannot read scene file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return episode_from_json(text);
}

void save_episode(const EpisodeSpec& e, const std::string& path) {
  std::ofstream out(path);
  if (!out.good()) throw std::runtime_error("cannot write scene file: " + path);
  out << to_json(e);
}

}  // namespace delib::sim
