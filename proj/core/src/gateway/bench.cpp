#include "scenewright/gateway/bench.hpp"

#include <chrono>
#include <cstdio>
#include <random>

namespace scenewright::gateway {

namespace {

PrefabRegistry synthetic_prefabs() {
  return PrefabRegistry::from_json(nlohmann::json::parse(R"({
    "schema_version": 1,
    "prefabs": [
      {"name": "table", "tags": ["furniture", "surface"], "parts": [
        {"name": "top", "primitive": "cube", "local_position": [0, 0.72, 0], "local_scale": [1.2, 0.05, 0.8]},
        {"name": "leg_a", "primitive": "cylinder", "local_position": [0.55, 0.35, 0.35], "local_scale": [0.05, 0.35, 0.05]},
        {"name": "leg_b", "primitive": "cylinder", "local_position": [-0.55, 0.35, 0.35], "local_scale": [0.05, 0.35, 0.05]},
        {"name": "leg_c", "primitive": "cylinder", "local_position": [0.55, 0.35, -0.35], "local_scale": [0.05, 0.35, 0.05]},
        {"name": "leg_d", "primitive": "cylinder", "local_position": [-0.55, 0.35, -0.35], "local_scale": [0.05, 0.35, 0.05]}
      ]},
      {"name": "cup", "tags": ["supply"], "parts": [
        {"name": "body", "primitive": "cylinder", "local_scale": [0.08, 0.05, 0.08]}
      ]},
      {"name": "lamp", "tags": ["decor"], "parts": [
        {"name": "base", "primitive": "cylinder", "local_scale": [0.15, 0.02, 0.15]},
        {"name": "shade", "primitive": "sphere", "local_position": [0, 0.4, 0], "local_scale": [0.25, 0.25, 0.25]}
      ]}
    ]
  })"));
}

nlohmann::json synthetic_room() {
  return nlohmann::json::parse(R"({
    "schema_version": 1,
    "proxies": [
      {"id": "floor_0", "kind": "plane", "tags": ["floor"], "center": [0, 0, 0], "extents": [5, 0, 5], "yaw_deg": 0},
      {"id": "table_0", "kind": "volume", "tags": ["table"], "center": [0, 0.35, 1], "extents": [0.8, 0.35, 0.5], "yaw_deg": 0},
      {"id": "shelf_0", "kind": "volume", "tags": ["storage"], "center": [-2, 0.9, 2], "extents": [0.6, 0.9, 0.2], "yaw_deg": 90}
    ]
  })");
}

}  // namespace

Engine make_synthetic_engine(std::size_t objects, std::uint64_t seed) {
  Engine engine(synthetic_prefabs());
  engine.load_room_scan(synthetic_room());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  std::uniform_real_distribution<double> height(0.0, 3.0);
  std::uniform_real_distribution<double> angle(-180.0, 180.0);
  std::uniform_real_distribution<double> size(0.1, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<std::string> primitives = {"cube", "sphere", "cylinder", "capsule"};
  const std::vector<std::string> tags = {"prop", "decor", "toy", "tool", "marker", "block"};

  nlohmann::json list = nlohmann::json::array();
  char name[32];
  for (std::size_t i = 0; i < objects; ++i) {
    std::snprintf(name, sizeof(name), "object_%03zu", i);
    nlohmann::json o = {
        {"name", name},
        {"primitive", primitives[rng() % primitives.size()]},
        {"position", {coord(rng), height(rng), coord(rng)}},
        {"orientation", {angle(rng), 0.0, 0.0}},
        {"scale", {size(rng), size(rng), size(rng)}},
        {"color", {unit(rng), unit(rng), unit(rng)}},
        {"tags", {tags[rng() % tags.size()], tags[rng() % tags.size()]}},
        {"grabbable", (rng() % 2) == 0},
    };
    if (i >= 5 && i % 5 == 0) {
      std::snprintf(name, sizeof(name), "object_%03zu", static_cast<std::size_t>(rng() % i));
      o["parent"] = name;
    }
    list.push_back(std::move(o));
  }
  if (!list.empty()) engine.dispatch({TaskType::Create, {{"objects", std::move(list)}}, ""});
  return engine;
}

std::string ContextReductionRow::csv_header() {
  return "scene_size,properties_per_object,full_tokens,selected_tokens,ratio,elapsed_ms";
}

std::string ContextReductionRow::csv() const {
  char line[160];
  std::snprintf(line, sizeof(line), "%zu,%zu,%lld,%lld,%.6f,%.3f", scene_size, properties_per_object,
                static_cast<long long>(full_tokens), static_cast<long long>(selected_tokens), ratio, elapsed_ms);
  return line;
}

ContextReductionRow measure_context_reduction(std::size_t objects, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const Engine engine = make_synthetic_engine(objects, seed);
  HistoryQueue history;
  for (int i = 0; i < 10; ++i) history.record("synthetic request " + std::to_string(i));

  ContextReductionRow row;
  row.scene_size = objects;
  // Every serialized field of a scene object: id, name, parent, local
  // transform, color, geometry, physics, grabbable, visible, placeholder, tags.
  row.properties_per_object = to_json(engine.scene().objects().begin()->second).size();
  row.full_tokens = engine.retrieve(all_categories(), &history).estimated_tokens;
  row.selected_tokens =
      engine.retrieve({ContextCategory{CategoryKind::VirtualObjects, {Property::Position}}}, &history).estimated_tokens;
  row.ratio = row.full_tokens > 0 ? static_cast<double>(row.selected_tokens) / static_cast<double>(row.full_tokens) : 0.0;
  row.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return row;
}

}  // namespace scenewright::gateway
