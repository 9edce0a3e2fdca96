#include "scenewright/engine.hpp"

#include "scenewright/error.hpp"
#include "scenewright/json_schema.hpp"

#include <algorithm>

namespace scenewright {

nlohmann::json DispatchOutcome::to_json() const {
  nlohmann::json adj = nlohmann::json::array();
  for (const auto& a : adjustments)
    adj.push_back({{"object", a.name},
                   {"kind", std::string(to_string(a.kind))},
                   {"support", a.support},
                   {"from", scenewright::to_json(a.from)},
                   {"to", scenewright::to_json(a.to)}});
  return {{"task_type", std::string(to_string(task_type))},
          {"created", created},
          {"scheduled", scheduled},
          {"adjustments", std::move(adj)},
          {"fused", fused}};
}

namespace {

// Accepts the bare-array shorthand for list-shaped payloads.
nlohmann::json normalized_payload(const CommandEnvelope& command) {
  const std::string_view key = payload_key(command.task_type);
  if (!key.empty() && command.payload.is_array()) return {{std::string(key), command.payload}};
  return command.payload;
}

}  // namespace

Engine::Engine() : Engine(PrefabRegistry{}) {}

Engine::Engine(PrefabRegistry prefabs, EngineOptions options)
    : prefabs_(std::move(prefabs)), animations_(options.timestep) {
  wire();
}

Engine::Engine(const Engine& other)
    : prefabs_(other.prefabs_),
      scene_(other.scene_),
      context_(other.context_),
      animations_(other.animations_),
      fusion_(other.fusion_),
      pending_settle_(other.pending_settle_),
      warnings_(other.warnings_) {
  wire();
}

Engine& Engine::operator=(const Engine& other) {
  if (this == &other) return *this;
  prefabs_ = other.prefabs_;
  scene_ = other.scene_;
  context_ = other.context_;
  animations_ = other.animations_;
  fusion_ = other.fusion_;
  pending_settle_ = other.pending_settle_;
  warnings_ = other.warnings_;
  wire();
  return *this;
}

void Engine::wire() {
  animations_.set_registry(&context_);
  animations_.set_warning_sink([this](const std::string& m) { warn(m); });
  context_.set_warning_sink([this](const std::string& m) { warn(m); });
}

void Engine::warn(const std::string& message) { warnings_.push_back({current_tick(), message}); }

std::vector<Warning> Engine::take_warnings() {
  std::vector<Warning> out;
  out.swap(warnings_);
  return out;
}

std::vector<RoomProxy> Engine::load_room_scan(const nlohmann::json& document) {
  return fusion_.load_room_scan(document, scene_);
}

std::vector<SupportSurface> Engine::supports() const {
  auto out = supports_from_proxies(fusion_.proxies());
  auto virtual_surfaces = supports_from_scene(scene_);
  out.insert(out.end(), virtual_surfaces.begin(), virtual_surfaces.end());
  return out;
}

std::vector<SupportAdjustment> Engine::settle(const std::vector<ObjectId>& objects) {
  std::vector<SupportAdjustment> out;
  for (ObjectId id : objects) {
    // Surfaces are recomputed per object so something settled a moment ago
    // can carry the next one.
    auto adj = enforce_support({id}, scene_, supports());
    out.insert(out.end(), adj.begin(), adj.end());
  }
  return out;
}

DispatchOutcome Engine::dispatch(const CommandEnvelope& command) {
  DispatchOutcome outcome;
  outcome.task_type = command.task_type;
  const nlohmann::json payload = normalized_payload(command);

  switch (command.task_type) {
    case TaskType::Create: {
      require_schema(creation_schema(), payload);
      const auto specs = interpret_creation(payload, prefabs_);
      const auto created = apply_creation(specs, scene_, prefabs_, fusion_.user().head);
      for (ObjectId id : created.roots) outcome.created.push_back(scene_.get(id).name);
      outcome.adjustments = settle(created.roots);
      break;
    }
    case TaskType::Animate: {
      require_schema(animation_schema(), payload);
      outcome.scheduled = animations_.schedule(parse_animation_request(payload));
      break;
    }
    case TaskType::Fuse: {
      require_schema(fusion_schema(), payload);
      std::vector<std::pair<ObjectId, BuildingBlock>> actions;
      const auto& list = payload.at("actions");
      for (std::size_t i = 0; i < list.size(); ++i) {
        const auto ref = parse_object_ref(list[i].at("object"));
        if (!ref) throw Error(ErrorCode::SchemaViolation, "/actions/" + std::to_string(i) + "/object: bad reference");
        ObjectId id;
        try {
          id = scene_.resolve(*ref);
        } catch (const Error& e) {
          throw Error(ErrorCode::UnknownObject, "/actions/" + std::to_string(i) + "/object: " + e.detail());
        }
        actions.emplace_back(id, parse_building_block(list[i]));
      }
      for (const auto& [id, block] : actions) {
        fusion_.attach_building_block(scene_, id, block);
        outcome.fused.push_back(scene_.get(id).name);
      }
      break;
    }
    case TaskType::Converse:
      if (!payload.empty()) require_schema(conversation_schema(), payload);
      break;
  }
  return outcome;
}

Engine Engine::preview(const std::vector<CommandEnvelope>& pending) const {
  Engine copy(*this);
  for (const auto& command : pending) {
    try {
      copy.dispatch(command);
    } catch (const Error&) {
      // Failed subtasks change nothing in the real dispatch either.
    }
  }
  return copy;
}

ContextPayload Engine::retrieve(const std::vector<ContextCategory>& request, const HistoryQueue* history) const {
  ContextSources sources;
  sources.room_proxies = &fusion_.proxies();
  sources.user = &fusion_.user();
  sources.prefabs = &prefabs_;
  sources.history = history;
  return context_.retrieve(request, snapshot(), sources);
}

TickResult Engine::tick() {
  TickResult result;
  result.events = animations_.tick(scene_);
  result.tick = animations_.current_tick();
  fusion_.apply_constraints(scene_);

  std::vector<ObjectId> candidates = animations_.take_settled_subjects();
  candidates.insert(candidates.end(), pending_settle_.begin(), pending_settle_.end());
  pending_settle_.clear();
  std::vector<ObjectId> ready;
  for (ObjectId id : candidates) {
    if (!scene_.contains(id) || std::find(ready.begin(), ready.end(), id) != ready.end()) continue;
    // Carried or parented objects move with their parent; anything still
    // animated settles when its animation ends.
    if (scene_.get(id).parent || animations_.animating(id)) continue;
    ready.push_back(id);
  }
  result.adjustments = settle(ready);
  animations_.reaim_gazes(scene_);
  return result;
}

bool Engine::update_hand_pose(const HandPose& pose) {
  try {
    fusion_.update_hand_pose(pose);
    return true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::StaleTimestamp) throw;
    warn(std::string("hand pose dropped: ") + e.what());
    return false;
  }
}

void Engine::pick(const ObjectRef& object, Hand hand) { fusion_.pick(scene_, scene_.resolve(object), hand); }

std::optional<ObjectId> Engine::release(Hand hand) {
  auto released = fusion_.release(scene_, hand);
  if (released) pending_settle_.push_back(*released);
  return released;
}

std::vector<AnimationEvent> Engine::stop_animation(const std::string& id) { return animations_.stop(id); }

SceneSnapshot Engine::snapshot() const {
  return capture(scene_, animations_.current_tick(), animations_.active(scene_));
}

}  // namespace scenewright
