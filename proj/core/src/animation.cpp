#include "scenewright/animation.hpp"

#include "scenewright/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace scenewright {

namespace {

constexpr std::array<std::pair<AnimationUnit, std::string_view>, 11> kUnits = {{
    {AnimationUnit::Translate, "Translate"},
    {AnimationUnit::Rotate, "Rotate"},
    {AnimationUnit::Gaze, "Gaze"},
    {AnimationUnit::Orbit, "Orbit"},
    {AnimationUnit::Scaling, "Scaling"},
    {AnimationUnit::Coloring, "Coloring"},
    {AnimationUnit::Attach, "Attach"},
    {AnimationUnit::Detach, "Detach"},
    {AnimationUnit::Catch, "Catch"},
    {AnimationUnit::Stop, "Stop"},
    {AnimationUnit::Destroy, "Destroy"},
}};

/// A Catch id is only recorded through its "<id>/..." steps.
bool knows(const std::map<std::string, AnimationState>& states, const std::string& id) {
  const auto it = states.lower_bound(id);
  return it != states.end() && (it->first == id || it->first.starts_with(id + "/"));
}

[[noreturn]] void missing(const std::string& id, std::string_view unit, std::string_view what) {
  throw Error(ErrorCode::MissingTarget,
              "'" + id + "' (" + std::string(unit) + ") needs " + std::string(what));
}

std::optional<Vec3> parse_axis(const nlohmann::json& v) {
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s == "x" || s == "X") return Vec3::UnitX();
    if (s == "y" || s == "Y") return Vec3::UnitY();
    if (s == "z" || s == "Z") return Vec3::UnitZ();
    return std::nullopt;
  }
  auto a = parse_vec3(v);
  if (!a || a->norm() < 1e-12) return std::nullopt;
  return a->normalized();
}

bool is_ref_like(const nlohmann::json& v) { return v.is_string() || v.is_object(); }

std::uint64_t step_count(double seconds, double dt) {
  if (!(seconds > 0.0)) return 1;
  const double n = std::ceil(seconds / dt - 1e-9);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(n));
}

double angle_between(const Quat& a, const Quat& b) { return rad_to_deg(a.angularDistance(b)); }

}  // namespace

std::string_view to_string(AnimationUnit unit) noexcept {
  for (const auto& [u, name] : kUnits)
    if (u == unit) return name;
  return "Translate";
}

std::optional<AnimationUnit> animation_unit_from_string(std::string_view name) noexcept {
  auto lower = [](char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); };
  for (const auto& [u, n] : kUnits)
    if (std::ranges::equal(n, name, {}, lower, lower)) return u;
  return std::nullopt;
}

bool is_instantaneous(AnimationUnit unit) noexcept {
  return unit == AnimationUnit::Attach || unit == AnimationUnit::Detach || unit == AnimationUnit::Stop ||
         unit == AnimationUnit::Destroy;
}

nlohmann::json to_json(const AnimationSpec& spec) {
  nlohmann::json j = {{"id", spec.id}, {"unit", std::string(to_string(spec.unit))}};
  if (spec.subject) j["subject"] = to_json(*spec.subject);
  if (spec.point) j["point"] = to_json(*spec.point);
  if (spec.target) j["target"] = to_json(*spec.target);
  if (spec.euler) j["euler"] = to_json(*spec.euler);
  if (spec.axis) j["axis"] = to_json(*spec.axis);
  if (spec.degrees) j["degrees"] = *spec.degrees;
  if (spec.scale) j["scale"] = to_json(*spec.scale);
  if (spec.color) j["color"] = to_json(*spec.color);
  if (!spec.stop_id.empty()) j["stop_id"] = spec.stop_id;
  if (spec.destination_object) j["destination"] = to_json(*spec.destination_object);
  if (spec.speed) j["speed"] = *spec.speed;
  if (spec.duration) j["duration"] = *spec.duration;
  j["frame"] = spec.frame == Frame::Local ? "local" : "world";
  if (!spec.sequence_group.empty()) j["sequence_group"] = spec.sequence_group;
  if (spec.standoff > 0.0) j["standoff"] = spec.standoff;
  if (spec.carry) j["carry"] = to_json(*spec.carry);
  return j;
}

const nlohmann::json& animation_schema() {
  static const nlohmann::json kSchema = nlohmann::json::parse(R"({
    "type": "object",
    "required": ["animations"],
    "additionalProperties": false,
    "properties": {
      "animations": {
        "type": "array",
        "minItems": 1,
        "items": {
          "type": "object",
          "required": ["id", "unit"],
          "additionalProperties": false,
          "properties": {
            "id": {"type": "string", "minLength": 1},
            "unit": {"type": "string", "minLength": 1},
            "subject": {"type": ["string", "object"]},
            "target": {"type": ["string", "object", "array", "number"]},
            "axis": {"anyOf": [
              {"enum": ["x", "y", "z"]},
              {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": "number"}}
            ]},
            "degrees": {"type": "number"},
            "speed": {"type": "number", "exclusiveMinimum": 0},
            "duration": {"type": "number", "minimum": 0},
            "frame": {"enum": ["world", "local"]},
            "sequence_group": {"type": "string", "minLength": 1},
            "standoff": {"type": "number", "minimum": 0},
            "agent": {"type": ["string", "object"]},
            "item": {"type": ["string", "object"]},
            "destination": {"type": ["string", "object", "array"]}
          }
        }
      }
    }
  })");
  return kSchema;
}

std::vector<AnimationSpec> expand_catch(const AnimationSpec& spec) {
  if (!spec.subject) missing(spec.id, "Catch", "an agent");
  if (!spec.target) missing(spec.id, "Catch", "an item");
  if (!spec.point && !spec.destination_object) missing(spec.id, "Catch", "a destination");
  const std::string group = spec.sequence_group.empty() ? "catch:" + spec.id : spec.sequence_group;

  auto base = [&](std::string_view suffix, AnimationUnit unit) {
    AnimationSpec s;
    s.id = spec.id + "/" + std::string(suffix);
    s.unit = unit;
    s.sequence_group = group;
    return s;
  };

  AnimationSpec approach = base("approach", AnimationUnit::Translate);
  approach.subject = spec.subject;
  approach.target = spec.target;
  approach.standoff = kCatchStandoff;
  approach.speed = spec.speed;

  AnimationSpec face = base("face", AnimationUnit::Rotate);
  face.subject = spec.subject;
  face.target = spec.target;
  face.duration = kCatchFaceDuration;

  AnimationSpec attach = base("attach", AnimationUnit::Attach);
  attach.subject = spec.target;
  attach.target = spec.subject;

  AnimationSpec carry = base("carry", AnimationUnit::Translate);
  carry.subject = spec.subject;
  carry.carry = spec.target;
  carry.point = spec.point;
  carry.destination_object = spec.destination_object;
  carry.speed = spec.speed;

  AnimationSpec release = base("release", AnimationUnit::Detach);
  release.subject = spec.target;

  return {approach, face, attach, carry, release};
}

std::vector<AnimationSpec> parse_animation_request(const nlohmann::json& command) {
  const nlohmann::json* items = &command;
  if (command.is_object()) {
    auto it = command.find("animations");
    if (it == command.end()) throw Error(ErrorCode::SchemaViolation, "/animations: missing required property");
    items = &*it;
  }
  if (!items->is_array()) throw Error(ErrorCode::SchemaViolation, "/animations: expected array");

  std::vector<AnimationSpec> out;
  for (std::size_t i = 0; i < items->size(); ++i) {
    const auto& item = (*items)[i];
    const std::string path = "/animations/" + std::to_string(i);
    if (!item.is_object()) throw Error(ErrorCode::SchemaViolation, path + ": expected object");
    const std::string unit_name = item.value("unit", "");
    const auto unit = animation_unit_from_string(unit_name);
    if (!unit) throw Error(ErrorCode::UnknownUnit, path + "/unit: '" + unit_name + "'");

    AnimationSpec spec;
    spec.unit = *unit;
    spec.id = item.value("id", "");
    if (spec.id.empty()) throw Error(ErrorCode::SchemaViolation, path + "/id: missing required property");
    if (auto it = item.find("subject"); it != item.end()) spec.subject = parse_object_ref(*it);
    if (auto it = item.find("speed"); it != item.end() && it->is_number()) spec.speed = it->get<double>();
    if (auto it = item.find("duration"); it != item.end() && it->is_number()) spec.duration = it->get<double>();
    if (auto it = item.find("degrees"); it != item.end() && it->is_number()) spec.degrees = it->get<double>();
    if (auto it = item.find("axis"); it != item.end()) {
      spec.axis = parse_axis(*it);
      if (!spec.axis) throw Error(ErrorCode::SchemaViolation, path + "/axis: expected x, y, z or a non-zero vector");
    }
    if (auto it = item.find("frame"); it != item.end() && it->is_string())
      spec.frame = frame_from_string(it->get_ref<const std::string&>()).value_or(Frame::World);
    spec.sequence_group = item.value("sequence_group", "");
    spec.standoff = item.value("standoff", 0.0);
    if (spec.speed && !(*spec.speed > 0.0)) throw Error(ErrorCode::SchemaViolation, path + "/speed: must be > 0");
    if (spec.duration && *spec.duration < 0.0)
      throw Error(ErrorCode::SchemaViolation, path + "/duration: must be >= 0");

    const nlohmann::json* target = nullptr;
    if (auto it = item.find("target"); it != item.end()) target = &*it;
    const std::string_view u = to_string(spec.unit);

    if (spec.unit != AnimationUnit::Stop && spec.unit != AnimationUnit::Catch && !spec.subject)
      missing(spec.id, u, "a subject");

    switch (spec.unit) {
      case AnimationUnit::Translate:
        if (!target) missing(spec.id, u, "a target point or object");
        if (target->is_array()) {
          spec.point = parse_vec3(*target);
          if (!spec.point) missing(spec.id, u, "a target [x, y, z]");
        } else if (is_ref_like(*target)) {
          spec.target = parse_object_ref(*target);
          if (!spec.target) missing(spec.id, u, "a valid target reference");
        } else {
          missing(spec.id, u, "a target point or object");
        }
        break;
      case AnimationUnit::Rotate:
        if (target) {
          if (target->is_array()) {
            const auto e = parse_vec3(*target);
            if (!e) missing(spec.id, u, "a target [yaw, pitch, roll]");
            spec.euler = Euler{e->x(), e->y(), e->z()}.normalized();
          } else if (is_ref_like(*target)) {
            spec.target = parse_object_ref(*target);
            if (!spec.target) missing(spec.id, u, "a valid target reference");
          } else {
            missing(spec.id, u, "an orientation, object or axis");
          }
        }
        break;
      case AnimationUnit::Gaze:
      case AnimationUnit::Orbit:
      case AnimationUnit::Attach:
        if (!target || !is_ref_like(*target)) missing(spec.id, u, "a target object");
        spec.target = parse_object_ref(*target);
        if (!spec.target) missing(spec.id, u, "a valid target reference");
        break;
      case AnimationUnit::Scaling:
        if (!target) missing(spec.id, u, "a target scale");
        spec.scale = parse_scale(*target);
        if (!spec.scale) missing(spec.id, u, "a positive target scale");
        break;
      case AnimationUnit::Coloring:
        if (!target) missing(spec.id, u, "a target color");
        spec.color = parse_color(*target);
        if (!spec.color) missing(spec.id, u, "a recognizable target color");
        break;
      case AnimationUnit::Stop:
        if (!target || !target->is_string() || target->get_ref<const std::string&>().empty())
          missing(spec.id, u, "the id of the animation to stop");
        spec.stop_id = target->get<std::string>();
        break;
      case AnimationUnit::Catch: {
        if (auto it = item.find("agent"); it != item.end()) spec.subject = parse_object_ref(*it);
        if (auto it = item.find("item"); it != item.end()) spec.target = parse_object_ref(*it);
        else if (target && is_ref_like(*target)) spec.target = parse_object_ref(*target);
        if (auto it = item.find("destination"); it != item.end()) {
          if (it->is_array()) spec.point = parse_vec3(*it);
          else spec.destination_object = parse_object_ref(*it);
        }
        const auto expanded = expand_catch(spec);
        out.insert(out.end(), expanded.begin(), expanded.end());
        continue;
      }
      case AnimationUnit::Detach:
      case AnimationUnit::Destroy:
        break;
    }
    out.push_back(std::move(spec));
  }
  return out;
}

nlohmann::json AnimationEvent::to_json() const {
  return {{"tick", tick}, {"id", id}, {"unit", unit}, {"kind", kind}, {"subject", subject}};
}

AnimationLibrary::AnimationLibrary(double timestep, ContextLibrary* registry) : dt_(timestep), registry_(registry) {
  if (!(dt_ > 0.0)) throw Error(ErrorCode::ConfigInvalid, "timestep must be positive");
}

std::string AnimationLibrary::subject_label(const AnimationSpec& spec) const {
  if (spec.subject) return describe(*spec.subject);
  if (spec.unit == AnimationUnit::Stop) return spec.stop_id;
  return {};
}

void AnimationLibrary::mark(const std::string& id, AnimationState state) {
  states_[id] = state;
  if (registry_) registry_->mark_animation(id, state);
}

std::vector<std::string> AnimationLibrary::schedule(const std::vector<AnimationSpec>& specs) {
  std::set<std::string> batch;
  for (const auto& spec : specs) {
    if (spec.id.empty()) throw Error(ErrorCode::SchemaViolation, "animation id must be non-empty");
    auto it = states_.find(spec.id);
    const bool live = it != states_.end() && (it->second == AnimationState::Queued || it->second == AnimationState::Active);
    if (live || !batch.insert(spec.id).second)
      throw Error(ErrorCode::DuplicateActiveId, "'" + spec.id + "' is already queued or running");
    if (spec.unit == AnimationUnit::Catch)
      throw Error(ErrorCode::SchemaViolation, "'" + spec.id + "': Catch must be expanded before scheduling");
  }
  std::vector<std::string> ids;
  for (const auto& spec : specs) {
    const std::string group = spec.sequence_group.empty() ? "~" + spec.id : spec.sequence_group;
    auto [qit, inserted] = queues_.try_emplace(group);
    if (inserted || std::find(group_order_.begin(), group_order_.end(), group) == group_order_.end())
      group_order_.push_back(group);
    qit->second.push_back(spec);
    if (registry_)
      registry_->register_animation(spec.id, {std::string(to_string(spec.unit)), subject_label(spec),
                                              spec.sequence_group, AnimationState::Queued});
    mark(spec.id, AnimationState::Queued);
    ids.push_back(spec.id);
  }
  return ids;
}

AnimationEvent AnimationLibrary::event(const AnimationSpec& spec, std::string_view kind,
                                       const std::string& subject) const {
  return {tick_, spec.id, std::string(to_string(spec.unit)), std::string(kind), subject};
}

bool AnimationLibrary::bind(Instance& inst, Scene& scene) {
  const AnimationSpec& spec = inst.spec;
  try {
    if (spec.unit == AnimationUnit::Stop) {
      inst.total = 1;
      return true;
    }
    inst.subject = scene.resolve(*spec.subject);
    const WorldPose pose = scene.world_pose(inst.subject);
    inst.start_position = pose.position;
    inst.start_rotation = pose.rotation;
    const double speed_or = spec.speed.value_or(0.0);

    auto timed = [&](double magnitude, double default_speed) {
      const double seconds = spec.duration ? *spec.duration : magnitude / (spec.speed ? speed_or : default_speed);
      inst.total = step_count(seconds, dt_);
    };
    auto sweep_or_spin = [&]() {
      inst.axis = spec.axis.value_or(Vec3::UnitY());
      if (spec.degrees) {
        inst.sweep = *spec.degrees;
        timed(std::abs(inst.sweep), kDefaultAngularSpeed);
      } else {
        inst.angular_speed = spec.speed.value_or(kDefaultAngularSpeed);
        if (spec.duration) inst.total = step_count(*spec.duration, dt_);
      }
    };

    switch (spec.unit) {
      case AnimationUnit::Translate: {
        Vec3 end;
        if (spec.carry) {
          const ObjectId item = scene.resolve(*spec.carry);
          const Vec3 dest =
              spec.point ? *spec.point : scene.world_pose(scene.resolve(*spec.destination_object)).position;
          end = inst.start_position + (dest - scene.world_pose(item).position);
        } else if (spec.point) {
          end = spec.frame == Frame::Local ? Vec3(inst.start_position + pose.rotation * *spec.point) : *spec.point;
        } else {
          const Vec3 goal = scene.world_pose(scene.resolve(*spec.target)).position;
          end = goal;
          if (spec.standoff > 0.0) {
            // Approach along the floor and stop short of the object.
            Vec3 flat = goal - inst.start_position;
            flat.y() = 0.0;
            const double d = flat.norm();
            end = d <= spec.standoff ? inst.start_position
                                     : Vec3(inst.start_position + flat * ((d - spec.standoff) / d));
          }
        }
        inst.end_position = end;
        timed((end - inst.start_position).norm(), kDefaultTranslateSpeed);
        break;
      }
      case AnimationUnit::Rotate: {
        if (spec.euler) {
          const Quat local = to_quat(*spec.euler);
          inst.end_rotation = spec.frame == Frame::Local ? Quat(scene.parent_pose(inst.subject).rotation * local) : local;
          timed(angle_between(inst.start_rotation, inst.end_rotation), kDefaultAngularSpeed);
        } else if (spec.target) {
          const Vec3 goal = scene.world_pose(scene.resolve(*spec.target)).position;
          const Euler current = to_euler(inst.start_rotation);
          const Vec3 d = goal - inst.start_position;
          const double yaw = std::hypot(d.x(), d.z()) < 1e-12 ? current.yaw : rad_to_deg(std::atan2(d.x(), d.z()));
          inst.end_rotation = to_quat(Euler{yaw, current.pitch, current.roll});
          timed(angle_between(inst.start_rotation, inst.end_rotation), kDefaultAngularSpeed);
        } else {
          sweep_or_spin();
        }
        break;
      }
      case AnimationUnit::Gaze:
        inst.other = scene.resolve(*spec.target);
        if (spec.duration) inst.total = step_count(*spec.duration, dt_);
        break;
      case AnimationUnit::Orbit:
        inst.other = scene.resolve(*spec.target);
        if (*inst.other == inst.subject)
          throw Error(ErrorCode::InvalidTransform, "an object cannot orbit itself");
        inst.orbit_offset = inst.start_position - scene.world_pose(*inst.other).position;
        sweep_or_spin();
        break;
      case AnimationUnit::Scaling: {
        inst.start_scale = scene.get(inst.subject).local.scale;
        inst.end_scale = *spec.scale;
        const double change = (inst.end_scale - inst.start_scale).cwiseAbs().maxCoeff();
        inst.total = step_count(spec.duration ? *spec.duration : spec.speed ? change / *spec.speed : kDefaultBlendDuration, dt_);
        break;
      }
      case AnimationUnit::Coloring:
        inst.start_color = scene.get(inst.subject).color;
        inst.end_color = *spec.color;
        inst.total = step_count(spec.duration.value_or(kDefaultBlendDuration), dt_);
        break;
      case AnimationUnit::Attach:
        inst.other = scene.resolve(*spec.target);
        break;
      default:
        break;
    }
    if (is_instantaneous(spec.unit)) inst.total = 1;
    return true;
  } catch (const Error& e) {
    warn("animation '" + spec.id + "' skipped: " + e.what());
    return false;
  }
}

void AnimationLibrary::activate_group(const std::string& group, Scene& scene, std::vector<AnimationEvent>& events) {
  auto qit = queues_.find(group);
  if (qit == queues_.end()) return;
  for (const auto& inst : running_)
    if (!inst.removed && inst.group == group) return;
  while (!qit->second.empty()) {
    Instance inst;
    inst.spec = std::move(qit->second.front());
    qit->second.pop_front();
    inst.group = group;
    inst.started = tick_;
    if (!bind(inst, scene)) {
      events.push_back(event(inst.spec, "skipped", subject_label(inst.spec)));
      mark(inst.spec.id, AnimationState::Skipped);
      continue;
    }
    const std::string subject =
        inst.spec.unit == AnimationUnit::Stop ? inst.spec.stop_id : scene.get(inst.subject).name;
    events.push_back(event(inst.spec, "started", subject));
    mark(inst.spec.id, AnimationState::Active);
    running_.push_back(std::move(inst));
    return;
  }
}

void AnimationLibrary::activate_ready(Scene& scene, std::vector<AnimationEvent>& events) {
  const std::vector<std::string> order = group_order_;
  for (const auto& group : order) activate_group(group, scene, events);
}

AnimationLibrary::StepResult AnimationLibrary::step(Instance& inst, Scene& scene, std::vector<AnimationEvent>& events) {
  const AnimationSpec& spec = inst.spec;
  if (spec.unit != AnimationUnit::Stop && !scene.contains(inst.subject)) {
    warn("animation '" + spec.id + "' skipped: subject no longer exists");
    return StepResult::Skipped;
  }
  const std::uint64_t k = ++inst.steps;
  const bool last = inst.total && k >= *inst.total;
  const double fraction = inst.total ? (last ? 1.0 : static_cast<double>(k) / static_cast<double>(*inst.total)) : 0.0;
  const double elapsed = static_cast<double>(k) * dt_;
  auto swept = [&]() { return spec.degrees ? inst.sweep * fraction : inst.angular_speed * elapsed; };

  try {
    switch (spec.unit) {
      case AnimationUnit::Translate:
        scene.set_world_position(inst.subject,
                                 last ? inst.end_position
                                      : Vec3(inst.start_position + (inst.end_position - inst.start_position) * fraction));
        break;
      case AnimationUnit::Rotate:
        if (spec.euler || spec.target) {
          scene.set_world_rotation(inst.subject, last ? inst.end_rotation : inst.start_rotation.slerp(fraction, inst.end_rotation));
        } else {
          const Quat r(Eigen::AngleAxisd(deg_to_rad(swept()), inst.axis));
          scene.set_world_rotation(inst.subject, spec.frame == Frame::Local ? Quat(inst.start_rotation * r)
                                                                             : Quat(r * inst.start_rotation));
        }
        break;
      case AnimationUnit::Gaze: {
        if (!scene.contains(*inst.other)) throw Error(ErrorCode::NotFound, "gaze target no longer exists");
        const auto look = look_rotation(scene.world_pose(*inst.other).position - scene.world_pose(inst.subject).position);
        if (look) scene.set_world_rotation(inst.subject, to_quat(*look));
        break;
      }
      case AnimationUnit::Orbit: {
        if (!scene.contains(*inst.other)) throw Error(ErrorCode::NotFound, "orbit center no longer exists");
        const Vec3 center = scene.world_pose(*inst.other).position;
        const Quat r(Eigen::AngleAxisd(deg_to_rad(swept()), inst.axis));
        scene.set_world_position(inst.subject, center + r * inst.orbit_offset);
        break;
      }
      case AnimationUnit::Scaling: {
        Transform local = scene.get(inst.subject).local;
        local.scale = last ? inst.end_scale : Vec3(inst.start_scale + (inst.end_scale - inst.start_scale) * fraction);
        scene.set_local_transform(inst.subject, local);
        break;
      }
      case AnimationUnit::Coloring:
        scene.set_color(inst.subject, last ? inst.end_color : inst.start_color.lerp(inst.end_color, fraction));
        break;
      case AnimationUnit::Attach: {
        if (!scene.contains(*inst.other)) throw Error(ErrorCode::NotFound, "attach parent no longer exists");
        const auto previous = scene.get(inst.subject).parent;
        scene.set_parent(inst.subject, *inst.other, true);
        attach_records_[inst.subject] = previous;
        break;
      }
      case AnimationUnit::Detach: {
        std::optional<ObjectId> parent;
        if (auto it = attach_records_.find(inst.subject); it != attach_records_.end()) {
          parent = it->second;
          attach_records_.erase(it);
        }
        if (parent && !scene.contains(*parent)) parent.reset();
        scene.set_parent(inst.subject, parent, true);
        break;
      }
      case AnimationUnit::Stop:
        if (!knows(states_, spec.stop_id))
          throw Error(ErrorCode::NotFound, "no animation '" + spec.stop_id + "' to stop");
        pending_stops_.push_back(spec.stop_id);
        break;
      case AnimationUnit::Destroy: {
        const ObjectId doomed = inst.subject;
        for (auto& other : running_) {
          if (&other == &inst || other.removed) continue;
          const bool refers = other.subject == doomed || (other.other && *other.other == doomed);
          if (refers && other.spec.unit != AnimationUnit::Stop) {
            other.removed = true;
            events.push_back(event(other.spec, "stopped", subject_label(other.spec)));
            mark(other.spec.id, AnimationState::Stopped);
            warn("animation '" + other.spec.id + "' removed with destroyed object");
          }
        }
        scene.destroy_object(doomed);
        attach_records_.erase(doomed);
        break;
      }
      case AnimationUnit::Catch:
        break;
    }
  } catch (const Error& e) {
    warn("animation '" + spec.id + "' skipped: " + e.what());
    return StepResult::Skipped;
  }
  return inst.total && k >= *inst.total ? StepResult::Completed : StepResult::Running;
}

void AnimationLibrary::finish(Instance& inst, AnimationState state) {
  inst.removed = true;
  mark(inst.spec.id, state);
  if (inst.spec.unit != AnimationUnit::Destroy && inst.spec.unit != AnimationUnit::Stop)
    settled_.push_back(inst.subject);
}

std::vector<AnimationEvent> AnimationLibrary::tick(Scene& scene) {
  ++tick_;
  std::vector<AnimationEvent> events;
  activate_ready(scene, events);

  for (std::size_t i = 0; i < running_.size(); ++i) {
    if (running_[i].removed) continue;
    const StepResult result = step(running_[i], scene, events);
    Instance& inst = running_[i];
    const std::string group = inst.group;
    const std::string subject = inst.spec.unit == AnimationUnit::Stop
                                    ? inst.spec.stop_id
                                    : (scene.contains(inst.subject) ? scene.get(inst.subject).name
                                                                    : subject_label(inst.spec));
    std::set<std::string> freed;
    if (result == StepResult::Running) {
      events.push_back(event(inst.spec, "progressed", subject));
    } else {
      const bool ok = result == StepResult::Completed;
      events.push_back(event(inst.spec, ok ? "completed" : "skipped", subject));
      finish(inst, ok ? AnimationState::Completed : AnimationState::Skipped);
    }
    // A Stop or Destroy step may have ended other instances; their groups
    // move on in this tick as well.
    auto stops = std::move(pending_stops_);
    pending_stops_.clear();
    for (const auto& id : stops) {
      auto stopped = stop(id);
      events.insert(events.end(), stopped.begin(), stopped.end());
    }
    for (const auto& r : running_)
      if (r.removed) freed.insert(r.group);
    // Activation appends to running_, so a newly started instance is stepped
    // later in this same loop.
    const std::vector<std::string> order = group_order_;
    for (const auto& g : order)
      if (freed.contains(g)) activate_group(g, scene, events);
  }

  std::erase_if(running_, [](const Instance& inst) { return inst.removed; });
  std::erase_if(group_order_, [&](const std::string& g) {
    auto it = queues_.find(g);
    const bool empty_queue = it == queues_.end() || it->second.empty();
    const bool busy = std::any_of(running_.begin(), running_.end(), [&](const Instance& r) { return r.group == g; });
    if (empty_queue && !busy) {
      if (it != queues_.end()) queues_.erase(it);
      return true;
    }
    return false;
  });
  return events;
}

std::vector<AnimationEvent> AnimationLibrary::stop(const std::string& id) {
  auto matches = [&](const std::string& candidate) { return candidate == id || candidate.starts_with(id + "/"); };
  if (!knows(states_, id)) throw Error(ErrorCode::NotFound, "animation '" + id + "'");
  const auto it = states_.lower_bound(id);
  std::vector<AnimationEvent> events;

  bool any = false;
  for (auto& inst : running_) {
    if (inst.removed || !matches(inst.spec.id)) continue;
    inst.removed = true;
    any = true;
    events.push_back(event(inst.spec, "stopped", subject_label(inst.spec)));
    mark(inst.spec.id, AnimationState::Stopped);
    if (inst.spec.unit != AnimationUnit::Stop && inst.spec.unit != AnimationUnit::Destroy)
      settled_.push_back(inst.subject);
  }
  for (auto& [group, queue] : queues_) {
    for (auto q = queue.begin(); q != queue.end();) {
      if (matches(q->id)) {
        any = true;
        events.push_back(event(*q, "stopped", subject_label(*q)));
        mark(q->id, AnimationState::Stopped);
        q = queue.erase(q);
      } else {
        ++q;
      }
    }
  }
  if (!any) warn("stop '" + id + "': animation already " + std::string(to_string(it->second)) + "; nothing to do");
  return events;
}

std::vector<AnimationEvent> AnimationLibrary::forget_object(ObjectId object) {
  std::vector<AnimationEvent> events;
  for (auto& inst : running_) {
    if (inst.removed || inst.spec.unit == AnimationUnit::Stop) continue;
    if (inst.subject != object && !(inst.other && *inst.other == object)) continue;
    inst.removed = true;
    events.push_back(event(inst.spec, "stopped", subject_label(inst.spec)));
    mark(inst.spec.id, AnimationState::Stopped);
    warn("animation '" + inst.spec.id + "' removed with its object");
  }
  std::erase_if(running_, [](const Instance& inst) { return inst.removed; });
  attach_records_.erase(object);
  return events;
}

void AnimationLibrary::reaim_gazes(Scene& scene) const {
  for (const auto& inst : running_) {
    if (inst.removed || inst.spec.unit != AnimationUnit::Gaze) continue;
    if (!scene.contains(inst.subject) || !scene.contains(*inst.other)) continue;
    const auto look = look_rotation(scene.world_pose(*inst.other).position - scene.world_pose(inst.subject).position);
    if (look) scene.set_world_rotation(inst.subject, to_quat(*look));
  }
}

std::vector<AnimationStatus> AnimationLibrary::active(const Scene& scene) const {
  std::vector<AnimationStatus> out;
  for (const auto& inst : running_) {
    if (inst.removed) continue;
    AnimationStatus s;
    s.id = inst.spec.id;
    s.unit = std::string(to_string(inst.spec.unit));
    s.subject = inst.spec.unit == AnimationUnit::Stop
                    ? inst.spec.stop_id
                    : (scene.contains(inst.subject) ? scene.get(inst.subject).name : subject_label(inst.spec));
    s.progress = inst.total ? std::min(1.0, static_cast<double>(inst.steps) / static_cast<double>(*inst.total)) : 0.0;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> AnimationLibrary::active_ids() const {
  std::vector<std::string> out;
  for (const auto& inst : running_)
    if (!inst.removed) out.push_back(inst.spec.id);
  return out;
}

bool AnimationLibrary::is_active(const std::string& id) const {
  auto it = states_.find(id);
  return it != states_.end() && it->second == AnimationState::Active;
}

bool AnimationLibrary::is_queued(const std::string& id) const {
  auto it = states_.find(id);
  return it != states_.end() && it->second == AnimationState::Queued;
}

bool AnimationLibrary::idle() const noexcept {
  if (std::any_of(running_.begin(), running_.end(), [](const Instance& inst) { return !inst.removed; })) return false;
  return std::all_of(queues_.begin(), queues_.end(), [](const auto& q) { return q.second.empty(); });
}

bool AnimationLibrary::animating(ObjectId object) const {
  return std::any_of(running_.begin(), running_.end(), [&](const Instance& inst) {
    return !inst.removed && inst.spec.unit != AnimationUnit::Stop && inst.subject == object;
  });
}

std::vector<ObjectId> AnimationLibrary::take_settled_subjects() {
  std::vector<ObjectId> out;
  out.swap(settled_);
  return out;
}

}  // namespace scenewright
