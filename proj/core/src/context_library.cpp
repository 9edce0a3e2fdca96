#include "scenewright/context_library.hpp"

#include "scenewright/error.hpp"

#include <cstdio>

namespace scenewright {

std::string_view to_string(CategoryKind kind) noexcept {
  switch (kind) {
    case CategoryKind::Resources: return "resources";
    case CategoryKind::VirtualObjects: return "virtual_objects";
    case CategoryKind::RealWorld: return "real_world";
    case CategoryKind::Animations: return "animations";
    case CategoryKind::UserContext: return "user_context";
    case CategoryKind::History: return "history";
  }
  return "resources";
}

std::string_view to_string(Property property) noexcept {
  switch (property) {
    case Property::Position: return "position";
    case Property::Orientation: return "orientation";
    case Property::Scale: return "scale";
    case Property::Size: return "size";
    case Property::Color: return "color";
    case Property::Tags: return "tags";
    case Property::Parent: return "parent";
    case Property::Id: return "id";
  }
  return "position";
}

CategoryKind parse_category_kind(std::string_view name) {
  for (auto kind : {CategoryKind::Resources, CategoryKind::VirtualObjects, CategoryKind::RealWorld,
                    CategoryKind::Animations, CategoryKind::UserContext, CategoryKind::History})
    if (to_string(kind) == name) return kind;
  throw Error(ErrorCode::UnknownCategory, "'" + std::string(name) + "'");
}

Property parse_property(std::string_view name) {
  for (auto p : {Property::Position, Property::Orientation, Property::Scale, Property::Size, Property::Color,
                 Property::Tags, Property::Parent, Property::Id})
    if (to_string(p) == name) return p;
  throw Error(ErrorCode::UnknownProperty, "'" + std::string(name) + "'");
}

const std::set<Property>& allowed_properties(CategoryKind kind) {
  using P = Property;
  static const std::set<P> kResources = {P::Size, P::Scale, P::Tags};
  static const std::set<P> kVirtual = {P::Position, P::Orientation, P::Scale, P::Size,
                                       P::Color,    P::Tags,        P::Parent, P::Id};
  static const std::set<P> kReal = {P::Position, P::Orientation, P::Size, P::Tags, P::Id};
  static const std::set<P> kAnimations = {P::Id};
  static const std::set<P> kUser = {P::Position, P::Orientation};
  static const std::set<P> kHistory = {};
  switch (kind) {
    case CategoryKind::Resources: return kResources;
    case CategoryKind::VirtualObjects: return kVirtual;
    case CategoryKind::RealWorld: return kReal;
    case CategoryKind::Animations: return kAnimations;
    case CategoryKind::UserContext: return kUser;
    case CategoryKind::History: return kHistory;
  }
  return kHistory;
}

ContextCategory parse_category(const nlohmann::json& value) {
  ContextCategory cat;
  if (value.is_string()) {
    cat.kind = parse_category_kind(value.get_ref<const std::string&>());
    return cat;
  }
  if (!value.is_object() || !value.contains("kind") || !value["kind"].is_string())
    throw Error(ErrorCode::UnknownCategory, "category must name a kind");
  cat.kind = parse_category_kind(value["kind"].get_ref<const std::string&>());
  if (auto it = value.find("properties"); it != value.end()) {
    if (!it->is_array()) throw Error(ErrorCode::UnknownProperty, "properties must be an array");
    const auto& allowed = allowed_properties(cat.kind);
    for (const auto& p : *it) {
      if (!p.is_string()) throw Error(ErrorCode::UnknownProperty, p.dump());
      const Property prop = parse_property(p.get_ref<const std::string&>());
      if (!allowed.contains(prop))
        throw Error(ErrorCode::UnknownProperty,
                    "'" + std::string(to_string(prop)) + "' is not available for " + std::string(to_string(cat.kind)));
      cat.properties.insert(prop);
    }
  }
  return cat;
}

nlohmann::json to_json(const ContextCategory& category) {
  nlohmann::json props = nlohmann::json::array();
  for (Property p : category.properties) props.push_back(std::string(to_string(p)));
  return {{"kind", std::string(to_string(category.kind))}, {"properties", std::move(props)}};
}

std::vector<ContextCategory> all_categories() {
  std::vector<ContextCategory> out;
  for (auto kind : {CategoryKind::Resources, CategoryKind::VirtualObjects, CategoryKind::RealWorld,
                    CategoryKind::Animations, CategoryKind::UserContext, CategoryKind::History})
    out.push_back({kind, allowed_properties(kind)});
  return out;
}

HistoryQueue::HistoryQueue(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

void HistoryQueue::record(std::string text) {
  entries_.push_back(std::move(text));
  while (entries_.size() > capacity_) entries_.pop_front();
}

std::string_view to_string(AnimationState state) noexcept {
  switch (state) {
    case AnimationState::Queued: return "queued";
    case AnimationState::Active: return "active";
    case AnimationState::Completed: return "completed";
    case AnimationState::Stopped: return "stopped";
    case AnimationState::Skipped: return "skipped";
  }
  return "queued";
}

std::int64_t estimate_tokens(std::string_view text) noexcept {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

std::set<CategoryKind> ContextPayload::kinds() const {
  std::set<CategoryKind> out;
  for (const auto& [k, _] : sections) out.insert(k);
  return out;
}

std::string ContextPayload::render() const {
  std::string out;
  for (const auto& [kind, text] : sections) {
    out += "## ";
    out += to_string(kind);
    out += '\n';
    out += text.empty() ? std::string("(none)\n") : text;
  }
  return out;
}

namespace {

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string vec(const Vec3& v) { return "(" + num(v.x()) + "," + num(v.y()) + "," + num(v.z()) + ")"; }
std::string vec(const Euler& e) { return "(" + num(e.yaw) + "," + num(e.pitch) + "," + num(e.roll) + ")"; }

template <typename Range>
std::string list(const Range& items) {
  std::string out = "[";
  bool first = true;
  for (const auto& item : items) {
    if (!first) out += ",";
    first = false;
    out += item;
  }
  return out + "]";
}

const std::set<Property>& effective(const ContextCategory& cat) {
  return cat.properties.empty() ? allowed_properties(cat.kind) : cat.properties;
}

std::string resources_section(const std::set<Property>& props, const ContextSources& src) {
  std::string out;
  if (!src.prefabs) return out;
  for (const auto& [name, entry] : src.prefabs->entries()) {
    std::string line = name;
    for (Property p : props) {
      switch (p) {
        case Property::Scale: line += " | scale=" + vec(entry.default_scale); break;
        case Property::Size: line += " | size=" + vec(entry.bounds.dimensions.cwiseProduct(entry.default_scale)); break;
        case Property::Tags: line += " | tags=" + list(entry.tags); break;
        default: break;
      }
    }
    out += line + '\n';
  }
  return out;
}

std::string virtual_objects_section(const std::set<Property>& props, const SceneSnapshot& scene,
                                    const ContextSources& src) {
  std::set<std::uint64_t> proxy_ids;
  if (src.room_proxies)
    for (const auto& p : *src.room_proxies) proxy_ids.insert(p.object.value);
  std::map<std::uint64_t, const std::string*> names;
  for (const auto& s : scene.objects) names[s.object.id.value] = &s.object.name;

  std::string out;
  for (const auto& state : scene.objects) {
    const SceneObject& obj = state.object;
    if (proxy_ids.contains(obj.id.value) || obj.tags.contains("hand_anchor")) continue;
    std::string line = obj.name;
    for (Property p : props) {
      switch (p) {
        case Property::Position: line += " | position=" + vec(state.world_position); break;
        case Property::Orientation: line += " | orientation=" + vec(state.world_orientation); break;
        case Property::Scale: line += " | scale=" + vec(state.world_scale); break;
        case Property::Size:
          if (obj.geometry)
            line += " | size=" + std::string(to_string(obj.geometry->kind)) +
                    vec(obj.geometry->dimensions.cwiseProduct(state.world_scale));
          else
            line += " | size=none";
          break;
        case Property::Color:
          line += " | color=(" + num(obj.color.r) + "," + num(obj.color.g) + "," + num(obj.color.b) + "," +
                  num(obj.color.a) + ")";
          break;
        case Property::Tags: line += " | tags=" + list(obj.tags); break;
        case Property::Parent:
          line += " | parent=" + (obj.parent && names.contains(obj.parent->value) ? *names[obj.parent->value]
                                                                                  : std::string("none"));
          break;
        case Property::Id: line += " | id=" + std::to_string(obj.id.value); break;
      }
    }
    out += line + '\n';
  }
  return out;
}

std::string real_world_section(const std::set<Property>& props, const ContextSources& src) {
  std::string out;
  if (!src.room_proxies) return out;
  for (const auto& proxy : *src.room_proxies) {
    // Proxies carry generic names; their tags are what identifies them, so
    // tags are always listed.
    std::string line = proxy.generic_name + " | tags=" + list(proxy.tags);
    for (Property p : props) {
      switch (p) {
        case Property::Position: line += " | center=" + vec(proxy.center); break;
        case Property::Orientation: line += " | yaw=" + num(proxy.yaw_deg); break;
        case Property::Size: line += " | extents=" + vec(proxy.extents); break;
        case Property::Id: line += " | id=" + proxy.id; break;
        default: break;
      }
    }
    out += line + '\n';
  }
  return out;
}

std::string user_section(const std::set<Property>& props, const ContextSources& src) {
  const UserContext fallback;
  const UserContext& user = src.user ? *src.user : fallback;
  const bool pos = props.contains(Property::Position);
  const bool ori = props.contains(Property::Orientation);
  std::string out = "head";
  if (pos) out += " | position=" + vec(user.head.position);
  if (ori) out += " | orientation=" + vec(user.head.orientation);
  out += '\n';
  for (Hand h : {Hand::Left, Hand::Right}) {
    const auto& pose = user.hand(h);
    std::string line = std::string(to_string(h)) + "_hand";
    if (!pose) {
      out += line + " | untracked\n";
      continue;
    }
    if (pos) line += " | palm=" + vec(pose->palm_position);
    if (ori) line += " | orientation=" + vec(pose->palm_orientation);
    out += line + '\n';
    if (pos) {
      std::string bones = std::string(to_string(h)) + "_hand_bones";
      for (std::string_view name : hand_bone_names()) {
        auto it = pose->bones.find(std::string(name));
        if (it != pose->bones.end()) bones += " | " + std::string(name) + "=" + vec(it->second);
      }
      out += bones + '\n';
    }
  }
  return out;
}

std::string history_section(const ContextSources& src) {
  std::string out;
  if (!src.history) return out;
  int n = 1;
  for (const auto& msg : src.history->messages()) out += std::to_string(n++) + ". " + msg + '\n';
  return out;
}

}  // namespace

ContextPayload ContextLibrary::retrieve(const std::vector<ContextCategory>& request, const SceneSnapshot& scene,
                                        const ContextSources& sources) const {
  // Union of properties per kind when a kind is requested more than once.
  std::map<CategoryKind, std::set<Property>> merged;
  for (const auto& cat : request) {
    const auto& allowed = allowed_properties(cat.kind);
    for (Property p : cat.properties)
      if (!allowed.contains(p))
        throw Error(ErrorCode::UnknownProperty,
                    "'" + std::string(to_string(p)) + "' is not available for " + std::string(to_string(cat.kind)));
    auto& props = merged[cat.kind];
    const auto& eff = effective(cat);
    props.insert(eff.begin(), eff.end());
  }

  ContextPayload payload;
  for (const auto& [kind, props] : merged) {
    std::string text;
    switch (kind) {
      case CategoryKind::Resources: text = resources_section(props, sources); break;
      case CategoryKind::VirtualObjects: text = virtual_objects_section(props, scene, sources); break;
      case CategoryKind::RealWorld: text = real_world_section(props, sources); break;
      case CategoryKind::Animations:
        for (const auto& [id, d] : animations_)
          text += id + " | unit=" + d.unit + " | subject=" + d.subject + " | state=" +
                  std::string(to_string(d.state)) + '\n';
        break;
      case CategoryKind::UserContext: text = user_section(props, sources); break;
      case CategoryKind::History: text = history_section(sources); break;
    }
    payload.sections.emplace(kind, std::move(text));
  }
  payload.estimated_tokens = estimate_tokens(payload.render());
  return payload;
}

void ContextLibrary::register_animation(const std::string& id, AnimationDescriptor descriptor) {
  if (id.empty()) throw Error(ErrorCode::NotFound, "animation id must be non-empty");
  if (animations_.contains(id)) warn("animation id '" + id + "' re-registered; previous descriptor replaced");
  animations_.insert_or_assign(id, std::move(descriptor));
}

const AnimationDescriptor& ContextLibrary::lookup_animation(const std::string& id) const {
  auto it = animations_.find(id);
  if (it == animations_.end()) throw Error(ErrorCode::NotFound, "animation '" + id + "'");
  return it->second;
}

void ContextLibrary::mark_animation(const std::string& id, AnimationState state) {
  if (auto it = animations_.find(id); it != animations_.end()) it->second.state = state;
}

}  // namespace scenewright
