#pragma once

#include "scenewright/prefab_registry.hpp"
#include "scenewright/reality_fusion.hpp"
#include "scenewright/snapshot.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace scenewright {

enum class CategoryKind { Resources, VirtualObjects, RealWorld, Animations, UserContext, History };
enum class Property { Position, Orientation, Scale, Size, Color, Tags, Parent, Id };

std::string_view to_string(CategoryKind kind) noexcept;
std::string_view to_string(Property property) noexcept;
/// Throws UnknownCategory / UnknownProperty.
CategoryKind parse_category_kind(std::string_view name);
Property parse_property(std::string_view name);

/// Properties each category can describe. Requesting anything else is an
/// UnknownProperty error; an empty request means "all of them".
const std::set<Property>& allowed_properties(CategoryKind kind);

struct ContextCategory {
  CategoryKind kind = CategoryKind::VirtualObjects;
  std::set<Property> properties;

  friend bool operator==(const ContextCategory&, const ContextCategory&) = default;
};

/// {"kind": "...", "properties": [...]} -> category; validates the property
/// subset for the kind.
ContextCategory parse_category(const nlohmann::json& value);
nlohmann::json to_json(const ContextCategory& category);
std::vector<ContextCategory> all_categories();

/// Fixed-capacity FIFO of the user's latest messages; evicts oldest first.
class HistoryQueue {
 public:
  static constexpr std::size_t kDefaultCapacity = 10;

  explicit HistoryQueue(std::size_t capacity = kDefaultCapacity);
  void record(std::string text);
  [[nodiscard]] std::vector<std::string> messages() const { return {entries_.begin(), entries_.end()}; }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }

 private:
  std::size_t capacity_;
  std::deque<std::string> entries_;
};

enum class AnimationState { Queued, Active, Completed, Stopped, Skipped };
std::string_view to_string(AnimationState state) noexcept;

/// What the context library remembers about an animation id.
struct AnimationDescriptor {
  std::string unit;
  std::string subject;
  std::string group;
  AnimationState state = AnimationState::Queued;

  friend bool operator==(const AnimationDescriptor&, const AnimationDescriptor&) = default;
};

/// Everything beyond the scene snapshot a retrieval may draw on.
struct ContextSources {
  const std::vector<RoomProxy>* room_proxies = nullptr;
  const UserContext* user = nullptr;
  const PrefabRegistry* prefabs = nullptr;
  const HistoryQueue* history = nullptr;
};

struct ContextPayload {
  std::map<CategoryKind, std::string> sections;
  std::int64_t estimated_tokens = 0;

  [[nodiscard]] std::set<CategoryKind> kinds() const;
  /// Sections rendered in category order, each headed "## <kind>".
  [[nodiscard]] std::string render() const;
};

/// ceil(bytes / 4).
std::int64_t estimate_tokens(std::string_view text) noexcept;

class ContextLibrary {
 public:
  /// Sink for warnings (duplicate registrations, ...).
  using WarningSink = std::function<void(const std::string&)>;

  void set_warning_sink(WarningSink sink) { warn_ = std::move(sink); }

  /// Builds exactly the requested sections, each listing only the requested
  /// properties, one "name | prop=value | ..." line per entity.
  [[nodiscard]] ContextPayload retrieve(const std::vector<ContextCategory>& request, const SceneSnapshot& scene,
                                        const ContextSources& sources) const;

  void register_animation(const std::string& id, AnimationDescriptor descriptor);
  [[nodiscard]] const AnimationDescriptor& lookup_animation(const std::string& id) const;
  [[nodiscard]] bool has_animation(const std::string& id) const { return animations_.contains(id); }
  void mark_animation(const std::string& id, AnimationState state);
  [[nodiscard]] const std::map<std::string, AnimationDescriptor>& animations() const noexcept { return animations_; }

 private:
  void warn(const std::string& message) const {
    if (warn_) warn_(message);
  }

  std::map<std::string, AnimationDescriptor> animations_;
  WarningSink warn_;
};

}  // namespace scenewright
