#pragma once

#include "scenewright/engine.hpp"

#include <cstdint>
#include <string>

namespace scenewright::gateway {

/// Engine holding `objects` random primitives (some nested, tagged,
/// colored), a small prefab catalog and a room scan.
Engine make_synthetic_engine(std::size_t objects, std::uint64_t seed);

struct ContextReductionRow {
  std::size_t scene_size = 0;
  std::size_t properties_per_object = 0;
  std::int64_t full_tokens = 0;      // every category, every property
  std::int64_t selected_tokens = 0;  // virtual_objects / position only
  double ratio = 0.0;
  double elapsed_ms = 0.0;

  static std::string csv_header();
  [[nodiscard]] std::string csv() const;
};

ContextReductionRow measure_context_reduction(std::size_t objects, std::uint64_t seed = 7);

}  // namespace scenewright::gateway
