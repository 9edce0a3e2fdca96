#pragma once

#include <nlohmann/json.hpp>

#include <string>

namespace scenewright {

/// Canonical text form used for snapshots, event logs, wire frames and prompt
/// digests: keys sorted, no whitespace, floating-point numbers printed with
/// exactly six decimals ("-0.000000" folds to "0.000000"), integers verbatim.
/// Non-finite floats print as null.
std::string canonical_dump(const nlohmann::json& value);

/// Rounds every floating-point leaf to the value its canonical text denotes,
/// so that canonical_dump(parse(canonical_dump(x))) == canonical_dump(x) and
/// the returned json compares equal to the parsed form.
nlohmann::json canonicalize(const nlohmann::json& value);

}  // namespace scenewright
