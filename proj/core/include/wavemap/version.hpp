#pragma once

#include <string_view>

namespace wavemap {

// Library version, embedded in every serialized output so that archived
// results can be traced back to the code that produced them.
inline constexpr std::string_view kVersion = "1.0.0";

// Per-module format tags.  Bump a tag whenever the corresponding output
// schema or numerical contract changes incompatibly.
inline constexpr std::string_view kProfileFormat = "profile/1";
inline constexpr std::string_view kModeFormat = "mode/1";
inline constexpr std::string_view kEvolveFormat = "evolve/1";
inline constexpr std::string_view kSpectrumFormat = "spectrum/1";

}  // namespace wavemap
