#pragma once

#include <cstdint>
#include <string>

#include "psguard/attack.hpp"
#include "psguard/feature_metadata.hpp"

namespace psguard {

struct SynthOutput {
  std::string csv;  // header + rows, label column "label" with Benign/Malicious
  MetadataCatalog catalog;
  MorphMap morph_map;
};

inline constexpr std::size_t kSynthMinRows = 100;

/// Labeled flow-like data with planted perturb-ability structure:
///  - identifier, protocol and service columns (scored Low via PS1),
///  - backward/interflow columns uncorrelated with forward ones (Low via PS4),
///  - a correlated forward packet/byte cluster that drags one backward count to Medium,
///  - flow-wide aggregates paired by correlation (Medium via PS3 and PS5),
///  - a low-cardinality TTL column and unconstrained forward columns (High).
/// The class signal sits mostly in the Low columns, so models restricted to
/// them stay accurate. The morph map only touches High columns.
SynthOutput synthesize(std::size_t n_rows, std::uint64_t seed);

}  // namespace psguard
