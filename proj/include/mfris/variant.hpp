#pragma once

#include <string>
#include <vector>

#include "mfris/env.hpp"
#include "mfris/scenario.hpp"

namespace mfris {

enum class Variant { Full, NoEh, NoAmp, ReflectOnly, NoSharing, PurePpo, PureDqn, Random, NoRis, Oma, Sdma };

std::string variant_tag(Variant v);
/// Throws std::invalid_argument for an unknown tag.
Variant parse_variant(const std::string& tag);
std::vector<Variant> all_variants();

/// One-line description of the override set, written into run metadata.
std::string variant_description(Variant v);
/// True for the OMA/SDMA access baselines, which are simplified stand-ins.
bool variant_is_simplified(Variant v);

/// Applies the scenario/environment overrides of a variant.
void apply_variant(Variant v, NetworkScenario& scenario, EnvOptions& options);

}  // namespace mfris
