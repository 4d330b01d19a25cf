#include "mfris/variant.hpp"

#include <stdexcept>

namespace mfris {

namespace {

struct Entry {
  Variant v;
  const char* tag;
  const char* description;
};

constexpr Entry kEntries[] = {
    {Variant::Full, "full", "hybrid DQN/PPO agents with mode sharing; every surface function enabled"},
    {Variant::NoEh, "no_eh", "all elements forced to S mode (alpha = 1); the discrete sub-agent is bypassed"},
    {Variant::NoAmp, "no_amp", "amplitudes clamped to beta = 1"},
    {Variant::ReflectOnly, "reflect_only",
     "alpha = 1, beta = 1, and no service to users on the far side of each surface"},
    {Variant::NoSharing, "no_sharing", "hybrid agents without the previous mode bits in the PPO state"},
    {Variant::PurePpo, "pure_ppo", "PPO only; mode bits relaxed to continuous outputs thresholded at 0.5"},
    {Variant::PureDqn, "pure_dqn", "DQN only; continuous outputs quantized into branching heads"},
    {Variant::Random, "random", "uniformly random actions every step, no learning"},
    {Variant::NoRis, "no_ris", "no surfaces; direct links only"},
    {Variant::Oma, "oma", "simplified time-shared OMA with maximum-ratio beams"},
    {Variant::Sdma, "sdma", "simplified SDMA with one beam per user and no SIC"},
};

const Entry& entry(Variant v) {
  for (const auto& e : kEntries) {
    if (e.v == v) return e;
  }
  throw std::logic_error("unknown variant");
}

}  // namespace

std::string variant_tag(Variant v) { return entry(v).tag; }
std::string variant_description(Variant v) { return entry(v).description; }

Variant parse_variant(const std::string& tag) {
  for (const auto& e : kEntries) {
    if (tag == e.tag) return e.v;
  }
  throw std::invalid_argument("unknown variant tag: " + tag);
}

std::vector<Variant> all_variants() {
  std::vector<Variant> out;
  for (const auto& e : kEntries) out.push_back(e.v);
  return out;
}

bool variant_is_simplified(Variant v) { return v == Variant::Oma || v == Variant::Sdma; }

void apply_variant(Variant v, NetworkScenario& scenario, EnvOptions& options) {
  switch (v) {
    case Variant::NoEh:
      options.force_alpha_one = true;
      break;
    case Variant::NoAmp:
      options.force_beta_one = true;
      break;
    case Variant::ReflectOnly:
      options.force_alpha_one = true;
      options.force_beta_one = true;
      options.reflect_only = true;
      break;
    case Variant::NoRis:
      scenario.surfaces = 0;
      break;
    case Variant::Oma:
      options.access = Access::Oma;
      break;
    case Variant::Sdma:
      options.access = Access::Sdma;
      break;
    default:
      break;
  }
}

}  // namespace mfris
