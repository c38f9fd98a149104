#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fapforge/catalog.hpp"
#include "fapforge/item.hpp"
#include "fapforge/rng.hpp"

namespace fapforge {

enum class UnspecifiedPolicy { constant, random };

struct GenerationProfile {
  ProfileId profile = ProfileId::pgm;
  int min_rules = 1;
  int max_rules = 4;
  std::vector<Direction> directions;
  UnspecifiedPolicy unspecified = UnspecifiedPolicy::constant;
  std::vector<AttributeId> distracting;  // attributes eligible for random values
  ViewMode view = ViewMode::any;
  Strategy strategy = Strategy::star;
  std::vector<std::string> configurations;     // empty: every catalog configuration
  std::vector<Organization> organizations;     // Hornke-style binding modes
  int attempt_budget = 1000;

  friend bool operator==(const GenerationProfile&, const GenerationProfile&) = default;
};

// Catalog-derived defaults for a profile.
GenerationProfile default_profile(ProfileId id);
Strategy default_strategy(ProfileId id);

// Throws CatalogError when the profile's policies contradict its catalog.
void check_profile(const GenerationProfile& profile);

// Restricts rules to appearance attributes (classical) or to number/position
// (normal). Throws InfeasibleError when no legal triplet survives.
GenerationProfile set_view_mode(GenerationProfile profile, ViewMode mode);

// Deterministic in (profile, seed). Throws BudgetExhaustedError naming the
// first constraint that failed when no attempt succeeds.
ItemSpec sample_item_spec(const GenerationProfile& profile, std::uint64_t seed);

// Rule i is bound to component `components[i]` of `configuration`.
struct OrganizationPlan {
  Organization mode = Organization::integration;
  std::string configuration;
  std::vector<int> components;
};

OrganizationPlan assign_perceptual_organization(std::span<const RuleSpec> rules,
                                                Organization mode, const Catalog& cat);

// Features whose values derive_nonharmonic may randomize.
std::vector<Feature> free_distractor_features(const ItemSpec& item, const Catalog& cat);

// Switches `count` free attributes to per-panel random values and rebuilds
// the answer set. count = 0 returns the item unchanged.
ItemSpec derive_nonharmonic(const ItemSpec& item, int count, std::uint64_t seed);

// Randomizes the given features on every grid panel (context and correct).
void randomize_features(ItemSpec& item, std::span<const Feature> features, const Catalog& cat,
                        Rng& rng);

}  // namespace fapforge
