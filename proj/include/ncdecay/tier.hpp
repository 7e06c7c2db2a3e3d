#pragma once

#include <string>

namespace ncdecay {

/// Decay tiers, strongest first.
enum class Tier { exponential, subexponential, polynomial, undetermined };

std::string to_string(Tier tier);
/// Inverse of to_string; throws InvalidArgument on unknown names.
Tier tier_from_string(const std::string& name);

}  // namespace ncdecay
