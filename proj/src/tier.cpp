#include "ncdecay/tier.hpp"

#include "ncdecay/error.hpp"

namespace ncdecay {

std::string to_string(Tier tier) {
    switch (tier) {
        case Tier::exponential: return "exponential";
        case Tier::subexponential: return "subexponential";
        case Tier::polynomial: return "polynomial";
        case Tier::undetermined: return "undetermined";
    }
    return "undetermined";
}

Tier tier_from_string(const std::string& name) {
    for (Tier t : {Tier::exponential, Tier::subexponential, Tier::polynomial, Tier::undetermined})
        if (to_string(t) == name) return t;
    throw InvalidArgument("stability", "unknown tier '" + name + "'");
}

}  // namespace ncdecay
