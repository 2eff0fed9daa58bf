#pragma once

// Fixed primes and weights of the scripted phases of the chain.

#include <array>
#include <cstdint>
#include <string_view>

namespace chainforge::script {

struct ExplicitStep {
    unsigned k;
    unsigned p;
    unsigned t;
};

// Steps 3 and 7: Sophie Germain pairs (p0, 2p0 + 1) and Hida weights.
inline constexpr unsigned kStep3Lift = 23;
inline constexpr unsigned kStep3Raise = 11;
inline constexpr unsigned kStep3Hida = 68;
inline constexpr std::array<ExplicitStep, 2> kStep3Reductions{{{68, 79, 8}, {50, 61, 3}}};
inline constexpr std::array<unsigned, 3> kStep3Terminal{26, 32, 38};

inline constexpr unsigned kStep7Lift = 47;
inline constexpr unsigned kStep7Raise = 23;
inline constexpr unsigned kStep7Hida = 48;
struct KhareStep {
    unsigned p;      // lift prime
    unsigned ell;    // characteristic of the minimal lift
    unsigned order;  // nebentypus order at p
    unsigned k;      // weight after the re-lift
};
inline constexpr std::array<KhareStep, 2> kStep7Khare{{{53, 13, 26, 28}, {29, 7, 14, 16}}};
inline constexpr unsigned kStep7Terminal = 16;

// Step 4: the MGD prime and its ramification.
inline constexpr unsigned kMgdPrime = 43;
inline constexpr unsigned kMgdLiftOrder = 7;
inline constexpr unsigned kMgdOrder = 11;

// Steps 8-10.
inline constexpr unsigned kStep8Prime = 17;
inline constexpr unsigned kStep8Order = 8;
inline constexpr unsigned kStep10Weight = 44;

// Labels of facts taken from outside the engine.
inline constexpr std::string_view kLevelOneLargeImage = "large-image.level-one";
inline constexpr std::string_view kStep10Assumed = "step10.no-common-root";
inline constexpr std::string_view kStep11SingleOrbit = "step11.single-orbit";
inline constexpr std::string_view kStep10Assumption =
    "mod-43 irreducibility of the level-17 weight-44 form rests on a Hecke polynomial resultant computation not re-run here";

}  // namespace chainforge::script
