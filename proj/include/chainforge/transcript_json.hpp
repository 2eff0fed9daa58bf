#pragma once

// Versioned JSON form of transcripts. Integers below 2^63 are JSON numbers,
// larger ones are decimal strings; key order is fixed, so serialization is
// byte-deterministic.

#include <string>
#include <string_view>

#include "chainforge/repmodel.hpp"

namespace chainforge {

inline constexpr std::string_view kTranscriptVersion = "chainforge-transcript/1";

std::string serialize(const Transcript& t);

/// Throws ParseError naming the offending field.
Transcript parse_transcript(std::string_view text);

std::string serialize_state(const ReprState& s);

}  // namespace chainforge
