#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace humancorpus {

// The 40 facial attributes, in the row-major order of the reference attribute
// table. Values are stable and used as indices.
enum class Attribute : std::uint8_t {
  kFiveOClockShadow,
  kArchedEyebrows,
  kAttractive,
  kBlackHair,
  kBlondHair,
  kBlurry,
  kGoatee,
  kGrayHair,
  kHeavyMakeup,
  kNoBeard,
  kOvalFace,
  kPaleSkin,
  kStraightHair,
  kWavyHair,
  kWearingEarrings,
  kBald,
  kBangs,
  kBigLips,
  kBushyEyebrows,
  kChubby,
  kDoubleChin,
  kMale,
  kMouthSlightlyOpen,
  kMustache,
  kRecedingHairline,
  kRosyCheeks,
  kSideburns,
  kWearingLipstick,
  kWearingNecklace,
  kWearingNecktie,
  kBagsUnderEyes,
  kBrownHair,
  kHighCheekbones,
  kPointyNose,
  kWearingHat,
  kBigNose,
  kEyeglasses,
  kSmiling,
  kYoung,
  kNarrowEyes,
};

inline constexpr std::size_t kAttributeCount = 40;

std::string_view attribute_name(Attribute a) noexcept;

/// Exact, case-sensitive match against the canonical names.
std::optional<Attribute> parse_attribute(std::string_view name) noexcept;

std::span<const Attribute, kAttributeCount> all_attributes() noexcept;

constexpr std::size_t index_of(Attribute a) noexcept {
  return static_cast<std::size_t>(a);
}

}  // namespace humancorpus
