#include "humancorpus/attributes.hpp"

#include <algorithm>

namespace humancorpus {
namespace {

constexpr std::array<std::string_view, kAttributeCount> kNames = {
    "5'o Clock Shadow", "Arched Eyebrows",     "Attractive",
    "Black Hair",       "Blond Hair",          "Blurry",
    "Goatee",           "Gray Hair",           "Heavy Makeup",
    "No Beard",         "Oval Face",           "Pale Skin",
    "Straight Hair",    "Wavy Hair",           "Wearing Earrings",
    "Bald",             "Bangs",               "Big Lips",
    "Bushy Eyebrows",   "Chubby",              "Double Chin",
    "Male",             "Mouth Slightly Open", "Mustache",
    "Receding Hairline", "Rosy Cheeks",        "Sideburns",
    "Wearing Lipstick", "Wearing Necklace",    "Wearing Necktie",
    "Bags Under Eyes",  "Brown Hair",          "High Cheekbones",
    "Pointy Nose",      "Wearing Hat",         "Big Nose",
    "Eyeglasses",       "Smiling",             "Young",
    "Narrow Eyes",
};

constexpr std::array<Attribute, kAttributeCount> make_all() {
  std::array<Attribute, kAttributeCount> out{};
  for (std::size_t i = 0; i < kAttributeCount; ++i) {
    out[i] = static_cast<Attribute>(i);
  }
  return out;
}

constexpr std::array<Attribute, kAttributeCount> kAll = make_all();

}  // namespace

std::string_view attribute_name(Attribute a) noexcept {
  return kNames[index_of(a)];
}

std::optional<Attribute> parse_attribute(std::string_view name) noexcept {
  const auto it = std::find(kNames.begin(), kNames.end(), name);
  if (it == kNames.end()) return std::nullopt;
  return static_cast<Attribute>(it - kNames.begin());
}

std::span<const Attribute, kAttributeCount> all_attributes() noexcept {
  return kAll;
}

}  // namespace humancorpus
