#include "provwatch/labels.hpp"

#include <array>

namespace provwatch {

namespace {
constexpr std::array<const char*, kLabelCount> kNames = {
    "PS1", "PS2", "PS3", "PS4", "PS5", "PS6", "PS7",
    "PB1", "PB2", "PB3", "PB4", "PB5", "PB6", "PB7", "PB8",
    "FU1", "FU2", "FU3", "FU4", "FU5", "FU6",
    "FH1", "FH2", "FH3", "FH4", "FH5"};
}

const char* label_name(Label l) { return kNames[static_cast<size_t>(l)]; }

std::optional<Label> label_from_name(std::string_view s) {
    for (size_t i = 0; i < kNames.size(); ++i) {
        if (s == kNames[i]) return static_cast<Label>(i);
    }
    return std::nullopt;
}

std::vector<Label> LabelSet::to_vector() const {
    std::vector<Label> out;
    for (uint8_t i = 0; i < kLabelCount; ++i) {
        if (has(static_cast<Label>(i))) out.push_back(static_cast<Label>(i));
    }
    return out;
}

}  // namespace provwatch
