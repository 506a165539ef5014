#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string_view>
#include <vector>

namespace provwatch {

// Process labels: PS* are status labels (inherited across fork), PB* are
// behavior labels (never inherited). FU*/FH* are file labels (untrusted /
// high-value).
enum class Label : uint8_t {
    PS1, PS2, PS3, PS4, PS5, PS6, PS7,
    PB1, PB2, PB3, PB4, PB5, PB6, PB7, PB8,
    FU1, FU2, FU3, FU4, FU5, FU6,
    FH1, FH2, FH3, FH4, FH5,
};

inline constexpr size_t kLabelCount = 26;

const char* label_name(Label l);
std::optional<Label> label_from_name(std::string_view s);

inline constexpr bool is_status_label(Label l) { return l <= Label::PS7; }
inline constexpr bool is_behavior_label(Label l) { return l >= Label::PB1 && l <= Label::PB8; }
inline constexpr bool is_process_label(Label l) { return l <= Label::PB8; }
inline constexpr bool is_file_label(Label l) { return l >= Label::FU1; }
inline constexpr bool is_untrusted_label(Label l) { return l >= Label::FU1 && l <= Label::FU6; }
inline constexpr bool is_high_value_label(Label l) { return l >= Label::FH1; }

inline constexpr uint32_t label_bit(Label l) { return 1u << static_cast<unsigned>(l); }

class LabelSet {
public:
    constexpr LabelSet() = default;
    constexpr LabelSet(std::initializer_list<Label> ls) {
        for (Label l : ls) bits_ |= label_bit(l);
    }

    constexpr void add(Label l) { bits_ |= label_bit(l); }
    constexpr bool has(Label l) const { return bits_ & label_bit(l); }
    constexpr bool intersects(LabelSet o) const { return bits_ & o.bits_; }
    constexpr bool contains(LabelSet o) const { return (bits_ & o.bits_) == o.bits_; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr size_t count() const { return static_cast<size_t>(__builtin_popcount(bits_)); }

    constexpr LabelSet& operator|=(LabelSet o) { bits_ |= o.bits_; return *this; }
    friend constexpr LabelSet operator|(LabelSet a, LabelSet b) { return LabelSet(a.bits_ | b.bits_); }
    friend constexpr LabelSet operator&(LabelSet a, LabelSet b) { return LabelSet(a.bits_ & b.bits_); }
    constexpr bool operator==(const LabelSet&) const = default;

    constexpr uint32_t raw() const { return bits_; }
    static constexpr LabelSet from_raw(uint32_t bits) { return LabelSet(bits); }

    std::vector<Label> to_vector() const;

    static constexpr LabelSet status_mask() {
        LabelSet s;
        for (uint8_t i = 0; i < kLabelCount; ++i) {
            if (is_status_label(static_cast<Label>(i))) s.add(static_cast<Label>(i));
        }
        return s;
    }
    static constexpr LabelSet high_value_mask() {
        LabelSet s;
        for (uint8_t i = 0; i < kLabelCount; ++i) {
            if (is_high_value_label(static_cast<Label>(i))) s.add(static_cast<Label>(i));
        }
        return s;
    }

private:
    explicit constexpr LabelSet(uint32_t bits) : bits_(bits) {}
    uint32_t bits_ = 0;
};

// Forensic provenance of one label assignment.
struct LabelEvidence {
    Label label;
    int64_t ts;
    uint64_t cause_seq;  // seq of the event that set the label
};

}  // namespace provwatch
