#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agsr {

// The closed formal-attribute vocabulary. Canonical order:
// color < composition < line < light < brushstroke.
enum class AttributeId : std::uint8_t {
    color = 0,
    composition = 1,
    line = 2,
    light = 3,
    brushstroke = 4,
};

inline constexpr std::size_t kNumAttributes = 5;

constexpr std::array<AttributeId, kNumAttributes> all_attributes() {
    return {AttributeId::color, AttributeId::composition, AttributeId::line,
            AttributeId::light, AttributeId::brushstroke};
}

std::string_view to_string(AttributeId a);
std::optional<AttributeId> attribute_from_string(std::string_view name);

// A subset of the five attributes, stored as a 5-bit mask. Iteration and
// serialization follow the canonical attribute order.
class AttrSet {
public:
    AttrSet() = default;
    AttrSet(std::initializer_list<AttributeId> attrs) {
        for (auto a : attrs) insert(a);
    }

    static AttrSet full() { return from_bits(0b11111); }
    static AttrSet from_bits(std::uint8_t bits) {
        AttrSet s;
        s.bits_ = bits & 0b11111;
        return s;
    }

    void insert(AttributeId a) { bits_ |= bit(a); }
    void erase(AttributeId a) { bits_ &= static_cast<std::uint8_t>(~bit(a)); }
    bool contains(AttributeId a) const { return (bits_ & bit(a)) != 0; }
    bool empty() const { return bits_ == 0; }
    std::size_t size() const;
    std::uint8_t bits() const { return bits_; }

    AttrSet operator&(AttrSet o) const { return from_bits(bits_ & o.bits_); }
    AttrSet operator|(AttrSet o) const { return from_bits(bits_ | o.bits_); }
    // Set difference: members of *this not in o.
    AttrSet operator-(AttrSet o) const { return from_bits(bits_ & static_cast<std::uint8_t>(~o.bits_)); }
    bool operator==(const AttrSet&) const = default;

    bool subset_of(AttrSet o) const { return (bits_ & ~o.bits_) == 0; }

    std::vector<AttributeId> members() const;

private:
    static constexpr std::uint8_t bit(AttributeId a) {
        return static_cast<std::uint8_t>(1u << static_cast<std::uint8_t>(a));
    }
    std::uint8_t bits_ = 0;
};

// Binary salience decision per attribute, always carrying all five keys.
class SalienceVector {
public:
    SalienceVector() = default;
    explicit SalienceVector(AttrSet support) : support_(support) {}

    bool get(AttributeId a) const { return support_.contains(a); }
    void set(AttributeId a, bool salient) {
        if (salient)
            support_.insert(a);
        else
            support_.erase(a);
    }

    // S = {a : decisions[a] = true}
    AttrSet support() const { return support_; }
    // l0 norm = number of salient attributes.
    std::size_t sparsity() const { return support_.size(); }

    bool operator==(const SalienceVector&) const = default;

private:
    AttrSet support_;
};

} // namespace agsr
