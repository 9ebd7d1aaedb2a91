#include "agsr/attributes.hpp"

namespace agsr {

std::string_view to_string(AttributeId a) {
    switch (a) {
        case AttributeId::color: return "color";
        case AttributeId::composition: return "composition";
        case AttributeId::line: return "line";
        case AttributeId::light: return "light";
        case AttributeId::brushstroke: return "brushstroke";
    }
    return "unknown";
}

std::optional<AttributeId> attribute_from_string(std::string_view name) {
    for (auto a : all_attributes()) {
        if (to_string(a) == name) return a;
    }
    return std::nullopt;
}

std::size_t AttrSet::size() const {
    std::size_t n = 0;
    for (std::uint8_t b = bits_; b != 0; b >>= 1) n += b & 1u;
    return n;
}

std::vector<AttributeId> AttrSet::members() const {
    std::vector<AttributeId> out;
    for (auto a : all_attributes()) {
        if (contains(a)) out.push_back(a);
    }
    return out;
}

} // namespace agsr
