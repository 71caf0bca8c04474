#include "pretex/transform.hpp"

#include "pretex/errors.hpp"

namespace pretex {

std::string TransformKey::name() const {
    if (!inv && !ins && !dn) return "none";
    std::string out;
    auto append = [&out](const char* part) {
        if (!out.empty()) out += '+';
        out += part;
    };
    if (inv) append("inv");
    if (ins) append("ins");
    if (dn) append("dn");
    return out;
}

TransformKey key_from_index(int index) {
    if (index < 0 || index >= kVariantCount)
        throw Error("transform key index out of range: " + std::to_string(index));
    return TransformKey{(index & 1) != 0, (index & 2) != 0, (index & 4) != 0};
}

TransformKey parse_key(std::string_view name) {
    for (const auto& key : canonical_keys()) {
        if (key.name() == name) return key;
    }
    throw Error("unknown transform key: " + std::string(name));
}

const std::array<TransformKey, kVariantCount>& canonical_keys() {
    static const std::array<TransformKey, kVariantCount> keys = [] {
        std::array<TransformKey, kVariantCount> out;
        for (int i = 0; i < kVariantCount; ++i) out[i] = key_from_index(i);
        return out;
    }();
    return keys;
}

std::string label_name(Label l) {
    return l == Label::True ? "True" : "False";
}

Label parse_label(std::string_view name) {
    if (name == "True") return Label::True;
    if (name == "False") return Label::False;
    throw Error("unknown label: " + std::string(name));
}

Label label_for(TransformKey key, Polarity polarity) {
    bool truthful = (polarity == Polarity::positive);
    if (key.dn) truthful = !truthful;
    return truthful ? Label::True : Label::False;
}

PredicateVariant to_predicate(const KnowledgeTriplet& triplet) {
    return PredicateVariant{triplet.triplet_id, TransformKey{}, triplet.head,
                            triplet.tail, triplet.relation};
}

std::array<PredicateVariant, kVariantCount> derive_variants(const PredicateVariant& base) {
    if (base.key != TransformKey{})
        throw Error("derive_variants expects a key=none expression");
    std::array<PredicateVariant, kVariantCount> out;
    for (int i = 0; i < kVariantCount; ++i) {
        out[i] = base;
        out[i].key = key_from_index(i);
    }
    return out;
}

}  // namespace pretex
