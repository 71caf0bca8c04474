#pragma once

#include "pretex/kb.hpp"

#include <array>
#include <string>
#include <string_view>

namespace pretex {

// Which of the three truth-preserving rewrites were applied to a predicate
// expression: inversion (state the relation from the tail side),
// instantiation (apply the fact to a hypothetical case), and double
// negation (realized as a single-negation surface with a flipped label).
struct TransformKey {
    bool inv = false;
    bool ins = false;
    bool dn = false;

    // Position in the canonical ordering:
    // none, inv, ins, inv+ins, dn, inv+dn, ins+dn, inv+ins+dn.
    int index() const { return (inv ? 1 : 0) + (ins ? 2 : 0) + (dn ? 4 : 0); }

    // Key with the dn flag cleared; prototypes are stored per base key
    // with an affirmative and a negated surface.
    TransformKey base() const { return TransformKey{inv, ins, false}; }

    std::string name() const;

    bool operator==(const TransformKey&) const = default;
    bool operator<(const TransformKey& other) const { return index() < other.index(); }
};

inline constexpr int kVariantCount = 8;

TransformKey key_from_index(int index);
TransformKey parse_key(std::string_view name);

// All 8 keys in canonical order.
const std::array<TransformKey, kVariantCount>& canonical_keys();

enum class Label { True, False };

std::string label_name(Label l);
Label parse_label(std::string_view name);

// Gold label of a statement rendered with `key` from a triplet of the given
// polarity. A negated surface flips the label; a negative triplet flips it
// again.
Label label_for(TransformKey key, Polarity polarity);

// A predicate expression R(h, t) tagged with its transformation key.
// Arguments are never swapped: inversion lives in the prototype text.
struct PredicateVariant {
    std::string triplet_id;
    TransformKey key;
    Entity head;
    Entity tail;
    std::string relation;

    bool operator==(const PredicateVariant&) const = default;
};

// Lifts a triplet into its original predicate expression (key = none).
PredicateVariant to_predicate(const KnowledgeTriplet& triplet);

// Derives all 8 variants of a key=none expression, in canonical order.
std::array<PredicateVariant, kVariantCount> derive_variants(const PredicateVariant& base);

}  // namespace pretex
