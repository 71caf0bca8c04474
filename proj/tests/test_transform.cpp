#include "pretex/errors.hpp"
#include "pretex/transform.hpp"

#include <doctest.h>

#include <set>

using namespace pretex;

TEST_CASE("canonical key order and naming") {
    const char* expected[] = {"none",    "inv",    "ins",    "inv+ins",
                              "dn",      "inv+dn", "ins+dn", "inv+ins+dn"};
    const auto& keys = canonical_keys();
    for (int i = 0; i < kVariantCount; ++i) {
        CHECK(keys[i].index() == i);
        CHECK(keys[i].name() == expected[i]);
        CHECK(key_from_index(i) == keys[i]);
        CHECK(parse_key(expected[i]) == keys[i]);
    }
    CHECK_THROWS_AS(parse_key("inv+bogus"), Error);
    CHECK_THROWS_AS(parse_key(""), Error);
}

TEST_CASE("base() clears dn only") {
    TransformKey k{true, true, true};
    CHECK(k.index() == 7);
    CHECK((k.base() == TransformKey{true, true, false}));
    CHECK(k.base().index() == 3);
    CHECK(TransformKey{}.base() == TransformKey{});
}

TEST_CASE("label algebra: dn flips, negative polarity flips") {
    // Every key without dn states the fact; dn states its negation. A
    // statement is True when what it states matches the triplet.
    for (const auto& key : canonical_keys()) {
        Label pos = label_for(key, Polarity::positive);
        Label neg = label_for(key, Polarity::negative);
        CHECK(pos == (key.dn ? Label::False : Label::True));
        CHECK(neg == (key.dn ? Label::True : Label::False));
        CHECK(pos != neg);
    }
}

TEST_CASE("labels split four true, four false per triplet") {
    for (Polarity p : {Polarity::positive, Polarity::negative}) {
        int trues = 0;
        for (const auto& key : canonical_keys())
            if (label_for(key, p) == Label::True) ++trues;
        CHECK(trues == 4);
    }
}

TEST_CASE("derive_variants emits all 8 keys with arguments preserved") {
    auto triplet = make_triplet("Aspirin", "may treat", "headache");
    auto base = to_predicate(triplet);
    CHECK(base.key == TransformKey{});

    auto variants = derive_variants(base);
    std::set<int> seen;
    for (int i = 0; i < kVariantCount; ++i) {
        const auto& v = variants[i];
        CHECK(v.key.index() == i);
        CHECK(v.triplet_id == triplet.triplet_id);
        CHECK(v.head.surface == "Aspirin");   // inversion never swaps arguments
        CHECK(v.tail.surface == "headache");
        CHECK(v.relation == "may treat");
        seen.insert(v.key.index());
    }
    CHECK(seen.size() == 8);
}

TEST_CASE("derive_variants rejects an already-transformed expression") {
    auto base = to_predicate(make_triplet("Aspirin", "may treat", "headache"));
    base.key = TransformKey{true, false, false};
    CHECK_THROWS_AS(derive_variants(base), Error);
}

TEST_CASE("label names round-trip") {
    CHECK(label_name(Label::True) == "True");
    CHECK(label_name(Label::False) == "False");
    CHECK(parse_label("True") == Label::True);
    CHECK(parse_label("False") == Label::False);
    CHECK_THROWS_AS(parse_label("Maybe"), Error);
}
