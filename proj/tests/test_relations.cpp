#include "doctest.h"
#include "trc/relations.hpp"
#include "trc/util.hpp"

using namespace trc;

TEST_CASE("relation names and prompt labels") {
    CHECK(relation_name(Relation::is_included) == "is_included");
    CHECK(relation_name(Relation::before) == "before");
    // Hand-derived: prompt surface: uppercase, underscores become spaces.
    CHECK(relation_label(Relation::is_included) == "IS INCLUDED");
    CHECK(relation_label(Relation::after) == "AFTER");
    CHECK(relation_label(Relation::equal) == "EQUAL");
}

TEST_CASE("parse_relation accepts case and separator aliases") {
    CHECK(parse_relation("BEFORE") == Relation::before);
    CHECK(parse_relation("is included") == Relation::is_included);
    CHECK(parse_relation("is_included") == Relation::is_included);
    CHECK(parse_relation("Vague") == Relation::vague);
    CHECK_FALSE(parse_relation("simultaneous").has_value());
    CHECK_FALSE(parse_relation("").has_value());
}

TEST_CASE("scheme relation sets and orders") {
    const auto& matres = scheme_relations(Scheme::matres);
    REQUIRE(matres.size() == 3);
    CHECK(matres == std::vector<Relation>{Relation::before, Relation::after, Relation::equal});

    const auto& tbd = scheme_relations(Scheme::tbdense);
    REQUIRE(tbd.size() == 5);
    CHECK(tbd == std::vector<Relation>{Relation::before, Relation::after, Relation::equal,
                                       Relation::includes, Relation::is_included});

    // QA protocols ask after first, then before, then equal.
    CHECK(question_order(Scheme::matres) ==
          std::vector<Relation>{Relation::after, Relation::before, Relation::equal});
    CHECK(question_order(Scheme::tbdense) ==
          std::vector<Relation>{Relation::after, Relation::before, Relation::equal,
                                Relation::includes, Relation::is_included});

    // Checkpoint class order is alphabetical by canonical name.
    CHECK(class_order(Scheme::matres) ==
          std::vector<Relation>{Relation::after, Relation::before, Relation::equal});
    CHECK(class_order(Scheme::tbdense) ==
          std::vector<Relation>{Relation::after, Relation::before, Relation::equal,
                                Relation::includes, Relation::is_included});
}

TEST_CASE("invert_relation is an involution with equal as fixed point") {
    CHECK(invert_relation(Relation::before) == Relation::after);
    CHECK(invert_relation(Relation::includes) == Relation::is_included);
    CHECK(invert_relation(Relation::equal) == Relation::equal);
    for (Relation r : scheme_relations(Scheme::tbdense))
        CHECK(invert_relation(invert_relation(r)) == r);
    CHECK_THROWS_AS(invert_relation(Relation::vague), Error);
}

TEST_CASE("scheme name round trip") {
    CHECK(parse_scheme("matres") == Scheme::matres);
    CHECK(parse_scheme("TBDense") == Scheme::tbdense);
    CHECK(scheme_name(Scheme::tbdense) == "tbdense");
    CHECK_FALSE(parse_scheme("timebank").has_value());
}
