#include <string>

#include "doctest.h"
#include "test_helpers.hpp"
#include "trc/corpus.hpp"
#include "trc/util.hpp"

using namespace trc;
using namespace trc::testing;

namespace {

const std::string kTagged =
    "It [event1] accused [/event1] the company of deliberately slashing oil revenues by "
    "overproducing oil and [event2] driving [/event2] down prices, among other charges.";

Corpus parse_text(const std::string& jsonl, Scheme scheme, const char* name) {
    auto path = write_temp("corpus", name, jsonl);
    return parse_corpus(path.string(), scheme);
}

}  // namespace

TEST_CASE("parse_corpus reads the mini fixture") {
    Corpus corpus = parse_corpus(std::string(TRC_TEST_DATA_DIR) + "/data/mini_matres.jsonl",
                                 Scheme::matres);
    CHECK(corpus.documents.size() == 4);
    CHECK(corpus.pairs.size() == 5);
    CHECK(corpus.dropped_vague == 1);  // the "vg" doc's vague pair is counted, not kept
    CHECK(corpus.pair_indices(Split::train).size() == 3);
    CHECK(corpus.pair_indices(Split::dev).size() == 1);
    CHECK(corpus.pair_indices(Split::test).size() == 1);
    CHECK(corpus.pairs[0].pair_id() == "acc:e1:e2");
    CHECK(corpus.pairs[0].gold == Relation::after);
}

TEST_CASE("jsonl round trip is byte stable") {
    Corpus corpus = parse_corpus(std::string(TRC_TEST_DATA_DIR) + "/data/mini_matres.jsonl",
                                 Scheme::matres);
    std::string once = corpus_to_jsonl(corpus);
    Corpus again = parse_text(once, Scheme::matres, "roundtrip.jsonl");
    CHECK(corpus_to_jsonl(again) == once);
    CHECK(again.pairs.size() == corpus.pairs.size());
}

TEST_CASE("simultaneous maps to equal under tbdense only") {
    std::string doc =
        R"({"doc_id":"d","split":"train","sentences":[["a","b","c","d"]],)"
        R"("events":[{"id":"x","sentence":0,"span":[0,1]},{"id":"y","sentence":0,"span":[2,3]}],)"
        R"("pairs":[{"e1":"x","e2":"y","relation":"simultaneous"}]})";
    Corpus corpus = parse_text(doc + "\n", Scheme::tbdense, "simul.jsonl");
    REQUIRE(corpus.pairs.size() == 1);
    CHECK(corpus.pairs[0].gold == Relation::equal);
    CHECK_THROWS_AS(parse_text(doc + "\n", Scheme::matres, "simul2.jsonl"), Error);
}

TEST_CASE("tbdense-only relations are rejected under matres") {
    std::string doc =
        R"({"doc_id":"d","split":"train","sentences":[["a","b","c","d"]],)"
        R"("events":[{"id":"x","sentence":0,"span":[0,1]},{"id":"y","sentence":0,"span":[2,3]}],)"
        R"("pairs":[{"e1":"x","e2":"y","relation":"includes"}]})";
    CHECK_THROWS_AS(parse_text(doc + "\n", Scheme::matres, "includes.jsonl"), Error);
    CHECK_NOTHROW(parse_text(doc + "\n", Scheme::tbdense, "includes2.jsonl"));
}

TEST_CASE("validation diagnostics carry line numbers") {
    std::string good =
        R"({"doc_id":"ok","split":"train","sentences":[["a","b"]],)"
        R"("events":[{"id":"x","sentence":0,"span":[0,1]},{"id":"y","sentence":0,"span":[1,2]}],)"
        R"("pairs":[{"e1":"x","e2":"y","relation":"before"}]})";

    SUBCASE("malformed json") {
        try {
            parse_text(good + "\n{not json\n", Scheme::matres, "bad1.jsonl");
            FAIL("expected an input error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::input);
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("span past the sentence end") {
        std::string bad =
            R"({"doc_id":"d","split":"train","sentences":[["a","b"]],)"
            R"("events":[{"id":"x","sentence":0,"span":[1,3]}],"pairs":[]})";
        CHECK_THROWS_AS(parse_text(bad + "\n", Scheme::matres, "bad2.jsonl"), Error);
    }
    SUBCASE("empty span") {
        std::string bad =
            R"({"doc_id":"d","split":"train","sentences":[["a","b"]],)"
            R"("events":[{"id":"x","sentence":0,"span":[1,1]}],"pairs":[]})";
        CHECK_THROWS_AS(parse_text(bad + "\n", Scheme::matres, "bad3.jsonl"), Error);
    }
    SUBCASE("pair referencing an unknown event") {
        std::string bad =
            R"({"doc_id":"d","split":"train","sentences":[["a","b"]],)"
            R"("events":[{"id":"x","sentence":0,"span":[0,1]}],)"
            R"("pairs":[{"e1":"x","e2":"ghost","relation":"before"}]})";
        CHECK_THROWS_AS(parse_text(bad + "\n", Scheme::matres, "bad4.jsonl"), Error);
    }
    SUBCASE("duplicate event id") {
        std::string bad =
            R"({"doc_id":"d","split":"train","sentences":[["a","b"]],)"
            R"("events":[{"id":"x","sentence":0,"span":[0,1]},{"id":"x","sentence":0,"span":[1,2]}],)"
            R"("pairs":[]})";
        CHECK_THROWS_AS(parse_text(bad + "\n", Scheme::matres, "bad5.jsonl"), Error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(parse_corpus("/nonexistent/corpus.jsonl", Scheme::matres), Error);
    }
}

TEST_CASE("build_context joins tokens with single spaces and exact char spans") {
    Corpus corpus = accusation_corpus();
    ContextWindow ctx = build_context(corpus.pairs[0], corpus);
    CHECK(ctx.scope == Scope::intra);
    CHECK(ctx.text.substr(ctx.e1_span.begin, ctx.e1_span.length()) == "accused");
    CHECK(ctx.text.substr(ctx.e2_span.begin, ctx.e2_span.length()) == "driving");
    // Hand-derived: "It " is 3 chars, so "accused" spans [3, 10).
    CHECK(ctx.e1_span.begin == 3);
    CHECK(ctx.e1_span.end == 10);
}

TEST_CASE("inter-sentence contexts concatenate in document order") {
    Corpus corpus;
    corpus.scheme = Scheme::matres;
    Document doc;
    doc.doc_id = "d";
    doc.sentences.push_back(Sentence{{"He", "ran", "."}});
    doc.sentences.push_back(Sentence{{"Then", "she", "slept", "."}});
    doc.events["x"] = EventTrigger{"x", 0, 1, 2};
    doc.events["y"] = EventTrigger{"y", 1, 2, 3};
    corpus.documents.push_back(doc);
    corpus.pairs.push_back(EventPair{0, "d", "x", "y", Relation::before, Split::test});
    // Reversed argument order: e1 lives in the later sentence.
    corpus.pairs.push_back(EventPair{0, "d", "y", "x", Relation::after, Split::test});

    ContextWindow fwd = build_context(corpus.pairs[0], corpus);
    CHECK(fwd.scope == Scope::inter);
    CHECK(fwd.text == "He ran . Then she slept .");
    CHECK(fwd.text.substr(fwd.e1_span.begin, fwd.e1_span.length()) == "ran");
    CHECK(fwd.text.substr(fwd.e2_span.begin, fwd.e2_span.length()) == "slept");

    ContextWindow rev = build_context(corpus.pairs[1], corpus);
    CHECK(rev.text == fwd.text);  // document order, not argument order
    CHECK(rev.text.substr(rev.e1_span.begin, rev.e1_span.length()) == "slept");
    CHECK(rev.text.substr(rev.e2_span.begin, rev.e2_span.length()) == "ran");
}

TEST_CASE("tag_events wraps both surfaces and rejects overlap") {
    Corpus corpus = accusation_corpus();
    ContextWindow ctx = build_context(corpus.pairs[0], corpus);
    CHECK(tag_events(ctx) == kTagged);
    CHECK(tagged_event(ctx, true) == "[event1] accused [/event1]");
    CHECK(tagged_event(ctx, false) == "[event2] driving [/event2]");

    // Tagging must not disturb text outside the spans, whichever comes first.
    ContextWindow swapped = ctx;
    std::swap(swapped.e1_span, swapped.e2_span);
    std::string tagged = tag_events(swapped);
    CHECK(tagged.find("[event1] driving [/event1]") != std::string::npos);
    CHECK(tagged.find("[event2] accused [/event2]") != std::string::npos);

    ContextWindow overlap = ctx;
    overlap.e2_span = {ctx.e1_span.begin + 1, ctx.e1_span.end + 1};
    CHECK_THROWS_AS(tag_events(overlap), Error);
}

TEST_CASE("compute_stats reproduces the corpus profile") {
    // Hand-derived: 100 pairs at 58/38/4 gives exact proportions.
    Corpus corpus;
    corpus.scheme = Scheme::matres;
    for (int i = 0; i < 58; ++i) append_pair(corpus, Relation::before, Split::test, true);
    for (int i = 0; i < 38; ++i) append_pair(corpus, Relation::after, Split::test, true);
    for (int i = 0; i < 4; ++i) append_pair(corpus, Relation::equal, Split::test, true);
    CorpusStats stats = compute_stats(corpus);
    CHECK(stats.n_pairs == 100);
    CHECK(stats.label_proportions["before"] == doctest::Approx(0.58).epsilon(1e-12));
    CHECK(stats.label_proportions["after"] == doctest::Approx(0.38).epsilon(1e-12));
    CHECK(stats.label_proportions["equal"] == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(stats.split_counts["test"] == 100);
}

TEST_CASE("compute_stats intra/inter split at 39/61") {
    Corpus corpus;
    corpus.scheme = Scheme::matres;
    for (int i = 0; i < 39; ++i) append_pair(corpus, Relation::before, Split::test, true);
    for (int i = 0; i < 61; ++i) append_pair(corpus, Relation::after, Split::test, false);
    CorpusStats stats = compute_stats(corpus);
    CHECK(stats.intra_proportion == doctest::Approx(0.39).epsilon(1e-12));
    CHECK(stats.inter_proportion == doctest::Approx(0.61).epsilon(1e-12));
}

TEST_CASE("a 724-pair test split keeps its counts through ingestion") {
    // Hand-derived: 420 + 275 + 29 = 724; proportions 58.0% / 38.0% / 4.0%.
    Corpus built;
    built.scheme = Scheme::matres;
    for (int i = 0; i < 420; ++i) append_pair(built, Relation::before, Split::test, i % 3 != 0);
    for (int i = 0; i < 275; ++i) append_pair(built, Relation::after, Split::test, i % 3 != 0);
    for (int i = 0; i < 29; ++i) append_pair(built, Relation::equal, Split::test, i % 3 != 0);
    Corpus corpus = parse_text(corpus_to_jsonl(built), Scheme::matres, "matres724.jsonl");
    CorpusStats stats = compute_stats(corpus);
    CHECK(stats.n_pairs == 724);
    CHECK(stats.split_counts["test"] == 724);
    CHECK(stats.label_proportions["before"] == doctest::Approx(420.0 / 724.0).epsilon(1e-12));
    CHECK(stats.label_proportions["after"] == doctest::Approx(275.0 / 724.0).epsilon(1e-12));
    CHECK(stats.label_proportions["equal"] == doctest::Approx(29.0 / 724.0).epsilon(1e-12));
    CHECK(stats.label_proportions["before"] == doctest::Approx(0.58).epsilon(0.01));
    CHECK(stats.label_proportions["after"] == doctest::Approx(0.38).epsilon(0.01));
}
