#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "trc/evaluation.hpp"
#include "trc/util.hpp"

using namespace trc;
using namespace trc::testing;

namespace {

std::vector<Relation> matres_classes() {
    return {Relation::before, Relation::after, Relation::equal};
}

}  // namespace

TEST_CASE("micro-F1 worked example: 6 correct, 2 wrong, 2 vague of 10") {
    // Hand-derived: P = 6/8, R = 6/10, F1 = 2*0.75*0.6/1.35 = 0.666...
    std::vector<Relation> golds(10, Relation::before);
    std::vector<Relation> preds(6, Relation::before);
    preds.insert(preds.end(), 2, Relation::after);
    preds.insert(preds.end(), 2, Relation::vague);
    CHECK(micro_f1(preds, golds) == doctest::Approx(2.0 * 0.75 * 0.6 / 1.35).epsilon(1e-12));
    CHECK(micro_f1(preds, golds) == doctest::Approx(0.6666666666666666).epsilon(1e-9));
}

TEST_CASE("micro-F1 edge cases") {
    std::vector<Relation> golds = {Relation::before, Relation::after};
    CHECK(micro_f1({Relation::vague, Relation::vague}, golds) == 0.0);  // TP = 0
    CHECK(micro_f1({Relation::before, Relation::after}, golds) == doctest::Approx(1.0));
    // Gold must never contain vague after ingestion.
    CHECK_THROWS_AS(micro_f1({Relation::before}, {Relation::vague}), Error);
    CHECK_THROWS_AS(micro_f1({Relation::before}, golds), Error);  // length mismatch
}

TEST_CASE("micro-F1 equals accuracy when nothing is vague") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> pick(0, 2);
    auto classes = matres_classes();
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Relation> preds, golds;
        int correct = 0;
        for (int i = 0; i < 40; ++i) {
            Relation g = classes[pick(rng)];
            Relation p = classes[pick(rng)];
            golds.push_back(g);
            preds.push_back(p);
            if (p == g) ++correct;
        }
        CHECK(micro_f1(preds, golds) ==
              doctest::Approx(correct / 40.0).scale(1.0).epsilon(1e-12));
    }
}

TEST_CASE("micro and per-class scores match the confusion-matrix oracle") {
    std::mt19937_64 rng(1234);
    std::uniform_int_distribution<int> gold_pick(0, 2);
    std::uniform_int_distribution<int> pred_pick(0, 3);  // 3 = vague
    auto classes = matres_classes();
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<Relation> preds, golds;
        int n = 5 + trial % 60;
        for (int i = 0; i < n; ++i) {
            golds.push_back(classes[gold_pick(rng)]);
            int p = pred_pick(rng);
            preds.push_back(p == 3 ? Relation::vague : classes[p]);
        }
        MicroOracle oracle = micro_oracle(preds, golds, Scheme::matres);
        CHECK(micro_f1(preds, golds) == doctest::Approx(oracle.f1).scale(1.0).epsilon(1e-9));
        for (Relation c : classes) {
            ClassScores scores = per_class_f1(preds, golds, c);
            MicroOracle one;
            // Restrict the oracle to a single class by recomputing its cells.
            for (std::size_t i = 0; i < preds.size(); ++i) {
                bool pc = preds[i] == c, gc = golds[i] == c;
                if (pc && gc) ++one.tp;
                if (pc && !gc) ++one.fp;
                if (!pc && gc) ++one.fn;
            }
            CHECK(scores.tp == one.tp);
            CHECK(scores.fp == one.fp);
            CHECK(scores.fn == one.fn);
        }
    }
}

TEST_CASE("vague predictions are never false positives for a real class") {
    std::vector<Relation> golds = {Relation::before, Relation::after};
    std::vector<Relation> preds = {Relation::vague, Relation::vague};
    for (Relation c : matres_classes()) {
        ClassScores scores = per_class_f1(preds, golds, c);
        CHECK(scores.fp == 0);
        CHECK(scores.tp == 0);
    }
    ClassScores absent = per_class_f1(preds, golds, Relation::equal);
    CHECK(absent.absent_from_gold);
}

TEST_CASE("intra/inter slices recombine to the overall counts") {
    std::vector<Relation> golds, preds;
    std::vector<Scope> scopes;
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> pick(0, 2);
    auto classes = matres_classes();
    for (int i = 0; i < 100; ++i) {
        golds.push_back(classes[pick(rng)]);
        preds.push_back(classes[pick(rng)]);
        scopes.push_back(i % 5 < 2 ? Scope::intra : Scope::inter);
    }
    auto [intra, inter] = slice_intra_inter(preds, golds, scopes);
    CHECK(intra.n + inter.n == 100);
    CHECK(intra.n == 40);
    CHECK(intra.proportion == doctest::Approx(0.4));
    MicroOracle overall = micro_oracle(preds, golds, Scheme::matres);
    CHECK(intra.tp + inter.tp == overall.tp);

    EvalReport report = evaluate(preds, golds, scopes, Scheme::matres);
    CHECK(report.tp == overall.tp);
    CHECK(report.intra.tp + report.inter.tp == report.tp);
    CHECK(report.vague_rate == doctest::Approx(0.0));
}

TEST_CASE("empty slices are flagged instead of reported as zero") {
    std::vector<Relation> golds = {Relation::before};
    std::vector<Relation> preds = {Relation::before};
    auto [intra, inter] = slice_intra_inter(preds, golds, {Scope::intra});
    CHECK_FALSE(intra.empty);
    CHECK(inter.empty);
    CHECK(inter.n == 0);
}

TEST_CASE("aggregate_runs uses the population standard deviation") {
    // Hand-derived: micro-F1 values {0.4, 0.6}: mean 0.5, population std 0.1.
    EvalReport a, b;
    a.micro_f1 = 0.4;
    b.micro_f1 = 0.6;
    RunAggregate agg = aggregate_runs({{0, a}, {1, b}});
    CHECK(agg.mean_micro_f1 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(agg.std_micro_f1 == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_THROWS_AS(aggregate_runs({}), Error);
}

TEST_CASE("error_intersection reports pairs model a got wrong that b solved") {
    std::vector<Relation> golds = {Relation::before, Relation::after, Relation::equal,
                                   Relation::before};
    std::vector<Relation> a = {Relation::after, Relation::after, Relation::before,
                               Relation::vague};
    std::vector<Relation> b = {Relation::before, Relation::before, Relation::before,
                               Relation::before};
    std::vector<std::string> ids = {"p0", "p1", "p2", "p3"};
    ErrorIntersection out = error_intersection(a, b, golds, ids);
    // a errs on p0, p2, p3; b is right on p0 and p3.
    CHECK(out.pair_ids == std::vector<std::string>{"p0", "p3"});
    CHECK(out.fraction_of_a_errors == doctest::Approx(2.0 / 3.0));
    CHECK(out.fraction_of_test_set == doctest::Approx(0.5));
}

TEST_CASE("report renderings are deterministic") {
    std::vector<Relation> golds = {Relation::before, Relation::after, Relation::before};
    std::vector<Relation> preds = {Relation::before, Relation::vague, Relation::after};
    std::vector<Scope> scopes = {Scope::intra, Scope::inter, Scope::inter};
    EvalReport report = evaluate(preds, golds, scopes, Scheme::matres);
    for (ReportFormat fmt : {ReportFormat::json, ReportFormat::csv, ReportFormat::markdown})
        CHECK(emit_report(report, fmt) == emit_report(report, fmt));
    RunAggregate agg = aggregate_runs({{0, report}});
    std::string csv = emit_aggregate(agg, "mock", "p", ReportFormat::csv);
    CHECK(csv.find("mock,p,0,") != std::string::npos);
    CHECK(csv.find("mock,p,mean,") != std::string::npos);
    CHECK(csv.find("mock,p,std,") != std::string::npos);
    std::string md = emit_aggregate(agg, "mock", "p", ReportFormat::markdown);
    CHECK(md.find("| mock | p |") != std::string::npos);
}
