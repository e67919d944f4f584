#include <string>

#include "doctest.h"
#include "json.hpp"
#include "test_helpers.hpp"
#include "trc/trc_c.h"

using nlohmann::json;
using namespace trc::testing;

namespace {

const std::string kMini = std::string(TRC_TEST_DATA_DIR) + "/data/mini_matres.jsonl";

struct Owned {
    char* s = nullptr;
    ~Owned() { trc_string_free(s); }
};

}  // namespace

TEST_CASE("status values match the documented exit codes") {
    CHECK(TRC_OK == 0);
    CHECK(TRC_ERR_INPUT == 2);
    CHECK(TRC_ERR_BACKEND == 3);
    CHECK(TRC_ERR_CAPABILITY == 4);
    CHECK(TRC_ERR_INTERNAL == 5);
    CHECK(std::string(trc_version()) == "0.1.0");
    trc_string_free(nullptr);  // must be a no-op
}

TEST_CASE("corpus handle: parse, stats, free") {
    trc_corpus* corpus = nullptr;
    Owned err;
    REQUIRE(trc_corpus_parse(kMini.c_str(), "matres", &corpus, &err.s) == TRC_OK);
    REQUIRE(corpus != nullptr);

    Owned stats;
    REQUIRE(trc_corpus_stats(corpus, &stats.s, &err.s) == TRC_OK);
    json doc = json::parse(stats.s);
    CHECK(doc["n_pairs"] == 5);
    CHECK(doc["dropped_vague"] == 1);
    CHECK(doc["splits"]["test"] == 1);
    trc_corpus_free(corpus);
    trc_corpus_free(nullptr);
}

TEST_CASE("corpus parse failures carry a diagnostic and an input status") {
    trc_corpus* corpus = nullptr;
    Owned err;
    CHECK(trc_corpus_parse("/nonexistent.jsonl", "matres", &corpus, &err.s) == TRC_ERR_INPUT);
    CHECK(err.s != nullptr);
    Owned err2;
    CHECK(trc_corpus_parse(kMini.c_str(), "banana", &corpus, &err2.s) == TRC_ERR_INPUT);
    CHECK(std::string(err2.s).find("banana") != std::string::npos);
    CHECK(trc_corpus_parse(nullptr, "matres", &corpus, nullptr) == TRC_ERR_INPUT);
}

TEST_CASE("cmd_ingest through the C surface") {
    auto out_dir = temp_dir("capi_ingest");
    json cfg = {{"corpus", kMini}, {"scheme", "matres"}, {"out", out_dir.string()}};
    Owned result, err;
    REQUIRE(trc_cmd_ingest(cfg.dump().c_str(), &result.s, &err.s) == TRC_OK);
    json doc = json::parse(result.s);
    CHECK(doc["stats"]["n_pairs"] == 5);
    CHECK(doc["scheme"] == "matres");
    CHECK(std::filesystem::exists(out_dir / "stats.json"));
}

TEST_CASE("cmd_run with a mock backend produces reports") {
    auto out_dir = temp_dir("capi_run");
    auto script = write_temp("capi_run", "script.json", R"({"default":" AFTER"})");
    json cfg = {{"corpus", kMini},
                {"scheme", "matres"},
                {"protocol", "p"},
                {"backend", {{"type", "mock"}, {"script", script.string()}}},
                {"fewshot", {{"n_sets", 2}, {"seed", 13}}},
                {"out", out_dir.string()}};
    Owned result, err;
    REQUIRE(trc_cmd_run(cfg.dump().c_str(), &result.s, &err.s) == TRC_OK);
    json doc = json::parse(result.s);
    // Every test pair is gold AFTER and the mock always answers AFTER.
    CHECK(doc["aggregate"]["mean_micro_f1"] == doctest::Approx(1.0));
    CHECK(std::filesystem::exists(out_dir / "reports" / "report.json"));
    CHECK(std::filesystem::exists(out_dir / "predictions" / "predictions.jsonl"));
    CHECK(std::filesystem::exists(out_dir / "fewshot_sets.json"));
    CHECK(std::filesystem::exists(out_dir / "transcripts" / "p_set0.jsonl"));
}

TEST_CASE("cmd_train then cmd_predict through the C surface") {
    auto out_dir = temp_dir("capi_train");
    json cfg = {{"corpus", kMini},
                {"scheme", "matres"},
                {"train", {{"mode", "frozen"}, {"epochs", 2}}},
                {"provider", {{"width", 8}, {"seed", 1}}},
                {"out", out_dir.string()}};
    Owned result, err;
    REQUIRE(trc_cmd_train(cfg.dump().c_str(), &result.s, &err.s) == TRC_OK);
    json doc = json::parse(result.s);
    CHECK(doc["mode"] == "frozen");
    CHECK(doc["provider_state_changed"] == false);
    CHECK(std::filesystem::exists(out_dir / "checkpoint.json"));

    Owned pred_result, pred_err;
    REQUIRE(trc_cmd_predict(cfg.dump().c_str(), &pred_result.s, &pred_err.s) == TRC_OK);
    json pred = json::parse(pred_result.s);
    CHECK(pred["n"] == 1);
}

TEST_CASE("capability misuse maps to TRC_ERR_CAPABILITY") {
    auto out_dir = temp_dir("capi_cap");
    json cfg = {{"corpus", kMini},
                {"scheme", "matres"},
                {"train", {{"mode", "full"}, {"epochs", 1}}},
                {"provider", {{"width", 8}, {"trainable", false}, {"adapter", false}}},
                {"out", out_dir.string()}};
    Owned result, err;
    CHECK(trc_cmd_train(cfg.dump().c_str(), &result.s, &err.s) == TRC_ERR_CAPABILITY);
    CHECK(err.s != nullptr);
}

TEST_CASE("malformed config json maps to TRC_ERR_INPUT") {
    Owned result, err;
    CHECK(trc_cmd_ingest("{broken", &result.s, &err.s) == TRC_ERR_INPUT);
    CHECK(trc_cmd_ingest(nullptr, &result.s, &err.s) == TRC_ERR_INPUT);
}

TEST_CASE("cmd_attribute over prompt-level scripted models") {
    auto out_dir = temp_dir("capi_attr");
    json cfg = {{"corpus", kMini},
                {"scheme", "matres"},
                {"attribution",
                 {{"model", "last_token"}, {"k", 5}, {"n_samples", 2048}, {"seed", 7}}},
                {"fewshot", {{"n_sets", 1}, {"seed", 13}}},
                {"out", out_dir.string()}};
    Owned result, err;
    REQUIRE(trc_cmd_attribute(cfg.dump().c_str(), &result.s, &err.s) == TRC_OK);
    json doc = json::parse(result.s);
    // The model only reacts to the final target token: median position 1.0.
    CHECK(doc["median_position"] == doctest::Approx(1.0));
    CHECK(std::filesystem::exists(out_dir / "attributions" / "attributions.jsonl"));
    CHECK(std::filesystem::exists(out_dir / "attributions" / "positions.csv"));
    CHECK(std::filesystem::exists(out_dir / "attributions" / "summary.json"));
}
