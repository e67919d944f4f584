#pragma once

#include <cstdint>
#include <string>

#include "trc/encoder.hpp"
#include "trc/prompting.hpp"

namespace trc {

struct BackendConfig {
    std::string type = "mock";  // mock | http
    std::string script;         // mock script path
    std::string url;
    std::string model;
    std::string auth_env = "TRC_API_KEY";
    std::size_t max_context_chars = std::size_t(1) << 20;
    RetryPolicy retry;
};

struct ProviderConfig {
    std::string type = "stub";
    int width = 16;
    std::uint64_t seed = 1;
    bool trainable = true;
    bool adapter = true;
};

struct AttributionConfig {
    int n_samples = 2048;
    int k = 5;
    std::uint64_t seed = 7;
    std::string model = "encoder";  // encoder | last_token | random_linear
    std::string checkpoint;         // defaults to <out>/checkpoint.json
};

struct RunConfig {
    std::string corpus_path;
    Scheme scheme = Scheme::matres;
    Protocol protocol = Protocol::P;
    BackendConfig backend;
    int n_sets = 5;
    std::uint64_t fewshot_seed = 13;
    TrainConfig train;
    ProviderConfig provider;
    AttributionConfig attribution;
    std::string out_dir;
    int parallelism = 1;
    int max_new_tokens_p = 8;
    int max_new_tokens_qa = 4;
    std::string config_json;  // canonical dump, hashed into every output
};

RunConfig parse_run_config(const std::string& json_text);
std::uint64_t config_hash(const RunConfig& cfg);

// Each command writes its artifacts under cfg.out_dir and returns a summary
// JSON string. Failures throw Error; the kind maps to the exit code.
std::string cmd_ingest(const RunConfig& cfg);
std::string cmd_run(const RunConfig& cfg);
std::string cmd_train(const RunConfig& cfg);
std::string cmd_predict(const RunConfig& cfg);
std::string cmd_attribute(const RunConfig& cfg);

}  // namespace trc
