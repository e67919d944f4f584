// Operator CLI. Links only the C API of the shared library; all pipeline
// logic stays behind trc_c.h.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "trc/trc_c.h"

using nlohmann::json;

namespace {

struct Flags {
    std::string config_file;
    std::string corpus;
    std::string scheme;
    std::string protocol;
    std::string backend;
    std::string mock_script;
    std::string backend_url;
    std::string backend_model;
    int sets = -1;
    long long seed = -1;
    std::string mode;
    int k = -1;
    int samples = -1;
    std::string attribution_model;
    std::string out;
    int parallelism = -1;
    int epochs = -1;
};

void add_common_flags(CLI::App* cmd, Flags& flags) {
    cmd->add_option("--config", flags.config_file, "JSON config file; flags override its fields");
    cmd->add_option("--corpus", flags.corpus, "Corpus JSONL path");
    cmd->add_option("--scheme", flags.scheme, "Corpus scheme: matres or tbdense");
    cmd->add_option("--out", flags.out, "Output directory");
    cmd->add_option("--seed", flags.seed, "Few-shot sampling seed");
}

json build_config(const Flags& flags) {
    json cfg = json::object();
    if (!flags.config_file.empty()) {
        std::ifstream in(flags.config_file);
        if (!in) {
            std::fprintf(stderr, "error: cannot open config file %s\n", flags.config_file.c_str());
            std::exit(TRC_ERR_INPUT);
        }
        std::stringstream buf;
        buf << in.rdbuf();
        try {
            cfg = json::parse(buf.str());
        } catch (const json::parse_error& e) {
            std::fprintf(stderr, "error: malformed config file: %s\n", e.what());
            std::exit(TRC_ERR_INPUT);
        }
    }
    if (!flags.corpus.empty()) cfg["corpus"] = flags.corpus;
    if (!flags.scheme.empty()) cfg["scheme"] = flags.scheme;
    if (!flags.protocol.empty()) cfg["protocol"] = flags.protocol;
    if (!flags.out.empty()) cfg["out"] = flags.out;
    if (!flags.backend.empty()) cfg["backend"]["type"] = flags.backend;
    if (!flags.mock_script.empty()) {
        cfg["backend"]["type"] = "mock";
        cfg["backend"]["script"] = flags.mock_script;
    }
    if (!flags.backend_url.empty()) {
        cfg["backend"]["type"] = "http";
        cfg["backend"]["url"] = flags.backend_url;
    }
    if (!flags.backend_model.empty()) cfg["backend"]["model"] = flags.backend_model;
    if (flags.sets >= 0) cfg["fewshot"]["n_sets"] = flags.sets;
    if (flags.seed >= 0) cfg["fewshot"]["seed"] = flags.seed;
    if (!flags.mode.empty()) cfg["train"]["mode"] = flags.mode;
    if (flags.epochs >= 0) cfg["train"]["epochs"] = flags.epochs;
    if (flags.k >= 0) cfg["attribution"]["k"] = flags.k;
    if (flags.samples >= 0) cfg["attribution"]["n_samples"] = flags.samples;
    if (!flags.attribution_model.empty()) cfg["attribution"]["model"] = flags.attribution_model;
    if (flags.parallelism >= 0) cfg["parallelism"] = flags.parallelism;
    return cfg;
}

using Command = trc_status (*)(const char*, char**, char**);

int dispatch(Command command, const Flags& flags) {
    std::string config = build_config(flags).dump();
    char* result = nullptr;
    char* err = nullptr;
    trc_status status = command(config.c_str(), &result, &err);
    if (status == TRC_OK) {
        if (result) std::fputs(result, stdout);
    } else {
        std::fprintf(stderr, "error: %s\n", err ? err : "unknown failure");
    }
    trc_string_free(result);
    trc_string_free(err);
    return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal relation classification harness"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(trc_version()));

    Flags flags;

    CLI::App* ingest = app.add_subcommand("ingest", "Parse and validate a corpus, write stats");
    add_common_flags(ingest, flags);

    CLI::App* run = app.add_subcommand("run", "Run a prompt protocol over the test split");
    add_common_flags(run, flags);
    run->add_option("--protocol", flags.protocol, "Prompt protocol: p, qa1 or qa2");
    run->add_option("--backend", flags.backend, "Backend type: mock or http");
    run->add_option("--mock-script", flags.mock_script, "Mock backend script file");
    run->add_option("--backend-url", flags.backend_url, "HTTP backend endpoint URL");
    run->add_option("--model", flags.backend_model, "HTTP backend model name");
    run->add_option("--sets", flags.sets, "Number of frozen few-shot sets");
    run->add_option("--parallelism", flags.parallelism, "Concurrent request bound");

    CLI::App* train = app.add_subcommand("train", "Train the event-pair classifier head");
    add_common_flags(train, flags);
    train->add_option("--mode", flags.mode, "Training mode: frozen, full or adapter");
    train->add_option("--epochs", flags.epochs, "Training epochs");

    CLI::App* predict = app.add_subcommand("predict", "Predict the test split from a checkpoint");
    add_common_flags(predict, flags);

    CLI::App* attribute = app.add_subcommand("attribute", "KernelShap token attribution");
    add_common_flags(attribute, flags);
    attribute->add_option("--k", flags.k, "Top-k tokens per instance (default 5)");
    attribute->add_option("--samples", flags.samples, "Coalition sample budget");
    attribute->add_option("--model", flags.attribution_model,
                          "Attribution model: encoder, last_token or random_linear");
    attribute->add_option("--sets", flags.sets, "Few-shot sets for prompt-level models");

    CLI11_PARSE(app, argc, argv);

    if (ingest->parsed()) return dispatch(trc_cmd_ingest, flags);
    if (run->parsed()) return dispatch(trc_cmd_run, flags);
    if (train->parsed()) return dispatch(trc_cmd_train, flags);
    if (predict->parsed()) return dispatch(trc_cmd_predict, flags);
    if (attribute->parsed()) return dispatch(trc_cmd_attribute, flags);
    return 0;
}
