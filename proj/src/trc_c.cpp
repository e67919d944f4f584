#include "trc/trc_c.h"

#include <cstring>
#include <memory>
#include <string>

#include "json.hpp"

#include "trc/corpus.hpp"
#include "trc/runner.hpp"
#include "trc/util.hpp"

namespace {

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void set_err(char** err, const std::string& msg) {
    if (err) *err = dup_string(msg);
}

trc_status status_of(const trc::Error& e) {
    switch (e.kind()) {
        case trc::ErrorKind::input: return TRC_ERR_INPUT;
        case trc::ErrorKind::backend: return TRC_ERR_BACKEND;
        case trc::ErrorKind::capability: return TRC_ERR_CAPABILITY;
        case trc::ErrorKind::internal: return TRC_ERR_INTERNAL;
    }
    return TRC_ERR_INTERNAL;
}

template <typename Fn>
trc_status guarded(char** err, Fn&& fn) {
    try {
        fn();
        return TRC_OK;
    } catch (const trc::Error& e) {
        set_err(err, e.what());
        return status_of(e);
    } catch (const std::exception& e) {
        set_err(err, e.what());
        return TRC_ERR_INTERNAL;
    }
}

using Command = std::string (*)(const trc::RunConfig&);

trc_status run_command(Command command, const char* config_json, char** result_json, char** err) {
    if (!config_json) {
        set_err(err, "config_json is NULL");
        return TRC_ERR_INPUT;
    }
    return guarded(err, [&] {
        trc::RunConfig cfg = trc::parse_run_config(config_json);
        std::string result = command(cfg);
        if (result_json) *result_json = dup_string(result);
    });
}

}  // namespace

struct trc_corpus {
    trc::Corpus corpus;
};

extern "C" {

const char* trc_version(void) { return "0.1.0"; }

void trc_string_free(char* s) { delete[] s; }

trc_status trc_corpus_parse(const char* path, const char* scheme, trc_corpus** out, char** err) {
    if (!path || !scheme || !out) {
        set_err(err, "path, scheme and out must be non-NULL");
        return TRC_ERR_INPUT;
    }
    return guarded(err, [&] {
        auto parsed_scheme = trc::parse_scheme(scheme);
        if (!parsed_scheme) trc::fail_input(std::string("unknown scheme: ") + scheme);
        auto handle = std::make_unique<trc_corpus>();
        handle->corpus = trc::parse_corpus(path, *parsed_scheme);
        *out = handle.release();
    });
}

void trc_corpus_free(trc_corpus* corpus) { delete corpus; }

trc_status trc_corpus_stats(const trc_corpus* corpus, char** json_out, char** err) {
    if (!corpus || !json_out) {
        set_err(err, "corpus and json_out must be non-NULL");
        return TRC_ERR_INPUT;
    }
    return guarded(err, [&] {
        trc::CorpusStats stats = trc::compute_stats(corpus->corpus);
        nlohmann::json out = {{"n_pairs", stats.n_pairs},
                              {"n_documents", stats.n_documents},
                              {"dropped_vague", stats.dropped_vague},
                              {"splits", stats.split_counts},
                              {"label_proportions", stats.label_proportions},
                              {"intra_proportion", stats.intra_proportion},
                              {"inter_proportion", stats.inter_proportion}};
        *json_out = dup_string(out.dump(2) + "\n");
    });
}

trc_status trc_cmd_ingest(const char* config_json, char** result_json, char** err) {
    return run_command(trc::cmd_ingest, config_json, result_json, err);
}

trc_status trc_cmd_run(const char* config_json, char** result_json, char** err) {
    return run_command(trc::cmd_run, config_json, result_json, err);
}

trc_status trc_cmd_train(const char* config_json, char** result_json, char** err) {
    return run_command(trc::cmd_train, config_json, result_json, err);
}

trc_status trc_cmd_predict(const char* config_json, char** result_json, char** err) {
    return run_command(trc::cmd_predict, config_json, result_json, err);
}

trc_status trc_cmd_attribute(const char* config_json, char** result_json, char** err) {
    return run_command(trc::cmd_attribute, config_json, result_json, err);
}

}  // extern "C"
