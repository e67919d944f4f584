/* C API of the TRC harness shared library.
 *
 * Every function returns a trc_status; out-parameters are heap strings owned
 * by the library and released with trc_string_free(). Status values map 1:1
 * onto the CLI exit codes.
 */
#ifndef TRC_C_H
#define TRC_C_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum trc_status {
    TRC_OK = 0,
    TRC_ERR_INPUT = 2,      /* schema/config/validation errors */
    TRC_ERR_BACKEND = 3,    /* backend unreachable after retries */
    TRC_ERR_CAPABILITY = 4, /* requested capability not supported */
    TRC_ERR_INTERNAL = 5
} trc_status;

typedef struct trc_corpus trc_corpus;

const char* trc_version(void);

/* Releases any string returned through an out-parameter. NULL is a no-op. */
void trc_string_free(char* s);

/* Parses the canonical JSONL corpus format. scheme is "matres" or "tbdense".
 * On success *out owns the corpus; release with trc_corpus_free(). On failure
 * *err (if non-NULL) carries the diagnostic. */
trc_status trc_corpus_parse(const char* path, const char* scheme, trc_corpus** out, char** err);

void trc_corpus_free(trc_corpus* corpus);

/* Corpus statistics as a JSON document. */
trc_status trc_corpus_stats(const trc_corpus* corpus, char** json_out, char** err);

/* Command entry points. config_json follows the run-config schema (see the
 * README); each writes artifacts under the configured output directory and
 * returns a summary JSON document. */
trc_status trc_cmd_ingest(const char* config_json, char** result_json, char** err);
trc_status trc_cmd_run(const char* config_json, char** result_json, char** err);
trc_status trc_cmd_train(const char* config_json, char** result_json, char** err);
trc_status trc_cmd_predict(const char* config_json, char** result_json, char** err);
trc_status trc_cmd_attribute(const char* config_json, char** result_json, char** err);

#ifdef __cplusplus
}
#endif

#endif /* TRC_C_H */
