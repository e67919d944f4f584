#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trc/backend.hpp"
#include "trc/prompting.hpp"

namespace trc {

enum class YesNo { yes, no, unparseable };

std::string yesno_name(YesNo a);

struct Transcript {
    std::string pair_id;
    Protocol protocol = Protocol::P;
    int set_id = -1;
    std::vector<std::string> prompts;
    std::vector<std::string> generations;  // one per issued request, in order
    std::map<std::string, std::string> parsed_answers;  // relation name -> yes/no/unparseable
};

struct Prediction {
    std::string pair_id;
    Protocol protocol = Protocol::P;
    Relation predicted = Relation::vague;  // vague is the catch-all bucket
    int set_id = -1;
    bool contradiction = false;  // more than one yes under a QA protocol
    bool unparseable = false;    // at least one answer was unparseable
};

struct FailureRecord {
    std::string pair_id;
    int set_id = -1;
    std::string cause;
};

struct BatchResult {
    std::vector<Prediction> predictions;          // all sets, set-major order
    std::vector<Transcript> transcripts;
    std::vector<FailureRecord> failures;
    std::map<int, std::vector<Prediction>> by_set;
    double contradiction_rate = 0.0;
    double unparseable_rate = 0.0;
};

struct InferenceOptions {
    int max_new_tokens_p = 8;
    int max_new_tokens_qa = 4;
    RetryPolicy retry;
    int parallelism = 1;
};

// Case-insensitive scan of the first generated line for the earliest scheme
// label (underscore/space aliases accepted); no match falls to vague.
Relation parse_label(const std::string& text, Scheme scheme);

// Leading token after stripping punctuation/whitespace, matched against
// yes/no case-insensitively.
YesNo parse_yesno(const std::string& text);

// Exactly one yes with every answer parseable -> that relation; anything
// else (zero yes, multiple yes, unparseable) -> vague.
Relation aggregate_qa(const std::map<Relation, YesNo>& answers, Scheme scheme,
                      bool* contradiction = nullptr, bool* unparseable = nullptr);

Prediction run_protocol(GenerationBackend& backend, const Corpus& corpus, const EventPair& pair,
                        Protocol protocol, const FewShotSet* fewshot,
                        const InferenceOptions& options = {}, Transcript* transcript = nullptr);

BatchResult run_batch(GenerationBackend& backend, const Corpus& corpus,
                      const std::vector<std::size_t>& pair_indices, Protocol protocol,
                      const std::vector<FewShotSet>& fewshot_sets,
                      const InferenceOptions& options = {});

}  // namespace trc
