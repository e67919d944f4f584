#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "trc/corpus.hpp"

namespace trc {

enum class Protocol { P, QA1, QA2 };

std::string protocol_name(Protocol p);
std::optional<Protocol> parse_protocol(std::string_view name);

// One frozen few-shot sample: one training pair per non-vague class.
struct FewShotSet {
    int set_id = 0;
    std::uint64_t seed = 0;
    // Pair indices into Corpus::pairs, in scheme relation order.
    std::vector<std::size_t> example_pairs;
};

struct PromptInstance {
    Protocol protocol = Protocol::P;
    std::string text;
    // Character index where the target sequence begins (end of few-shot context).
    std::size_t target_offset = 0;
    std::vector<Relation> question_order;
    std::string pair_id;
};

// Fixed yes/no question template for r with pre-tagged event surfaces
// substituted.
std::string question_for(Relation r, const std::string& e1_tagged, const std::string& e2_tagged);

// Samples n_sets frozen few-shot sets from the training split, one uniform
// example per class. Deterministic given seed.
std::vector<FewShotSet> sample_fewshot_sets(const Corpus& corpus, int n_sets, std::uint64_t seed);

std::string fewshot_sets_to_json(const std::vector<FewShotSet>& sets, const Corpus& corpus);
std::vector<FewShotSet> fewshot_sets_from_json(const std::string& text, const Corpus& corpus);

// Example-label prompt: "Given the context: <tagged> -> LABEL" blocks, then the
// target block ending with " ->". Pass nullptr for zero-shot.
PromptInstance render_p(const Corpus& corpus, const EventPair& pair, const FewShotSet* fewshot);

// One yes/no question prompt for relation r. Few-shot blocks carry the same
// question class about their own events with the gold YES/NO answer.
PromptInstance render_qa1(const Corpus& corpus, const EventPair& pair, Relation r,
                          const FewShotSet* fewshot);

// Sequential-questions prompt. `answered` holds prior (question, answer) pairs
// verbatim; the next question in the fixed order is appended.
PromptInstance render_qa2(const Corpus& corpus, const EventPair& pair,
                          const std::vector<std::pair<std::string, std::string>>& answered,
                          const FewShotSet* fewshot);

}  // namespace trc
