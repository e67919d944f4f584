#include "trc/prompting.hpp"

#include <random>

#include "json.hpp"
#include "trc/util.hpp"

namespace trc {

using nlohmann::json;

std::string protocol_name(Protocol p) {
    switch (p) {
        case Protocol::P: return "p";
        case Protocol::QA1: return "qa1";
        case Protocol::QA2: return "qa2";
    }
    fail_internal("bad Protocol value");
}

std::optional<Protocol> parse_protocol(std::string_view name) {
    std::string n = lowercase(name);
    if (n == "p") return Protocol::P;
    if (n == "qa1") return Protocol::QA1;
    if (n == "qa2") return Protocol::QA2;
    return std::nullopt;
}

std::string question_for(Relation r, const std::string& e1_tagged, const std::string& e2_tagged) {
    switch (r) {
        case Relation::before:
            return "Does " + e1_tagged + " happen before " + e2_tagged + "?";
        case Relation::after:
            return "Does " + e1_tagged + " happen after " + e2_tagged + "?";
        case Relation::equal:
            return "Does " + e1_tagged + " happen at the same time as " + e2_tagged + "?";
        case Relation::includes:
            return "Does " + e1_tagged + " temporally include " + e2_tagged + "?";
        case Relation::is_included:
            return "Is " + e1_tagged + " temporally included in " + e2_tagged + "?";
        case Relation::vague:
            fail_input("no question is defined for vague");
    }
    fail_internal("bad Relation value");
}

std::vector<FewShotSet> sample_fewshot_sets(const Corpus& corpus, int n_sets, std::uint64_t seed) {
    const auto& classes = scheme_relations(corpus.scheme);
    std::map<Relation, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
        if (corpus.pairs[i].split == Split::train) by_class[corpus.pairs[i].gold].push_back(i);
    }
    for (Relation r : classes) {
        if (by_class[r].empty())
            fail_input("training split has no example of class " + relation_name(r));
    }

    std::vector<FewShotSet> sets;
    for (int k = 0; k < n_sets; ++k) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(k)};
        std::mt19937_64 rng(seq);
        FewShotSet set;
        set.set_id = k;
        set.seed = seed;
        for (Relation r : classes) {
            const auto& pool = by_class[r];
            std::uniform_int_distribution<std::size_t> dist(0, pool.size() - 1);
            set.example_pairs.push_back(pool[dist(rng)]);
        }
        sets.push_back(std::move(set));
    }
    return sets;
}

std::string fewshot_sets_to_json(const std::vector<FewShotSet>& sets, const Corpus& corpus) {
    json out;
    out["sets"] = json::array();
    for (const auto& set : sets) {
        json examples = json::array();
        for (std::size_t idx : set.example_pairs) examples.push_back(corpus.pairs[idx].pair_id());
        out["sets"].push_back(
            {{"set_id", set.set_id}, {"seed", set.seed}, {"examples", std::move(examples)}});
    }
    return out.dump(2) + "\n";
}

std::vector<FewShotSet> fewshot_sets_from_json(const std::string& text, const Corpus& corpus) {
    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < corpus.pairs.size(); ++i) by_id[corpus.pairs[i].pair_id()] = i;

    json doc = json::parse(text);
    std::vector<FewShotSet> sets;
    for (const auto& rec : doc.at("sets")) {
        FewShotSet set;
        set.set_id = rec.at("set_id").get<int>();
        set.seed = rec.at("seed").get<std::uint64_t>();
        for (const auto& id : rec.at("examples")) {
            auto it = by_id.find(id.get<std::string>());
            if (it == by_id.end())
                fail_input("few-shot example pair not found in corpus: " + id.get<std::string>());
            set.example_pairs.push_back(it->second);
        }
        sets.push_back(std::move(set));
    }
    return sets;
}

namespace {

constexpr const char* kContextPrefix = "Given the context: ";
constexpr const char* kBlockSeparator = "\n\n";

std::string p_block(const Corpus& corpus, const EventPair& pair, bool with_label) {
    ContextWindow ctx = build_context(pair, corpus);
    std::string block = std::string(kContextPrefix) + tag_events(ctx) + " ->";
    if (with_label) block += " " + relation_label(pair.gold);
    return block;
}

std::string qa1_block(const Corpus& corpus, const EventPair& pair, Relation question_class,
                      const std::string* answer) {
    ContextWindow ctx = build_context(pair, corpus);
    std::string block = std::string(kContextPrefix) + tag_events(ctx) + " Answer the question: " +
                        question_for(question_class, tagged_event(ctx, true), tagged_event(ctx, false)) +
                        " ";
    if (answer) block += *answer;
    return block;
}

// Complete QA2 transcript for a few-shot example: all questions in the fixed
// order with gold YES/NO answers.
std::string qa2_example_block(const Corpus& corpus, const EventPair& pair) {
    ContextWindow ctx = build_context(pair, corpus);
    std::string e1 = tagged_event(ctx, true);
    std::string e2 = tagged_event(ctx, false);
    std::string block = std::string(kContextPrefix) + tag_events(ctx) + " Answer the questions:";
    for (Relation q : question_order(corpus.scheme)) {
        block += " " + question_for(q, e1, e2) + " " + (pair.gold == q ? "YES" : "NO");
    }
    return block;
}

}  // namespace

PromptInstance render_p(const Corpus& corpus, const EventPair& pair, const FewShotSet* fewshot) {
    PromptInstance prompt;
    prompt.protocol = Protocol::P;
    prompt.pair_id = pair.pair_id();
    std::string text;
    if (fewshot) {
        for (std::size_t idx : fewshot->example_pairs)
            text += p_block(corpus, corpus.pairs[idx], true) + kBlockSeparator;
    }
    prompt.target_offset = text.size();
    text += p_block(corpus, pair, false);
    prompt.text = std::move(text);
    return prompt;
}

PromptInstance render_qa1(const Corpus& corpus, const EventPair& pair, Relation r,
                          const FewShotSet* fewshot) {
    if (r == Relation::vague) fail_input("qa1 prompt requested for vague");
    PromptInstance prompt;
    prompt.protocol = Protocol::QA1;
    prompt.pair_id = pair.pair_id();
    prompt.question_order = {r};
    std::string text;
    if (fewshot) {
        for (std::size_t idx : fewshot->example_pairs) {
            const EventPair& ex = corpus.pairs[idx];
            std::string answer = ex.gold == r ? "YES" : "NO";
            text += qa1_block(corpus, ex, r, &answer) + kBlockSeparator;
        }
    }
    prompt.target_offset = text.size();
    text += qa1_block(corpus, pair, r, nullptr);
    prompt.text = std::move(text);
    return prompt;
}

PromptInstance render_qa2(const Corpus& corpus, const EventPair& pair,
                          const std::vector<std::pair<std::string, std::string>>& answered,
                          const FewShotSet* fewshot) {
    const auto& order = question_order(corpus.scheme);
    if (answered.size() >= order.size())
        fail_input("qa2 history already covers every question");

    PromptInstance prompt;
    prompt.protocol = Protocol::QA2;
    prompt.pair_id = pair.pair_id();
    prompt.question_order = order;

    std::string text;
    if (fewshot) {
        for (std::size_t idx : fewshot->example_pairs)
            text += qa2_example_block(corpus, corpus.pairs[idx]) + kBlockSeparator;
    }
    prompt.target_offset = text.size();

    ContextWindow ctx = build_context(pair, corpus);
    std::string e1 = tagged_event(ctx, true);
    std::string e2 = tagged_event(ctx, false);
    text += std::string(kContextPrefix) + tag_events(ctx) + " Answer the questions:";
    for (const auto& [question, answer] : answered) text += " " + question + " " + answer;
    text += " " + question_for(order[answered.size()], e1, e2) + " ";
    prompt.text = std::move(text);
    return prompt;
}

}  // namespace trc
