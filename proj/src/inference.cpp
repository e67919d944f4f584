#include "trc/inference.hpp"

#include <atomic>
#include <cctype>
#include <thread>

#include "trc/util.hpp"

namespace trc {

std::string yesno_name(YesNo a) {
    switch (a) {
        case YesNo::yes: return "yes";
        case YesNo::no: return "no";
        case YesNo::unparseable: return "unparseable";
    }
    fail_internal("bad YesNo value");
}

Relation parse_label(const std::string& text, Scheme scheme) {
    std::string line = text.substr(0, text.find('\n'));
    std::string low = lowercase(line);

    std::size_t best_pos = std::string::npos;
    std::size_t best_len = 0;
    Relation best = Relation::vague;
    for (Relation r : scheme_relations(scheme)) {
        std::string underscore = relation_name(r);
        std::string spaced = underscore;
        for (char& c : spaced)
            if (c == '_') c = ' ';
        for (const std::string& alias : {underscore, spaced}) {
            std::size_t pos = low.find(alias);
            if (pos == std::string::npos) continue;
            if (pos < best_pos || (pos == best_pos && alias.size() > best_len)) {
                best_pos = pos;
                best_len = alias.size();
                best = r;
            }
        }
    }
    return best;
}

YesNo parse_yesno(const std::string& text) {
    std::size_t i = 0;
    while (i < text.size() && !std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
    std::string token;
    while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i])))
        token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i++]))));
    if (token == "yes") return YesNo::yes;
    if (token == "no") return YesNo::no;
    return YesNo::unparseable;
}

Relation aggregate_qa(const std::map<Relation, YesNo>& answers, Scheme scheme, bool* contradiction,
                      bool* unparseable) {
    int n_yes = 0;
    bool any_unparseable = false;
    Relation yes_relation = Relation::vague;
    for (Relation r : scheme_relations(scheme)) {
        auto it = answers.find(r);
        if (it == answers.end())
            fail_input("aggregate_qa: missing answer for relation " + relation_name(r));
        if (it->second == YesNo::yes) {
            ++n_yes;
            yes_relation = r;
        } else if (it->second == YesNo::unparseable) {
            any_unparseable = true;
        }
    }
    if (contradiction) *contradiction = n_yes > 1;
    if (unparseable) *unparseable = any_unparseable;
    if (n_yes == 1 && !any_unparseable) return yes_relation;
    return Relation::vague;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

Prediction run_protocol(GenerationBackend& backend, const Corpus& corpus, const EventPair& pair,
                        Protocol protocol, const FewShotSet* fewshot,
                        const InferenceOptions& options, Transcript* transcript) {
    Prediction pred;
    pred.pair_id = pair.pair_id();
    pred.protocol = protocol;
    pred.set_id = fewshot ? fewshot->set_id : -1;
    Transcript local;
    Transcript& ts = transcript ? *transcript : local;
    ts.pair_id = pred.pair_id;
    ts.protocol = protocol;
    ts.set_id = pred.set_id;

    if (protocol == Protocol::P) {
        PromptInstance prompt = render_p(corpus, pair, fewshot);
        std::string raw = generate(backend, prompt.text, options.max_new_tokens_p, options.retry);
        ts.prompts.push_back(prompt.text);
        ts.generations.push_back(raw);
        pred.predicted = parse_label(raw, corpus.scheme);
        return pred;
    }

    std::map<Relation, YesNo> answers;
    if (protocol == Protocol::QA1) {
        for (Relation r : question_order(corpus.scheme)) {
            PromptInstance prompt = render_qa1(corpus, pair, r, fewshot);
            std::string raw =
                generate(backend, prompt.text, options.max_new_tokens_qa, options.retry);
            ts.prompts.push_back(prompt.text);
            ts.generations.push_back(raw);
            YesNo answer = parse_yesno(raw);
            answers[r] = answer;
            ts.parsed_answers[relation_name(r)] = yesno_name(answer);
        }
    } else {
        // QA2: strictly serial; each parsed answer joins the next prompt.
        ContextWindow ctx = build_context(pair, corpus);
        std::string e1 = tagged_event(ctx, true);
        std::string e2 = tagged_event(ctx, false);
        std::vector<std::pair<std::string, std::string>> history;
        for (Relation r : question_order(corpus.scheme)) {
            PromptInstance prompt = render_qa2(corpus, pair, history, fewshot);
            std::string raw =
                generate(backend, prompt.text, options.max_new_tokens_qa, options.retry);
            ts.prompts.push_back(prompt.text);
            ts.generations.push_back(raw);
            YesNo answer = parse_yesno(raw);
            answers[r] = answer;
            ts.parsed_answers[relation_name(r)] = yesno_name(answer);
            std::string rendered;
            switch (answer) {
                case YesNo::yes: rendered = "YES"; break;
                case YesNo::no: rendered = "NO"; break;
                case YesNo::unparseable: rendered = trim(raw); break;
            }
            history.emplace_back(question_for(r, e1, e2), rendered);
        }
    }
    pred.predicted = aggregate_qa(answers, corpus.scheme, &pred.contradiction, &pred.unparseable);
    return pred;
}

BatchResult run_batch(GenerationBackend& backend, const Corpus& corpus,
                      const std::vector<std::size_t>& pair_indices, Protocol protocol,
                      const std::vector<FewShotSet>& fewshot_sets,
                      const InferenceOptions& options) {
    if (fewshot_sets.empty()) fail_input("run_batch requires at least one few-shot set");

    struct Task {
        const FewShotSet* set;
        std::size_t pair_index;
    };
    std::vector<Task> tasks;
    for (const auto& set : fewshot_sets)
        for (std::size_t p : pair_indices) tasks.push_back({&set, p});

    struct Slot {
        bool ok = false;
        Prediction prediction;
        Transcript transcript;
        std::string cause;
    };
    std::vector<Slot> slots(tasks.size());

    auto worker_body = [&](std::size_t i) {
        const Task& task = tasks[i];
        const EventPair& pair = corpus.pairs[task.pair_index];
        Slot& slot = slots[i];
        try {
            slot.prediction = run_protocol(backend, corpus, pair, protocol, task.set, options,
                                           &slot.transcript);
            slot.ok = true;
        } catch (const std::exception& e) {
            slot.prediction.pair_id = pair.pair_id();
            slot.prediction.set_id = task.set->set_id;
            slot.cause = e.what();
        }
    };

    int workers = std::max(1, options.parallelism);
    if (workers == 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) worker_body(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1))
                    worker_body(i);
            });
        }
        for (auto& t : pool) t.join();
    }

    BatchResult result;
    std::size_t n_contra = 0;
    std::size_t n_unparseable = 0;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        Slot& slot = slots[i];
        if (!slot.ok) {
            result.failures.push_back(
                {slot.prediction.pair_id, tasks[i].set->set_id, slot.cause});
            continue;
        }
        if (slot.prediction.contradiction) ++n_contra;
        if (slot.prediction.unparseable) ++n_unparseable;
        result.by_set[slot.prediction.set_id].push_back(slot.prediction);
        result.predictions.push_back(std::move(slot.prediction));
        result.transcripts.push_back(std::move(slot.transcript));
    }
    if (!result.predictions.empty()) {
        double n = static_cast<double>(result.predictions.size());
        result.contradiction_rate = static_cast<double>(n_contra) / n;
        result.unparseable_rate = static_cast<double>(n_unparseable) / n;
    }
    return result;
}

}  // namespace trc
